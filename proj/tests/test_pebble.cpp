/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <random>
#include <sstream>

#include "confluxlab/bounds.hpp"
#include "confluxlab/cdag.hpp"
#include "confluxlab/error.hpp"
#include "confluxlab/pebble.hpp"
#include "testing.hpp"

using namespace confluxlab;
using namespace confluxlab::pebble;
using confluxlab::testing::data_path;
using confluxlab::testing::program;

namespace {

Cdag from_text(const std::string& text) {
    std::istringstream in(text);
    return read_cdag(in);
}

Cdag chain3() { return load_cdag(data_path("cdags/chain.cdag")); }

// Recompute nothing: load every predecessor, compute, store, free all.
Schedule naive_schedule(const Cdag& g) {
    Schedule s;
    for (int v : g.topological_order()) {
        if (g.is_input(v)) continue;
        for (int p : g.preds(v)) s.push_back({MoveKind::Load, p, 0});
        s.push_back({MoveKind::Compute, v, 0});
        s.push_back({MoveKind::Store, v, 0});
        for (int p : g.preds(v)) s.push_back({MoveKind::Free, p, 0});
        s.push_back({MoveKind::Free, v, 0});
    }
    return s;
}

// Smallest vertex set separating every input from H, by enumeration.
long long dom_min_exhaustive(const Cdag& g, const std::vector<int>& H) {
    const int n = static_cast<int>(g.size());
    std::vector<char> inH(static_cast<std::size_t>(n), 0);
    for (int h : H) inH[static_cast<std::size_t>(h)] = 1;
    std::vector<int> allowed;
    for (int v = 0; v < n; ++v)
        if (!inH[static_cast<std::size_t>(v)] || g.is_input(v)) allowed.push_back(v);
    long long best = n + 1;
    for (unsigned mask = 0; mask < (1u << allowed.size()); ++mask) {
        std::vector<char> cut(static_cast<std::size_t>(n), 0);
        long long size = 0;
        for (std::size_t i = 0; i < allowed.size(); ++i)
            if (mask & (1u << i)) {
                cut[static_cast<std::size_t>(allowed[i])] = 1;
                ++size;
            }
        if (size >= best) continue;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<int> stack;
        for (int v : g.inputs())
            if (!cut[static_cast<std::size_t>(v)]) stack.push_back(v);
        bool reached = false;
        while (!stack.empty() && !reached) {
            int v = stack.back();
            stack.pop_back();
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = 1;
            if (inH[static_cast<std::size_t>(v)]) reached = true;
            for (int s : g.succs(v))
                if (!cut[static_cast<std::size_t>(s)]) stack.push_back(s);
        }
        if (!reached) best = size;
    }
    return best;
}

Cdag random_dag(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Cdag g;
    for (int i = 0; i < 8; ++i) {
        Vertex v;
        v.name = "v" + std::to_string(i);
        v.kind = i < 3 ? Vertex::Kind::Input : Vertex::Kind::Mid;
        g.add_vertex(v);
    }
    for (int dst = 3; dst < 8; ++dst) {
        int added = 0;
        for (int src = 0; src < dst; ++src)
            if (rng() % 3 == 0) {
                g.add_edge(src, dst);
                ++added;
            }
        if (added == 0) g.add_edge(static_cast<int>(rng() % static_cast<unsigned>(dst)), dst);
    }
    g.classify_outputs();
    return g;
}

}  // namespace

TEST_CASE("chain schedule costs one load and one store") {
    Cdag g = chain3();
    Schedule s = parse_schedule("load a\ncompute b\nfree a\ncompute c\nstore c\n", g);
    GameConfig cfg;
    cfg.M = 2;
    RunResult r = run_schedule(g, s, cfg);
    CHECK(r.legal);
    CHECK(r.complete);
    CHECK(r.Q == 2);

    cfg.M = 1;
    RunResult bad = run_schedule(g, s, cfg);
    CHECK_FALSE(bad.legal);
    CHECK(bad.failed_step == 1);
    CHECK_FALSE(bad.reason.empty());
}

TEST_CASE("illegal moves are reported") {
    Cdag g = chain3();
    GameConfig cfg;
    cfg.M = 3;
    CHECK_FALSE(run_schedule(g, parse_schedule("compute b\n", g), cfg).legal);
    CHECK_FALSE(run_schedule(g, parse_schedule("store b\n", g), cfg).legal);
    RunResult partial = run_schedule(g, parse_schedule("load a\ncompute b\n", g), cfg);
    CHECK(partial.legal);
    CHECK_FALSE(partial.complete);
    CHECK_THROWS_AS(parse_schedule("jump a\n", g), ParseError);
}

TEST_CASE("legality is prefix closed") {
    Cdag g = build_cdag(program("lu"), {{"N", 3}});
    Schedule s = naive_schedule(g);
    GameConfig cfg;
    cfg.M = 6;
    for (std::size_t n = 0; n <= s.size(); n += 3) {
        Schedule prefix(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        CHECK(run_schedule(g, prefix, cfg).legal);
    }
}

TEST_CASE("brute force on trivial graphs") {
    GameConfig cfg;
    cfg.M = 2;
    CHECK(brute_force_optimal_Q(chain3(), cfg).Q == 2);
    Cdag one = from_text("v a in\nv b out\ne a b\n");
    CHECK(brute_force_optimal_Q(one, cfg).Q == 2);
}

TEST_CASE("shared-vector map needs at least one I/O per compute vertex") {
    // Two compute vertices, each reading its own A element and the shared b.
    Cdag g = from_text(
        "v A0 in\nv A1 in\nv b in\nv C0 out\nv C1 out\n"
        "e A0 C0\ne b C0\ne A1 C1\ne b C1\n");
    GameConfig cfg;
    cfg.M = 3;
    OracleResult o = brute_force_optimal_Q(g, cfg);
    CHECK(o.Q >= 2);
    CHECK(o.Q == 5);  // three loads, two stores
}

TEST_CASE("lu n=3 oracle is above the derived bound and its witness replays") {
    auto lu = program("lu");
    Cdag g = build_cdag(lu, {{"N", 3}});
    GameConfig cfg;
    cfg.M = 4;
    OracleResult o = brute_force_optimal_Q(g, cfg);
    auto rep = bounds::program_bound(lu, {{"N", 3}}, 4);
    CHECK(static_cast<double>(o.Q) >= static_cast<double>(rep.Q_seq));
    RunResult replay = run_schedule(g, o.witness, cfg);
    CHECK(replay.legal);
    CHECK(replay.complete);
    CHECK(replay.Q == o.Q);

    GameConfig roomy = cfg;
    roomy.M = 5;
    const long long q5 = brute_force_optimal_Q(g, roomy).Q;
    CHECK(q5 <= o.Q);

    RunResult naive = run_schedule(g, naive_schedule(g), roomy);
    CHECK(naive.legal);
    CHECK(naive.complete);
    CHECK(naive.Q >= q5);
    CHECK(static_cast<double>(naive.Q) >= static_cast<double>(rep.Q_seq));
}

TEST_CASE("oracle refuses instances above its caps") {
    Cdag g = build_cdag(program("gemm"), {{"N", 3}});
    GameConfig cfg;
    cfg.M = 4;
    CHECK_THROWS_AS(brute_force_optimal_Q(g, cfg), CapExceeded);
    cfg.M = 6;
    CHECK_THROWS_AS(brute_force_optimal_Q(chain3(), cfg), CapExceeded);
    GameConfig tight;
    tight.M = 1;
    CHECK_THROWS_AS(brute_force_optimal_Q(chain3(), tight), DomainError);
}

TEST_CASE("parallel game charges the acquiring rank") {
    Cdag g = load_cdag(data_path("cdags/owned_pair.cdag"));
    GameConfig cfg;
    cfg.M = 3;
    cfg.parallel = true;
    cfg.P = 2;
    OracleResult o = brute_force_optimal_Q(g, cfg);
    CHECK(o.Q == 1);
    CHECK(o.max_rank_io == 1);
    RunResult r = run_schedule(g, o.witness, cfg);
    CHECK(r.legal);
    CHECK(r.complete);
    CHECK(r.Q == 1);

    Schedule s = parse_schedule("acquire 0 b\ncompute 0 c\n", g);
    RunResult manual = run_schedule(g, s, cfg);
    CHECK(manual.legal);
    CHECK(manual.complete);
    CHECK(manual.rank_io == std::vector<long long>{1, 0});

    CHECK_FALSE(run_schedule(g, parse_schedule("acquire 0 c\n", g), cfg).legal);

    cfg.charge_sender = true;
    CHECK(brute_force_optimal_Q(g, cfg).Q == 2);
}

TEST_CASE("dom_min") {
    Cdag g = chain3();
    CHECK(dom_min(g, {g.find("a")}) == 1);
    CHECK(dom_min(g, {g.find("c")}) == 1);

    auto lu = program("lu");
    Cdag l = build_cdag(lu, {{"N", 4}});
    int v = l.find("A[2][3]@1");
    REQUIRE(v >= 0);
    CHECK(dom_min(l, {v}) == 3);
    CHECK(rectangular_dom_size(lu.statements[1], {{"k", 1}, {"i", 1}, {"j", 1}}) == 3);
    CHECK(rectangular_dom_size(lu.statements[1], {{"k", 2}, {"i", 3}, {"j", 4}}) == 12 + 6 + 8);

    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Cdag r = random_dag(seed);
        std::vector<int> H = r.compute_vertices();
        CHECK(dom_min(r, H) == dom_min_exhaustive(r, H));
        std::vector<int> half(H.begin(), H.begin() + static_cast<std::ptrdiff_t>(H.size() / 2 + 1));
        CHECK(dom_min(r, half) == dom_min_exhaustive(r, half));
        CHECK(static_cast<long long>(dom_min_set(r, half).size()) == dom_min(r, half));
    }
}

TEST_CASE("min_set") {
    Cdag g = from_text("v x in\nv a mid\nv b mid\nv c out\ne x a\ne a b\ne b c\n");
    CHECK(min_set(g, g.compute_vertices()) == std::vector<int>{g.find("c")});
    CHECK(min_set(g, {}).empty());

    Cdag l = build_cdag(program("lu"), {{"N", 4}});
    std::vector<int> H;
    for (int v : l.statement_vertices(1))
        if (l.vertex(v).point[0] == 0) H.push_back(v);
    CHECK(H.size() == 9);
    CHECK(min_set(l, H).size() == 9);
}

TEST_CASE("x-partition validation") {
    Cdag g = from_text(
        "v x in\nv a mid\nv b mid\nv c mid\nv d out\ne x a\ne a b\ne b c\ne c d\n");
    std::vector<std::vector<int>> singles;
    for (int v : g.compute_vertices()) singles.push_back({v});
    CHECK(check_x_partition(g, singles, g.max_in_degree()).ok);

    auto cyc = check_x_partition(g, {{g.find("a")}, {g.find("b"), g.find("d")}, {g.find("c")}}, 4);
    CHECK_FALSE(cyc.ok);
    CHECK(cyc.violation.find("cyclic") != std::string::npos);

    auto missing = check_x_partition(g, {{g.find("a")}}, 4);
    CHECK_FALSE(missing.ok);

    Cdag l = build_cdag(program("lu"), {{"N", 4}});
    std::vector<int> H;
    for (int v : l.statement_vertices(1))
        if (l.vertex(v).point[0] == 0 && l.vertex(v).point[1] <= 2 && l.vertex(v).point[2] <= 2)
            H.push_back(v);
    const long long X = dom_min(l, H);
    std::vector<std::vector<int>> parts{H};
    for (int v : l.compute_vertices())
        if (std::find(H.begin(), H.end(), v) == H.end()) parts.push_back({v});
    CHECK(check_x_partition(l, parts, std::max<long long>(X, 3)).ok);
    CHECK_FALSE(check_x_partition(l, parts, X - 1).ok);
}
