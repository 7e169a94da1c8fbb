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

#include <numeric>
#include <sstream>

#include "confluxlab/error.hpp"
#include "confluxlab/simnet.hpp"

using namespace confluxlab;
using namespace confluxlab::sim;

namespace {

bool conserved(const CommStats& s) { return s.total_sent() == s.total_recv(); }

std::string error_of(const std::function<void(RankCtx&)>& fn, const GridSpec& g) {
    try {
        run(g, 1e9, fn);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

// Every rank sends a rank-dependent amount to a few peers, then all collect.
void mixed_traffic(RankCtx& ctx) {
    const int P = ctx.grid().P();
    const int me = ctx.rank();
    for (int k = 1; k < P; k += 2) ctx.send((me + k) % P, Payload(static_cast<std::size_t>(me + k), 1.0), k);
    for (int k = 1; k < P; k += 2) {
        const int src = ((me - k) % P + P) % P;
        ctx.recv(src, k, src + k);
    }
    Payload v(16, static_cast<double>(me));
    ctx.reduce(0, group_of(ctx.grid(), -1, -1, -1), v, 99);
}

}  // namespace

TEST_CASE("grid spec parsing and validation") {
    for (const char* text : {"2,2,2", "[2,2,2]", "2x2x2"}) {
        GridSpec g = GridSpec::parse(text);
        CHECK(g.Px == 2);
        CHECK(g.Py == 2);
        CHECK(g.Pz == 2);
        CHECK(g.P() == 8);
        CHECK(g.P1() == 4);
        CHECK(g.c() == 2);
    }
    CHECK_THROWS_AS(GridSpec::parse("2,2"), ParseError);
    CHECK_THROWS_AS(GridSpec::parse("a,b,c"), ParseError);
    CHECK_THROWS_AS((GridSpec{2, 1, 1}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{0, 0, 1}.validate()), DomainError);
    GridSpec g{2, 2, 3};
    for (int r = 0; r < g.P(); ++r) {
        auto c = g.coords(r);
        CHECK(g.rank_of(c[0], c[1], c[2]) == r);
    }
    CHECK(group_of(g, 1, -1, 2).size() == 2);
    CHECK(group_of(g, -1, -1, -1).size() == 12);
}

TEST_CASE("single rank without traffic") {
    RunOutput out = run(GridSpec{}, 16, [](RankCtx&) {});
    REQUIRE(out.stats.ranks.size() == 1);
    CHECK(out.stats.ranks[0].sent == 0);
    CHECK(out.stats.ranks[0].recv == 0);
    CHECK(out.stats.ranks[0].msgs == 0);
}

TEST_CASE("ping-pong conserves words") {
    // A 2-rank machine is a [1,1,2] grid.
    RunOutput out = run(GridSpec{1, 1, 2}, 1e6, [](RankCtx& ctx) {
        Payload p(1000, 1.0);
        if (ctx.rank() == 0) {
            ctx.send(1, p);
            ctx.recv(1, 0, 1000);
        } else {
            ctx.recv(0, 0, 1000);
            ctx.send(0, p);
        }
    });
    for (const auto& r : out.stats.ranks) {
        CHECK(r.sent == 1000);
        CHECK(r.recv == 1000);
    }
    CHECK(conserved(out.stats));
}

TEST_CASE("broadcast volume per tree") {
    const GridSpec g{2, 2, 2};
    auto body = [&](RankCtx& ctx) {
        Payload p(256, ctx.rank() == 3 ? 7.0 : 0.0);
        ctx.broadcast(3, group_of(g, -1, -1, -1), p);
        CHECK(p[255] == 7.0);
    };
    RunOutput flat = run(g, 1e6, body);
    for (int r = 0; r < 8; ++r) {
        const auto& s = flat.stats.ranks[static_cast<std::size_t>(r)];
        CHECK(s.recv == (r == 3 ? 0 : 256));
        CHECK(s.sent == (r == 3 ? 7 * 256 : 0));
    }
    SimOptions opts;
    opts.tree = Tree::Binomial;
    RunOutput tree = run(g, 1e6, body, opts);
    CHECK(tree.stats.ranks[3].sent == 3 * 256);
    for (int r = 0; r < 8; ++r)
        if (r != 3) CHECK(tree.stats.ranks[static_cast<std::size_t>(r)].recv == 256);
    CHECK(tree.stats.total_recv() == flat.stats.total_recv());

    RunOutput single = run(g, 1e6, [](RankCtx& ctx) {
        Payload p(64, 1.0);
        ctx.broadcast(ctx.rank(), {ctx.rank()}, p);
    });
    CHECK(single.stats.total_recv() == 0);
}

TEST_CASE("reduce over layers") {
    const GridSpec g{1, 1, 2};
    const long long words = 120;  // stands for (N - t v) v
    RunOutput out = run(g, 1e6, [&](RankCtx& ctx) {
        Payload p(static_cast<std::size_t>(words), 1.0 + ctx.rank());
        ctx.reduce(0, group_of(g, 0, 0, -1), p);
        if (ctx.rank() == 0) CHECK(p[0] == 3.0);
    });
    CHECK(out.stats.ranks[0].recv == words);
    CHECK(out.stats.ranks[1].sent == words);

    RunOutput bcast = run(g, 1e6, [&](RankCtx& ctx) {
        Payload p(static_cast<std::size_t>(words), 1.0);
        ctx.broadcast(0, group_of(g, 0, 0, -1), p);
    });
    CHECK(bcast.stats.total_sent() == out.stats.total_sent());
}

TEST_CASE("scatter and allgather") {
    const GridSpec g{2, 2, 2};
    const long long total = 2 * 240 * 16;  // 2 (N - t v) v with N = 256, t v = 16
    RunOutput out = run(g, 1e6, [&](RankCtx& ctx) {
        auto grp = group_of(g, -1, -1, -1);
        std::vector<Payload> pieces;
        if (ctx.rank() == 0)
            for (int r = 0; r < 8; ++r) pieces.emplace_back(static_cast<std::size_t>(total / 8), r);
        Payload mine = ctx.scatter(0, grp, pieces);
        CHECK(mine.size() == static_cast<std::size_t>(total / 8));
        CHECK(mine[0] == ctx.rank());
    });
    for (int r = 1; r < 8; ++r) CHECK(out.stats.ranks[static_cast<std::size_t>(r)].recv == total / 8);

    RunOutput ag = run(g, 1e6, [&](RankCtx& ctx) {
        auto all = ctx.allgather(group_of(g, -1, -1, -1), Payload(4, ctx.rank()));
        REQUIRE(all.size() == 8);
        for (int r = 0; r < 8; ++r) CHECK(all[static_cast<std::size_t>(r)][0] == r);
    });
    for (const auto& r : ag.stats.ranks) CHECK(r.recv == 7 * 4);
    CHECK(conserved(ag.stats));
}

TEST_CASE("conservation and determinism") {
    const GridSpec g{2, 2, 2};
    RunOutput a = run(g, 1e6, mixed_traffic);
    RunOutput b = run(g, 1e6, mixed_traffic);
    CHECK(conserved(a.stats));
    CHECK(a.stats == b.stats);
    CHECK(comm_report_csv(a.stats) == comm_report_csv(b.stats));
}

TEST_CASE("phase attribution") {
    const GridSpec g{1, 1, 2};
    RunOutput out = run(g, 1e6, [](RankCtx& ctx) {
        ctx.set_phase("one");
        if (ctx.rank() == 0) ctx.send(1, Payload(5, 0.0));
        else ctx.recv(0);
        ctx.set_phase("two");
        if (ctx.rank() == 1) ctx.send(0, Payload(3, 0.0));
        else ctx.recv(1);
    });
    CHECK(out.stats.phase_max_recv("one") == 5);
    CHECK(out.stats.phase_max_recv("two") == 3);
    CHECK(out.stats.phase_total_recv("three") == 0);
}

TEST_CASE("communication errors") {
    const GridSpec g{1, 1, 2};
    std::string mismatch = error_of(
        [](RankCtx& ctx) {
            if (ctx.rank() == 0) ctx.send(1, Payload(3, 0.0));
            else ctx.recv(0, 0, 4);
        },
        g);
    CHECK(mismatch.find("0") != std::string::npos);
    CHECK(mismatch.find("1") != std::string::npos);

    std::string deadlock = error_of([](RankCtx& ctx) { ctx.recv(1 - ctx.rank()); }, g);
    CHECK(deadlock.find("deadlock") != std::string::npos);

    std::string leftover = error_of(
        [](RankCtx& ctx) {
            if (ctx.rank() == 0) ctx.send(1, Payload(2, 0.0));
        },
        g);
    CHECK_FALSE(leftover.empty());

    CHECK_THROWS_AS(run(g, 1e6, [](RankCtx&) { throw DomainError("boom"); }), DomainError);
}

TEST_CASE("memory budget") {
    const GridSpec g{1, 1, 1};
    RunOutput soft = run(g, 100, [](RankCtx& ctx) { ctx.note_resident(150); });
    CHECK(soft.stats.ranks[0].peak == 150);
    CHECK(soft.stats.ranks[0].over_budget);
    CHECK(soft.warnings.size() == 1);
    SimOptions hard;
    hard.hard_memory = true;
    CHECK_THROWS_AS(run(g, 100, [](RankCtx& ctx) { ctx.note_resident(150); }, hard), CapExceeded);
}

TEST_CASE("limited worker slots still complete blocking exchanges") {
    SimOptions opts;
    opts.max_threads = 1;
    RunOutput out = run(GridSpec{2, 2, 1}, 1e6, [](RankCtx& ctx) {
        const int next = (ctx.rank() + 1) % 4;
        const int prev = (ctx.rank() + 3) % 4;
        ctx.send(next, Payload(10, 1.0));
        ctx.recv(prev, 0, 10);
    }, opts);
    CHECK(out.stats.total_recv() == 40);
}

TEST_CASE("csv report schema") {
    RunOutput out = run(GridSpec{1, 1, 3}, 1e6, [](RankCtx&) {});
    std::istringstream in(comm_report_csv(out.stats));
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema_version=1");
    std::getline(in, line);
    CHECK(line == "rank,pi,pj,pk,sent_words,recv_words,msgs,peak_words");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}
