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
// Acceptance driver: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "confluxlab/bounds.hpp"
#include "confluxlab/cdag.hpp"
#include "confluxlab/costmodels.hpp"
#include "confluxlab/factor.hpp"
#include "confluxlab/pebble.hpp"
#include "confluxlab/simnet.hpp"

using namespace confluxlab;

namespace {

std::string program_path(const std::string& name) {
    return std::string(CONFLUXLAB_DATA_DIR) + "/programs/" + name + ".daap";
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (pass) detail.clear();
        if (!detail.empty()) detail += "; ";
        detail += what;
        pass = false;
    }
};

// Every simulated run made by the driver, for the conservation property.
std::vector<sim::CommStats> g_runs;

factor::FactorResult lu_run(int N, const sim::GridSpec& g, int v, double M, std::uint64_t seed) {
    factor::FactorResult r = factor::conflux(random_matrix(static_cast<std::size_t>(N), seed), g, v, M);
    g_runs.push_back(r.stats);
    return r;
}

factor::FactorResult chol_run(int N, const sim::GridSpec& g, int v, double M, std::uint64_t seed) {
    factor::FactorResult r =
        factor::confchox(random_spd(static_cast<std::size_t>(N), seed), g, v, M);
    g_runs.push_back(r.stats);
    return r;
}

Outcome lower_bound_goldens() {
    Outcome o;
    const auto lu = daap::load_daap(program_path("lu"));
    int agree = 0;
    int total = 0;
    double worst = 0.0;
    std::string example;
    for (long long N : {4, 8, 16, 32}) {
        for (double M : {4.0, 16.0, 64.0}) {
            for (long long P : {1, 4}) {
                const auto rep = bounds::parallel_bound(lu, {{"N", N}}, M, P);
                const double got = static_cast<double>(rep.Q_par);
                const double want = bounds::lu_bound(static_cast<double>(N), M, static_cast<double>(P));
                const double r = rel(got, want);
                ++total;
                if (r <= 1e-9) {
                    ++agree;
                } else if (r > worst) {
                    worst = r;
                    example = "N=" + std::to_string(N) + " M=" + fmt(M) + " P=" + std::to_string(P) +
                              ": pipeline " + fmt(got) + " vs closed form " + fmt(want);
                }
            }
        }
    }
    o.detail = "LU " + std::to_string(agree) + "/" + std::to_string(total) + " agree";
    o.require(agree == total, "LU agrees in " + std::to_string(agree) + "/" +
                                  std::to_string(total) + " cases, worst " + example);

    const auto rep = bounds::program_bound(lu, {{"N", 64}}, 16);
    const bool lu_lead = std::fabs(rep.leading_coefficient - 2.0 / 3.0) <= 1e-9 &&
                         rep.leading_degree == 3 && std::fabs(rep.leading_m_exponent - 0.5) <= 1e-12;
    o.require(lu_lead, "LU leading term " + rep.leading_term());
    const auto ch = daap::load_daap(program_path("cholesky"));
    const auto crep = bounds::program_bound(ch, {{"N", 64}}, 16);
    const bool ch_lead = std::fabs(crep.leading_coefficient - 1.0 / 3.0) <= 1e-9 &&
                         crep.leading_degree == 3 && std::fabs(crep.leading_m_exponent - 0.5) <= 1e-12;
    o.require(ch_lead, "Cholesky leading term " + crep.leading_term());
    if (lu_lead && ch_lead)
        o.detail += (o.pass ? ", " : "; ") + std::string("leading terms ") + rep.leading_term() +
                    " and " + crep.leading_term() + " match";
    return o;
}

Outcome statement_analysis() {
    Outcome o;
    const auto lu = daap::load_daap(program_path("lu"));
    const std::size_t s2 = 1;
    const auto prob = bounds::make_chi_problem(lu, s2);
    for (double M : {4.0, 16.0, 64.0, 100.0}) {
        for (double X : {3 * M, 6 * M, 12 * M}) {
            const double chi = bounds::solve_chi(prob, X).chi;
            const double want = std::pow(X / 3.0, 1.5);
            o.require(rel(chi, want) <= 1e-8, "chi(" + fmt(X) + ") = " + fmt(chi));
        }
        const auto in = bounds::maximize_intensity(prob, M);
        o.require(rel(in.X0, 3 * M) <= 1e-6, "X0 = " + fmt(in.X0) + " at M = " + fmt(M));
        o.require(rel(in.rho, std::sqrt(M) / 2) <= 1e-6, "rho = " + fmt(in.rho) + " at M = " + fmt(M));
    }
    for (double M : {4.0, 16.0}) {
        const auto s1 = bounds::analyze_statement(lu, 0, M, {{"N", 8}});
        o.require(s1.rho <= 1.0 + 1e-12, "LU S1 rho = " + fmt(s1.rho));
        const auto emap = daap::load_daap(program_path("elementwise_map"));
        const auto b = bounds::analyze_statement(emap, 0, M, {{"N", 8}});
        o.require(b.rho <= 0.5 + 1e-12, "elementwise_map rho = " + fmt(b.rho));
    }
    if (o.pass) o.detail = "chi, X0 = 3M, rho = sqrt(M)/2 at M in {4,16,64,100}; caps hold";
    return o;
}

Outcome oracle_soundness() {
    Outcome o;
    struct Case {
        const char* program;
        long long N;
        int M;
    };
    const std::vector<Case> corpus = {
        {"lu", 3, 4},       {"lu", 2, 4},       {"cholesky", 3, 4},     {"cholesky", 2, 3},
        {"gemm", 2, 4},     {"shared_column", 2, 3}, {"elementwise_map", 4, 3}, {"matvec", 2, 4},
        {"outer", 3, 3},    {"outer", 2, 4},    {"scalar_chain", 4, 2}, {"accumulate", 4, 3},
        {"two_maps", 4, 4},
    };
    int checked = 0;
    for (const auto& c : corpus) {
        const auto prog = daap::load_daap(program_path(c.program));
        const daap::Bindings b{{prog.params.front(), c.N}};
        const Cdag g = build_cdag(prog, b);
        const std::string name = std::string(c.program) + " N=" + std::to_string(c.N) +
                                 " M=" + std::to_string(c.M);
        o.require(g.compute_vertices().size() <= 14 && c.M <= 4, name + " is outside the corpus limits");
        const double bound = static_cast<double>(bounds::program_bound(prog, b, c.M).Q_seq);
        pebble::GameConfig cfg;
        cfg.M = c.M;
        const auto opt = pebble::brute_force_optimal_Q(g, cfg);
        o.require(static_cast<double>(opt.Q) >= bound - 1e-9,
                  name + ": Q_opt " + std::to_string(opt.Q) + " < bound " + fmt(bound));
        const auto replay = pebble::run_schedule(g, opt.witness, cfg);
        o.require(replay.legal && replay.complete && replay.Q == opt.Q,
                  name + ": witness replay " + (replay.legal ? "" : replay.reason));
        ++checked;
    }
    if (o.pass) o.detail = std::to_string(checked) + " instances, Q_opt >= bound and witnesses replay";
    return o;
}

Outcome factorization() {
    Outcome o;
    int runs = 0;
    for (int N : {64, 128, 256}) {
        for (auto g : {sim::GridSpec{1, 1, 1}, sim::GridSpec{2, 2, 1}, sim::GridSpec{2, 2, 2}}) {
            const int v = 16;
            const double M = N * N / std::pow(g.P(), 2.0 / 3.0);
            const std::string where = "N=" + std::to_string(N) + " " + g.str();
            const auto lu = lu_run(N, g, v, M, static_cast<std::uint64_t>(N) + 1);
            o.require(lu.residual <= 1e-8 * N, "LU residual " + fmt(lu.residual) + " at " + where);
            const auto ch = chol_run(N, g, v, M, static_cast<std::uint64_t>(N) + 2);
            o.require(ch.residual <= 1e-8 * N, "Cholesky residual " + fmt(ch.residual) + " at " + where);
            runs += 2;
            if (g.P() == 1) {
                const auto ref = factor::conflux_reference(random_matrix(static_cast<std::size_t>(N),
                                                                         static_cast<std::uint64_t>(N) + 1),
                                                           v);
                // Align by permutation: rows of L follow the pivot order.
                bool same_perm = ref.pivots.perm == lu.pivots.perm;
                double diff = std::numeric_limits<double>::infinity();
                if (same_perm) diff = std::max(max_abs_diff(ref.L, lu.L), max_abs_diff(ref.U, lu.U));
                o.require(diff <= 1e-12, "single-rank run differs from the emulation by " + fmt(diff) +
                                             " at N=" + std::to_string(N));
            }
        }
    }
    if (o.pass) o.detail = std::to_string(runs) + " factorizations within 1e-8*N; emulation match";
    return o;
}

Outcome communication() {
    Outcome o;
    const sim::GridSpec g{2, 2, 2};
    const int v = 16;
    double prev_ratio = 0.0;
    for (int N : {256, 512}) {
        const double M = N * N / 4.0;  // N^2 / P^(2/3) with P = 8
        const auto r = lu_run(N, g, v, M, 7);
        const double measured = static_cast<double>(r.stats.max_recv());
        const double leading = std::pow(N, 3) / (g.P() * std::sqrt(M));
        const double ratio = measured / leading;
        if (N == 256) {
            const double full = factor::conflux_model(N, g.P(), M);
            o.require(measured >= 0.5 * full && measured <= 4.0 * full,
                      "measured " + fmt(measured) + " vs model " + fmt(full));
            o.detail = "N=256 measured/model " + fmt(measured / full);
        } else {
            o.require(ratio <= prev_ratio, "leading-term ratio rose from " + fmt(prev_ratio) +
                                               " to " + fmt(ratio));
            o.detail += ", leading-term ratio " + fmt(prev_ratio) + " -> " + fmt(ratio);
        }
        prev_ratio = ratio;

        const long long rounds = static_cast<long long>(std::ceil(std::log2(std::sqrt(g.P1()))));
        for (int t = 1; t <= N / v; ++t) {
            for (int step : {7, 9, 11})
                o.require(r.stats.phase_total_recv(factor::phase_name(t, step)) == 0,
                          "step " + std::to_string(step) + " moved words at t=" + std::to_string(t));
            const auto& tour = r.stats.phase_recv.at(factor::phase_name(t, 2));
            for (long long w : tour)
                o.require(w == 0 || w == static_cast<long long>(v) * v * rounds,
                          "tournament traffic " + std::to_string(w) + " at t=" + std::to_string(t));
            o.require(r.stats.phase_max_recv(factor::phase_name(t, 2)) ==
                          static_cast<long long>(v) * v * rounds,
                      "tournament maximum at t=" + std::to_string(t));
        }
    }
    return o;
}

Outcome model_ordering() {
    Outcome o;
    using costmodels::ModelId;
    auto lead = [](ModelId id) { return costmodels::model_words(id, 4096, 64, 1048576).leading; };
    const double lb = lead(ModelId::LowerboundLu);
    const double cf = lead(ModelId::Conflux);
    const double mk = lead(ModelId::Mkl2d);
    const double ca = lead(ModelId::Candmc);
    const double cp = lead(ModelId::Capital);
    o.require(lb < cf && cf < mk && mk < ca && ca < cp, "ordering");
    o.require(std::llround(lb) == 699051, "lowerbound-lu " + fmt(lb));
    o.require(cf == 1048576.0, "conflux " + fmt(cf));
    o.require(mk == 2097152.0, "mkl2d " + fmt(mk));
    o.require(ca == 5242880.0, "candmc " + fmt(ca));
    o.require(cp == 5898240.0, "capital " + fmt(cp));
    if (o.pass) o.detail = fmt(lb) + " < " + fmt(cf) + " < " + fmt(mk) + " < " + fmt(ca) + " < " + fmt(cp);
    return o;
}

Outcome properties() {
    Outcome o;
    const auto a = lu_run(128, sim::GridSpec{2, 2, 2}, 16, 4096, 11);
    const auto b = lu_run(128, sim::GridSpec{2, 2, 2}, 16, 4096, 11);
    o.require(a.stats == b.stats && sim::comm_report_csv(a.stats) == sim::comm_report_csv(b.stats),
              "seeded runs differ");
    o.require(a.pivots.is_bijection() && a.pivots.perm.size() == 128, "pivot record is not a bijection");
    std::size_t chosen = 0;
    for (const auto& s : a.pivots.steps) chosen += s.size();
    o.require(chosen == 128 && a.pivots.steps.size() == 8, "pivot steps do not cover all rows");

    for (const auto& s : g_runs)
        o.require(s.total_sent() == s.total_recv(), "a run sent " + std::to_string(s.total_sent()) +
                                                        " but received " + std::to_string(s.total_recv()));

    const auto lu = daap::load_daap(program_path("lu"));
    const auto gemm = daap::load_daap(program_path("gemm"));
    for (const auto* prog : {&lu, &gemm}) {
        const auto prob = bounds::make_chi_problem(*prog, prog == &lu ? 1 : 0);
        double prev = -1.0;
        for (int i = 0; i < 20; ++i) {
            const double X = 3.0 + 25.0 * i;
            const double chi = bounds::solve_chi(prob, X).chi;
            o.require(chi >= prev - 1e-9, "chi decreases at X = " + fmt(X));
            prev = chi;
        }
    }
    if (o.pass)
        o.detail = "conservation on " + std::to_string(g_runs.size()) +
                   " runs, determinism, chi monotone, pivot bijection";
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "lower-bound goldens", lower_bound_goldens},
        {2, "statement analysis", statement_analysis},
        {3, "oracle soundness", oracle_soundness},
        {4, "factorization correctness", factorization},
        {5, "communication accounting", communication},
        {6, "model ordering", model_ordering},
        {7, "property suites", properties},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %d (%s) [%.2fs]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    secs, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
