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
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "confluxlab/bounds.hpp"
#include "confluxlab/cdag.hpp"
#include "confluxlab/error.hpp"

namespace confluxlab::bounds {

namespace {

constexpr long long kProbeExtent = 6;

daap::Bindings probe_params(const daap::DaapProgram& prog) {
    daap::Bindings b;
    for (const auto& p : prog.params) b[p] = kProbeExtent;
    return b;
}

std::optional<Cdag> build_probe(const daap::DaapProgram& prog) {
    try {
        return build_cdag(prog, probe_params(prog));
    } catch (const CapExceeded&) {
        return std::nullopt;
    }
}

std::string fmt(long double x) {
    std::ostringstream os;
    os.precision(10);
    os << static_cast<double>(x);
    return os.str();
}

std::string rational_str(double x) {
    Rational r = approximate_rational(x, 1000);
    if (std::fabs(r.to_double() - x) > 1e-9 * std::max(1.0, std::fabs(x))) return fmt(x);
    return r.str();
}

int probe_u(const daap::DaapProgram& prog, std::size_t stmt, const Cdag* probe) {
    const daap::Statement& st = prog.statements.at(stmt);
    int u = 0;
    std::vector<int> verts;
    if (probe) verts = probe->statement_vertices(static_cast<int>(stmt));
    for (std::size_t j = 0; j < st.inputs.size(); ++j) {
        if (st.inputs[j].access_dimension() != st.depth()) continue;
        bool all_one = true;
        if (probe) {
            for (int w : verts) {
                int pj = probe->preds(w)[j];
                if (probe->succs(pj).size() != 1) {
                    all_one = false;
                    break;
                }
            }
        }
        if (all_one) ++u;
    }
    return u;
}

StatementAnalysis analyze(const daap::DaapProgram& prog, std::size_t stmt, double M,
                          const daap::Bindings& params, const std::vector<double>& weights,
                          const Cdag* probe) {
    const daap::Statement& st = prog.statements.at(stmt);
    StatementAnalysis a;
    a.label = st.label;
    a.index = stmt;
    a.depth = st.depth();
    a.problem = make_chi_problem(prog, stmt, weights);
    a.intensity = maximize_intensity(a.problem, M);
    if (!a.intensity.diagnostic.empty()) a.notes.push_back(a.intensity.diagnostic);
    a.u = probe_u(prog, stmt, probe);
    a.rho = a.intensity.status == Intensity::Status::Unbounded
                ? std::numeric_limits<double>::infinity()
                : a.intensity.rho;
    if (a.u >= 1 && 1.0 / a.u < a.rho) {
        a.rho = 1.0 / a.u;
        a.capped = true;
    }
    if (prog.params.size() <= 1) a.V = daap::domain_polynomial(prog, stmt);
    a.V_value = static_cast<long double>(daap::domain_size(prog, stmt, params));
    if (std::isinf(a.rho)) {
        a.trivial = true;
        a.Q = 0;
        a.notes.push_back("intensity is unbounded and no out-degree-one predecessor exists; "
                          "the bound for this statement is trivial (0)");
    } else {
        a.Q = a.V_value / static_cast<long double>(a.rho);
    }
    return a;
}

// Coefficient and M exponent of 1/rho as a function of M.
std::pair<double, double> inverse_rho_scaling(const StatementAnalysis& a, double M) {
    if (a.capped) return {static_cast<double>(a.u), 0.0};
    Intensity hi = maximize_intensity(a.problem, 4.0 * M);
    double e = std::log(hi.rho / a.rho) / std::log(4.0);
    double er = std::round(e * 1000.0) / 1000.0;
    if (std::fabs(er - e) < 1e-6) e = er;
    return {std::pow(M, e) / a.rho, e};
}

}  // namespace

double StatementAnalysis::access_size(std::size_t j) const {
    const auto& t = problem.terms.at(j);
    double s = 1.0;
    for (int v : t.vars) s *= intensity.D.at(static_cast<std::size_t>(v));
    return s;
}

int out_degree_one_count(const daap::DaapProgram& prog, std::size_t stmt) {
    auto probe = build_probe(prog);
    return probe_u(prog, stmt, probe ? &*probe : nullptr);
}

StatementAnalysis analyze_statement(const daap::DaapProgram& prog, std::size_t stmt, double M,
                                    const daap::Bindings& params,
                                    const std::vector<double>& weights) {
    auto probe = build_probe(prog);
    return analyze(prog, stmt, M, params, weights, probe ? &*probe : nullptr);
}

OutputReuse output_reuse_adjust(double term, double rho_producer) {
    OutputReuse r;
    r.raw = term / rho_producer;
    r.effective = std::min(term, r.raw);
    return r;
}

double input_reuse(const StatementAnalysis& S, std::size_t access_S, const StatementAnalysis& T,
                   std::size_t access_T) {
    auto amount = [](const StatementAnalysis& A, std::size_t j) -> double {
        if (A.capped || A.trivial || A.intensity.chi <= 0.0) return static_cast<double>(A.V_value);
        return A.access_size(j) * static_cast<double>(A.V_value) / A.intensity.chi;
    };
    return std::min(amount(S, access_S), amount(T, access_T));
}

std::string BoundReport::leading_term() const {
    if (leading_coefficient == 0.0) return "0";
    std::ostringstream os;
    os << rational_str(leading_coefficient);
    if (leading_degree > 0) os << "*N" << (leading_degree > 1 ? "^" + std::to_string(leading_degree) : "");
    os << "/(P";
    if (leading_m_exponent != 0.0) {
        os << "*M";
        if (leading_m_exponent != 1.0) os << "^(" << rational_str(leading_m_exponent) << ")";
    }
    os << ")";
    return os.str();
}

BoundReport program_bound(const daap::DaapProgram& prog, const daap::Bindings& params, double M) {
    if (!(M >= 1.0)) throw DomainError("memory size M must be at least 1");
    for (const auto& p : prog.params)
        if (!params.count(p)) throw DomainError("no value given for parameter '" + p + "'");
    BoundReport rep;
    rep.params = params;
    rep.M = M;
    auto probe = build_probe(prog);
    const Cdag* g = probe ? &*probe : nullptr;
    if (!g) rep.warnings.push_back("probe cDAG too large; reuse detection skipped");

    const std::size_t ns = prog.statements.size();
    std::vector<StatementAnalysis> alone;
    for (std::size_t s = 0; s < ns; ++s) alone.push_back(analyze(prog, s, M, params, {}, g));

    // Output reuse: scale a consumer's dominator term by min(1, 1/rho_producer).
    for (std::size_t t = 0; t < ns; ++t) {
        const daap::Statement& st = prog.statements[t];
        std::vector<double> weights(st.inputs.size(), 1.0);
        bool changed = false;
        if (g) {
            std::vector<std::set<int>> producers(st.inputs.size());
            for (int w : g->statement_vertices(static_cast<int>(t)))
                for (std::size_t j = 0; j < st.inputs.size(); ++j) {
                    int s = g->vertex(g->preds(w)[j]).statement;
                    if (s >= 0 && s != static_cast<int>(t)) producers[j].insert(s);
                }
            std::set<std::pair<int, std::string>> recorded;
            for (std::size_t j = 0; j < st.inputs.size(); ++j) {
                for (int s : producers[j]) {
                    double rho_s = alone[static_cast<std::size_t>(s)].rho;
                    double wgt = std::min(1.0, 1.0 / rho_s);
                    ReuseAdjustment adj;
                    adj.kind = ReuseAdjustment::Kind::OutputOverlap;
                    adj.array = st.inputs[j].array;
                    adj.producer = prog.statements[static_cast<std::size_t>(s)].label;
                    adj.consumer = st.label;
                    adj.amount = wgt;
                    if (recorded.emplace(s, adj.array).second) rep.adjustments.push_back(adj);
                    if (wgt < weights[j]) {
                        weights[j] = wgt;
                        changed = true;
                    }
                }
            }
        }
        rep.statements.push_back(changed ? analyze(prog, t, M, params, weights, g) : alone[t]);
    }

    // Input reuse: pairs of statements reading the same vertices.
    if (g) {
        std::map<std::tuple<int, int, std::string>, double> pairs;
        for (std::size_t v = 0; v < g->size(); ++v) {
            std::vector<std::pair<int, std::size_t>> readers;
            for (int w : g->succs(static_cast<int>(v))) {
                const auto& pr = g->preds(w);
                for (std::size_t j = 0; j < pr.size(); ++j)
                    if (pr[j] == static_cast<int>(v)) readers.emplace_back(g->vertex(w).statement, j);
            }
            for (std::size_t a = 0; a < readers.size(); ++a)
                for (std::size_t b = 0; b < readers.size(); ++b) {
                    auto [s, js] = readers[a];
                    auto [t, jt] = readers[b];
                    if (s >= t) continue;
                    double amt = input_reuse(rep.statements[static_cast<std::size_t>(s)], js,
                                             rep.statements[static_cast<std::size_t>(t)], jt);
                    auto key = std::make_tuple(s, t, g->vertex(static_cast<int>(v)).array);
                    auto it = pairs.find(key);
                    if (it == pairs.end()) pairs.emplace(key, amt);
                    else it->second = std::max(it->second, amt);
                }
        }
        for (const auto& [key, amt] : pairs) {
            ReuseAdjustment adj;
            adj.kind = ReuseAdjustment::Kind::InputOverlap;
            adj.producer = prog.statements[static_cast<std::size_t>(std::get<0>(key))].label;
            adj.consumer = prog.statements[static_cast<std::size_t>(std::get<1>(key))].label;
            adj.array = std::get<2>(key);
            adj.amount = amt;
            rep.adjustments.push_back(adj);
            rep.reuse_total += amt;
        }
    }

    long double total = 0;
    for (const auto& a : rep.statements) total += a.Q;
    rep.Q_seq = std::max<long double>(0, total - rep.reuse_total);
    rep.Q_par = rep.Q_seq;

    // Dominant symbolic term.
    std::map<std::pair<int, double>, double> terms;
    for (const auto& a : rep.statements) {
        if (a.trivial || a.V.coeffs().empty()) continue;
        auto [coef, e] = inverse_rho_scaling(a, M);
        terms[{a.V.degree(), e}] += a.V.leading().to_double() * coef;
    }
    if (!terms.empty()) {
        int deg = -1;
        for (const auto& [k, c] : terms) deg = std::max(deg, k.first);
        for (const auto& [k, c] : terms) {
            if (k.first != deg) continue;
            // Among equal N-degree terms keep the one with the smallest M exponent.
            if (rep.leading_coefficient == 0.0 || k.second < rep.leading_m_exponent) {
                rep.leading_coefficient = c;
                rep.leading_degree = deg;
                rep.leading_m_exponent = k.second;
            }
        }
    }

    // Trace.
    for (const auto& a : rep.statements) {
        std::ostringstream os;
        const auto& vars = a.problem.vars;
        os << a.label << ": loops (";
        for (std::size_t i = 0; i < vars.size(); ++i) os << (i ? ", " : "") << vars[i];
        os << "), Dom = " << a.problem.dom_expr();
        rep.trace.push_back(os.str());
        os.str("");
        if (a.intensity.status == Intensity::Status::Unbounded) {
            os << "  chi(X) unbounded";
        } else {
            if (a.problem.symmetric()) {
                std::size_t d = 0, m = 0;
                for (const auto& t : a.problem.terms)
                    if (!t.vars.empty()) {
                        d = t.vars.size();
                        ++m;
                    }
                os << "  chi(X) = ((X - " << fmt(a.problem.constant_part()) << ")/"
                   << fmt(static_cast<double>(m) * a.problem.terms.front().weight) << ")^("
                   << rational_str(static_cast<double>(vars.size()) / static_cast<double>(d))
                   << ") [symmetric KKT]";
            } else {
                os << "  chi(X) by log-barrier Newton, 8 starts";
            }
            os << ", X0 = " << fmt(a.intensity.X0) << ", chi(X0) = " << fmt(a.intensity.chi)
               << ", rho = chi(X0)/(X0-M) = " << fmt(a.intensity.rho);
        }
        rep.trace.push_back(os.str());
        os.str("");
        os << "  u = " << a.u;
        if (a.capped) os << ", rho capped at 1/u = " << fmt(a.rho);
        os << "; |V| = " << (a.V.coeffs().empty() && a.V_value != 0 ? fmt(a.V_value) : a.V.str())
           << " = " << fmt(a.V_value) << "; Q >= |V|/rho = " << fmt(a.Q);
        rep.trace.push_back(os.str());
        for (const auto& n : a.notes) rep.trace.push_back("  note: " + n);
        if (a.trivial) rep.warnings.push_back(a.label + ": " + a.notes.back());
    }
    for (const auto& adj : rep.adjustments) {
        std::ostringstream os;
        if (adj.kind == ReuseAdjustment::Kind::OutputOverlap) {
            os << "output reuse " << adj.producer << " -> " << adj.consumer << " on " << adj.array
               << ": dominator weight " << fmt(adj.amount)
               << (adj.amount >= 1.0 ? " (unchanged)" : "");
        } else {
            os << "input reuse " << adj.producer << ", " << adj.consumer << " on " << adj.array
               << ": subtract " << fmt(adj.amount);
        }
        rep.trace.push_back(os.str());
    }
    rep.trace.push_back("Q_seq >= " + fmt(rep.Q_seq) + "  leading term " + rep.leading_term());
    return rep;
}

BoundReport parallel_bound(const daap::DaapProgram& prog, const daap::Bindings& params, double M,
                           long long P) {
    if (P < 1) throw DomainError("P must be positive");
    BoundReport rep = program_bound(prog, params, M);
    rep.P = P;
    const auto Pl = static_cast<long double>(P);
    for (auto& a : rep.statements) {
        a.V_value /= Pl;
        a.Q /= Pl;
    }
    for (auto& adj : rep.adjustments)
        if (adj.kind == ReuseAdjustment::Kind::InputOverlap) adj.amount /= static_cast<double>(P);
    rep.reuse_total /= Pl;
    rep.Q_par = rep.Q_seq / Pl;
    rep.trace.push_back("Q_par >= Q_seq / P = " + fmt(rep.Q_par));
    if (prog.params.size() == 1) {
        double N = static_cast<double>(params.at(prog.params.front()));
        double lo = N * N / static_cast<double>(P);
        double hi = N * N / std::pow(static_cast<double>(P), 2.0 / 3.0);
        if (M < lo || M > hi)
            rep.warnings.push_back("M = " + fmt(M) + " is outside the memory-dependent regime [" +
                                   fmt(lo) + ", " + fmt(hi) + "]");
    }
    return rep;
}

double lu_bound(double N, double M, double P) {
    return (2 * N * N * N - 6 * N * N + 4 * N) / (3 * P * std::sqrt(M)) + N * (N - 1) / (2 * P);
}

double cholesky_bound(double N, double M, double P) {
    return N * N * N / (3 * P * std::sqrt(M)) + N * N / (2 * P) + N / P;
}

}  // namespace confluxlab::bounds
