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
#include <mutex>
#include <random>
#include <sstream>

#include "confluxlab/bounds.hpp"
#include "confluxlab/error.hpp"

namespace confluxlab::bounds {

std::string ChiProblem::dom_expr() const {
    std::ostringstream os;
    bool first = true;
    for (const Term& t : terms) {
        if (!first) os << " + ";
        first = false;
        if (t.weight != 1.0) os << t.weight << "*";
        if (t.vars.empty()) {
            os << "1";
            continue;
        }
        for (std::size_t k = 0; k < t.vars.size(); ++k) {
            if (k) os << "*";
            os << "|D_" << vars[static_cast<std::size_t>(t.vars[k])] << "|";
        }
    }
    return first ? "0" : os.str();
}

bool ChiProblem::unbounded() const {
    std::vector<char> used(vars.size(), 0);
    for (const Term& t : terms)
        for (int v : t.vars) used[static_cast<std::size_t>(v)] = 1;
    return std::find(used.begin(), used.end(), 0) != used.end();
}

double ChiProblem::constant_part() const {
    double c = 0.0;
    for (const Term& t : terms)
        if (t.vars.empty()) c += t.weight;
    return c;
}

bool ChiProblem::symmetric() const {
    if (vars.empty() || unbounded()) return false;
    std::size_t degree = 0;
    double weight = 0.0;
    std::vector<int> count(vars.size(), 0);
    for (const Term& t : terms) {
        if (t.vars.empty()) continue;
        if (degree == 0) {
            degree = t.vars.size();
            weight = t.weight;
        }
        if (t.vars.size() != degree || t.weight != weight) return false;
        for (int v : t.vars) ++count[static_cast<std::size_t>(v)];
    }
    return std::adjacent_find(count.begin(), count.end(), std::not_equal_to<>()) == count.end();
}

ChiProblem make_chi_problem(const daap::DaapProgram& prog, std::size_t stmt,
                            const std::vector<double>& weights) {
    const daap::Statement& st = prog.statements.at(stmt);
    ChiProblem p;
    p.vars = prog.loop_vars(st);
    for (std::size_t j = 0; j < st.inputs.size(); ++j) {
        ChiProblem::Term t;
        t.array = st.inputs[j].array;
        t.weight = j < weights.size() ? weights[j] : 1.0;
        for (const auto& v : st.inputs[j].distinct_vars()) {
            auto it = std::find(p.vars.begin(), p.vars.end(), v);
            t.vars.push_back(static_cast<int>(it - p.vars.begin()));
        }
        p.terms.push_back(std::move(t));
    }
    return p;
}

namespace {

// Solves the dense system A x = b in place (partial pivoting).
bool solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(A[r * n + c]) > std::fabs(A[piv * n + c])) piv = r;
        if (std::fabs(A[piv * n + c]) < 1e-300) return false;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = A[r * n + c] / A[c * n + c];
            for (std::size_t k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = b[c];
        for (std::size_t k = c + 1; k < n; ++k) s -= A[c * n + k] * b[k];
        b[c] = s / A[c * n + c];
    }
    return true;
}

struct Barrier {
    const ChiProblem& prob;
    double logL;  // log of the budget left after constant terms

    // g(x) = log sum_j w_j exp(a_j . x) over non-constant terms.
    double g(const std::vector<double>& x) const {
        double mx = -INFINITY;
        std::vector<double> e;
        for (const auto& t : prob.terms) {
            if (t.vars.empty()) continue;
            double s = std::log(t.weight);
            for (int v : t.vars) s += x[static_cast<std::size_t>(v)];
            e.push_back(s);
            mx = std::max(mx, s);
        }
        double acc = 0.0;
        for (double s : e) acc += std::exp(s - mx);
        return mx + std::log(acc);
    }

    bool interior(const std::vector<double>& x) const {
        for (double xi : x)
            if (!(xi > 0.0)) return false;
        return g(x) < logL;
    }

    double phi(const std::vector<double>& x, double mu) const {
        double s = -mu * std::log(logL - g(x));
        for (double xi : x) s -= xi + mu * std::log(xi);
        return s;
    }

    void derivs(const std::vector<double>& x, double mu, std::vector<double>& grad,
                std::vector<double>& hess) const {
        const std::size_t n = x.size();
        std::vector<double> pj;
        std::vector<const ChiProblem::Term*> live;
        double mx = -INFINITY;
        for (const auto& t : prob.terms) {
            if (t.vars.empty()) continue;
            double s = std::log(t.weight);
            for (int v : t.vars) s += x[static_cast<std::size_t>(v)];
            pj.push_back(s);
            live.push_back(&t);
            mx = std::max(mx, s);
        }
        double tot = 0.0;
        for (double& s : pj) tot += (s = std::exp(s - mx));
        for (double& s : pj) s /= tot;
        std::vector<double> gg(n, 0.0), H(n * n, 0.0);
        for (std::size_t j = 0; j < live.size(); ++j) {
            for (int a : live[j]->vars) {
                gg[static_cast<std::size_t>(a)] += pj[j];
                for (int b : live[j]->vars)
                    H[static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)] += pj[j];
            }
        }
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) H[a * n + b] -= gg[a] * gg[b];
        const double slack = logL - g(x);
        grad.assign(n, 0.0);
        hess.assign(n * n, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            grad[a] = -1.0 + mu * gg[a] / slack - mu / x[a];
            for (std::size_t b = 0; b < n; ++b)
                hess[a * n + b] = mu * (H[a * n + b] / slack + gg[a] * gg[b] / (slack * slack));
            hess[a * n + a] += mu / (x[a] * x[a]);
        }
    }

    // Barrier path from a strictly feasible start; returns sum(x) at the end.
    double run(std::vector<double>& x, bool& converged) const {
        const std::size_t n = x.size();
        converged = true;
        std::vector<double> grad, hess, step(n), trial(n);
        for (double mu = 1.0; mu > 1e-14; mu *= 0.1) {
            bool inner_ok = false;
            for (int it = 0; it < 200; ++it) {
                derivs(x, mu, grad, hess);
                step = grad;
                for (double& s : step) s = -s;
                if (!solve_dense(hess, step, n)) break;
                double dec = 0.0;
                for (std::size_t k = 0; k < n; ++k) dec -= grad[k] * step[k];
                if (dec / 2.0 < 1e-16 * std::max(1.0, mu)) {
                    inner_ok = true;
                    break;
                }
                double t = 1.0;
                const double f0 = phi(x, mu);
                for (int ls = 0; ls < 80; ++ls, t *= 0.5) {
                    for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + t * step[k];
                    if (interior(trial) && phi(trial, mu) <= f0 - 0.25 * t * dec) break;
                }
                if (!interior(trial)) break;
                x = trial;
            }
            if (!inner_ok) converged = false;
        }
        double s = 0.0;
        for (double xi : x) s += xi;
        return s;
    }
};

}  // namespace

ChiSolution solve_chi(const ChiProblem& prob, double X) {
    ChiSolution sol;
    const std::size_t n = prob.vars.size();
    const double c0 = prob.constant_part();
    if (prob.unbounded()) {
        sol.bounded = false;
        sol.feasible = X >= c0;
        sol.chi = std::numeric_limits<double>::infinity();
        return sol;
    }
    if (n == 0) {
        sol.feasible = X >= c0;
        sol.chi = sol.feasible ? 1.0 : 0.0;
        sol.analytic = true;
        return sol;
    }
    double wsum = 0.0;
    for (const auto& t : prob.terms)
        if (!t.vars.empty()) wsum += t.weight;
    const double L = X - c0;
    if (L < wsum * (1.0 - 1e-12)) {
        sol.feasible = false;
        sol.chi = 0.0;
        return sol;
    }
    sol.feasible = true;
    if (L <= wsum * (1.0 + 1e-12)) {
        sol.chi = 1.0;
        sol.D.assign(n, 1.0);
        sol.analytic = true;
        return sol;
    }
    if (prob.symmetric()) {
        std::size_t d = 0, m = 0;
        double w = 1.0;
        for (const auto& t : prob.terms) {
            if (t.vars.empty()) continue;
            d = t.vars.size();
            w = t.weight;
            ++m;
        }
        double D = std::pow(L / (static_cast<double>(m) * w), 1.0 / static_cast<double>(d));
        sol.D.assign(n, D);
        sol.chi = std::pow(D, static_cast<double>(n));
        sol.analytic = true;
        return sol;
    }
    Barrier bar{prob, std::log(L)};
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    double best = -INFINITY;
    std::vector<double> best_x;
    bool any_converged = false;
    for (int start = 0; start < 8; ++start) {
        std::vector<double> dir(n, 1.0);
        if (start > 0)
            for (double& v : dir) v = unif(rng);
        // Scale the direction until the start point is strictly inside.
        double alpha = 1.0;
        std::vector<double> x(n);
        for (int k = 0; k < 200; ++k, alpha *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) x[i] = alpha * dir[i];
            if (bar.interior(x) && bar.g(x) < bar.logL - 0.1 * (bar.logL - std::log(wsum))) break;
        }
        if (!bar.interior(x)) continue;
        bool conv = false;
        double val = bar.run(x, conv);
        any_converged = any_converged || conv;
        if (val > best) {
            best = val;
            best_x = x;
        }
    }
    if (best_x.empty()) throw DomainError("chi solver found no interior start");
    sol.converged = any_converged;
    sol.gap = 1e-14 * static_cast<double>(n + 1);
    sol.chi = std::exp(best);
    for (double xi : best_x) sol.D.push_back(std::exp(xi));
    return sol;
}

namespace {

Intensity search_intensity(const ChiProblem& prob, double M);

// The result depends only on the term structure and M, and derivations
// revisit the same statements many times.
std::string intensity_key(const ChiProblem& prob, double M) {
    std::ostringstream os;
    os.precision(17);
    os << M << "|" << prob.vars.size();
    for (const auto& t : prob.terms) {
        os << "|" << t.weight << ":";
        for (int v : t.vars) os << v << ",";
    }
    return os.str();
}

}  // namespace

Intensity maximize_intensity(const ChiProblem& prob, double M) {
    static std::mutex mu;
    static std::map<std::string, Intensity> cache;
    const std::string key = intensity_key(prob, M);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    Intensity r = search_intensity(prob, M);
    std::lock_guard<std::mutex> lk(mu);
    cache.emplace(key, r);
    return r;
}

namespace {

Intensity search_intensity(const ChiProblem& prob, double M) {
    Intensity r;
    if (prob.unbounded()) {
        r.status = Intensity::Status::Unbounded;
        r.diagnostic = "a loop variable appears in no input access, so chi(X) is unbounded";
        return r;
    }
    const std::size_t n = prob.vars.size();
    const double c0 = prob.constant_part();
    double wsum = 0.0;
    for (const auto& t : prob.terms)
        if (!t.vars.empty()) wsum += t.weight;
    const double xmin = c0 + wsum;  // smallest X admitting a subcomputation
    const double lo = std::max(M, xmin);
    const double hi = std::max(64.0 * M, 2.0 * xmin);
    auto rho_at = [&](double X, ChiSolution* out = nullptr) {
        ChiSolution s = solve_chi(prob, X);
        if (out) *out = s;
        return s.chi / (X - M);
    };

    if (prob.symmetric()) {
        std::size_t d = 0;
        for (const auto& t : prob.terms)
            if (!t.vars.empty()) d = t.vars.size();
        const double p = static_cast<double>(n) / static_cast<double>(d);
        if (p > 1.0 && M > c0) {
            double X0 = (p * M - c0) / (p - 1.0);
            if (X0 < xmin) X0 = xmin;
            if (X0 > M && X0 <= hi) {
                ChiSolution s;
                r.rho = rho_at(X0, &s);
                r.X0 = X0;
                r.chi = s.chi;
                r.D = s.D;
                r.status = Intensity::Status::Found;
                return r;
            }
        }
    }

    const int G = 240;
    std::vector<double> xs, rs;
    for (int i = 0; i <= G; ++i) {
        double X = lo * std::pow(hi / lo, static_cast<double>(i) / G);
        if (X <= M) continue;
        xs.push_back(X);
        rs.push_back(rho_at(X));
    }
    if (xs.empty()) throw DomainError("empty search range for X0");
    std::size_t best = static_cast<std::size_t>(std::min_element(rs.begin(), rs.end()) - rs.begin());
    double X0 = xs[best];
    if (best + 1 == xs.size()) {
        r.status = Intensity::Status::Boundary;
        r.diagnostic = "chi(X)/(X-M) keeps decreasing up to X = " + std::to_string(hi) +
                       "; using the value there";
    } else {
        double a = best == 0 ? xs[0] : xs[best - 1];
        double b = xs[best + 1];
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - gr * (b - a), e = a + gr * (b - a);
        double fc = rho_at(c), fe = rho_at(e);
        while (b - a > 1e-10 * b) {
            if (fc < fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - gr * (b - a);
                fc = rho_at(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + gr * (b - a);
                fe = rho_at(e);
            }
        }
        X0 = 0.5 * (a + b);
        if (best == 0 && rho_at(xs[0]) < rho_at(X0)) X0 = xs[0];
        r.status = Intensity::Status::Found;
    }
    ChiSolution s;
    r.rho = rho_at(X0, &s);
    r.X0 = X0;
    r.chi = s.chi;
    r.D = s.D;
    if (!s.converged) r.diagnostic += (r.diagnostic.empty() ? "" : "; ") + std::string("barrier solver did not fully converge");
    return r;
}

}  // namespace

}  // namespace confluxlab::bounds
