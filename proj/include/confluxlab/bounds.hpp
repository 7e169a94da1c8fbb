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
#pragma once

// I/O lower bounds for DAAP programs via per-statement computational
// intensity, reuse composition and parallel scaling.

#include <limits>
#include <string>
#include <vector>

#include "confluxlab/daap.hpp"
#include "confluxlab/polynomial.hpp"

namespace confluxlab::bounds {

/// max prod_t D_t  s.t.  sum_j w_j prod_{t in term j} D_t <= X,  D_t >= 1.
struct ChiProblem {
    struct Term {
        double weight = 1.0;
        std::vector<int> vars;  // empty: scalar access, constant contribution
        std::string array;
    };
    std::vector<std::string> vars;
    std::vector<Term> terms;

    /// Printable dominator size, e.g. "|D_i|*|D_j| + |D_i|*|D_k|".
    std::string dom_expr() const;
    /// Some variable appears in no term, so the objective is unbounded.
    bool unbounded() const;
    /// All non-constant terms share degree and weight and every variable
    /// appears equally often; the optimum then has all D_t equal.
    bool symmetric() const;
    double constant_part() const;
};

/// Builds the problem from a statement's input accesses. `weights`, when
/// non-empty, scales each input access term.
ChiProblem make_chi_problem(const daap::DaapProgram& prog, std::size_t stmt,
                            const std::vector<double>& weights = {});

struct ChiSolution {
    double chi = 0.0;
    std::vector<double> D;
    bool feasible = false;
    bool bounded = true;
    bool analytic = false;
    bool converged = true;
    double gap = 0.0;  // duality-gap estimate of the barrier method (log scale)
};

ChiSolution solve_chi(const ChiProblem& prob, double X);

struct Intensity {
    enum class Status { Found, Boundary, Unbounded };
    Status status = Status::Found;
    double X0 = std::numeric_limits<double>::quiet_NaN();
    double chi = 0.0;
    double rho = std::numeric_limits<double>::infinity();
    std::vector<double> D;  // optimal extents at X0
    std::string diagnostic;
};

/// Minimizes chi(X)/(X - M) over X in (M, 64M] with chi(X) >= 1. Status
/// Boundary means the minimum sits at the right end of the range; the value
/// there is still a valid, weaker intensity.
Intensity maximize_intensity(const ChiProblem& prob, double M);

struct StatementAnalysis {
    std::string label;
    std::size_t index = 0;
    int depth = 0;
    ChiProblem problem;
    Intensity intensity;
    int u = 0;             // out-degree-one predecessors per vertex
    double rho = 0.0;      // effective intensity after the cap
    bool capped = false;
    bool trivial = false;  // unbounded intensity with u = 0: contributes 0
    Polynomial V;          // iteration-domain cardinality in the parameter
    long double V_value = 0;
    long double Q = 0;     // V_value / rho (0 when trivial)
    std::vector<std::string> notes;

    /// Access size of input `j` in one maximal subcomputation at X0.
    double access_size(std::size_t j) const;
};

/// Number of input accesses whose access dimension equals the nest depth
/// and whose vertices have out-degree one in a probe cDAG.
int out_degree_one_count(const daap::DaapProgram& prog, std::size_t stmt);

StatementAnalysis analyze_statement(const daap::DaapProgram& prog, std::size_t stmt, double M,
                                    const daap::Bindings& params,
                                    const std::vector<double>& weights = {});

struct OutputReuse {
    double raw = 0.0;        // term / rho_producer
    double effective = 0.0;  // never below the unadjusted term
};

OutputReuse output_reuse_adjust(double term, double rho_producer);

/// min over the two statements of (access size at X0) * (number of maximal
/// subcomputations); a capped statement contributes its vertex count.
double input_reuse(const StatementAnalysis& S, std::size_t access_S, const StatementAnalysis& T,
                   std::size_t access_T);

struct ReuseAdjustment {
    enum class Kind { InputOverlap, OutputOverlap };
    Kind kind = Kind::InputOverlap;
    std::string array;
    std::string producer;  // output overlap: producing statement; input: first statement
    std::string consumer;
    double amount = 0.0;   // input: words subtracted; output: dominator weight applied
};

struct BoundReport {
    std::vector<StatementAnalysis> statements;
    std::vector<ReuseAdjustment> adjustments;
    daap::Bindings params;
    double M = 0.0;
    long long P = 1;
    long double reuse_total = 0;
    long double Q_seq = 0;
    long double Q_par = 0;
    std::vector<std::string> trace;
    std::vector<std::string> warnings;

    /// Dominant term as coefficient * N^degree / (P * M^m_exponent).
    double leading_coefficient = 0.0;
    int leading_degree = 0;
    double leading_m_exponent = 0.0;
    std::string leading_term() const;
};

BoundReport program_bound(const daap::DaapProgram& prog, const daap::Bindings& params, double M);
BoundReport parallel_bound(const daap::DaapProgram& prog, const daap::Bindings& params, double M,
                           long long P);

/// Closed forms for LU and Cholesky.
double lu_bound(double N, double M, double P);
double cholesky_bound(double N, double M, double P);

}  // namespace confluxlab::bounds
