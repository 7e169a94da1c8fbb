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

// Disjoint-array-access programs: loop nests of statements whose access
// function vectors are tuples of iteration variables.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "confluxlab/polynomial.hpp"

namespace confluxlab::daap {

/// Values for symbolic parameters and iteration variables.
using Bindings = std::map<std::string, long long>;

/// sum_v coeff[v] * v + constant, where v ranges over parameters and
/// iteration variables of strictly outer loops.
struct Affine {
    std::map<std::string, long long> coeffs;
    long long constant = 0;

    long long eval(const Bindings& env) const;
    std::string str() const;
};

struct IterVar {
    std::string name;
    Affine lower;  // inclusive
    Affine upper;  // exclusive
};

struct AccessFn {
    std::string array;
    std::vector<std::string> indices;  // one iteration variable per array dimension

    /// Number of distinct iteration variables in the access function vector.
    int access_dimension() const;
    std::vector<std::string> distinct_vars() const;
    std::string str() const;
};

enum class OpKind { GenericF, MulAdd, Div, Sqrt };

std::string_view to_string(OpKind op);

/// Right-hand side expression. `Ref` nodes index into Statement::inputs.
struct Expr {
    enum class Kind { Number, Ref, Neg, Add, Sub, Mul, Div, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    int ref = -1;
    std::string callee;
    std::vector<Expr> args;
};

struct Statement {
    std::string label;
    AccessFn output;
    std::vector<AccessFn> inputs;
    OpKind op = OpKind::GenericF;
    Expr rhs;
    std::vector<int> loops;  // indices into DaapProgram::loops, outermost first
    int line = 0;

    int depth() const { return static_cast<int>(loops.size()); }
};

/// Execution tree: loops and statements in source order.
struct Node {
    enum class Kind { Loop, Stmt };
    Kind kind = Kind::Stmt;
    int index = -1;  // loop index or statement index
    std::vector<Node> body;
};

struct DaapProgram {
    std::vector<std::string> params;
    std::vector<IterVar> loops;
    std::vector<Statement> statements;
    std::vector<Node> body;

    int max_depth() const;
    /// Arrays referenced by more than one statement.
    std::set<std::string> shared_arrays() const;
    std::vector<std::string> loop_vars(const Statement& st) const;
    const Statement& statement(std::string_view label) const;
};

/// Parses the textual DAAP format; see docs/daap.ebnf.
DaapProgram parse_daap(std::string_view text);
DaapProgram load_daap(const std::string& path);

int access_dimension(const Statement& st, std::size_t input_index);

struct AccessViolation {
    std::string statement;
    Bindings point;
    std::size_t first = 0;   // input indices of the colliding accesses
    std::size_t second = 0;
    std::string message;
};

/// Checks that within every statement instance no two input accesses name
/// the same vertex. Returns the first violation in execution order.
std::optional<AccessViolation> validate_disjoint_access(const DaapProgram& prog,
                                                        const Bindings& params);

/// Visits every statement instance in execution order.
template <typename Visitor>
void for_each_instance(const DaapProgram& prog, const Bindings& params, Visitor&& visit);

/// Exact number of iteration points of a statement for concrete parameters.
long long domain_size(const DaapProgram& prog, std::size_t stmt, const Bindings& params);

/// Iteration-domain cardinality as a polynomial in the program's single
/// symbolic parameter. Throws DomainError when the count is not polynomial
/// over the sampled range or the program has more than one parameter.
Polynomial domain_polynomial(const DaapProgram& prog, std::size_t stmt);

/// Runs the program on concrete arrays. Elements missing from `arrays`
/// read as 0.
using ArrayStore = std::map<std::string, std::map<std::vector<long long>, double>>;
void execute(const DaapProgram& prog, const Bindings& params, ArrayStore& arrays);

double evaluate(const Expr& e, const std::vector<double>& inputs);

// ---------------------------------------------------------------------------

namespace detail {

template <typename Visitor>
void walk(const DaapProgram& prog, const std::vector<Node>& nodes, Bindings& env,
          Visitor& visit) {
    for (const Node& n : nodes) {
        if (n.kind == Node::Kind::Stmt) {
            visit(static_cast<std::size_t>(n.index), static_cast<const Bindings&>(env));
            continue;
        }
        const IterVar& var = prog.loops[static_cast<std::size_t>(n.index)];
        long long lo = var.lower.eval(env);
        long long hi = var.upper.eval(env);
        for (long long x = lo; x < hi; ++x) {
            env[var.name] = x;
            walk(prog, n.body, env, visit);
        }
        env.erase(var.name);
    }
}

}  // namespace detail

template <typename Visitor>
void for_each_instance(const DaapProgram& prog, const Bindings& params, Visitor&& visit) {
    Bindings env = params;
    detail::walk(prog, prog.body, env, visit);
}

}  // namespace confluxlab::daap
