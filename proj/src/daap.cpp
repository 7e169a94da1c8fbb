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
#include <sstream>

#include "confluxlab/daap.hpp"
#include "confluxlab/error.hpp"

namespace confluxlab::daap {

long long Affine::eval(const Bindings& env) const {
    long long v = constant;
    for (const auto& [name, c] : coeffs) {
        auto it = env.find(name);
        if (it == env.end()) throw DomainError("unbound variable '" + name + "' in bound");
        v += c * it->second;
    }
    return v;
}

std::string Affine::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, c] : coeffs) {
        if (c == 0) continue;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        long long m = c < 0 ? -c : c;
        if (m != 1) os << m << "*";
        os << name;
        first = false;
    }
    if (first) {
        os << constant;
    } else if (constant != 0) {
        os << (constant < 0 ? " - " : " + ") << (constant < 0 ? -constant : constant);
    }
    return os.str();
}

int AccessFn::access_dimension() const { return static_cast<int>(distinct_vars().size()); }

std::vector<std::string> AccessFn::distinct_vars() const {
    std::vector<std::string> out;
    for (const auto& v : indices)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

std::string AccessFn::str() const {
    std::string s = array;
    if (indices.empty()) return s + "[]";
    for (const auto& v : indices) s += "[" + v + "]";
    return s;
}

std::string_view to_string(OpKind op) {
    switch (op) {
        case OpKind::GenericF: return "generic-f";
        case OpKind::MulAdd: return "mul-add";
        case OpKind::Div: return "div";
        case OpKind::Sqrt: return "sqrt";
    }
    return "?";
}

int DaapProgram::max_depth() const {
    int d = 0;
    for (const auto& s : statements) d = std::max(d, s.depth());
    return d;
}

std::set<std::string> DaapProgram::shared_arrays() const {
    std::map<std::string, int> uses;
    for (const auto& s : statements) {
        std::set<std::string> mine{s.output.array};
        for (const auto& a : s.inputs) mine.insert(a.array);
        for (const auto& a : mine) ++uses[a];
    }
    std::set<std::string> out;
    for (const auto& [a, n] : uses)
        if (n > 1) out.insert(a);
    return out;
}

std::vector<std::string> DaapProgram::loop_vars(const Statement& st) const {
    std::vector<std::string> out;
    for (int l : st.loops) out.push_back(loops[static_cast<std::size_t>(l)].name);
    return out;
}

const Statement& DaapProgram::statement(std::string_view label) const {
    for (const auto& s : statements)
        if (s.label == label) return s;
    throw DomainError("no statement labelled '" + std::string(label) + "'");
}

int access_dimension(const Statement& st, std::size_t input_index) {
    if (input_index >= st.inputs.size())
        throw DomainError("access index " + std::to_string(input_index) + " out of range");
    return st.inputs[input_index].access_dimension();
}

namespace {

std::vector<long long> coords(const AccessFn& a, const Bindings& env) {
    std::vector<long long> c;
    c.reserve(a.indices.size());
    for (const auto& v : a.indices) c.push_back(env.at(v));
    return c;
}

long long count_rec(const DaapProgram& prog, const std::vector<int>& loops, std::size_t level,
                    Bindings& env) {
    const IterVar& var = prog.loops[static_cast<std::size_t>(loops[level])];
    long long lo = var.lower.eval(env);
    long long hi = var.upper.eval(env);
    if (hi <= lo) return 0;
    if (level + 1 == loops.size()) return hi - lo;
    long long total = 0;
    for (long long x = lo; x < hi; ++x) {
        env[var.name] = x;
        total += count_rec(prog, loops, level + 1, env);
    }
    env.erase(var.name);
    return total;
}

}  // namespace

std::optional<AccessViolation> validate_disjoint_access(const DaapProgram& prog,
                                                        const Bindings& params) {
    std::optional<AccessViolation> found;
    for_each_instance(prog, params, [&](std::size_t si, const Bindings& env) {
        if (found) return;
        const Statement& st = prog.statements[si];
        std::vector<std::vector<long long>> pts;
        pts.reserve(st.inputs.size());
        for (const auto& a : st.inputs) pts.push_back(coords(a, env));
        for (std::size_t a = 0; a < st.inputs.size() && !found; ++a) {
            for (std::size_t b = a + 1; b < st.inputs.size(); ++b) {
                if (st.inputs[a].array != st.inputs[b].array || pts[a] != pts[b]) continue;
                AccessViolation v;
                v.statement = st.label;
                for (const auto& name : prog.loop_vars(st)) v.point[name] = env.at(name);
                v.first = a;
                v.second = b;
                std::ostringstream os;
                os << "statement " << st.label << " references the same vertex through "
                   << st.inputs[a].str() << " and " << st.inputs[b].str() << " at";
                for (const auto& [k, x] : v.point) os << " " << k << "=" << x;
                v.message = os.str();
                found = std::move(v);
                break;
            }
        }
    });
    return found;
}

long long domain_size(const DaapProgram& prog, std::size_t stmt, const Bindings& params) {
    const Statement& st = prog.statements.at(stmt);
    if (st.loops.empty()) return 1;
    Bindings env = params;
    return count_rec(prog, st.loops, 0, env);
}

Polynomial domain_polynomial(const DaapProgram& prog, std::size_t stmt) {
    if (prog.params.size() > 1)
        throw DomainError("symbolic domain counting supports a single parameter");
    const Statement& st = prog.statements.at(stmt);
    if (prog.params.empty()) {
        long long n = domain_size(prog, stmt, {});
        return Polynomial({Rational{n}});
    }
    const std::string& p = prog.params.front();
    const long long x0 = 12;
    const std::size_t samples = static_cast<std::size_t>(st.depth()) + 1;
    std::vector<long long> values;
    for (std::size_t i = 0; i < samples; ++i)
        values.push_back(domain_size(prog, stmt, {{p, x0 + static_cast<long long>(i)}}));
    Polynomial poly = Polynomial::interpolate(x0, values);
    for (long long x : {x0 + static_cast<long long>(samples), x0 + 9, 24LL, 31LL}) {
        long long exact = domain_size(prog, stmt, {{p, x}});
        if (!(poly.eval_exact(x) == Rational{exact}))
            throw DomainError("iteration count of " + st.label + " is not polynomial in " + p);
    }
    return poly;
}

double evaluate(const Expr& e, const std::vector<double>& inputs) {
    auto arg = [&](std::size_t i) { return evaluate(e.args[i], inputs); };
    switch (e.kind) {
        case Expr::Kind::Number: return e.number;
        case Expr::Kind::Ref: return inputs.at(static_cast<std::size_t>(e.ref));
        case Expr::Kind::Neg: return -arg(0);
        case Expr::Kind::Add: return arg(0) + arg(1);
        case Expr::Kind::Sub: return arg(0) - arg(1);
        case Expr::Kind::Mul: return arg(0) * arg(1);
        case Expr::Kind::Div: return arg(0) / arg(1);
        case Expr::Kind::Call: break;
    }
    if (e.callee == "sqrt" && e.args.size() == 1) return std::sqrt(arg(0));
    if (e.callee == "abs" && e.args.size() == 1) return std::fabs(arg(0));
    if (e.callee == "min" && e.args.size() == 2) return std::min(arg(0), arg(1));
    if (e.callee == "max" && e.args.size() == 2) return std::max(arg(0), arg(1));
    // Uninterpreted functions evaluate to the sum of their arguments.
    double s = 0.0;
    for (std::size_t i = 0; i < e.args.size(); ++i) s += arg(i);
    return s;
}

void execute(const DaapProgram& prog, const Bindings& params, ArrayStore& arrays) {
    for_each_instance(prog, params, [&](std::size_t si, const Bindings& env) {
        const Statement& st = prog.statements[si];
        std::vector<double> in;
        in.reserve(st.inputs.size());
        for (const auto& a : st.inputs) {
            const auto& arr = arrays[a.array];
            auto it = arr.find(coords(a, env));
            in.push_back(it == arr.end() ? 0.0 : it->second);
        }
        arrays[st.output.array][coords(st.output, env)] = evaluate(st.rhs, in);
    });
}

}  // namespace confluxlab::daap
