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

#include <sstream>

#include "confluxlab/cdag.hpp"
#include "confluxlab/daap.hpp"
#include "confluxlab/error.hpp"
#include "testing.hpp"

using namespace confluxlab;
using confluxlab::testing::program;

namespace {

std::string parse_error_of(const std::string& text) {
    try {
        daap::parse_daap(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

std::size_t index_of(const daap::DaapProgram& p, const std::string& label) {
    for (std::size_t i = 0; i < p.statements.size(); ++i)
        if (p.statements[i].label == label) return i;
    return p.statements.size();
}

}  // namespace

TEST_CASE("lu program has two statements and depth three") {
    auto p = program("lu");
    REQUIRE(p.statements.size() == 2);
    CHECK(p.statements[0].label == "S1");
    CHECK(p.statements[1].label == "S2");
    CHECK(p.max_depth() == 3);
    CHECK(p.statements[0].depth() == 2);
    CHECK(p.statements[0].op == daap::OpKind::Div);
    CHECK(p.statements[1].op == daap::OpKind::MulAdd);
}

TEST_CASE("cholesky program has three statements") {
    auto p = program("cholesky");
    REQUIRE(p.statements.size() == 3);
    CHECK(p.statements[0].label == "S1");
    CHECK(p.statements[1].label == "S2");
    CHECK(p.statements[2].label == "S3");
    CHECK(p.statements[0].op == daap::OpKind::Sqrt);
}

TEST_CASE("parser errors") {
    CHECK(parse_error_of("param N\n").find("no statements") != std::string::npos);
    CHECK(parse_error_of("param N\nfor i in 0..N {\n  S1: a[j] = f(b[i])\n}\n")
              .find("undeclared iteration variable 'j'") != std::string::npos);
    CHECK(parse_error_of("param N\nfor i in 0..N*N {\n  S1: a[i] = f(b[i])\n}\n")
              .find("non-affine bound") != std::string::npos);

    try {
        daap::parse_daap("param N\nfor i in 0..N {\n  S1 a[i] = f(b[i])\n}\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 0);
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("access dimension") {
    auto p = program("lu");
    const auto& s1 = p.statements[0];
    // inputs of S1: A[i][k], A[k][k]
    CHECK(daap::access_dimension(s1, 0) == 2);
    CHECK(daap::access_dimension(s1, 1) == 1);
    auto sc = program("scalar_chain");
    CHECK(daap::access_dimension(sc.statements[0], 0) == 0);
    CHECK_THROWS_AS(daap::access_dimension(s1, 5), DomainError);
}

TEST_CASE("disjoint access validation") {
    CHECK_FALSE(daap::validate_disjoint_access(program("lu"), {{"N", 4}}).has_value());
    CHECK_FALSE(daap::validate_disjoint_access(program("cholesky"), {{"N", 5}}).has_value());

    auto bad = daap::parse_daap("param N\nfor i in 0..N {\n  S1: B[i] = f(A[i], A[i])\n}\n");
    auto v = daap::validate_disjoint_access(bad, {{"N", 3}});
    REQUIRE(v.has_value());
    CHECK(v->statement == "S1");
    CHECK(v->point.at("i") == 0);
    CHECK(v->first == 0);
    CHECK(v->second == 1);
}

TEST_CASE("cdag vertex counts match iteration domains") {
    auto lu = program("lu");
    Cdag g = build_cdag(lu, {{"N", 4}});
    CHECK(g.statement_vertices(0).size() == 4 * 3 / 2);
    // sum over k of (N-k-1)^2
    CHECK(g.statement_vertices(1).size() == 9 + 4 + 1);
    CHECK(g.inputs().size() == 16);

    auto ch = program("cholesky");
    Cdag gc = build_cdag(ch, {{"N", 4}});
    CHECK(gc.statement_vertices(2).size() == 4 * 3 * 2 / 6);
    CHECK(gc.statement_vertices(0).size() == 4);

    auto one = daap::parse_daap("for i in 0..1 {\n  for j in 0..1 {\n    S: c[i][j] = f(a[i][j])\n  }\n}\n");
    CHECK(build_cdag(one, {}).compute_vertices().size() == 1);
}

TEST_CASE("cdag structure invariants") {
    auto lu = program("lu");
    Cdag g = build_cdag(lu, {{"N", 5}});
    CHECK_NOTHROW(g.topological_order());
    for (int v : g.compute_vertices()) {
        const auto& st = lu.statements[static_cast<std::size_t>(g.vertex(v).statement)];
        CHECK(g.preds(v).size() == st.inputs.size());
    }
    // Versions of one element form a chain.
    int a22 = g.find("A[2][2]@2");
    REQUIRE(a22 >= 0);
    CHECK(g.find("A[2][2]@1") >= 0);
    CHECK(g.find("A[2][2]@3") < 0);

    Cdag h = build_cdag(lu, {{"N", 5}});
    std::ostringstream a, b;
    write_cdag(g, a);
    write_cdag(h, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("cdag text round trip and errors") {
    auto lu = program("lu");
    Cdag g = build_cdag(lu, {{"N", 3}});
    std::ostringstream os;
    write_cdag(g, os);
    std::istringstream is(os.str());
    Cdag back = read_cdag(is);
    CHECK(back.size() == g.size());
    CHECK(back.edge_count() == g.edge_count());
    CHECK(back.outputs().size() == g.outputs().size());

    std::istringstream bad("v a in\nv b out\ne b a\n");
    CHECK_THROWS_AS(read_cdag(bad), ParseError);
    std::istringstream cyc("v a in\nv b mid\nv c mid\ne a b\ne b c\ne c b\n");
    CHECK_THROWS_AS(read_cdag(cyc), DomainError);
}

TEST_CASE("vertex cap refuses large domains") {
    auto gemm = program("gemm");
    CHECK_THROWS_AS(build_cdag(gemm, {{"N", 20}}, 1000), CapExceeded);
}

TEST_CASE("domain polynomials") {
    auto lu = program("lu");
    Polynomial v1 = daap::domain_polynomial(lu, index_of(lu, "S1"));
    Polynomial v2 = daap::domain_polynomial(lu, index_of(lu, "S2"));
    CHECK(v1.degree() == 2);
    CHECK(v1.eval_exact(4) == Rational{6});
    CHECK(v2.degree() == 3);
    CHECK(v2.leading() == Rational(1, 3));
    CHECK(v2.eval_exact(4) == Rational{14});

    auto ch = program("cholesky");
    Polynomial v3 = daap::domain_polynomial(ch, index_of(ch, "S3"));
    CHECK(v3.leading() == Rational(1, 6));
    CHECK(v3.eval_exact(10) == Rational{120});
}

TEST_CASE("executing the lu program factors a matrix") {
    auto lu = program("lu");
    const long long n = 3;
    const double a[3][3] = {{4, 3, 2}, {2, 5, 1}, {1, 2, 6}};
    daap::ArrayStore store;
    for (long long i = 0; i < n; ++i)
        for (long long j = 0; j < n; ++j) store["A"][{i, j}] = a[i][j];
    daap::execute(lu, {{"N", n}}, store);
    for (long long i = 0; i < n; ++i) {
        for (long long j = 0; j < n; ++j) {
            double s = 0.0;
            for (long long k = 0; k <= std::min(i, j); ++k) {
                const double l = k == i ? 1.0 : store["A"][{i, k}];
                s += l * store["A"][{k, j}];
            }
            CHECK(s == doctest::Approx(a[i][j]).epsilon(1e-12));
        }
    }
}
