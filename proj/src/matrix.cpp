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
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "confluxlab/error.hpp"
#include "confluxlab/matrix.hpp"

namespace confluxlab {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix T(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) T(j, i) = (*this)(i, j);
    return T;
}

DenseMatrix DenseMatrix::select_rows(const std::vector<long long>& order) const {
    DenseMatrix R(order.size(), cols);
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) R(i, j) = (*this)(static_cast<std::size_t>(order[i]), j);
    return R;
}

double frobenius_norm(const DenseMatrix& A) {
    long double s = 0;
    for (double x : A.data) s += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(s));
}

DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B) {
    DenseMatrix C(A.rows, B.cols);
    gemm(A, B, C, 1.0, 0.0);
    return C;
}

DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw DomainError("subtract: shape mismatch");
    DenseMatrix C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] -= B.data[i];
    return C;
}

double max_abs_diff(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw DomainError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < A.data.size(); ++i) m = std::max(m, std::fabs(A.data[i] - B.data[i]));
    return m;
}

DenseMatrix random_matrix(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseMatrix A(n, n);
    for (double& x : A.data) x = dist(rng);
    return A;
}

DenseMatrix random_spd(std::size_t n, std::uint64_t seed) {
    DenseMatrix B = random_matrix(n, seed);
    DenseMatrix A = matmul(B.transpose(), B);
    for (std::size_t i = 0; i < n; ++i) A(i, i) += static_cast<double>(n);
    return A;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw ParseError(0, 0, "truncated matrix file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace

void write_matrix(const DenseMatrix& A, std::ostream& out) {
    put_le<std::int64_t>(out, static_cast<std::int64_t>(A.rows));
    put_le<std::int64_t>(out, static_cast<std::int64_t>(A.cols));
    for (double x : A.data) put_le<double>(out, x);
}

DenseMatrix read_matrix(std::istream& in) {
    auto r = get_le<std::int64_t>(in);
    auto c = get_le<std::int64_t>(in);
    if (r < 0 || c < 0 || r > (1 << 20) || c > (1 << 20))
        throw ParseError(0, 0, "implausible matrix header");
    DenseMatrix A(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    for (double& x : A.data) {
        x = get_le<double>(in);
        if (!std::isfinite(x)) throw DomainError("matrix file contains a non-finite entry");
    }
    return A;
}

void save_matrix(const DenseMatrix& A, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path + "'");
    write_matrix(A, out);
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, 0, "cannot open matrix file '" + path + "'");
    return read_matrix(in);
}

}  // namespace confluxlab
