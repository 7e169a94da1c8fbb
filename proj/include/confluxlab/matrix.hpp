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

// Dense row-major matrices and reference kernels.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace confluxlab {

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static DenseMatrix identity(std::size_t n);
    DenseMatrix transpose() const;
    /// Rows listed in `order`, all columns.
    DenseMatrix select_rows(const std::vector<long long>& order) const;
    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

double frobenius_norm(const DenseMatrix& A);
DenseMatrix matmul(const DenseMatrix& A, const DenseMatrix& B);
DenseMatrix subtract(const DenseMatrix& A, const DenseMatrix& B);
double max_abs_diff(const DenseMatrix& A, const DenseMatrix& B);

/// Entries uniform in [-1, 1] from a 64-bit Mersenne twister.
DenseMatrix random_matrix(std::size_t n, std::uint64_t seed);
/// B^T B + n I for a seeded random B.
DenseMatrix random_spd(std::size_t n, std::uint64_t seed);

/// Little-endian int64 rows, int64 cols, then row-major float64.
void write_matrix(const DenseMatrix& A, std::ostream& out);
DenseMatrix read_matrix(std::istream& in);
void save_matrix(const DenseMatrix& A, const std::string& path);
DenseMatrix load_matrix(const std::string& path);

struct LUFactors {
    DenseMatrix L;                // unit lower
    DenseMatrix U;                // upper
    std::vector<long long> perm;  // row i of P*A is row perm[i] of A
};

/// Partial pivoting; ties go to the smallest row index. Throws
/// DomainError on an exactly zero pivot column.
LUFactors getrf_seq(const DenseMatrix& A);

/// Lower Cholesky factor. Throws DomainError on a nonpositive pivot.
DenseMatrix potrf_seq(const DenseMatrix& A);

enum class Side { Left, Right };
enum class Uplo { Lower, Upper };

/// Solves T X = B (Left) or X T = B (Right) for triangular T.
DenseMatrix trsm(const DenseMatrix& T, const DenseMatrix& B, Side side, Uplo uplo,
                 bool unit_diagonal);

/// C := alpha A B + beta C
void gemm(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha, double beta);

/// gemm restricted to the lower triangle of square C; the strict upper
/// triangle is left untouched.
void gemmt(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha, double beta);

/// gemmt on a block of a larger matrix: entry (i, j) of C is updated only
/// when row_ids[i] >= col_ids[j].
void gemmt_block(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha,
                 const std::vector<long long>& row_ids, const std::vector<long long>& col_ids);

}  // namespace confluxlab
