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
#include <cmath>
#include <numeric>

#include "confluxlab/error.hpp"
#include "confluxlab/matrix.hpp"

namespace confluxlab {

LUFactors getrf_seq(const DenseMatrix& A) {
    if (A.rows != A.cols) throw DomainError("getrf: matrix must be square");
    const std::size_t n = A.rows;
    DenseMatrix W = A;
    std::vector<long long> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            double a = std::fabs(W(i, k)), b = std::fabs(W(p, k));
            if (a > b || (a == b && perm[i] < perm[p])) p = i;
        }
        if (W(p, k) == 0.0) throw DomainError("singular matrix: zero pivot in column " + std::to_string(k));
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(W(k, j), W(p, j));
            std::swap(perm[k], perm[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double l = W(i, k) / W(k, k);
            W(i, k) = l;
            for (std::size_t j = k + 1; j < n; ++j) W(i, j) -= l * W(k, j);
        }
    }
    LUFactors f{DenseMatrix(n, n), DenseMatrix(n, n), perm};
    for (std::size_t i = 0; i < n; ++i) {
        f.L(i, i) = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j < i) f.L(i, j) = W(i, j);
            else f.U(i, j) = W(i, j);
        }
    }
    return f;
}

DenseMatrix potrf_seq(const DenseMatrix& A) {
    if (A.rows != A.cols) throw DomainError("potrf: matrix must be square");
    const std::size_t n = A.rows;
    DenseMatrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = A(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0))
            throw DomainError("matrix is not symmetric positive definite (pivot " +
                              std::to_string(j) + ")");
        L(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

DenseMatrix trsm(const DenseMatrix& T, const DenseMatrix& B, Side side, Uplo uplo,
                 bool unit_diagonal) {
    const std::size_t n = T.rows;
    if (T.cols != n) throw DomainError("trsm: triangular factor must be square");
    DenseMatrix X = B;
    auto diag = [&](std::size_t i) { return unit_diagonal ? 1.0 : T(i, i); };
    if (side == Side::Left) {
        if (B.rows != n) throw DomainError("trsm: shape mismatch");
        for (std::size_t c = 0; c < B.cols; ++c) {
            if (uplo == Uplo::Lower) {
                for (std::size_t i = 0; i < n; ++i) {
                    double s = X(i, c);
                    for (std::size_t k = 0; k < i; ++k) s -= T(i, k) * X(k, c);
                    X(i, c) = s / diag(i);
                }
            } else {
                for (std::size_t i = n; i-- > 0;) {
                    double s = X(i, c);
                    for (std::size_t k = i + 1; k < n; ++k) s -= T(i, k) * X(k, c);
                    X(i, c) = s / diag(i);
                }
            }
        }
    } else {
        if (B.cols != n) throw DomainError("trsm: shape mismatch");
        for (std::size_t r = 0; r < B.rows; ++r) {
            if (uplo == Uplo::Upper) {
                for (std::size_t j = 0; j < n; ++j) {
                    double s = X(r, j);
                    for (std::size_t k = 0; k < j; ++k) s -= X(r, k) * T(k, j);
                    X(r, j) = s / diag(j);
                }
            } else {
                for (std::size_t j = n; j-- > 0;) {
                    double s = X(r, j);
                    for (std::size_t k = j + 1; k < n; ++k) s -= X(r, k) * T(k, j);
                    X(r, j) = s / diag(j);
                }
            }
        }
    }
    return X;
}

void gemm(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha, double beta) {
    if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols)
        throw DomainError("gemm: shape mismatch");
    for (std::size_t i = 0; i < C.rows; ++i) {
        for (std::size_t j = 0; j < C.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) s += A(i, k) * B(k, j);
            C(i, j) = alpha * s + (beta == 0.0 ? 0.0 : beta * C(i, j));
        }
    }
}

void gemmt(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha, double beta) {
    if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols || C.rows != C.cols)
        throw DomainError("gemmt: shape mismatch");
    for (std::size_t i = 0; i < C.rows; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) s += A(i, k) * B(k, j);
            C(i, j) = alpha * s + (beta == 0.0 ? 0.0 : beta * C(i, j));
        }
    }
}

void gemmt_block(const DenseMatrix& A, const DenseMatrix& B, DenseMatrix& C, double alpha,
                 const std::vector<long long>& row_ids, const std::vector<long long>& col_ids) {
    if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols || row_ids.size() != C.rows ||
        col_ids.size() != C.cols)
        throw DomainError("gemmt_block: shape mismatch");
    for (std::size_t i = 0; i < C.rows; ++i) {
        for (std::size_t j = 0; j < C.cols; ++j) {
            if (row_ids[i] < col_ids[j]) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) s += A(i, k) * B(k, j);
            C(i, j) += alpha * s;
        }
    }
}

}  // namespace confluxlab
