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

#include "confluxlab/error.hpp"
#include "confluxlab/factor.hpp"

namespace confluxlab::factor {

std::size_t BlockCyclicLayout::local_row(long long r) const {
    return static_cast<std::size_t>((r / v) / grid.Px * v + r % v);
}

std::size_t BlockCyclicLayout::local_col(long long c) const {
    return static_cast<std::size_t>((c / v) / grid.Py * v + c % v);
}

std::pair<int, int> BlockCyclicLayout::slice(int pk) const {
    const int c = grid.c();
    return {pk * v / c, (pk + 1) * v / c};
}

void BlockCyclicLayout::validate() const {
    grid.validate();
    if (N <= 0) throw DomainError("matrix size must be positive");
    if (v <= 0) throw DomainError("block size v must be positive");
    if (N % v != 0)
        throw DomainError("N mod v = 0 violated: N = " + std::to_string(N) +
                          ", v = " + std::to_string(v));
    if ((N / v) % grid.Px != 0)
        throw DomainError("(N/v) mod Px = 0 violated: N/v = " + std::to_string(N / v) +
                          ", Px = " + std::to_string(grid.Px));
    if (v < grid.c())
        throw DomainError("block size v = " + std::to_string(v) + " is below c = " +
                          std::to_string(grid.c()));
    if ((grid.Px & (grid.Px - 1)) != 0)
        throw DomainError("Px must be a power of two for the pivoting tournament");
}

int default_block_size(int N, const sim::GridSpec& grid, double M) {
    const int c = grid.c();
    double raw = 2.0 * grid.P() * M / (static_cast<double>(N) * N);
    int v = static_cast<int>(std::floor(raw));
    v = std::clamp(v, c, std::max(c, 64));
    auto ok = [&](int b) { return b >= c && N % b == 0 && (N / b) % grid.Px == 0; };
    for (int b = v; b >= c; --b)
        if (ok(b)) return b;
    for (int b = v + 1; b <= N; ++b)
        if (ok(b)) return b;
    throw DomainError("no block size fits N = " + std::to_string(N) + " on grid " + grid.str());
}

int padded_size(int N, int v, const sim::GridSpec& grid) {
    const int unit = v * grid.Px;
    return (N + unit - 1) / unit * unit;
}

DenseMatrix pad_identity(const DenseMatrix& A, std::size_t n) {
    if (A.rows != A.cols || n < A.rows) throw DomainError("pad_identity: bad target size");
    DenseMatrix B = DenseMatrix::identity(n);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) B(i, j) = A(i, j);
    return B;
}

bool PivotRecord::is_bijection() const {
    std::vector<char> seen(perm.size(), 0);
    for (long long p : perm) {
        if (p < 0 || static_cast<std::size_t>(p) >= perm.size() || seen[static_cast<std::size_t>(p)])
            return false;
        seen[static_cast<std::size_t>(p)] = 1;
    }
    return true;
}

std::string phase_name(int t, int step) {
    return "t=" + std::to_string(t) + "/s=" + std::to_string(step);
}

std::string index_phase_name(int t) { return "t=" + std::to_string(t) + "/s=2i"; }

double conflux_model(double N, double P, double M) {
    return N * N * N / (P * std::sqrt(M)) + N * N / P;
}

}  // namespace confluxlab::factor
