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

// 2.5D LU with tournament pivoting and row masking, and its Cholesky
// counterpart, running on the simulated machine.

#include <string>
#include <vector>

#include "confluxlab/matrix.hpp"
#include "confluxlab/simnet.hpp"

namespace confluxlab::factor {

/// Candidate selection by partial pivoting on an m x v block. Rows with id
/// -1 are padding. Returns the chosen row positions in pivot order and the
/// packed LU (unit L below the diagonal, U on and above) of those rows.
struct Selection {
    std::vector<std::size_t> chosen;
    DenseMatrix lu;
    bool deficient = false;  // a zero pivot or a padding row was chosen
};

Selection select_pivots(const DenseMatrix& block, const std::vector<long long>& ids, int v);

struct TournamentResult {
    std::vector<long long> pivots;  // global row indices, pivot order
    DenseMatrix A00;                // packed LU of the winning rows
    int rounds = 0;
};

/// Butterfly tournament among `group` (size a power of two). Every member
/// passes its candidate rows (first v columns) and their global indices and
/// gets the same winners back. Block traffic is tagged `tag`, index traffic
/// `tag + 1`; the caller's phase for index words is `index_phase`.
TournamentResult tournament_pivot(sim::RankCtx& ctx, const std::vector<int>& group,
                                  const DenseMatrix& rows, const std::vector<long long>& ids, int v,
                                  int tag, const std::string& block_phase,
                                  const std::string& index_phase);

/// Tile (ti, tj) of size v lives on ranks (ti mod Px, tj mod Py, *).
struct BlockCyclicLayout {
    sim::GridSpec grid;
    int N = 0;
    int v = 0;

    int tiles() const { return N / v; }
    int row_owner(long long r) const { return static_cast<int>((r / v) % grid.Px); }
    int col_owner(long long c) const { return static_cast<int>((c / v) % grid.Py); }
    /// Local index of a global row/column within its owner's storage.
    std::size_t local_row(long long r) const;
    std::size_t local_col(long long c) const;
    std::size_t local_rows() const { return static_cast<std::size_t>(N / grid.Px); }
    std::size_t local_cols() const { return static_cast<std::size_t>(N / grid.Py); }
    /// Columns [lo, hi) of a v-wide block handled by layer pk.
    std::pair<int, int> slice(int pk) const;
    /// Throws DomainError naming the violated constraint.
    void validate() const;
};

/// Default block size: 2 P M / N^2 clamped to [c, 64], then lowered to the
/// nearest size satisfying the divisibility constraints.
int default_block_size(int N, const sim::GridSpec& grid, double M);

/// Smallest size >= N compatible with v and the grid.
int padded_size(int N, int v, const sim::GridSpec& grid);

/// A embedded in the top-left corner of an n x n identity.
DenseMatrix pad_identity(const DenseMatrix& A, std::size_t n);

struct PivotRecord {
    std::vector<std::vector<long long>> steps;
    std::vector<long long> perm;  // row i of P*A is row perm[i] of A
    std::vector<char> mask;       // 1 once a row has been chosen

    bool is_bijection() const;
};

struct FactorResult {
    DenseMatrix L;
    DenseMatrix U;  // empty for Cholesky
    PivotRecord pivots;
    sim::CommStats stats;
    std::vector<std::string> warnings;
    double residual = 0.0;  // ||P A - L U||_F / ||A||_F, or ||L L^T - A||_F / ||A||_F
    int N = 0;
    int v = 0;
    double M = 0.0;
    sim::GridSpec grid;
};

struct FactorOptions {
    sim::SimOptions sim;
};

FactorResult conflux(const DenseMatrix& A, const sim::GridSpec& grid, int v, double M,
                     const FactorOptions& opts = {});
FactorResult confchox(const DenseMatrix& A, const sim::GridSpec& grid, int v, double M,
                      const FactorOptions& opts = {});

/// Sequential emulation of the blocked, row-masked LU with one-rank
/// tournaments; the reference the distributed run must reproduce on one rank.
FactorResult conflux_reference(const DenseMatrix& A, int v);

/// Phase label used for step `step` (1..11) of iteration `t` (1-based).
std::string phase_name(int t, int step);
std::string index_phase_name(int t);

struct StepAudit {
    int t = 0;
    std::string step;  // "1".."11", "2i" for pivot-index words
    long long measured = 0;  // max words received by one rank
    double predicted = 0.0;
};

std::vector<StepAudit> step_cost_audit(const FactorResult& run, int t);

/// Words per rank of steps 8 and 10 summed over all iterations and ranks.
long long a11_phase_volume(const FactorResult& run);

/// N^3 / (P sqrt(M)) + N^2 / P
double conflux_model(double N, double P, double M);

}  // namespace confluxlab::factor
