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

// Sequential red-blue and parallel multi-color pebble games on a Cdag.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "confluxlab/cdag.hpp"

namespace confluxlab::pebble {

enum class MoveKind { Load, Store, Compute, Free, Acquire };

struct Move {
    MoveKind kind = MoveKind::Compute;
    int vertex = -1;
    int rank = 0;  // parallel game only

    friend bool operator==(const Move&, const Move&) = default;
};

using Schedule = std::vector<Move>;

/// One move per line: `load|store|compute|free <vertex>` for the sequential
/// game, `compute|acquire|free <rank> <vertex>` for the parallel game.
Schedule parse_schedule(const std::string& text, const Cdag& g);
std::string format_schedule(const Schedule& s, const Cdag& g, bool parallel);

struct GameConfig {
    int M = 2;
    bool parallel = false;
    int P = 1;
    /// Parallel game: charge the sending rank for an acquire as well.
    bool charge_sender = false;
};

/// Rank owning an input at the start of the parallel game.
int input_owner(const Cdag& g, int v, int P);

struct RunResult {
    bool legal = true;
    bool complete = false;
    std::size_t failed_step = 0;  // index of the first illegal move
    std::string reason;
    long long loads = 0;
    long long stores = 0;
    long long Q = 0;                    // sequential: loads + stores; parallel: sum over ranks
    std::vector<long long> rank_io;     // parallel: per-rank charged acquires
    long long max_rank_io = 0;
};

RunResult run_schedule(const Cdag& g, const Schedule& s, const GameConfig& cfg);

struct OracleCaps {
    std::size_t max_compute_vertices = 14;
    std::size_t max_vertices = 64;
    int max_memory = 5;
    int max_ranks = 3;
    std::size_t max_states = 20'000'000;
};

struct OracleResult {
    long long Q = 0;
    long long max_rank_io = 0;  // parallel game: per-rank maximum along the witness
    Schedule witness;
    std::size_t states_explored = 0;
};

/// Exact minimum I/O over all legal schedules (recomputation allowed).
/// Throws CapExceeded when the instance exceeds `caps` and DomainError
/// when no legal complete schedule exists.
OracleResult brute_force_optimal_Q(const Cdag& g, const GameConfig& cfg,
                                   const OracleCaps& caps = {});

/// Size of a minimum dominator set of H: every path from an input vertex to
/// a vertex of H contains a member. Non-input members of H are excluded from
/// the dominator; an input in H dominates itself.
long long dom_min(const Cdag& g, const std::vector<int>& H);

/// A minimum dominator set realizing dom_min.
std::vector<int> dom_min_set(const Cdag& g, const std::vector<int>& H);

/// Vertices of H with no immediate successor in H.
std::vector<int> min_set(const Cdag& g, const std::vector<int>& H);

/// Dominator size of a rectangular subcomputation of a statement: the sum
/// over input accesses of the product of the per-variable extents.
long long rectangular_dom_size(const daap::Statement& st,
                               const std::map<std::string, long long>& extents);

struct PartitionCheck {
    bool ok = true;
    std::string violation;
};

PartitionCheck check_x_partition(const Cdag& g, const std::vector<std::vector<int>>& parts,
                                 long long X);

}  // namespace confluxlab::pebble
