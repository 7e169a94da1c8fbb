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

// Simulated distributed-memory machine: P ranks on a [Px, Py, Pz] grid
// exchanging explicit messages, with per-rank word accounting.

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace confluxlab::sim {

struct GridSpec {
    int Px = 1;
    int Py = 1;
    int Pz = 1;

    int P() const { return Px * Py * Pz; }
    int P1() const { return Px * Py; }
    int c() const { return Pz; }
    /// Throws DomainError unless Px = Py and all extents are positive.
    void validate() const;
    int rank_of(int pi, int pj, int pk) const { return (pk * Py + pj) * Px + pi; }
    std::array<int, 3> coords(int rank) const {
        return {rank % Px, (rank / Px) % Py, rank / (Px * Py)};
    }
    std::string str() const;
    /// "X,Y,Z"
    static GridSpec parse(const std::string& text);
};

using Payload = std::vector<double>;

struct RankStats {
    long long sent = 0;
    long long recv = 0;
    long long msgs = 0;
    long long peak = 0;
    bool over_budget = false;

    friend bool operator==(const RankStats&, const RankStats&) = default;
};

struct CommStats {
    GridSpec grid;
    std::vector<RankStats> ranks;
    /// Per-phase words, indexed by rank.
    std::map<std::string, std::vector<long long>> phase_sent;
    std::map<std::string, std::vector<long long>> phase_recv;

    long long total_sent() const;
    long long total_recv() const;
    long long max_recv() const;
    long long phase_max_recv(const std::string& phase) const;
    long long phase_total_recv(const std::string& phase) const;

    friend bool operator==(const CommStats& a, const CommStats& b) {
        return a.ranks == b.ranks && a.phase_sent == b.phase_sent && a.phase_recv == b.phase_recv;
    }
};

/// `# schema_version=1`, then `rank,pi,pj,pk,sent_words,recv_words,msgs,peak_words`.
std::string comm_report_csv(const CommStats& s);

enum class Tree { Flat, Binomial };

struct SimOptions {
    bool hard_memory = false;
    Tree tree = Tree::Flat;
    int max_threads = 0;  // 0: CONFLUXLAB_THREADS or unlimited
};

class Machine;

/// Handle given to each rank's entry procedure. Only this rank's traffic
/// passes through it.
class RankCtx {
public:
    int rank() const { return rank_; }
    std::array<int, 3> coords() const;
    const GridSpec& grid() const;
    double memory() const;

    void send(int dst, const Payload& data, int tag = 0);
    /// Blocks until a message from `src` with `tag` arrives. When
    /// `expected_words` is non-negative a size mismatch is an error.
    Payload recv(int src, int tag = 0, long long expected_words = -1);

    /// `data` is the payload at the root and the result everywhere.
    void broadcast(int root, const std::vector<int>& group, Payload& data, int tag = 0);
    /// Elementwise sum into `data` at the root; other ranks keep their input.
    void reduce(int root, const std::vector<int>& group, Payload& data, int tag = 0);
    /// Root passes one piece per group member; everyone gets its own piece.
    Payload scatter(int root, const std::vector<int>& group, const std::vector<Payload>& pieces,
                    int tag = 0);
    /// Every member receives every other member's contribution, in group order.
    std::vector<Payload> allgather(const std::vector<int>& group, const Payload& mine, int tag = 0);

    /// Subsequent traffic is attributed to this phase label.
    void set_phase(const std::string& phase);
    /// Reports the words this rank currently holds; updates the peak.
    void note_resident(long long words);

private:
    friend class Machine;
    RankCtx(Machine* m, int rank) : m_(m), rank_(rank) {}
    Machine* m_;
    int rank_;
};

struct RunOutput {
    CommStats stats;
    std::vector<std::string> warnings;
};

/// Runs `entry` once per rank, each on its own thread, and returns the
/// aggregated counters. Rethrows the first rank failure; deadlock and
/// unconsumed messages raise DomainError.
RunOutput run(const GridSpec& grid, double M, const std::function<void(RankCtx&)>& entry,
              const SimOptions& opts = {});

template <typename R>
struct SpawnResult {
    CommStats stats;
    std::vector<R> results;
    std::vector<std::string> warnings;
};

template <typename R, typename F>
SpawnResult<R> spawn(const GridSpec& grid, double M, F&& fn, const SimOptions& opts = {}) {
    SpawnResult<R> out;
    out.results.resize(static_cast<std::size_t>(grid.P()));
    RunOutput r = run(
        grid, M,
        [&](RankCtx& ctx) { out.results[static_cast<std::size_t>(ctx.rank())] = fn(ctx); }, opts);
    out.stats = std::move(r.stats);
    out.warnings = std::move(r.warnings);
    return out;
}

/// Ranks sharing the given coordinates; -1 leaves that axis free. Ordered by rank.
std::vector<int> group_of(const GridSpec& g, int pi, int pj, int pk);

}  // namespace confluxlab::sim
