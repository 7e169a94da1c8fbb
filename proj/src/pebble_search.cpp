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
#include <array>
#include <bit>
#include <deque>
#include <unordered_map>

#include "confluxlab/error.hpp"
#include "confluxlab/pebble.hpp"

namespace confluxlab::pebble {

namespace {

inline std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

template <std::size_t K>
struct KeyHash {
    std::size_t operator()(const std::array<std::uint64_t, K>& k) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (auto w : k) h = mix(h ^ w) + 0x9e3779b97f4a7c15ULL;
        return static_cast<std::size_t>(h);
    }
};

struct Node {
    int dist;
    std::uint32_t parent;
    Move move;
};

// 0-1 BFS over game states; moves cost 0 or 1 (2 when both parties pay).
template <std::size_t K, typename Expand, typename Goal>
OracleResult search(const std::array<std::uint64_t, K>& start, Expand&& expand, Goal&& goal,
                    std::size_t max_states) {
    using Key = std::array<std::uint64_t, K>;
    std::vector<Key> keys;
    std::vector<Node> nodes;
    std::unordered_map<Key, std::uint32_t, KeyHash<K>> index;
    std::deque<std::uint32_t> dq;
    keys.push_back(start);
    nodes.push_back({0, UINT32_MAX, {}});
    index.emplace(start, 0);
    dq.push_back(0);
    std::vector<char> done(1, 0);
    while (!dq.empty()) {
        std::uint32_t cur = dq.front();
        dq.pop_front();
        if (done[cur]) continue;
        done[cur] = 1;
        const Key key = keys[cur];
        const int d = nodes[cur].dist;
        if (goal(key)) {
            OracleResult r;
            r.Q = d;
            r.states_explored = keys.size();
            for (std::uint32_t at = cur; nodes[at].parent != UINT32_MAX; at = nodes[at].parent)
                r.witness.push_back(nodes[at].move);
            std::reverse(r.witness.begin(), r.witness.end());
            return r;
        }
        expand(key, [&](const Key& next, int cost, const Move& m) {
            auto it = index.find(next);
            if (it == index.end()) {
                if (keys.size() >= max_states)
                    throw CapExceeded("pebbling search exceeded " + std::to_string(max_states) +
                                      " states");
                auto id = static_cast<std::uint32_t>(keys.size());
                keys.push_back(next);
                nodes.push_back({d + cost, cur, m});
                done.push_back(0);
                index.emplace(next, id);
                if (cost == 0) dq.push_front(id);
                else dq.push_back(id);
                return;
            }
            Node& n = nodes[it->second];
            if (!done[it->second] && d + cost < n.dist) {
                n = {d + cost, cur, m};
                if (cost == 0) dq.push_front(it->second);
                else dq.push_back(it->second);
            }
        });
    }
    throw DomainError("no complete pebbling exists for this cDAG and memory size");
}

inline bool has(std::uint64_t mask, int v) { return (mask >> v) & 1U; }

void check_caps(const Cdag& g, const GameConfig& cfg, const OracleCaps& caps) {
    std::size_t ncompute = g.compute_vertices().size();
    if (g.size() > caps.max_vertices || g.size() > 64)
        throw CapExceeded("brute force limited to " + std::to_string(caps.max_vertices) +
                          " vertices, cDAG has " + std::to_string(g.size()));
    if (ncompute > caps.max_compute_vertices)
        throw CapExceeded("brute force limited to " + std::to_string(caps.max_compute_vertices) +
                          " compute vertices, cDAG has " + std::to_string(ncompute));
    if (cfg.M > caps.max_memory)
        throw CapExceeded("brute force limited to M <= " + std::to_string(caps.max_memory));
    if (cfg.M < 1) throw DomainError("memory size M must be positive");
    if (cfg.parallel && (cfg.P < 1 || cfg.P > caps.max_ranks || cfg.P > 3))
        throw CapExceeded("parallel brute force limited to P <= " +
                          std::to_string(std::min(caps.max_ranks, 3)));
    if (!ncompute) return;
    if (cfg.M < g.max_in_degree() + 1)
        throw DomainError("M = " + std::to_string(cfg.M) + " is below max in-degree + 1 = " +
                          std::to_string(g.max_in_degree() + 1) + "; no compute move is legal");
}

OracleResult sequential(const Cdag& g, const GameConfig& cfg, const OracleCaps& caps) {
    const int n = static_cast<int>(g.size());
    std::vector<std::uint64_t> pred_mask(g.size(), 0);
    std::uint64_t input_mask = 0, output_mask = 0;
    for (int v = 0; v < n; ++v) {
        for (int p : g.preds(v)) pred_mask[static_cast<std::size_t>(v)] |= 1ULL << p;
        if (g.is_input(v)) input_mask |= 1ULL << v;
        if (g.is_output(v)) output_mask |= 1ULL << v;
    }
    // key[0] = red set, key[1] = blue set (inputs are permanently blue).
    using Key = std::array<std::uint64_t, 2>;
    Key start{0, input_mask};
    auto goal = [&](const Key& k) { return (k[1] & output_mask) == output_mask; };
    auto expand = [&](const Key& k, auto&& emit) {
        const std::uint64_t red = k[0], blue = k[1];
        const bool room = std::popcount(red) < cfg.M;
        for (int v = 0; v < n; ++v) {
            if (has(red, v)) continue;
            if (room && !has(input_mask, v) &&
                (pred_mask[static_cast<std::size_t>(v)] & red) == pred_mask[static_cast<std::size_t>(v)])
                emit(Key{red | (1ULL << v), blue}, 0, Move{MoveKind::Compute, v, 0});
        }
        for (int v = 0; v < n; ++v)
            if (room && !has(red, v) && has(blue, v))
                emit(Key{red | (1ULL << v), blue}, 1, Move{MoveKind::Load, v, 0});
        for (int v = 0; v < n; ++v)
            if (has(red, v) && !has(blue, v))
                emit(Key{red, blue | (1ULL << v)}, 1, Move{MoveKind::Store, v, 0});
        for (int v = 0; v < n; ++v)
            if (has(red, v)) emit(Key{red & ~(1ULL << v), blue}, 0, Move{MoveKind::Free, v, 0});
    };
    return search<2>(start, expand, goal, caps.max_states);
}

OracleResult parallel(const Cdag& g, const GameConfig& cfg, const OracleCaps& caps) {
    const int n = static_cast<int>(g.size());
    const int P = cfg.P;
    std::vector<std::uint64_t> pred_mask(g.size(), 0);
    std::uint64_t input_mask = 0, output_mask = 0;
    using Key = std::array<std::uint64_t, 3>;
    Key start{0, 0, 0};
    for (int v = 0; v < n; ++v) {
        for (int p : g.preds(v)) pred_mask[static_cast<std::size_t>(v)] |= 1ULL << p;
        if (g.is_input(v)) {
            input_mask |= 1ULL << v;
            start[static_cast<std::size_t>(input_owner(g, v, P))] |= 1ULL << v;
        }
        if (g.is_output(v)) output_mask |= 1ULL << v;
    }
    for (int p = 0; p < P; ++p)
        if (std::popcount(start[static_cast<std::size_t>(p)]) > cfg.M)
            throw DomainError("initial input placement exceeds M on rank " + std::to_string(p));
    const int acquire_cost = cfg.charge_sender ? 2 : 1;
    auto goal = [&](const Key& k) {
        return ((k[0] | k[1] | k[2]) & output_mask) == output_mask;
    };
    auto expand = [&](const Key& k, auto&& emit) {
        const std::uint64_t any = k[0] | k[1] | k[2];
        for (int p = 0; p < P; ++p) {
            const auto pi = static_cast<std::size_t>(p);
            const std::uint64_t mine = k[pi];
            const bool room = std::popcount(mine) < cfg.M;
            for (int v = 0; v < n; ++v) {
                if (has(mine, v)) continue;
                const std::uint64_t pm = pred_mask[static_cast<std::size_t>(v)];
                if (room && !has(input_mask, v) && (pm & mine) == pm) {
                    Key nk = k;
                    nk[pi] |= 1ULL << v;
                    emit(nk, 0, Move{MoveKind::Compute, v, p});
                }
            }
            for (int v = 0; v < n; ++v) {
                if (room && !has(mine, v) && has(any, v)) {
                    Key nk = k;
                    nk[pi] |= 1ULL << v;
                    emit(nk, acquire_cost, Move{MoveKind::Acquire, v, p});
                }
            }
            for (int v = 0; v < n; ++v) {
                if (has(mine, v)) {
                    Key nk = k;
                    nk[pi] &= ~(1ULL << v);
                    emit(nk, 0, Move{MoveKind::Free, v, p});
                }
            }
        }
    };
    OracleResult r = search<3>(start, expand, goal, caps.max_states);
    RunResult replay = run_schedule(g, r.witness, cfg);
    r.max_rank_io = replay.max_rank_io;
    return r;
}

}  // namespace

OracleResult brute_force_optimal_Q(const Cdag& g, const GameConfig& cfg, const OracleCaps& caps) {
    check_caps(g, cfg, caps);
    return cfg.parallel ? parallel(g, cfg, caps) : sequential(g, cfg, caps);
}

}  // namespace confluxlab::pebble
