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
#include <limits>
#include <queue>

#include "confluxlab/error.hpp"
#include "confluxlab/pebble.hpp"

namespace confluxlab::pebble {

namespace {

// Dinic max-flow on the vertex-split graph.
class FlowNet {
public:
    explicit FlowNet(std::size_t n) : head_(n, -1), level_(n), it_(n) {}

    void add(int u, int v, long long cap) {
        arcs_.push_back({v, head_[static_cast<std::size_t>(u)], cap});
        head_[static_cast<std::size_t>(u)] = static_cast<int>(arcs_.size()) - 1;
        arcs_.push_back({u, head_[static_cast<std::size_t>(v)], 0});
        head_[static_cast<std::size_t>(v)] = static_cast<int>(arcs_.size()) - 1;
    }

    long long maxflow(int s, int t) {
        long long flow = 0;
        while (bfs(s, t)) {
            it_ = head_;
            while (long long f = dfs(s, t, kInf)) flow += f;
        }
        return flow;
    }

    /// Nodes reachable from s in the residual graph after maxflow.
    std::vector<char> reachable(int s) const {
        std::vector<char> seen(head_.size(), 0);
        std::queue<int> q;
        q.push(s);
        seen[static_cast<std::size_t>(s)] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e = head_[static_cast<std::size_t>(u)]; e >= 0; e = arcs_[static_cast<std::size_t>(e)].next) {
                const Arc& a = arcs_[static_cast<std::size_t>(e)];
                if (a.cap > 0 && !seen[static_cast<std::size_t>(a.to)]) {
                    seen[static_cast<std::size_t>(a.to)] = 1;
                    q.push(a.to);
                }
            }
        }
        return seen;
    }

    static constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

private:
    struct Arc {
        int to;
        int next;
        long long cap;
    };

    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        level_[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e = head_[static_cast<std::size_t>(u)]; e >= 0; e = arcs_[static_cast<std::size_t>(e)].next) {
                const Arc& a = arcs_[static_cast<std::size_t>(e)];
                if (a.cap > 0 && level_[static_cast<std::size_t>(a.to)] < 0) {
                    level_[static_cast<std::size_t>(a.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    q.push(a.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    long long dfs(int u, int t, long long f) {
        if (u == t) return f;
        for (int& e = it_[static_cast<std::size_t>(u)]; e >= 0; e = arcs_[static_cast<std::size_t>(e)].next) {
            Arc& a = arcs_[static_cast<std::size_t>(e)];
            if (a.cap <= 0 || level_[static_cast<std::size_t>(a.to)] != level_[static_cast<std::size_t>(u)] + 1)
                continue;
            long long got = dfs(a.to, t, std::min(f, a.cap));
            if (got > 0) {
                a.cap -= got;
                arcs_[static_cast<std::size_t>(e ^ 1)].cap += got;
                return got;
            }
        }
        return 0;
    }

    std::vector<Arc> arcs_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> it_;
};

struct CutResult {
    long long size;
    std::vector<int> members;
};

CutResult min_cut(const Cdag& g, const std::vector<int>& H) {
    const int n = static_cast<int>(g.size());
    if (H.empty()) return {0, {}};
    std::vector<char> inH(g.size(), 0);
    for (int h : H) {
        if (h < 0 || h >= n) throw DomainError("vertex id out of range in H");
        inH[static_cast<std::size_t>(h)] = 1;
    }
    // Node 2v = v_in, 2v+1 = v_out; splitting edge carries the vertex weight.
    const int s = 2 * n, t = 2 * n + 1;
    FlowNet net(static_cast<std::size_t>(2 * n + 2));
    for (int v = 0; v < n; ++v) {
        bool forbidden = inH[static_cast<std::size_t>(v)] && !g.is_input(v);
        net.add(2 * v, 2 * v + 1, forbidden ? FlowNet::kInf : 1);
        for (int w : g.succs(v)) net.add(2 * v + 1, 2 * w, FlowNet::kInf);
        if (g.is_input(v)) net.add(s, 2 * v, FlowNet::kInf);
        if (inH[static_cast<std::size_t>(v)]) net.add(g.is_input(v) ? 2 * v + 1 : 2 * v, t, FlowNet::kInf);
    }
    long long f = net.maxflow(s, t);
    auto seen = net.reachable(s);
    CutResult r{f, {}};
    for (int v = 0; v < n; ++v)
        if (seen[static_cast<std::size_t>(2 * v)] && !seen[static_cast<std::size_t>(2 * v + 1)]) r.members.push_back(v);
    return r;
}

}  // namespace

long long dom_min(const Cdag& g, const std::vector<int>& H) { return min_cut(g, H).size; }

std::vector<int> dom_min_set(const Cdag& g, const std::vector<int>& H) {
    return min_cut(g, H).members;
}

std::vector<int> min_set(const Cdag& g, const std::vector<int>& H) {
    std::vector<char> inH(g.size(), 0);
    for (int h : H) inH[static_cast<std::size_t>(h)] = 1;
    std::vector<int> out;
    for (int h : H) {
        bool internal = false;
        for (int w : g.succs(h)) internal = internal || inH[static_cast<std::size_t>(w)];
        if (!internal) out.push_back(h);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

long long rectangular_dom_size(const daap::Statement& st,
                               const std::map<std::string, long long>& extents) {
    long long total = 0;
    for (const auto& a : st.inputs) {
        long long term = 1;
        for (const auto& v : a.distinct_vars()) {
            auto it = extents.find(v);
            if (it == extents.end()) throw DomainError("no extent given for variable '" + v + "'");
            term *= it->second;
        }
        total += term;
    }
    return total;
}

PartitionCheck check_x_partition(const Cdag& g, const std::vector<std::vector<int>>& parts,
                                 long long X) {
    PartitionCheck r;
    auto fail = [&](std::string why) {
        r.ok = false;
        r.violation = std::move(why);
        return r;
    };
    std::vector<int> part_of(g.size(), -1);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        for (int v : parts[i]) {
            if (v < 0 || static_cast<std::size_t>(v) >= g.size()) return fail("vertex id out of range");
            if (g.is_input(v)) return fail("input vertex " + g.vertex(v).name + " in a subset");
            if (part_of[static_cast<std::size_t>(v)] >= 0)
                return fail("vertex " + g.vertex(v).name + " appears in two subsets");
            part_of[static_cast<std::size_t>(v)] = static_cast<int>(i);
        }
    }
    for (int v : g.compute_vertices())
        if (part_of[static_cast<std::size_t>(v)] < 0)
            return fail("vertex " + g.vertex(v).name + " is not covered");
    // Quotient graph must be acyclic.
    std::vector<std::vector<int>> qsucc(parts.size());
    std::vector<int> indeg(parts.size(), 0);
    for (std::size_t v = 0; v < g.size(); ++v) {
        int a = part_of[v];
        if (a < 0) continue;
        for (int w : g.succs(static_cast<int>(v))) {
            int b = part_of[static_cast<std::size_t>(w)];
            if (b >= 0 && b != a) {
                qsucc[static_cast<std::size_t>(a)].push_back(b);
                ++indeg[static_cast<std::size_t>(b)];
            }
        }
    }
    std::queue<int> ready;
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (indeg[i] == 0) ready.push(static_cast<int>(i));
    std::size_t seen = 0;
    while (!ready.empty()) {
        int a = ready.front();
        ready.pop();
        ++seen;
        for (int b : qsucc[static_cast<std::size_t>(a)])
            if (--indeg[static_cast<std::size_t>(b)] == 0) ready.push(b);
    }
    if (seen != parts.size()) return fail("cyclic dependency between subsets");
    for (std::size_t i = 0; i < parts.size(); ++i) {
        long long d = dom_min(g, parts[i]);
        if (d > X)
            return fail("subset " + std::to_string(i) + " has |Dom_min| = " + std::to_string(d) +
                        " > X = " + std::to_string(X));
        auto m = static_cast<long long>(min_set(g, parts[i]).size());
        if (m > X)
            return fail("subset " + std::to_string(i) + " has |Min| = " + std::to_string(m) +
                        " > X = " + std::to_string(X));
    }
    return r;
}

}  // namespace confluxlab::pebble
