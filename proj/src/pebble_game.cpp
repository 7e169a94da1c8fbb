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
#include <sstream>
#include <unordered_map>

#include "confluxlab/error.hpp"
#include "confluxlab/pebble.hpp"

namespace confluxlab::pebble {

namespace {

const char* move_name(MoveKind k) {
    switch (k) {
        case MoveKind::Load: return "load";
        case MoveKind::Store: return "store";
        case MoveKind::Compute: return "compute";
        case MoveKind::Free: return "free";
        case MoveKind::Acquire: return "acquire";
    }
    return "?";
}

}  // namespace

Schedule parse_schedule(const std::string& text, const Cdag& g) {
    std::unordered_map<std::string, int> ids;
    for (std::size_t v = 0; v < g.size(); ++v) ids[g.vertex(static_cast<int>(v)).name] = static_cast<int>(v);
    Schedule s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        Move m;
        const std::string& op = tok[0];
        if (op == "load") m.kind = MoveKind::Load;
        else if (op == "store") m.kind = MoveKind::Store;
        else if (op == "compute") m.kind = MoveKind::Compute;
        else if (op == "free") m.kind = MoveKind::Free;
        else if (op == "acquire") m.kind = MoveKind::Acquire;
        else throw ParseError(lineno, 1, "unknown move '" + op + "'");
        if (tok.size() == 3) {
            try {
                m.rank = std::stoi(tok[1]);
            } catch (const std::exception&) {
                throw ParseError(lineno, 1, "bad rank '" + tok[1] + "'");
            }
        } else if (tok.size() != 2) {
            throw ParseError(lineno, 1, "expected '<move> [rank] <vertex>'");
        }
        auto it = ids.find(tok.back());
        if (it == ids.end()) throw ParseError(lineno, 1, "unknown vertex '" + tok.back() + "'");
        m.vertex = it->second;
        s.push_back(m);
    }
    return s;
}

std::string format_schedule(const Schedule& s, const Cdag& g, bool parallel) {
    std::ostringstream os;
    for (const Move& m : s) {
        os << move_name(m.kind) << " ";
        if (parallel) os << m.rank << " ";
        os << g.vertex(m.vertex).name << "\n";
    }
    return os.str();
}

int input_owner(const Cdag& g, int v, int P) {
    const Vertex& x = g.vertex(v);
    if (x.owner >= 0) {
        if (x.owner >= P)
            throw DomainError("vertex " + x.name + " owned by rank " + std::to_string(x.owner) +
                              " but P = " + std::to_string(P));
        return x.owner;
    }
    int idx = 0;
    for (int u = 0; u < v; ++u)
        if (g.is_input(u)) ++idx;
    return idx % P;
}

namespace {

RunResult run_sequential(const Cdag& g, const Schedule& s, const GameConfig& cfg) {
    RunResult r;
    const std::size_t n = g.size();
    std::vector<char> red(n, 0), blue(n, 0);
    for (int v : g.inputs()) blue[static_cast<std::size_t>(v)] = 1;
    int nred = 0;
    auto fail = [&](std::size_t step, const std::string& why) {
        r.legal = false;
        r.failed_step = step;
        std::ostringstream os;
        os << "step " << step << " (" << move_name(s[step].kind) << " "
           << g.vertex(s[step].vertex).name << "): " << why;
        r.reason = os.str();
    };
    for (std::size_t i = 0; i < s.size() && r.legal; ++i) {
        const Move& m = s[i];
        if (m.vertex < 0 || static_cast<std::size_t>(m.vertex) >= n) {
            r.legal = false;
            r.failed_step = i;
            r.reason = "step " + std::to_string(i) + ": vertex out of range";
            break;
        }
        auto v = static_cast<std::size_t>(m.vertex);
        switch (m.kind) {
            case MoveKind::Load:
                if (!blue[v]) { fail(i, "vertex has no blue pebble"); break; }
                if (!red[v]) {
                    if (nred >= cfg.M) { fail(i, "red budget exceeded"); break; }
                    red[v] = 1;
                    ++nred;
                }
                ++r.loads;
                break;
            case MoveKind::Store:
                if (!red[v]) { fail(i, "vertex has no red pebble"); break; }
                blue[v] = 1;
                ++r.stores;
                break;
            case MoveKind::Compute: {
                if (g.is_input(m.vertex)) { fail(i, "input vertices cannot be computed"); break; }
                bool ok = true;
                for (int p : g.preds(m.vertex)) {
                    if (!red[static_cast<std::size_t>(p)]) {
                        fail(i, "missing predecessor " + g.vertex(p).name);
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
                if (!red[v]) {
                    if (nred >= cfg.M) { fail(i, "red budget exceeded"); break; }
                    red[v] = 1;
                    ++nred;
                }
                break;
            }
            case MoveKind::Free:
                if (!red[v]) { fail(i, "vertex has no red pebble"); break; }
                red[v] = 0;
                --nred;
                break;
            case MoveKind::Acquire:
                fail(i, "acquire is a parallel-game move");
                break;
        }
    }
    r.Q = r.loads + r.stores;
    if (r.legal) {
        r.complete = true;
        for (int o : g.outputs())
            if (!blue[static_cast<std::size_t>(o)]) r.complete = false;
    }
    return r;
}

RunResult run_parallel(const Cdag& g, const Schedule& s, const GameConfig& cfg) {
    RunResult r;
    const std::size_t n = g.size();
    const int P = cfg.P;
    std::vector<std::vector<char>> red(static_cast<std::size_t>(P), std::vector<char>(n, 0));
    std::vector<int> nred(static_cast<std::size_t>(P), 0);
    r.rank_io.assign(static_cast<std::size_t>(P), 0);
    for (int v : g.inputs()) {
        int o = input_owner(g, v, P);
        red[static_cast<std::size_t>(o)][static_cast<std::size_t>(v)] = 1;
        ++nred[static_cast<std::size_t>(o)];
    }
    for (int p = 0; p < P; ++p) {
        if (nred[static_cast<std::size_t>(p)] > cfg.M) {
            r.legal = false;
            r.reason = "initial input placement exceeds M on rank " + std::to_string(p);
            return r;
        }
    }
    auto fail = [&](std::size_t step, const std::string& why) {
        r.legal = false;
        r.failed_step = step;
        std::ostringstream os;
        os << "step " << step << " (" << move_name(s[step].kind) << " " << s[step].rank << " "
           << g.vertex(s[step].vertex).name << "): " << why;
        r.reason = os.str();
    };
    for (std::size_t i = 0; i < s.size() && r.legal; ++i) {
        const Move& m = s[i];
        if (m.rank < 0 || m.rank >= P || m.vertex < 0 || static_cast<std::size_t>(m.vertex) >= n) {
            r.legal = false;
            r.failed_step = i;
            r.reason = "step " + std::to_string(i) + ": rank or vertex out of range";
            break;
        }
        auto& mine = red[static_cast<std::size_t>(m.rank)];
        int& count = nred[static_cast<std::size_t>(m.rank)];
        auto v = static_cast<std::size_t>(m.vertex);
        switch (m.kind) {
            case MoveKind::Compute: {
                if (g.is_input(m.vertex)) { fail(i, "input vertices cannot be computed"); break; }
                bool ok = true;
                for (int p : g.preds(m.vertex)) {
                    if (!mine[static_cast<std::size_t>(p)]) {
                        fail(i, "missing predecessor " + g.vertex(p).name);
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
                if (!mine[v]) {
                    if (count >= cfg.M) { fail(i, "red budget exceeded"); break; }
                    mine[v] = 1;
                    ++count;
                }
                break;
            }
            case MoveKind::Acquire: {
                if (mine[v]) { fail(i, "rank already holds the vertex"); break; }
                int holder = -1;
                for (int q = 0; q < P && holder < 0; ++q)
                    if (red[static_cast<std::size_t>(q)][v]) holder = q;
                if (holder < 0) { fail(i, "acquire on a pebble-free vertex"); break; }
                if (count >= cfg.M) { fail(i, "red budget exceeded"); break; }
                mine[v] = 1;
                ++count;
                ++r.rank_io[static_cast<std::size_t>(m.rank)];
                if (cfg.charge_sender) ++r.rank_io[static_cast<std::size_t>(holder)];
                break;
            }
            case MoveKind::Free:
                if (!mine[v]) { fail(i, "rank holds no pebble on the vertex"); break; }
                mine[v] = 0;
                --count;
                break;
            case MoveKind::Load:
            case MoveKind::Store:
                fail(i, "load/store are sequential-game moves");
                break;
        }
    }
    for (long long q : r.rank_io) {
        r.Q += q;
        r.max_rank_io = std::max(r.max_rank_io, q);
    }
    if (r.legal) {
        r.complete = true;
        for (int o : g.outputs()) {
            bool held = false;
            for (int p = 0; p < P; ++p) held = held || red[static_cast<std::size_t>(p)][static_cast<std::size_t>(o)];
            if (!held) r.complete = false;
        }
    }
    return r;
}

}  // namespace

RunResult run_schedule(const Cdag& g, const Schedule& s, const GameConfig& cfg) {
    if (cfg.M < 1) throw DomainError("memory size M must be positive");
    if (cfg.parallel) {
        if (cfg.P < 1) throw DomainError("P must be positive");
        return run_parallel(g, s, cfg);
    }
    return run_sequential(g, s, cfg);
}

}  // namespace confluxlab::pebble
