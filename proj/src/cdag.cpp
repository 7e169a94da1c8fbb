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
#include "confluxlab/cdag.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

#include "confluxlab/error.hpp"

namespace confluxlab {

int Cdag::add_vertex(Vertex v) {
    if (v.name.empty()) v.name = std::to_string(vertices_.size());
    vertices_.push_back(std::move(v));
    preds_.emplace_back();
    succs_.emplace_back();
    return static_cast<int>(vertices_.size()) - 1;
}

void Cdag::add_edge(int src, int dst) {
    preds_[static_cast<std::size_t>(dst)].push_back(src);
    succs_[static_cast<std::size_t>(src)].push_back(dst);
}

std::vector<int> Cdag::inputs() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < size(); ++v)
        if (is_input(static_cast<int>(v))) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<int> Cdag::outputs() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < size(); ++v)
        if (is_output(static_cast<int>(v))) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<int> Cdag::compute_vertices() const {
    std::vector<int> out;
    for (std::size_t v = 0; v < size(); ++v)
        if (!is_input(static_cast<int>(v))) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<int> Cdag::statement_vertices(int stmt) const {
    std::vector<int> out;
    for (std::size_t v = 0; v < size(); ++v)
        if (vertices_[v].statement == stmt && !is_input(static_cast<int>(v)))
            out.push_back(static_cast<int>(v));
    return out;
}

std::size_t Cdag::edge_count() const {
    std::size_t e = 0;
    for (const auto& p : preds_) e += p.size();
    return e;
}

int Cdag::max_in_degree() const {
    std::size_t m = 0;
    for (const auto& p : preds_) m = std::max(m, p.size());
    return static_cast<int>(m);
}

int Cdag::find(const std::string& name) const {
    for (std::size_t v = 0; v < size(); ++v)
        if (vertices_[v].name == name) return static_cast<int>(v);
    return -1;
}

std::vector<int> Cdag::topological_order() const {
    std::vector<int> indeg(size());
    for (std::size_t v = 0; v < size(); ++v) indeg[v] = static_cast<int>(preds_[v].size());
    std::queue<int> ready;
    for (std::size_t v = 0; v < size(); ++v)
        if (indeg[v] == 0) ready.push(static_cast<int>(v));
    std::vector<int> order;
    order.reserve(size());
    while (!ready.empty()) {
        int v = ready.front();
        ready.pop();
        order.push_back(v);
        for (int w : succs(v))
            if (--indeg[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
    if (order.size() != size()) throw DomainError("cDAG contains a cycle");
    return order;
}

void Cdag::classify_outputs() {
    for (std::size_t v = 0; v < size(); ++v) {
        if (vertices_[v].kind == Vertex::Kind::Input) continue;
        vertices_[v].kind = succs_[v].empty() ? Vertex::Kind::Output : Vertex::Kind::Mid;
    }
}

namespace {

std::string element_name(const std::string& array, const std::vector<long long>& c, int version) {
    std::string s = array;
    for (long long x : c) s += "[" + std::to_string(x) + "]";
    if (c.empty()) s += "[]";
    return s + "@" + std::to_string(version);
}

}  // namespace

Cdag build_cdag(const daap::DaapProgram& prog, const daap::Bindings& params, std::size_t cap) {
    Cdag g;
    std::map<std::pair<std::string, std::vector<long long>>, int> newest;
    auto coords = [](const daap::AccessFn& a, const daap::Bindings& env) {
        std::vector<long long> c;
        for (const auto& v : a.indices) c.push_back(env.at(v));
        return c;
    };
    auto check_cap = [&] {
        if (g.size() >= cap)
            throw CapExceeded("cDAG exceeds the vertex cap of " + std::to_string(cap));
    };
    daap::for_each_instance(prog, params, [&](std::size_t si, const daap::Bindings& env) {
        const daap::Statement& st = prog.statements[si];
        std::vector<int> reads;
        for (const auto& a : st.inputs) {
            auto key = std::make_pair(a.array, coords(a, env));
            auto it = newest.find(key);
            if (it == newest.end()) {
                check_cap();
                Vertex in;
                in.array = a.array;
                in.coords = key.second;
                in.kind = Vertex::Kind::Input;
                in.name = element_name(in.array, in.coords, 0);
                it = newest.emplace(key, g.add_vertex(std::move(in))).first;
            }
            reads.push_back(it->second);
        }
        check_cap();
        auto key = std::make_pair(st.output.array, coords(st.output, env));
        Vertex out;
        out.array = st.output.array;
        out.coords = key.second;
        auto prev = newest.find(key);
        out.version = prev == newest.end() ? 0 : g.vertex(prev->second).version + 1;
        out.statement = static_cast<int>(si);
        for (int l : st.loops)
            out.point.push_back(env.at(prog.loops[static_cast<std::size_t>(l)].name));
        out.name = element_name(out.array, out.coords, out.version);
        int id = g.add_vertex(std::move(out));
        for (int r : reads) g.add_edge(r, id);
        newest[key] = id;
    });
    g.classify_outputs();
    return g;
}

Cdag read_cdag(std::istream& in) {
    Cdag g;
    std::map<std::string, int> ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            std::string id, kind;
            if (!(ls >> id >> kind)) throw ParseError(lineno, 1, "expected 'v <id> in|out|mid'");
            if (ids.count(id)) throw ParseError(lineno, 3, "duplicate vertex '" + id + "'");
            Vertex v;
            v.name = id;
            if (kind == "in") v.kind = Vertex::Kind::Input;
            else if (kind == "out") v.kind = Vertex::Kind::Output;
            else if (kind == "mid") v.kind = Vertex::Kind::Mid;
            else throw ParseError(lineno, 1, "unknown vertex kind '" + kind + "'");
            int owner;
            if (ls >> owner) v.owner = owner;
            ids[id] = g.add_vertex(std::move(v));
        } else if (tag == "e") {
            std::string a, b;
            if (!(ls >> a >> b)) throw ParseError(lineno, 1, "expected 'e <src> <dst>'");
            auto ia = ids.find(a), ib = ids.find(b);
            if (ia == ids.end()) throw ParseError(lineno, 3, "unknown vertex '" + a + "'");
            if (ib == ids.end()) throw ParseError(lineno, 3, "unknown vertex '" + b + "'");
            if (g.is_input(ib->second))
                throw ParseError(lineno, 3, "input vertex '" + b + "' cannot have predecessors");
            g.add_edge(ia->second, ib->second);
        } else {
            throw ParseError(lineno, 1, "unknown record '" + tag + "'");
        }
    }
    g.topological_order();
    return g;
}

Cdag load_cdag(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open cDAG file '" + path + "'");
    return read_cdag(in);
}

void write_cdag(const Cdag& g, std::ostream& out) {
    for (std::size_t v = 0; v < g.size(); ++v) {
        const Vertex& x = g.vertex(static_cast<int>(v));
        const char* kind = x.kind == Vertex::Kind::Input    ? "in"
                           : x.kind == Vertex::Kind::Output ? "out"
                                                            : "mid";
        out << "v " << x.name << " " << kind;
        if (x.owner >= 0) out << " " << x.owner;
        out << "\n";
    }
    for (std::size_t v = 0; v < g.size(); ++v)
        for (int p : g.preds(static_cast<int>(v)))
            out << "e " << g.vertex(p).name << " " << g.vertex(static_cast<int>(v)).name << "\n";
}

}  // namespace confluxlab
