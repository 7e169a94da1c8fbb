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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "confluxlab/daap.hpp"

namespace confluxlab {

/// A vertex is one version of one array element. Inputs carry version 0
/// and statement -1.
struct Vertex {
    enum class Kind { Input, Mid, Output };

    std::string name;
    std::string array;
    std::vector<long long> coords;
    int version = 0;
    int statement = -1;
    std::vector<long long> point;  // iteration point of the producing instance
    Kind kind = Kind::Mid;
    int owner = -1;  // parallel game: rank holding an input at start, -1 = default
};

class Cdag {
public:
    int add_vertex(Vertex v);
    void add_edge(int src, int dst);

    std::size_t size() const { return vertices_.size(); }
    const Vertex& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    Vertex& vertex(int v) { return vertices_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& preds(int v) const { return preds_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& succs(int v) const { return succs_[static_cast<std::size_t>(v)]; }

    bool is_input(int v) const { return vertex(v).kind == Vertex::Kind::Input; }
    bool is_output(int v) const { return vertex(v).kind == Vertex::Kind::Output; }
    std::vector<int> inputs() const;
    std::vector<int> outputs() const;
    std::vector<int> compute_vertices() const;
    std::vector<int> statement_vertices(int stmt) const;
    std::size_t edge_count() const;
    int max_in_degree() const;
    int find(const std::string& name) const;  // -1 if absent

    /// Kahn order; throws DomainError when a cycle exists.
    std::vector<int> topological_order() const;

    /// Marks non-input vertices with no successors as outputs.
    void classify_outputs();

private:
    std::vector<Vertex> vertices_;
    std::vector<std::vector<int>> preds_;
    std::vector<std::vector<int>> succs_;
};

constexpr std::size_t kDefaultVertexCap = 200000;

/// Materializes the program for concrete parameters. Reads resolve to the
/// newest version of each element; every write creates a new version.
/// Throws CapExceeded when more than `cap` vertices would be created.
Cdag build_cdag(const daap::DaapProgram& prog, const daap::Bindings& params,
                std::size_t cap = kDefaultVertexCap);

/// Text interchange: `v <id> in|out|mid [owner]` and `e <src> <dst>`.
Cdag read_cdag(std::istream& in);
Cdag load_cdag(const std::string& path);
void write_cdag(const Cdag& g, std::ostream& out);

}  // namespace confluxlab
