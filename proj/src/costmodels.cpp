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
#include <sstream>

#include "confluxlab/bounds.hpp"
#include "confluxlab/costmodels.hpp"
#include "confluxlab/error.hpp"

namespace confluxlab::costmodels {

namespace {

struct Entry {
    ModelId id;
    std::string_view tag;
};

constexpr Entry kEntries[] = {
    {ModelId::Mkl2d, "mkl2d"},
    {ModelId::Slate2d, "slate2d"},
    {ModelId::Candmc, "candmc"},
    {ModelId::Capital, "capital"},
    {ModelId::Conflux, "conflux"},
    {ModelId::Confchox, "confchox"},
    {ModelId::LowerboundLu, "lowerbound-lu"},
    {ModelId::LowerboundChol, "lowerbound-chol"},
};

}  // namespace

std::string_view tag(ModelId id) {
    for (const auto& e : kEntries)
        if (e.id == id) return e.tag;
    return "?";
}

ModelId parse_model(std::string_view t) {
    for (const auto& e : kEntries)
        if (e.tag == t) return e.id;
    throw DomainError("unknown model '" + std::string(t) + "'");
}

const std::vector<ModelId>& all_models() {
    static const std::vector<ModelId> ids = [] {
        std::vector<ModelId> v;
        for (const auto& e : kEntries) v.push_back(e.id);
        return v;
    }();
    return ids;
}

bool in_memory_regime(double N, double P, double M) {
    return N * N / P <= M && M <= N * N / std::pow(P, 2.0 / 3.0);
}

ModelValue model_words(ModelId id, double N, double P, double M) {
    if (!(N > 0 && P > 0 && M > 0)) throw DomainError("N, P and M must be positive");
    ModelValue out;
    out.id = id;
    const double cube = N * N * N / (P * std::sqrt(M));
    const double sq = N * N / (P * std::sqrt(M));
    switch (id) {
        case ModelId::Mkl2d:
        case ModelId::Slate2d:
            out.leading = N * N / std::sqrt(P);
            out.lower_order = N * N / P;
            break;
        case ModelId::Candmc:
            out.leading = 5.0 * cube;
            out.lower_order = sq;
            break;
        case ModelId::Capital:
            out.leading = 45.0 / 8.0 * cube;
            out.lower_order = sq;
            break;
        case ModelId::Conflux:
        case ModelId::Confchox:
            out.leading = cube;
            out.lower_order = sq;
            break;
        case ModelId::LowerboundLu: {
            const double full = bounds::lu_bound(N, M, P);
            out.leading = 2.0 / 3.0 * cube;
            out.lower_order = full - out.leading;
            out.approximate = false;
            break;
        }
        case ModelId::LowerboundChol: {
            const double full = bounds::cholesky_bound(N, M, P);
            out.leading = cube / 3.0;
            out.lower_order = full - out.leading;
            out.approximate = false;
            break;
        }
    }
    out.words = out.leading + out.lower_order;
    if (!in_memory_regime(N, P, M)) {
        std::ostringstream os;
        os << "M = " << M << " is outside the memory-dependent range [N^2/P, N^2/P^(2/3)] = ["
           << N * N / P << ", " << N * N / std::pow(P, 2.0 / 3.0) << "]";
        out.warnings.push_back(os.str());
    }
    return out;
}

std::string models_csv(const std::vector<ModelId>& ids, double N, double P, double M) {
    std::ostringstream os;
    os.precision(17);
    os << "# schema_version=1\n";
    os << "model,N,P,M,words,leading,approximate\n";
    for (ModelId id : ids) {
        ModelValue m = model_words(id, N, P, M);
        os << tag(id) << "," << N << "," << P << "," << M << "," << m.words << "," << m.leading
           << "," << (m.approximate ? 1 : 0) << "\n";
    }
    return os.str();
}

}  // namespace confluxlab::costmodels
