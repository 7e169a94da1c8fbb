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

// Closed-form per-processor communication volumes of several parallel LU and
// Cholesky strategies.

#include <string>
#include <string_view>
#include <vector>

namespace confluxlab::costmodels {

enum class ModelId { Mkl2d, Slate2d, Candmc, Capital, Conflux, Confchox, LowerboundLu, LowerboundChol };

std::string_view tag(ModelId id);
/// Throws DomainError on an unknown tag.
ModelId parse_model(std::string_view tag);
const std::vector<ModelId>& all_models();

struct ModelValue {
    ModelId id;
    double leading = 0.0;      // leading term only
    double lower_order = 0.0;  // lower-order term with coefficient 1
    double words = 0.0;        // leading + lower_order
    bool approximate = true;   // lower-order coefficient is a placeholder
    std::vector<std::string> warnings;
};

/// Words per processor. Throws DomainError unless N, P, M are positive.
ModelValue model_words(ModelId id, double N, double P, double M);

/// True when N^2/P <= M <= N^2/P^(2/3).
bool in_memory_regime(double N, double P, double M);

/// `# schema_version=1`, `model,N,P,M,words,leading,approximate`, one row per model.
std::string models_csv(const std::vector<ModelId>& ids, double N, double P, double M);

}  // namespace confluxlab::costmodels
