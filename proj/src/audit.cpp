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

#include "confluxlab/error.hpp"
#include "confluxlab/factor.hpp"

namespace confluxlab::factor {

std::vector<StepAudit> step_cost_audit(const FactorResult& run, int t) {
    if (t < 1 || t > run.N / run.v)
        throw DomainError("iteration " + std::to_string(t) + " outside 1.." +
                          std::to_string(run.N / run.v));
    const double N = run.N;
    const double v = run.v;
    const double P = run.grid.P();
    const double M = run.M;
    const double rest = N - t * v;
    const double rounds = std::ceil(std::log2(std::sqrt(static_cast<double>(run.grid.P1()))));

    std::vector<StepAudit> out;
    auto add = [&](const std::string& step, const std::string& phase, double predicted) {
        out.push_back({t, step, run.stats.phase_max_recv(phase), predicted});
    };
    for (int s = 1; s <= 11; ++s) {
        double p = 0.0;
        switch (s) {
            case 1:
            case 5: p = rest * v * M / (N * N); break;
            case 2: p = v * v * rounds; break;
            case 3: p = v * v + v; break;
            case 4:
            case 6: p = rest * v / P; break;
            case 8:
            case 10: p = rest * N * v / (P * std::sqrt(M)); break;
            default: p = 0.0;
        }
        add(std::to_string(s), phase_name(t, s), p);
        if (s == 2) add("2i", index_phase_name(t), v * rounds);
    }
    return out;
}

long long a11_phase_volume(const FactorResult& run) {
    long long total = 0;
    for (int t = 1; t <= run.N / run.v; ++t)
        for (int s : {8, 10}) total += run.stats.phase_total_recv(phase_name(t, s));
    return total;
}

}  // namespace confluxlab::factor
