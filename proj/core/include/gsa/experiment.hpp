// Copyright 2026 The gsa-shapley Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsa/analytic.hpp"
#include "gsa/config.hpp"
#include "gsa/shapley.hpp"

namespace gsa {

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::uint64_t evaluations = 0;
  double wall_seconds = 0.0;
  // Human-readable lines for the terminal.
  std::vector<std::string> report;
};

// Closed-form indices when the config describes a case they cover: linear or
// projection models with Gaussian inputs, and the centred interaction model
// with X2 independent of (X1, X3).
std::optional<analytic::AnalyticIndices> analytic_oracle(const ModelConfig& model,
                                                         const DistributionSpec& dist);

// input,shapley,shapley_ci,first_order_full,first_order_full_ci,
// total_independent,total_independent_ci
void write_indices_csv(std::ostream& out, const std::vector<std::string>& names,
                       const SensitivityResult& result);

// Single estimate, or a long-format table over a rho sweep.
RunSummary run_analysis(const RunConfig& cfg);

// Long-format table over an No or m sweep, with exact values when an
// oracle applies.
RunSummary run_convergence(const RunConfig& cfg);

// Closed-form indices, optionally over a rho sweep.
RunSummary run_analytic(const RunConfig& cfg);

// Learning design, kriging fit, Q2 on a test sample, and Shapley effects of
// the surrogate's predictive mean.
RunSummary run_fit_surrogate(const RunConfig& cfg);

struct FixCheckReport {
  double full_variance = 0.0;
  double fixed_variance = 0.0;
  double relative_decrease = 0.0;  // 1 - fixed / full
};

// Var(Y) against Var(Y | X_fixed = values), the free inputs drawn from
// their conditional law, n draws each.
FixCheckReport fixed_input_variance_check(const Model& model, const InputDistribution& dist,
                                          const IndexSet& fixed, const Vector& values,
                                          std::size_t n, std::uint64_t seed);

RunSummary run_fix_check(const RunConfig& cfg);

// The 11-input weld study with a synthetic quadratic stand-in for the
// simulator. Index values are not comparable to any physical study.
const std::string& weld_demo_config();
RunSummary run_weld_demo(const RunConfig& cfg);

// Writes the effective config plus a [run] section of bookkeeping.
void write_manifest(const RunConfig& cfg, const std::filesystem::path& path,
                    const std::string& verb, const RunSummary& summary,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace gsa
