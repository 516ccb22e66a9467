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

#include "gsa/inputs.hpp"
#include "gsa/models.hpp"
#include "gsa/types.hpp"

namespace gsa {

enum class Method { exact, random };

struct EstimatorConfig {
  Method method = Method::exact;
  std::size_t inner_samples = 3;        // N_i, conditional variance
  std::size_t outer_samples = 1;        // N_o, expectation
  std::size_t variance_samples = 10000; // N_v, denominator Var(Y)
  std::size_t permutations = 0;         // m, random method only
  std::uint64_t seed = 0;
  // Worker threads; 0 picks the hardware concurrency. Results do not depend
  // on this value.
  unsigned threads = 0;

  // Throws ConfigError naming the violated field.
  void validate() const;
};

struct SensitivityResult {
  Vector shapley;
  Vector first_order_full;   // S_i
  Vector total_independent;  // S_Ti
  // 95% half-widths (two standard deviations). NaN when an index received
  // fewer than two contributions.
  Vector shapley_ci_halfwidth;
  Vector first_order_ci_halfwidth;
  Vector total_ci_halfwidth;
  double variance_estimate = 0.0;
  double mean_estimate = 0.0;
  std::uint64_t evaluations_used = 0;
};

struct VarianceEstimate {
  double variance = 0.0;
  double mean = 0.0;
  // Estimated Var of the sample variance itself.
  double variance_of_variance = 0.0;
};

// Unbiased sample variance of Y over nv joint draws. Throws DegenerateOutput
// when the variance is zero or below 1e-12 * mean^2.
VarianceEstimate estimate_variance(const Model& model,
                                   const InputDistribution& dist,
                                   std::size_t nv, std::uint64_t seed);

// Monte Carlo estimate of E[Var(Y | X_{-prefix})], unnormalized: the outer
// loop draws X_{-prefix} from its marginal no times, the inner loop draws ni
// conditional samples of X_prefix and takes their unbiased sample variance.
//
// This is the conditional-variance (complement) form of the Shapley cost;
// it yields the same Shapley effects as Var(E[Y | X_prefix]). An empty prefix
// costs 0 and the full set estimates Var(Y).
double prefix_cost(const Model& model, const InputDistribution& dist,
                   const IndexSet& prefix, std::size_t ni, std::size_t no,
                   std::uint64_t seed, std::uint64_t stream = 0);

// Enumerates all d! orderings (d <= 10).
SensitivityResult shapley_exact(const Model& model,
                                const InputDistribution& dist,
                                const EstimatorConfig& cfg);

// Samples cfg.permutations uniform orderings with replacement.
SensitivityResult shapley_random(const Model& model,
                                 const InputDistribution& dist,
                                 const EstimatorConfig& cfg);

// Dispatches on cfg.method.
SensitivityResult estimate_shapley(const Model& model,
                                   const InputDistribution& dist,
                                   const EstimatorConfig& cfg);

// m such that the random method costs as much as the exact one: no * d!.
std::uint64_t equivalent_m(std::uint64_t no_exact, std::size_t d);

// Model evaluations consumed: ni * no * P * (d - 1) + nv with P = d! or m.
std::uint64_t evaluation_cost(const EstimatorConfig& cfg, std::size_t d);

}  // namespace gsa
