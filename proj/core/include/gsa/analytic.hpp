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
#include <vector>

#include "gsa/types.hpp"

namespace gsa::analytic {

// Y = beta0 + beta^T X with X ~ N(mean, covariance).
//
// Unlike GaussianJoint, the covariance only needs to be positive
// semi-definite: perfectly correlated inputs have finite closed forms, and
// rank-deficient conditioning blocks are handled with a pseudo-inverse.
struct LinearGaussianProblem {
  double beta0 = 0.0;
  Vector beta;
  Vector mean;
  Matrix covariance;

  std::size_t dim() const { return static_cast<std::size_t>(beta.size()); }
  // Throws DistributionInvalid on shape mismatch, asymmetry or a negative
  // eigenvalue; DegenerateOutput when beta^T covariance beta == 0.
  void validate() const;
};

struct AnalyticIndices {
  Vector shapley;
  Vector first_order_full;
  Vector total_independent;
  double variance = 0.0;
};

struct SobolIndices {
  Vector first_order_full;
  Vector total_independent;
};

// Var(E[Y | X_u]) for every subset u, indexed by bit mask.
std::vector<double> closed_variances(const LinearGaussianProblem& p);

// Shapley effects by enumeration of all 2^d subsets (d <= 15).
Vector shapley_linear_gaussian(const LinearGaussianProblem& p);

// S_j = Var(E[Y|X_j]) / Var(Y) and S_Tj = E[Var(Y|X_-j)] / Var(Y).
SobolIndices sobol_linear_gaussian(const LinearGaussianProblem& p);

AnalyticIndices linear_gaussian_indices(const LinearGaussianProblem& p);

// Specialized closed forms for two correlated inputs.
AnalyticIndices linear_two_inputs(double beta1, double beta2, double sigma1,
                                  double sigma2, double rho);

// Three inputs, X1 independent of (X2, X3), corr(X2, X3) = rho.
AnalyticIndices linear_three_inputs(const Vector& beta, const Vector& sigma,
                                    double rho);

// Y = X1 + X2 X3, centred Gaussian inputs, corr(X1, X3) = rho, X2
// independent of the pair.
AnalyticIndices interaction_3d(double sigma1, double sigma2, double sigma3,
                               double rho);

enum class SandwichOrder {
  equal,     // S_j = Sh_j = S_Tj
  forward,   // S_j <= Sh_j <= S_Tj
  reversed,  // S_Tj <= Sh_j <= S_j
};

// Which way the two-input linear Gaussian indices are ordered. The same
// ordering holds for both inputs.
SandwichOrder sandwich_direction(double beta1, double beta2, double sigma1,
                                 double sigma2, double rho);

}  // namespace gsa::analytic
