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

#include "gsa/analytic.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "gsa/error.hpp"

namespace gsa::analytic {
namespace {

constexpr std::size_t kMaxEnumerationDim = 15;
// Eigenvalues below this fraction of the largest one count as zero.
constexpr double kRankTolerance = 1e-12;

// w^T M^+ w for a symmetric positive semi-definite M.
double pseudo_quadratic_form(const Matrix& m, const Vector& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = kRankTolerance * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  const Vector proj = eig.eigenvectors().transpose() * w;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) > cutoff) acc += proj(k) * proj(k) / lambda(k);
  }
  return acc;
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

void check_correlation(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
}

}  // namespace

void LinearGaussianProblem::validate() const {
  const auto d = beta.size();
  if (d == 0) throw DistributionInvalid("linear Gaussian problem: empty beta");
  if (mean.size() != d || covariance.rows() != d || covariance.cols() != d) {
    throw DistributionInvalid("linear Gaussian problem: dimensions disagree");
  }
  if (static_cast<std::size_t>(d) > kMaxEnumerationDim) {
    throw SizeError("linear Gaussian oracle limited to " +
                    std::to_string(kMaxEnumerationDim) + " inputs");
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DistributionInvalid("linear Gaussian problem: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance, Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -kRankTolerance * std::max(lambda.maxCoeff(), 1.0)) {
    throw DistributionInvalid("linear Gaussian problem: covariance has a negative eigenvalue");
  }
  if (!(beta.dot(covariance * beta) > 0.0)) {
    throw DegenerateOutput("linear Gaussian problem: output variance is zero");
  }
}

std::vector<double> closed_variances(const LinearGaussianProblem& p) {
  p.validate();
  const std::size_t d = p.dim();
  const Vector sigma_beta = p.covariance * p.beta;
  std::vector<double> tau(std::size_t{1} << d, 0.0);
  for (std::uint64_t mask = 1; mask < tau.size(); ++mask) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask & (std::uint64_t{1} << i)) idx.push_back(static_cast<Eigen::Index>(i));
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix block(k, k);
    Vector w(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      w(r) = sigma_beta(idx[r]);
      for (Eigen::Index c = 0; c < k; ++c) block(r, c) = p.covariance(idx[r], idx[c]);
    }
    tau[mask] = pseudo_quadratic_form(block, w);
  }
  return tau;
}

Vector shapley_linear_gaussian(const LinearGaussianProblem& p) {
  const std::vector<double> tau = closed_variances(p);
  const std::size_t d = p.dim();
  const double variance = p.beta.dot(p.covariance * p.beta);

  // Shapley weight |u|! (d - |u| - 1)! / d! by subset size.
  std::vector<double> weight(d);
  for (std::size_t s = 0; s < d; ++s) {
    weight[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(d - s + 0.0) -
                         std::lgamma(d + 1.0));
  }
  Vector sh = Vector::Zero(d);
  for (std::uint64_t u = 0; u < tau.size(); ++u) {
    const auto size = static_cast<std::size_t>(std::popcount(u));
    for (std::size_t i = 0; i < d; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (u & bit) continue;
      sh(i) += weight[size] * (tau[u | bit] - tau[u]);
    }
  }
  return sh / variance;
}

SobolIndices sobol_linear_gaussian(const LinearGaussianProblem& p) {
  const std::vector<double> tau = closed_variances(p);
  const std::size_t d = p.dim();
  const std::uint64_t full = tau.size() - 1;
  const double variance = tau[full];
  SobolIndices out{Vector(d), Vector(d)};
  for (std::size_t j = 0; j < d; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    out.first_order_full(j) = tau[bit] / variance;
    out.total_independent(j) = (variance - tau[full & ~bit]) / variance;
  }
  return out;
}

AnalyticIndices linear_gaussian_indices(const LinearGaussianProblem& p) {
  SobolIndices s = sobol_linear_gaussian(p);
  return {shapley_linear_gaussian(p), std::move(s.first_order_full),
          std::move(s.total_independent), p.beta.dot(p.covariance * p.beta)};
}

AnalyticIndices linear_two_inputs(double beta1, double beta2, double sigma1,
                                  double sigma2, double rho) {
  check_positive(sigma1, "sigma1");
  check_positive(sigma2, "sigma2");
  check_correlation(rho);
  const double a = beta1 * beta1 * sigma1 * sigma1;
  const double b = beta2 * beta2 * sigma2 * sigma2;
  const double cross = beta1 * beta2 * sigma1 * sigma2;
  const double var = a + 2.0 * rho * cross + b;
  if (!(var > 0.0)) throw DegenerateOutput("two-input linear model has zero variance");
  const double r2 = rho * rho;
  AnalyticIndices out;
  out.variance = var;
  out.shapley = Vector(2);
  out.shapley << a * (1.0 - r2 / 2.0) + rho * cross + b * r2 / 2.0,
      b * (1.0 - r2 / 2.0) + rho * cross + a * r2 / 2.0;
  out.first_order_full = Vector(2);
  out.first_order_full << a + 2.0 * rho * cross + r2 * b, b + 2.0 * rho * cross + r2 * a;
  out.total_independent = Vector(2);
  out.total_independent << a * (1.0 - r2), b * (1.0 - r2);
  out.shapley /= var;
  out.first_order_full /= var;
  out.total_independent /= var;
  return out;
}

AnalyticIndices linear_three_inputs(const Vector& beta, const Vector& sigma,
                                    double rho) {
  if (beta.size() != 3 || sigma.size() != 3) {
    throw DomainError("linear_three_inputs needs 3 coefficients and 3 deviations");
  }
  for (Eigen::Index i = 0; i < 3; ++i) check_positive(sigma(i), "sigma");
  check_correlation(rho);
  const double a1 = beta(0) * beta(0) * sigma(0) * sigma(0);
  const double a2 = beta(1) * beta(1) * sigma(1) * sigma(1);
  const double a3 = beta(2) * beta(2) * sigma(2) * sigma(2);
  const double cross = beta(1) * beta(2) * sigma(1) * sigma(2);
  const double var = a1 + a2 + a3 + 2.0 * rho * cross;
  if (!(var > 0.0)) throw DegenerateOutput("three-input linear model has zero variance");
  const double r2 = rho * rho;
  const double b2s2 = beta(1) * sigma(1);
  const double b3s3 = beta(2) * sigma(2);
  AnalyticIndices out;
  out.variance = var;
  out.shapley = Vector(3);
  out.shapley << a1, a2 + rho * cross + r2 / 2.0 * (a3 - a2),
      a3 + rho * cross + r2 / 2.0 * (a2 - a3);
  out.first_order_full = Vector(3);
  out.first_order_full << a1, (b2s2 + rho * b3s3) * (b2s2 + rho * b3s3),
      (b3s3 + rho * b2s2) * (b3s3 + rho * b2s2);
  out.total_independent = Vector(3);
  out.total_independent << a1, a2 * (1.0 - r2), a3 * (1.0 - r2);
  out.shapley /= var;
  out.first_order_full /= var;
  out.total_independent /= var;
  return out;
}

AnalyticIndices interaction_3d(double sigma1, double sigma2, double sigma3,
                               double rho) {
  check_positive(sigma1, "sigma1");
  check_positive(sigma2, "sigma2");
  check_positive(sigma3, "sigma3");
  check_correlation(rho);
  const double s1 = sigma1 * sigma1;
  const double s23 = sigma2 * sigma2 * sigma3 * sigma3;
  const double r2 = rho * rho;
  const double var = s1 + s23;
  AnalyticIndices out;
  out.variance = var;
  out.shapley = Vector(3);
  out.shapley << s1 * (1.0 - r2 / 2.0) + s23 * r2 / 6.0, s23 * (3.0 + r2) / 6.0,
      r2 * s1 / 2.0 + s23 * (3.0 - 2.0 * r2) / 6.0;
  out.first_order_full = Vector(3);
  out.first_order_full << s1, 0.0, r2 * s1;
  out.total_independent = Vector(3);
  out.total_independent << (1.0 - r2) * s1, s23, (1.0 - r2) * s23;
  out.shapley /= var;
  out.first_order_full /= var;
  out.total_independent /= var;
  return out;
}

SandwichOrder sandwich_direction(double beta1, double beta2, double sigma1,
                                 double sigma2, double rho) {
  check_positive(sigma1, "sigma1");
  check_positive(sigma2, "sigma2");
  check_correlation(rho);
  const double a = beta1 * beta1 * sigma1 * sigma1;
  const double b = beta2 * beta2 * sigma2 * sigma2;
  const double cross = beta1 * beta2 * sigma1 * sigma2;
  // sigma^2 (Sh_j - S_j) = -rho (rho (a + b) / 2 + cross) for both j.
  const double gap = rho * (rho * (a + b) / 2.0 + cross);
  if (std::abs(gap) <= 1e-14 * (a + b)) return SandwichOrder::equal;
  return gap < 0.0 ? SandwichOrder::forward : SandwichOrder::reversed;
}

}  // namespace gsa::analytic
