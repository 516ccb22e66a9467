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
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

#include "gsa/rng.hpp"
#include "gsa/types.hpp"

namespace gsa {

// A sorted set of distinct 0-based input positions.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<std::size_t> indices);
  explicit IndexSet(std::vector<std::size_t> indices);

  static IndexSet all(std::size_t dim);
  static IndexSet from_mask(std::uint64_t mask, std::size_t dim);

  // Throws DomainError when an index is >= dim.
  void check_within(std::size_t dim) const;

  IndexSet complement(std::size_t dim) const;
  bool contains(std::size_t i) const;
  std::uint64_t mask() const;

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> indices_;
};

// Multivariate normal law N(mean, covariance). The covariance must be
// symmetric (1e-10 absolute) and positive-definite; no jitter is ever added.
class GaussianJoint {
 public:
  GaussianJoint(Vector mean, Matrix covariance);

  static GaussianJoint standard(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  // Lower-triangular L with L L^T = covariance.
  const Matrix& cholesky_factor() const { return chol_; }

  Vector stddev() const;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_;
};

// Exact law of the coordinates outside `given` when X_given = values.
GaussianJoint conditional_gaussian(const GaussianJoint& joint,
                                   const IndexSet& given,
                                   std::span<const double> values);

struct UniformMarginal {
  double lo = 0.0;
  double hi = 1.0;
};

struct StandardNormalMarginal {};

using Marginal = std::variant<UniformMarginal, StandardNormalMarginal>;

double marginal_cdf(const Marginal& marginal, double x);
double marginal_quantile(const Marginal& marginal, double p);

// Gaussian copula: latent Z ~ N(0, correlation), X_i = F_i^{-1}(Phi(Z_i)).
class CopulaJoint {
 public:
  CopulaJoint(Matrix correlation, std::vector<Marginal> marginals);

  std::size_t dim() const { return marginals_.size(); }
  const Matrix& correlation() const { return latent_.covariance(); }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const GaussianJoint& latent() const { return latent_; }

 private:
  GaussianJoint latent_;
  std::vector<Marginal> marginals_;
};

using InputDistribution = std::variant<GaussianJoint, CopulaJoint>;

std::size_t dimension(const InputDistribution& dist);

// Both laws are driven by a Gaussian vector; for GaussianJoint the latent
// and physical spaces coincide.
const GaussianJoint& latent_gaussian(const InputDistribution& dist);

double to_physical(const InputDistribution& dist, std::size_t coord,
                   double latent);
// Throws DomainError when x lies outside the support of its marginal.
double to_latent(const InputDistribution& dist, std::size_t coord, double x);

// n i.i.d. draws; bit-identical for identical (dist, n, seed).
Matrix sample(const InputDistribution& dist, std::size_t n, std::uint64_t seed);
Matrix sample(const InputDistribution& dist, std::size_t n, rng::Stream& stream);

// n draws of X_free given X_{complement(free)} = given_values (ordered as the
// sorted complement). Returns an n x |free| matrix in physical space.
Matrix sample_conditional(const InputDistribution& dist, const IndexSet& free,
                          std::span<const double> given_values, std::size_t n,
                          std::uint64_t seed);

// Maps points of the unit hypercube through the joint quantile transform
// (independent normal quantiles, Cholesky coupling, marginal quantiles).
Matrix from_unit_cube(const InputDistribution& dist, const Matrix& unit_points);

// Precomputed conditioning structure of a Gaussian law for one split of the
// coordinates into `free` and its complement `given`:
//   X_given       ~ N(mu_g, S_gg)
//   X_free | X_g  ~ N(mu_f + A (x_g - mu_g), S_ff - A S_gf),  A = S_fg S_gg^-1
// Everything lives in latent space; callers map to physical coordinates.
class ConditionalSampler {
 public:
  ConditionalSampler(const GaussianJoint& joint, IndexSet free);

  const IndexSet& free() const { return free_; }
  const IndexSet& given() const { return given_; }

  // Draws X_given from its marginal; out.size() == given().size().
  void draw_given(rng::Stream& stream, std::span<double> out) const;
  // Draws X_free | X_given = given; out.size() == free().size().
  void draw_free(rng::Stream& stream, std::span<const double> given,
                 std::span<double> out) const;

  const Matrix& regression() const { return regression_; }
  const Matrix& conditional_cholesky() const { return cond_chol_; }

 private:
  IndexSet free_;
  IndexSet given_;
  Vector mean_free_;
  Vector mean_given_;
  Matrix given_chol_;
  Matrix regression_;
  Matrix cond_chol_;
};

}  // namespace gsa
