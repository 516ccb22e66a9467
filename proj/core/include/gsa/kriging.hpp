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
#include <memory>
#include <utility>
#include <vector>

#include "gsa/models.hpp"
#include "gsa/types.hpp"

namespace gsa {

enum class Trend { constant, linear };

struct KrigingConfig {
  Trend trend = Trend::linear;
  // Nugget relative to the process variance: the training correlation
  // matrix is R + nugget * I.
  double nugget = 1e-8;
  std::size_t restarts = 10;
  // Per-dimension [lo, hi] for the lengthscales. Empty selects
  // [1e-2, 1e2] x the input range of each column.
  std::vector<std::pair<double, double>> lengthscale_bounds;
  // Restarts run on this many threads; 0 picks the hardware concurrency.
  unsigned threads = 1;
  std::size_t max_iterations = 200;

  void validate(std::size_t dim) const;
};

// One-dimensional Matern 5/2 correlation at lag h >= 0 with lengthscale
// theta > 0.
double matern52(double h, double theta);

// Anisotropic product of matern52 over the coordinates.
double matern52_product(const double* a, const double* b, const Vector& theta);

struct PredictiveDistribution {
  Vector mean;
  Vector variance;
};

// A fitted universal-kriging surrogate: trend h(x)^T beta plus a centred
// stationary Matern 5/2 process with variance sigma^2 and lengthscales theta.
// Immutable once built; prediction is thread-safe.
class KrigingModel {
 public:
  // Conditions the process on (x, y) for fixed hyperparameters, with the
  // trend coefficients and process variance concentrated out.
  static KrigingModel assemble(Matrix x, Vector y, Trend trend, Vector theta,
                               double nugget);

  PredictiveDistribution predict(const Matrix& points) const;
  Vector predict_mean(const Matrix& points) const;

  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  Trend trend() const { return trend_; }
  const Vector& lengthscales() const { return theta_; }
  const Vector& trend_coefficients() const { return beta_; }
  double process_variance() const { return sigma2_; }
  // Relative nugget; the absolute one is nugget() * process_variance().
  double nugget() const { return nugget_; }
  double log_likelihood() const { return log_likelihood_; }
  const Matrix& training_inputs() const { return x_; }
  const Vector& training_outputs() const { return y_; }

  // Versioned text format, locale-independent. Loading re-conditions the
  // process, reproducing the saved model's predictions bit for bit.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static KrigingModel load(std::istream& in);
  static KrigingModel load(const std::filesystem::path& path);

 private:
  KrigingModel() = default;

  Matrix x_;
  Vector y_;
  Trend trend_ = Trend::linear;
  Vector theta_;
  double nugget_ = 0.0;
  Matrix chol_;       // lower factor of R + nugget I
  Vector alpha_;      // R^-1 (y - F beta)
  Vector beta_;
  Matrix whitened_f_; // L^-1 F
  Matrix gls_chol_;   // lower factor of F^T R^-1 F
  double sigma2_ = 0.0;
  double log_likelihood_ = 0.0;
};

// Regression basis: [1] or [1, x_1, ..., x_d].
Matrix trend_basis(const Matrix& x, Trend trend);

// Profile log-likelihood (additive constants dropped) as a function of the
// log-lengthscales. Writes the analytic gradient when `gradient` is non-null.
// Returns -inf when the correlation matrix cannot be factorized.
double profile_log_likelihood(const Matrix& x, const Vector& y, Trend trend,
                              double nugget, const Vector& log_theta,
                              Vector* gradient = nullptr);

struct FitReport {
  // Log-likelihood at each restart's starting point (-inf if it failed) and
  // at its optimum.
  std::vector<double> initial_log_likelihood;
  std::vector<double> final_log_likelihood;
  std::size_t best_restart = 0;
};

// Maximum likelihood over the lengthscales by multi-start L-BFGS from
// space-filling starting points. Throws IllConditioned or FitFailure.
KrigingModel fit_kriging(const Matrix& x, const Vector& y, const KrigingConfig& cfg,
                         FitReport* report = nullptr);

// 1 - SSE / SST on a held-out sample.
double q2(const Vector& observed, const Vector& predicted);
double q2(const KrigingModel& model, const Matrix& x_test, const Vector& y_test);

// The predictive mean as a batch model.
std::shared_ptr<const Model> as_model(std::shared_ptr<const KrigingModel> model);

}  // namespace gsa
