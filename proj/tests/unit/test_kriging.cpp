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

#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "gsa/design.hpp"
#include "gsa/error.hpp"
#include "gsa/inputs.hpp"
#include "gsa/kriging.hpp"

namespace gsa {
namespace {

constexpr double kPi = std::numbers::pi;

struct Data {
  Matrix x;
  Vector y;
};

Data smooth_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  Data p;
  p.x = sample(GaussianJoint::standard(d), n, seed);
  p.y = Vector(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < d; ++k) v += std::sin((k + 1.0) * p.x(i, k)) + 0.3 * p.x(i, k);
    p.y(i) = v;
  }
  return p;
}

TEST(Matern52, Values) {
  EXPECT_EQ(matern52(0.0, 1.3), 1.0);
  EXPECT_LT(matern52(1e3, 1.0), 1e-300);
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(matern52(2.0, 2.0), (1 + s5 + 5.0 / 3.0) * std::exp(-s5), 1e-15);
  EXPECT_NEAR(matern52(2.0, 2.0), 0.5240, 5e-5);
  EXPECT_THROW(matern52(-1.0, 1.0), DomainError);
  EXPECT_THROW(matern52(1.0, 0.0), DomainError);
}

TEST(Matern52, ProductOverCoordinates) {
  const double a[3] = {0.1, -0.4, 2.0}, b[3] = {0.5, 0.3, 1.0};
  const Vector theta = (Vector(3) << 0.7, 1.9, 3.0).finished();
  double expected = 1.0;
  for (int k = 0; k < 3; ++k) expected *= matern52(std::abs(a[k] - b[k]), theta(k));
  EXPECT_NEAR(matern52_product(a, b, theta), expected, 1e-15);
}

TEST(KrigingConfig, Validation) {
  KrigingConfig c;
  c.lengthscale_bounds = {{1.0, 0.5}};
  EXPECT_THROW(c.validate(1), ConfigError);
  c.lengthscale_bounds = {{0.0, 1.0}};
  EXPECT_THROW(c.validate(1), ConfigError);
  c.lengthscale_bounds = {{0.1, 1.0}};
  EXPECT_THROW(c.validate(2), ConfigError);
  c = KrigingConfig{};
  c.nugget = -1.0;
  EXPECT_THROW(c.validate(2), ConfigError);
}

TEST(ProfileLikelihood, GradientMatchesFiniteDifferences) {
  for (Trend trend : {Trend::constant, Trend::linear}) {
    for (std::size_t d : {2u, 3u}) {
      const auto p = smooth_problem(20, d, 40 + d);
      const Vector log_theta = Vector::LinSpaced(static_cast<Eigen::Index>(d), -0.3, 0.6);
      Vector grad;
      profile_log_likelihood(p.x, p.y, trend, 1e-8, log_theta, &grad);
      for (Eigen::Index k = 0; k < log_theta.size(); ++k) {
        const double h = 1e-5;
        Vector up = log_theta, down = log_theta;
        up(k) += h;
        down(k) -= h;
        const double fd = (profile_log_likelihood(p.x, p.y, trend, 1e-8, up) -
                           profile_log_likelihood(p.x, p.y, trend, 1e-8, down)) /
                          (2 * h);
        EXPECT_NEAR(grad(k), fd, 1e-4 * std::max(1.0, std::abs(fd)))
            << "trend " << int(trend) << " d " << d << " k " << k;
      }
    }
  }
}

TEST(Kriging, InterpolatesWithoutNugget) {
  const auto p = smooth_problem(30, 2, 1);
  const auto m = KrigingModel::assemble(p.x, p.y, Trend::linear, Vector::Constant(2, 1.5), 0.0);
  const auto pred = m.predict(p.x);
  EXPECT_LT((pred.mean - p.y).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(pred.variance.maxCoeff(), 1e-8);
  EXPECT_GE(pred.variance.minCoeff(), 0.0);
}

TEST(Kriging, TrainingVarianceBoundedByNugget) {
  const auto p = smooth_problem(40, 3, 2);
  KrigingConfig cfg;
  cfg.restarts = 3;
  const auto m = fit_kriging(p.x, p.y, cfg);
  const auto pred = m.predict(p.x);
  EXPECT_LE(pred.variance.maxCoeff(), m.nugget() * m.process_variance() + 1e-8);
}

TEST(Kriging, RevertsToTrendFarAway) {
  const auto p = smooth_problem(30, 2, 3);
  const auto m = KrigingModel::assemble(p.x, p.y, Trend::linear, Vector::Constant(2, 0.8), 1e-8);
  Matrix far(1, 2);
  far << 1e4, -1e4;
  const auto pred = m.predict(far);
  const Matrix f = trend_basis(far, Trend::linear);
  EXPECT_NEAR(pred.mean(0), (f * m.trend_coefficients())(0), 1e-8 * 1e4);
  EXPECT_GE(pred.variance(0), m.process_variance() * (1 - 1e-12));
}

TEST(Kriging, BatchPredictEqualsRowWise) {
  const auto p = smooth_problem(25, 2, 4);
  const auto m = KrigingModel::assemble(p.x, p.y, Trend::constant, Vector::Constant(2, 1.0), 1e-8);
  const Matrix xs = sample(GaussianJoint::standard(2), 17, 5);
  const auto batch = m.predict(xs);
  for (Eigen::Index r = 0; r < xs.rows(); ++r) {
    const auto one = m.predict(xs.row(r));
    EXPECT_EQ(one.mean(0), batch.mean(r));
    EXPECT_EQ(one.variance(0), batch.variance(r));
  }
  EXPECT_TRUE((m.predict_mean(xs).array() == batch.mean.array()).all());
}

TEST(Kriging, TranslationOfOutputsShiftsMean) {
  const auto p = smooth_problem(30, 2, 6);
  const double c = 123.25;
  for (Trend t : {Trend::constant, Trend::linear}) {
    const Vector theta = Vector::Constant(2, 1.1);
    const auto a = KrigingModel::assemble(p.x, p.y, t, theta, 1e-8);
    const auto b = KrigingModel::assemble(p.x, (p.y.array() + c).matrix(), t, theta, 1e-8);
    const Matrix xs = sample(GaussianJoint::standard(2), 50, 7);
    EXPECT_LT((b.predict_mean(xs).array() - a.predict_mean(xs).array() - c).abs().maxCoeff(),
              1e-9);
  }
}

TEST(Kriging, LinearDataAbsorbedByTrend) {
  const Matrix x = sample(GaussianJoint::standard(3), 40, 8);
  const Vector y = 2.0 + (x * Vector::LinSpaced(3, 1, 3)).array();
  KrigingConfig cfg;
  cfg.restarts = 3;
  const auto m = fit_kriging(x, y, cfg);
  const double var_y = (y.array() - y.mean()).square().mean();
  EXPECT_LE(m.process_variance(), 1e-6 * var_y);
}

TEST(Kriging, OptimumBeatsEveryStartingPoint) {
  const auto p = smooth_problem(40, 2, 9);
  KrigingConfig cfg;
  cfg.restarts = 5;
  FitReport rep;
  const auto m = fit_kriging(p.x, p.y, cfg, &rep);
  ASSERT_EQ(rep.initial_log_likelihood.size(), 5u);
  for (double ll : rep.initial_log_likelihood) EXPECT_GE(m.log_likelihood(), ll);
  EXPECT_EQ(m.log_likelihood(), rep.final_log_likelihood[rep.best_restart]);
}

TEST(Kriging, LengthscalesRespectBounds) {
  const auto p = smooth_problem(30, 2, 10);
  KrigingConfig cfg;
  cfg.restarts = 3;
  cfg.lengthscale_bounds = {{0.5, 0.9}, {2.0, 3.0}};
  const auto m = fit_kriging(p.x, p.y, cfg);
  EXPECT_GE(m.lengthscales()(0), 0.5);
  EXPECT_LE(m.lengthscales()(0), 0.9);
  EXPECT_GE(m.lengthscales()(1), 2.0);
  EXPECT_LE(m.lengthscales()(1), 3.0);
}

TEST(Kriging, FitIsDeterministicAcrossThreads) {
  const auto p = smooth_problem(30, 2, 11);
  KrigingConfig cfg;
  cfg.restarts = 4;
  cfg.threads = 1;
  const auto a = fit_kriging(p.x, p.y, cfg);
  cfg.threads = 4;
  const auto b = fit_kriging(p.x, p.y, cfg);
  EXPECT_TRUE((a.lengthscales().array() == b.lengthscales().array()).all());
}

TEST(Kriging, InputErrors) {
  const auto p = smooth_problem(10, 2, 12);
  KrigingConfig cfg;
  cfg.nugget = 0.0;
  Matrix dup = p.x;
  dup.row(3) = dup.row(4);
  EXPECT_THROW(fit_kriging(dup, p.y, cfg), IllConditioned);
  EXPECT_THROW(fit_kriging(p.x.topRows(3), p.y.head(3), KrigingConfig{}), DomainError);
  EXPECT_THROW(fit_kriging(p.x, p.y.head(5), KrigingConfig{}), DomainError);
}

TEST(Kriging, SaveLoadRoundTrip) {
  const auto p = smooth_problem(30, 3, 13);
  KrigingConfig cfg;
  cfg.restarts = 2;
  const auto m = fit_kriging(p.x, p.y, cfg);
  std::stringstream buf;
  m.save(buf);
  const auto back = KrigingModel::load(buf);
  const Matrix xs = sample(GaussianJoint::standard(3), 40, 14);
  const auto a = m.predict(xs), b = back.predict(xs);
  EXPECT_TRUE((a.mean.array() == b.mean.array()).all());
  EXPECT_TRUE((a.variance.array() == b.variance.array()).all());
  EXPECT_EQ(back.nugget(), m.nugget());
  EXPECT_EQ(back.trend(), m.trend());
}

TEST(Kriging, LoadRejectsBadFiles) {
  std::istringstream wrong_tag("not-a-model 1\n");
  EXPECT_THROW(KrigingModel::load(wrong_tag), DomainError);
  std::istringstream wrong_version("gsa-kriging-model 99\n");
  EXPECT_THROW(KrigingModel::load(wrong_version), DomainError);
  std::istringstream truncated("gsa-kriging-model 1\ntrend linear\ndim 2\nsize 3\nnugget 0\n");
  EXPECT_THROW(KrigingModel::load(truncated), DomainError);
}

TEST(Q2, Examples) {
  const Vector y = (Vector(4) << 1, 2, 3, 5).finished();
  EXPECT_EQ(q2(y, y), 1.0);
  EXPECT_NEAR(q2(y, Vector::Constant(4, y.mean())), 0.0, 1e-15);
  EXPECT_LT(q2(y, -y), 0.0);
  EXPECT_THROW(q2(Vector::Constant(3, 2.0), Vector::Zero(3)), DegenerateOutput);
  EXPECT_THROW(q2(Vector::Ones(1), Vector::Ones(1)), DomainError);
}

TEST(Kriging, AsModelMatchesPredictMean) {
  const auto p = smooth_problem(25, 2, 15);
  auto km = std::make_shared<const KrigingModel>(
      KrigingModel::assemble(p.x, p.y, Trend::linear, Vector::Constant(2, 1.0), 1e-8));
  const auto model = as_model(km);
  EXPECT_EQ(model->arity(), 2u);
  const Matrix xs = sample(GaussianJoint::standard(2), 30, 16);
  EXPECT_TRUE((model->evaluate(xs).array() == km->predict(xs).mean.array()).all());
}

TEST(Kriging, IshigamiHundredPointDesign) {
  const CopulaJoint joint(Matrix::Identity(3, 3),
                          std::vector<Marginal>(3, UniformMarginal{-kPi, kPi}));
  const Matrix x = space_filling_design(joint, 100, 3);
  const auto ishigami = make_model(IshigamiModel{}, 3);
  KrigingConfig cfg;
  cfg.trend = Trend::constant;
  const auto m = fit_kriging(x, ishigami->evaluate(x), cfg);
  const Matrix xt = sample(joint, 5000, 17);
  EXPECT_GT(q2(m, xt, ishigami->evaluate(xt)), 0.8);
}

TEST(Sobol, PointsAndShift) {
  const Matrix s = sobol_points(8, 2);
  EXPECT_EQ(s(0, 0), 0.5);
  EXPECT_EQ(s(0, 1), 0.5);
  EXPECT_GT(s.minCoeff(), 0.0);
  EXPECT_LT(s.maxCoeff(), 1.0);
  // The first 2^k points stratify each axis into 2^k cells, origin included.
  const Matrix t = sobol_points(15, 3);
  for (int c = 0; c < 3; ++c) {
    std::vector<int> cells(16, 0);
    cells[0] = 1;
    for (int r = 0; r < 15; ++r) ++cells[static_cast<int>(t(r, c) * 16)];
    for (int k : cells) EXPECT_EQ(k, 1);
  }
  const Matrix a = shifted_sobol_points(16, 3, 1);
  EXPECT_TRUE((a.array() == shifted_sobol_points(16, 3, 1).array()).all());
  EXPECT_FALSE((a.array() == shifted_sobol_points(16, 3, 2).array()).all());
  EXPECT_GT(a.minCoeff(), 0.0);
  EXPECT_LT(a.maxCoeff(), 1.0);
}

}  // namespace
}  // namespace gsa
