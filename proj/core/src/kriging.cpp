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

#include "gsa/kriging.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include <ceres/ceres.h>
#include <glog/logging.h>

#include "gsa/design.hpp"
#include "gsa/error.hpp"
#include "parallel.hpp"

namespace gsa {
namespace {

constexpr double kSqrt5 = 2.23606797749978969641;
constexpr const char* kFormatTag = "gsa-kriging-model";
constexpr int kFormatVersion = 1;

double matern_factor(double r) { return 1.0 + r + r * r / 3.0; }

Matrix correlation_matrix(const Matrix& x, const Vector& theta, double nugget) {
  const auto n = x.rows();
  const auto d = x.cols();
  Matrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0 + nugget;
    for (Eigen::Index j = 0; j < i; ++j) {
      double poly = 1.0, expo = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double s = kSqrt5 * std::abs(x(i, k) - x(j, k)) / theta(k);
        poly *= matern_factor(s);
        expo += s;
      }
      r(i, j) = r(j, i) = poly * std::exp(-expo);
    }
  }
  return r;
}

struct GlsFit {
  Eigen::LLT<Matrix> llt;
  Matrix whitened_f;
  Eigen::LLT<Matrix> gls;
  Vector beta;
  Vector whitened_resid;
  double sigma2 = 0.0;
  double log_det = 0.0;
  bool ok = false;
};

GlsFit generalized_least_squares(const Matrix& r, const Matrix& f, const Vector& y) {
  GlsFit g;
  g.llt.compute(r);
  if (g.llt.info() != Eigen::Success) return g;
  const auto lower = g.llt.matrixL();
  g.whitened_f = lower.solve(f);
  const Vector yt = lower.solve(y);
  g.gls.compute(g.whitened_f.transpose() * g.whitened_f);
  if (g.gls.info() != Eigen::Success) return g;
  g.beta = g.gls.solve(g.whitened_f.transpose() * yt);
  g.whitened_resid = yt - g.whitened_f * g.beta;
  g.sigma2 = g.whitened_resid.squaredNorm() / static_cast<double>(y.size());
  const Matrix& packed = g.llt.matrixLLT();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) g.log_det += 2.0 * std::log(packed(i, i));
  g.ok = std::isfinite(g.sigma2) && std::isfinite(g.log_det);
  return g;
}

double concentrated_log_likelihood(double sigma2, double log_det, Eigen::Index n) {
  const double s2 = std::max(sigma2, std::numeric_limits<double>::min());
  return -0.5 * (static_cast<double>(n) * std::log(s2) + log_det);
}

struct LogBox {
  Vector lo;
  Vector hi;

  Vector log_theta(const double* s) const {
    Vector out(lo.size());
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
      out(k) = lo(k) + (hi(k) - lo(k)) / (1.0 + std::exp(-s[k]));
    }
    return out;
  }
  // d log(theta_k) / d s_k
  double slope(const double* s, Eigen::Index k) const {
    const double sig = 1.0 / (1.0 + std::exp(-s[k]));
    return (hi(k) - lo(k)) * sig * (1.0 - sig);
  }
};

// Negative profile log-likelihood over an unbounded reparameterization of
// the lengthscale box.
class NegativeLikelihood final : public ceres::FirstOrderFunction {
 public:
  NegativeLikelihood(const Matrix& x, const Vector& y, Trend trend, double nugget,
                     const LogBox& box)
      : x_(x), y_(y), trend_(trend), nugget_(nugget), box_(box) {}

  bool Evaluate(const double* s, double* cost, double* gradient) const override {
    Vector grad;
    const double ll = profile_log_likelihood(x_, y_, trend_, nugget_, box_.log_theta(s),
                                             gradient ? &grad : nullptr);
    if (!std::isfinite(ll)) return false;
    cost[0] = -ll;
    if (gradient) {
      for (Eigen::Index k = 0; k < grad.size(); ++k) {
        gradient[k] = -grad(k) * box_.slope(s, k);
        if (!std::isfinite(gradient[k])) return false;
      }
    }
    return true;
  }

  int NumParameters() const override { return static_cast<int>(box_.lo.size()); }

 private:
  const Matrix& x_;
  const Vector& y_;
  Trend trend_;
  double nugget_;
  const LogBox& box_;
};

void append_number(std::ostream& out, double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

double parse_number(const std::string& token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw DomainError("kriging model file: malformed number '" + token + "'");
  }
  return v;
}

void expect_keyword(std::istream& in, const std::string& keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    throw DomainError("kriging model file: expected '" + keyword + "'");
  }
}

std::string next_token(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw DomainError("kriging model file: unexpected end of file");
  return token;
}

// Ceres reports benign line-search warnings through glog; keep them off
// stderr. Errors still get through.
void quiet_solver_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    FLAGS_minloglevel = std::max<int>(FLAGS_minloglevel, google::GLOG_ERROR);
  });
}

class SurrogateModel final : public Model {
 public:
  explicit SurrogateModel(std::shared_ptr<const KrigingModel> model)
      : model_(std::move(model)) {}
  std::size_t arity() const override { return model_->dim(); }
  std::string name() const override { return "kriging"; }
  Vector evaluate(const Matrix& x) const override {
    if (static_cast<std::size_t>(x.cols()) != arity()) {
      throw DomainError("kriging surrogate expects " + std::to_string(arity()) + " inputs");
    }
    return model_->predict_mean(x);
  }

 private:
  std::shared_ptr<const KrigingModel> model_;
};

}  // namespace

void KrigingConfig::validate(std::size_t dim) const {
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) {
    throw ConfigError("surrogate.nugget must be a nonnegative number");
  }
  if (restarts < 1) throw ConfigError("surrogate.restarts must be >= 1");
  if (!lengthscale_bounds.empty()) {
    if (lengthscale_bounds.size() != dim) {
      throw ConfigError("surrogate.lengthscale_bounds needs one [lo, hi] pair per input");
    }
    for (const auto& [lo, hi] : lengthscale_bounds) {
      if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi)) {
        throw ConfigError("surrogate.lengthscale_bounds must satisfy 0 < lo < hi");
      }
    }
  }
}

double matern52(double h, double theta) {
  if (!(h >= 0.0)) throw DomainError("matern52: lag must be nonnegative");
  if (!(theta > 0.0)) throw DomainError("matern52: lengthscale must be positive");
  const double r = kSqrt5 * h / theta;
  if (std::isinf(r)) return 0.0;
  return matern_factor(r) * std::exp(-r);
}

double matern52_product(const double* a, const double* b, const Vector& theta) {
  double poly = 1.0, expo = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double s = kSqrt5 * std::abs(a[k] - b[k]) / theta(k);
    poly *= matern_factor(s);
    expo += s;
  }
  return poly * std::exp(-expo);
}

Matrix trend_basis(const Matrix& x, Trend trend) {
  if (trend == Trend::constant) return Matrix::Ones(x.rows(), 1);
  Matrix f(x.rows(), x.cols() + 1);
  f.col(0).setOnes();
  f.rightCols(x.cols()) = x;
  return f;
}

double profile_log_likelihood(const Matrix& x, const Vector& y, Trend trend,
                              double nugget, const Vector& log_theta, Vector* gradient) {
  const Vector theta = log_theta.array().exp();
  const Matrix r = correlation_matrix(x, theta, nugget);
  const GlsFit g = generalized_least_squares(r, trend_basis(x, trend), y);
  if (!g.ok) return -std::numeric_limits<double>::infinity();
  const double ll = concentrated_log_likelihood(g.sigma2, g.log_det, x.rows());
  if (gradient == nullptr) return ll;

  // d ll / d log(theta_k) = 1/2 sum_ij W_ij dR_ij/dlog(theta_k),
  // W = alpha alpha^T / sigma^2 - R^-1.
  const auto n = x.rows();
  const auto d = x.cols();
  const Vector alpha = g.llt.matrixU().solve(g.whitened_resid);
  const Matrix r_inv = g.llt.solve(Matrix::Identity(n, n));
  const double inv_s2 = g.sigma2 > 0.0 ? 1.0 / g.sigma2 : 0.0;
  gradient->setZero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double w = alpha(i) * alpha(j) * inv_s2 - r_inv(i, j);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double s = kSqrt5 * std::abs(x(i, k) - x(j, k)) / theta(k);
        // Off-diagonal pairs appear twice in the sum; the 1/2 cancels.
        (*gradient)(k) += w * r(i, j) * s * s * (1.0 + s) / (3.0 * matern_factor(s));
      }
    }
  }
  return ll;
}

KrigingModel KrigingModel::assemble(Matrix x, Vector y, Trend trend, Vector theta,
                                    double nugget) {
  if (x.rows() != y.size()) throw DomainError("kriging: inputs and outputs disagree in length");
  if (theta.size() != x.cols()) throw DomainError("kriging: one lengthscale per input required");
  const Matrix f = trend_basis(x, trend);
  const GlsFit g = generalized_least_squares(correlation_matrix(x, theta, nugget), f, y);
  if (!g.ok) {
    throw IllConditioned("kriging: training correlation matrix cannot be factorized");
  }
  KrigingModel m;
  m.trend_ = trend;
  m.theta_ = std::move(theta);
  m.nugget_ = nugget;
  m.chol_ = g.llt.matrixL();
  m.alpha_ = g.llt.matrixU().solve(g.whitened_resid);
  m.beta_ = g.beta;
  m.whitened_f_ = g.whitened_f;
  m.gls_chol_ = g.gls.matrixL();
  m.sigma2_ = g.sigma2;
  m.log_likelihood_ = concentrated_log_likelihood(g.sigma2, g.log_det, x.rows());
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  return m;
}

Vector KrigingModel::predict_mean(const Matrix& points) const {
  if (points.cols() != x_.cols()) throw DomainError("kriging: point dimension mismatch");
  const Matrix f = trend_basis(points, trend_);
  Vector mean = f * beta_;
  const Matrix xt = x_.transpose();  // column-contiguous training points
  Vector p(points.cols());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    p = points.row(r).transpose();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xt.cols(); ++i) {
      acc += matern52_product(p.data(), xt.col(i).data(), theta_) * alpha_(i);
    }
    mean(r) += acc;
  }
  return mean;
}

PredictiveDistribution KrigingModel::predict(const Matrix& points) const {
  PredictiveDistribution out{predict_mean(points), Vector(points.rows())};
  const Matrix f = trend_basis(points, trend_);
  const Matrix xt = x_.transpose();
  const auto n = x_.rows();
  Vector p(points.cols()), k(n);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    p = points.row(r).transpose();
    for (Eigen::Index i = 0; i < n; ++i) k(i) = matern52_product(p.data(), xt.col(i).data(), theta_);
    const Vector kt = chol_.triangularView<Eigen::Lower>().solve(k);
    const Vector u = f.row(r).transpose() - whitened_f_.transpose() * kt;
    const Vector ut = gls_chol_.triangularView<Eigen::Lower>().solve(u);
    const double v = sigma2_ * (1.0 - kt.squaredNorm() + ut.squaredNorm());
    out.variance(r) = std::max(0.0, v);
  }
  return out;
}

void KrigingModel::save(std::ostream& out) const {
  out << kFormatTag << ' ' << kFormatVersion << '\n';
  out << "trend " << (trend_ == Trend::linear ? "linear" : "constant") << '\n';
  out << "dim " << dim() << '\n' << "size " << size() << '\n';
  out << "nugget ";
  append_number(out, nugget_);
  out << "\nlengthscales";
  for (Eigen::Index k = 0; k < theta_.size(); ++k) {
    out << ' ';
    append_number(out, theta_(k));
  }
  out << "\nprocess_variance ";
  append_number(out, sigma2_);
  out << "\ntrend_coefficients";
  for (Eigen::Index k = 0; k < beta_.size(); ++k) {
    out << ' ';
    append_number(out, beta_(k));
  }
  out << "\ninputs\n";
  for (Eigen::Index r = 0; r < x_.rows(); ++r) {
    for (Eigen::Index c = 0; c < x_.cols(); ++c) {
      if (c > 0) out << ' ';
      append_number(out, x_(r, c));
    }
    out << '\n';
  }
  out << "outputs\n";
  for (Eigen::Index r = 0; r < y_.size(); ++r) {
    append_number(out, y_(r));
    out << '\n';
  }
}

void KrigingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write kriging model to " + path.string());
  save(out);
}

KrigingModel KrigingModel::load(std::istream& in) {
  expect_keyword(in, kFormatTag);
  if (next_token(in) != std::to_string(kFormatVersion)) {
    throw DomainError("kriging model file: unsupported format version");
  }
  expect_keyword(in, "trend");
  const std::string trend_name = next_token(in);
  if (trend_name != "linear" && trend_name != "constant") {
    throw DomainError("kriging model file: unknown trend '" + trend_name + "'");
  }
  const Trend trend = trend_name == "linear" ? Trend::linear : Trend::constant;
  expect_keyword(in, "dim");
  const auto d = static_cast<Eigen::Index>(parse_number(next_token(in)));
  expect_keyword(in, "size");
  const auto n = static_cast<Eigen::Index>(parse_number(next_token(in)));
  if (d <= 0 || n <= 0) throw DomainError("kriging model file: bad shape");
  expect_keyword(in, "nugget");
  const double nugget = parse_number(next_token(in));
  expect_keyword(in, "lengthscales");
  Vector theta(d);
  for (Eigen::Index k = 0; k < d; ++k) theta(k) = parse_number(next_token(in));
  expect_keyword(in, "process_variance");
  next_token(in);
  expect_keyword(in, "trend_coefficients");
  const Eigen::Index p = trend == Trend::linear ? d + 1 : 1;
  for (Eigen::Index k = 0; k < p; ++k) next_token(in);
  expect_keyword(in, "inputs");
  Matrix x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = parse_number(next_token(in));
  }
  expect_keyword(in, "outputs");
  Vector y(n);
  for (Eigen::Index r = 0; r < n; ++r) y(r) = parse_number(next_token(in));
  return assemble(std::move(x), std::move(y), trend, std::move(theta), nugget);
}

KrigingModel KrigingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot read kriging model from " + path.string());
  return load(in);
}

KrigingModel fit_kriging(const Matrix& x, const Vector& y, const KrigingConfig& cfg,
                         FitReport* report) {
  const auto n = x.rows();
  const auto d = x.cols();
  cfg.validate(static_cast<std::size_t>(d));
  if (y.size() != n) throw DomainError("fit_kriging: inputs and outputs disagree in length");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("fit_kriging: non-finite data");
  const Eigen::Index p = cfg.trend == Trend::linear ? d + 1 : 1;
  if (n < p + 1) {
    throw DomainError("fit_kriging: need at least " + std::to_string(p + 1) +
                      " training points for this trend");
  }
  if (cfg.nugget == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if ((x.row(i) - x.row(j)).cwiseAbs().maxCoeff() <= 1e-12) {
          throw IllConditioned("fit_kriging: duplicated training points need a positive nugget");
        }
      }
    }
  }

  LogBox box{Vector(d), Vector(d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    double lo, hi;
    if (!cfg.lengthscale_bounds.empty()) {
      lo = cfg.lengthscale_bounds[k].first;
      hi = cfg.lengthscale_bounds[k].second;
    } else {
      double range = x.col(k).maxCoeff() - x.col(k).minCoeff();
      if (!(range > 0.0)) range = 1.0;
      lo = 1e-2 * range;
      hi = 1e2 * range;
    }
    box.lo(k) = std::log(lo);
    box.hi(k) = std::log(hi);
  }

  quiet_solver_logging();
  const Matrix starts = sobol_points(cfg.restarts, static_cast<std::size_t>(d));
  std::vector<double> initial(cfg.restarts), final_ll(cfg.restarts);
  std::vector<Vector> optima(cfg.restarts);

  detail::parallel_for(cfg.restarts, cfg.threads, [&](std::size_t k) {
    std::vector<double> s(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double u = starts(static_cast<Eigen::Index>(k), c);
      s[c] = std::log(u / (1.0 - u));
    }
    initial[k] = profile_log_likelihood(x, y, cfg.trend, cfg.nugget, box.log_theta(s.data()));
    final_ll[k] = -std::numeric_limits<double>::infinity();
    if (!std::isfinite(initial[k])) return;

    ceres::GradientProblem problem(new NegativeLikelihood(x, y, cfg.trend, cfg.nugget, box));
    ceres::GradientProblemSolver::Options options;
    options.max_num_iterations = static_cast<int>(cfg.max_iterations);
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, s.data(), &summary);

    const Vector log_theta = box.log_theta(s.data());
    const double ll = profile_log_likelihood(x, y, cfg.trend, cfg.nugget, log_theta);
    // Never accept a point worse than where the restart began.
    if (std::isfinite(ll) && ll >= initial[k]) {
      final_ll[k] = ll;
      optima[k] = log_theta;
    } else {
      final_ll[k] = initial[k];
      std::vector<double> s0(d);
      for (Eigen::Index c = 0; c < d; ++c) {
        const double u = starts(static_cast<Eigen::Index>(k), c);
        s0[c] = std::log(u / (1.0 - u));
      }
      optima[k] = box.log_theta(s0.data());
    }
  });

  std::size_t best = cfg.restarts;
  for (std::size_t k = 0; k < cfg.restarts; ++k) {
    if (!std::isfinite(final_ll[k])) continue;
    if (best == cfg.restarts || final_ll[k] > final_ll[best]) best = k;
  }
  if (best == cfg.restarts) {
    throw FitFailure("fit_kriging: every restart failed to factorize the correlation matrix");
  }
  if (report != nullptr) {
    report->initial_log_likelihood = initial;
    report->final_log_likelihood = final_ll;
    report->best_restart = best;
  }
  return KrigingModel::assemble(x, y, cfg.trend, optima[best].array().exp(), cfg.nugget);
}

double q2(const Vector& observed, const Vector& predicted) {
  if (observed.size() != predicted.size()) throw DomainError("q2: length mismatch");
  if (observed.size() < 2) throw DomainError("q2: need at least two test points");
  const double mean = observed.mean();
  const double sst = (observed.array() - mean).square().sum();
  if (!(sst > 0.0)) throw DegenerateOutput("q2: test outputs are constant");
  return 1.0 - (observed - predicted).squaredNorm() / sst;
}

double q2(const KrigingModel& model, const Matrix& x_test, const Vector& y_test) {
  return q2(y_test, model.predict_mean(x_test));
}

std::shared_ptr<const Model> as_model(std::shared_ptr<const KrigingModel> model) {
  return std::make_shared<SurrogateModel>(std::move(model));
}

}  // namespace gsa
