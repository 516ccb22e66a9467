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

#include "gsa/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "gsa/error.hpp"

namespace gsa {
namespace {

constexpr double kSymmetryTolerance = 1e-10;

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

Matrix lower_cholesky(const Matrix& m, const char* what) {
  if (m.size() == 0) return Matrix(0, 0);
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DistributionInvalid(std::string(what) +
                              ": matrix is not positive-definite");
  }
  return llt.matrixL();
}

Matrix submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(r, c) = m(rows[r], cols[c]);
    }
  }
  return out;
}

Vector subvector(const Vector& v, const IndexSet& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out(k) = v(idx[k]);
  return out;
}

// out <- L out for lower-triangular L, in place. Row i only reads entries
// 0..i, which are still untouched when rows are processed bottom-up.
void lower_multiply_in_place(const Matrix& lower, std::span<double> out) {
  const auto n = static_cast<Eigen::Index>(out.size());
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k <= i; ++k) acc += lower(i, k) * out[k];
    out[i] = acc;
  }
}

}  // namespace

IndexSet::IndexSet(std::initializer_list<std::size_t> indices)
    : IndexSet(std::vector<std::size_t>(indices)) {}

IndexSet::IndexSet(std::vector<std::size_t> indices)
    : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw DomainError("IndexSet: duplicated index");
  }
}

IndexSet IndexSet::all(std::size_t dim) {
  std::vector<std::size_t> idx(dim);
  for (std::size_t i = 0; i < dim; ++i) idx[i] = i;
  return IndexSet(std::move(idx));
}

IndexSet IndexSet::from_mask(std::uint64_t mask, std::size_t dim) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dim; ++i) {
    if (mask & (std::uint64_t{1} << i)) idx.push_back(i);
  }
  return IndexSet(std::move(idx));
}

void IndexSet::check_within(std::size_t dim) const {
  if (!indices_.empty() && indices_.back() >= dim) {
    throw DomainError("IndexSet: index " + std::to_string(indices_.back() + 1) +
                      " exceeds dimension " + std::to_string(dim));
  }
}

IndexSet IndexSet::complement(std::size_t dim) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!contains(i)) idx.push_back(i);
  }
  return IndexSet(std::move(idx));
}

bool IndexSet::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::uint64_t IndexSet::mask() const {
  std::uint64_t m = 0;
  for (auto i : indices_) {
    if (i >= 64) throw SizeError("IndexSet: mask limited to 64 inputs");
    m |= std::uint64_t{1} << i;
  }
  return m;
}

GaussianJoint::GaussianJoint(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() ||
      covariance_.rows() != mean_.size()) {
    throw DistributionInvalid("GaussianJoint: mean has length " +
                              std::to_string(mean_.size()) +
                              " but covariance is " +
                              std::to_string(covariance_.rows()) + "x" +
                              std::to_string(covariance_.cols()));
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) {
    throw DistributionInvalid("GaussianJoint: non-finite parameter");
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() >
      kSymmetryTolerance) {
    throw DistributionInvalid("GaussianJoint: covariance is not symmetric");
  }
  chol_ = lower_cholesky(covariance_, "GaussianJoint covariance");
}

GaussianJoint GaussianJoint::standard(std::size_t dim) {
  return GaussianJoint(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

Vector GaussianJoint::stddev() const {
  return covariance_.diagonal().cwiseSqrt();
}

GaussianJoint conditional_gaussian(const GaussianJoint& joint,
                                   const IndexSet& given,
                                   std::span<const double> values) {
  const std::size_t d = joint.dim();
  given.check_within(d);
  if (given.empty() || given.size() >= d) {
    throw DomainError(
        "conditional_gaussian: conditioning set must be a nonempty proper "
        "subset");
  }
  if (values.size() != given.size()) {
    throw DomainError("conditional_gaussian: expected " +
                      std::to_string(given.size()) + " values, got " +
                      std::to_string(values.size()));
  }
  const IndexSet free = given.complement(d);
  const Matrix& cov = joint.covariance();
  const Matrix s_gg = submatrix(cov, given, given);
  const Matrix s_fg = submatrix(cov, free, given);
  Eigen::LLT<Matrix> llt(s_gg);
  if (llt.info() != Eigen::Success) {
    throw DistributionInvalid("conditional_gaussian: singular conditioning block");
  }
  Vector shift(given.size());
  for (std::size_t k = 0; k < given.size(); ++k) {
    shift(k) = values[k] - joint.mean()(given[k]);
  }
  const Vector mean = subvector(joint.mean(), free) + s_fg * llt.solve(shift);
  Matrix c = submatrix(cov, free, free) - s_fg * llt.solve(s_fg.transpose());
  c = 0.5 * (c + c.transpose()).eval();
  return GaussianJoint(mean, c);
}

double marginal_cdf(const Marginal& marginal, double x) {
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          if (x < m.lo || x > m.hi) {
            std::ostringstream os;
            os << "value " << x << " outside uniform support [" << m.lo << ", "
               << m.hi << "]";
            throw DomainError(os.str());
          }
          return (x - m.lo) / (m.hi - m.lo);
        } else {
          return normal_cdf(x);
        }
      },
      marginal);
}

double marginal_quantile(const Marginal& marginal, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("marginal_quantile: probability outside [0, 1]");
  }
  return std::visit(
      [p](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, UniformMarginal>) {
          return m.lo + (m.hi - m.lo) * p;
        } else {
          return normal_quantile(p);
        }
      },
      marginal);
}

CopulaJoint::CopulaJoint(Matrix correlation, std::vector<Marginal> marginals)
    : latent_(Vector::Zero(correlation.rows()), correlation),
      marginals_(std::move(marginals)) {
  const auto d = static_cast<std::size_t>(correlation.rows());
  if (marginals_.size() != d) {
    throw DistributionInvalid("CopulaJoint: " + std::to_string(marginals_.size()) +
                              " marginals for a " + std::to_string(d) +
                              "-dimensional correlation");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (std::abs(correlation(i, i) - 1.0) > kSymmetryTolerance) {
      throw DistributionInvalid("CopulaJoint: correlation diagonal must be 1");
    }
    if (const auto* u = std::get_if<UniformMarginal>(&marginals_[i])) {
      if (!(u->lo < u->hi) || !std::isfinite(u->lo) || !std::isfinite(u->hi)) {
        throw DistributionInvalid("CopulaJoint: uniform marginal " +
                                  std::to_string(i + 1) + " needs lo < hi");
      }
    }
  }
}

std::size_t dimension(const InputDistribution& dist) {
  return std::visit([](const auto& j) { return j.dim(); }, dist);
}

const GaussianJoint& latent_gaussian(const InputDistribution& dist) {
  if (const auto* g = std::get_if<GaussianJoint>(&dist)) return *g;
  return std::get<CopulaJoint>(dist).latent();
}

double to_physical(const InputDistribution& dist, std::size_t coord,
                   double latent) {
  const auto* copula = std::get_if<CopulaJoint>(&dist);
  if (copula == nullptr) return latent;
  const Marginal& m = copula->marginals()[coord];
  if (std::holds_alternative<StandardNormalMarginal>(m)) return latent;
  return marginal_quantile(m, normal_cdf(latent));
}

double to_latent(const InputDistribution& dist, std::size_t coord, double x) {
  const auto* copula = std::get_if<CopulaJoint>(&dist);
  if (copula == nullptr) return x;
  const Marginal& m = copula->marginals()[coord];
  if (std::holds_alternative<StandardNormalMarginal>(m)) return x;
  // Support end points map to +-inf; pull them in by one ulp of probability.
  const double p = std::clamp(marginal_cdf(m, x), 0x1.0p-53, 1.0 - 0x1.0p-53);
  return normal_quantile(p);
}

Matrix sample(const InputDistribution& dist, std::size_t n,
              std::uint64_t seed) {
  auto stream = rng::Stream::derive(seed, rng::Purpose::sample);
  return sample(dist, n, stream);
}

Matrix sample(const InputDistribution& dist, std::size_t n,
              rng::Stream& stream) {
  const GaussianJoint& latent = latent_gaussian(dist);
  const std::size_t d = latent.dim();
  const Matrix& chol = latent.cholesky_factor();
  Matrix out(n, d);
  std::vector<double> z(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : z) v = stream.normal();
    lower_multiply_in_place(chol, z);
    for (std::size_t c = 0; c < d; ++c) {
      out(r, c) = to_physical(dist, c, latent.mean()(c) + z[c]);
    }
  }
  return out;
}

Matrix sample_conditional(const InputDistribution& dist, const IndexSet& free,
                          std::span<const double> given_values, std::size_t n,
                          std::uint64_t seed) {
  const std::size_t d = dimension(dist);
  free.check_within(d);
  if (free.empty() || free.size() >= d) {
    throw DomainError(
        "sample_conditional: free set must be a nonempty proper subset");
  }
  const ConditionalSampler sampler(latent_gaussian(dist), free);
  const IndexSet& given = sampler.given();
  if (given_values.size() != given.size()) {
    throw DomainError("sample_conditional: expected " +
                      std::to_string(given.size()) + " given values, got " +
                      std::to_string(given_values.size()));
  }
  std::vector<double> given_latent(given.size());
  for (std::size_t k = 0; k < given.size(); ++k) {
    given_latent[k] = to_latent(dist, given[k], given_values[k]);
  }
  Matrix out(n, free.size());
  auto stream = rng::Stream::derive(seed, rng::Purpose::conditional);
  std::vector<double> draw(free.size());
  for (std::size_t r = 0; r < n; ++r) {
    sampler.draw_free(stream, given_latent, draw);
    for (std::size_t k = 0; k < free.size(); ++k) {
      out(r, k) = to_physical(dist, free[k], draw[k]);
    }
  }
  return out;
}

Matrix from_unit_cube(const InputDistribution& dist,
                      const Matrix& unit_points) {
  const GaussianJoint& latent = latent_gaussian(dist);
  const std::size_t d = latent.dim();
  if (static_cast<std::size_t>(unit_points.cols()) != d) {
    throw DomainError("from_unit_cube: point dimension does not match the law");
  }
  Matrix out(unit_points.rows(), d);
  std::vector<double> z(d);
  for (Eigen::Index r = 0; r < unit_points.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double u = unit_points(r, c);
      if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("from_unit_cube: coordinates must lie in (0, 1)");
      }
      z[c] = normal_quantile(u);
    }
    lower_multiply_in_place(latent.cholesky_factor(), z);
    for (std::size_t c = 0; c < d; ++c) {
      out(r, c) = to_physical(dist, c, latent.mean()(c) + z[c]);
    }
  }
  return out;
}

ConditionalSampler::ConditionalSampler(const GaussianJoint& joint, IndexSet free)
    : free_(std::move(free)) {
  const std::size_t d = joint.dim();
  free_.check_within(d);
  given_ = free_.complement(d);
  const Matrix& cov = joint.covariance();
  mean_free_ = subvector(joint.mean(), free_);
  mean_given_ = subvector(joint.mean(), given_);
  const Matrix s_gg = submatrix(cov, given_, given_);
  const Matrix s_fg = submatrix(cov, free_, given_);
  const Matrix s_ff = submatrix(cov, free_, free_);
  given_chol_ = lower_cholesky(s_gg, "conditioning block");
  if (given_.empty()) {
    regression_ = Matrix::Zero(free_.size(), 0);
    cond_chol_ = lower_cholesky(s_ff, "free block");
    return;
  }
  Eigen::LLT<Matrix> llt(s_gg);
  regression_ = llt.solve(s_fg.transpose()).transpose();
  if (free_.empty()) {
    cond_chol_ = Matrix(0, 0);
    return;
  }
  Matrix cond = s_ff - regression_ * s_fg.transpose();
  cond = 0.5 * (cond + cond.transpose()).eval();
  cond_chol_ = lower_cholesky(cond, "conditional covariance");
}

void ConditionalSampler::draw_given(rng::Stream& stream,
                                    std::span<double> out) const {
  for (auto& v : out) v = stream.normal();
  lower_multiply_in_place(given_chol_, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += mean_given_(k);
}

void ConditionalSampler::draw_free(rng::Stream& stream,
                                   std::span<const double> given,
                                   std::span<double> out) const {
  for (auto& v : out) v = stream.normal();
  lower_multiply_in_place(cond_chol_, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double mu = mean_free_(i);
    for (std::size_t k = 0; k < given.size(); ++k) {
      mu += regression_(i, k) * (given[k] - mean_given_(k));
    }
    out[i] += mu;
  }
}

}  // namespace gsa
