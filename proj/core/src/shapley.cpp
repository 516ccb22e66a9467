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

#include "gsa/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsa/error.hpp"
#include "parallel.hpp"

namespace gsa {
namespace {

// Rows per model call. Fixed so that chunk boundaries, and with them every
// floating-point reduction, do not depend on the thread count.
constexpr std::size_t kTargetRowsPerChunk = 8192;
constexpr std::size_t kMaxExactDim = 10;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running mean and sum of squared deviations (Welford / Chan et al.).
struct RunningStats {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double delta = x - mean;
    mean += delta / count;
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double n = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / n;
    m2 += o.m2 + delta * delta * count * o.count / n;
    count = n;
  }

  // Squared standard error of the mean; NaN with fewer than two samples.
  double variance_of_mean() const {
    if (count < 2.0) return kNaN;
    return m2 / (count - 1.0) / count;
  }
};

double unbiased_variance(const double* y, std::size_t n) {
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) mean += y[k];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) ss += (y[k] - mean) * (y[k] - mean);
  return ss / static_cast<double>(n - 1);
}

double sample_sd(const std::vector<double>& v) {
  RunningStats s;
  for (double x : v) s.add(x);
  if (s.count < 2.0) return kNaN;
  return std::sqrt(s.m2 / (s.count - 1.0));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_dimension(const Model& model, const InputDistribution& dist) {
  const std::size_t d = dimension(dist);
  if (model.arity() != d) {
    throw DomainError(model.name() + " model takes " + std::to_string(model.arity()) +
                      " inputs but the distribution has " + std::to_string(d));
  }
  if (d < 2) throw SizeError("Shapley estimation needs at least 2 inputs");
  if (d > 63) throw SizeError("Shapley estimation limited to 63 inputs");
}

using Permutation = std::vector<std::size_t>;

// One (permutation, outer index) work item draws, for every proper prefix of
// the permutation, one X_{-prefix} from its marginal followed by ni
// conditional draws of X_prefix. All of it comes from the stream keyed by
// (seed, permutation, outer index).
class CellSampler {
 public:
  CellSampler(const InputDistribution& dist, const std::vector<Permutation>& perms)
      : dist_(dist), d_(dimension(dist)) {
    const GaussianJoint& latent = latent_gaussian(dist);
    for (const auto& perm : perms) {
      std::uint64_t mask = 0;
      for (std::size_t j = 0; j + 1 < d_; ++j) {
        mask |= std::uint64_t{1} << perm[j];
        if (!cache_.contains(mask)) {
          cache_.emplace(mask, ConditionalSampler(latent, IndexSet::from_mask(mask, d_)));
        }
      }
    }
    plans_.reserve(perms.size());
    for (const auto& perm : perms) {
      std::vector<const ConditionalSampler*> plan;
      std::uint64_t mask = 0;
      for (std::size_t j = 0; j + 1 < d_; ++j) {
        mask |= std::uint64_t{1} << perm[j];
        plan.push_back(&cache_.at(mask));
      }
      plans_.push_back(std::move(plan));
    }
  }

  // Writes (d - 1) * ni rows starting at `row`.
  void fill(std::size_t perm, rng::Stream& stream, std::size_t ni, Matrix& x,
            Eigen::Index row) const {
    std::vector<double> given(d_), free(d_), latent(d_);
    for (const ConditionalSampler* s : plans_[perm]) {
      const std::size_t ng = s->given().size();
      const std::size_t nf = s->free().size();
      s->draw_given(stream, std::span(given.data(), ng));
      for (std::size_t k = 0; k < ng; ++k) latent[s->given()[k]] = given[k];
      for (std::size_t inner = 0; inner < ni; ++inner) {
        s->draw_free(stream, std::span<const double>(given.data(), ng),
                     std::span(free.data(), nf));
        for (std::size_t k = 0; k < nf; ++k) latent[s->free()[k]] = free[k];
        for (std::size_t c = 0; c < d_; ++c) {
          x(row, static_cast<Eigen::Index>(c)) = to_physical(dist_, c, latent[c]);
        }
        ++row;
      }
    }
  }

 private:
  const InputDistribution& dist_;
  std::size_t d_;
  std::unordered_map<std::uint64_t, ConditionalSampler> cache_;
  std::vector<std::vector<const ConditionalSampler*>> plans_;
};

struct CellPartial {
  std::size_t perm;
  std::size_t position;
  RunningStats stats;
};

// Per (permutation, prefix length) statistics of the inner sample variances.
// Returned row-major: cells[p * (d - 1) + j] for prefix length j + 1.
std::vector<RunningStats> run_cells(const Model& model, const InputDistribution& dist,
                                    const std::vector<Permutation>& perms,
                                    const EstimatorConfig& cfg,
                                    std::uint64_t& rows_evaluated) {
  const std::size_t d = dimension(dist);
  const std::size_t ni = cfg.inner_samples;
  const std::size_t no = cfg.outer_samples;
  const std::size_t rows_per_item = (d - 1) * ni;
  const std::size_t items = perms.size() * no;
  const std::size_t items_per_chunk = std::max<std::size_t>(1, kTargetRowsPerChunk / rows_per_item);
  const std::size_t chunks = (items + items_per_chunk - 1) / items_per_chunk;

  const CellSampler sampler(dist, perms);
  std::vector<std::vector<CellPartial>> partials(chunks);

  detail::parallel_for(chunks, cfg.threads, [&](std::size_t chunk) {
    const std::size_t begin = chunk * items_per_chunk;
    const std::size_t end = std::min(items, begin + items_per_chunk);
    Matrix x((end - begin) * rows_per_item, d);
    Eigen::Index row = 0;
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t p = t / no;
      auto stream = rng::Stream::derive(cfg.seed, rng::Purpose::cell, p, t % no);
      sampler.fill(p, stream, ni, x, row);
      row += static_cast<Eigen::Index>(rows_per_item);
    }
    const Vector y = model.evaluate(x);
    require_finite(y, model.name());

    auto& out = partials[chunk];
    const double* values = y.data();
    for (std::size_t t = begin; t < end; ++t) {
      const std::size_t p = t / no;
      if (out.empty() || out.back().perm != p) {
        for (std::size_t j = 0; j + 1 < d; ++j) out.push_back({p, j, {}});
      }
      CellPartial* cells = &out[out.size() - (d - 1)];
      for (std::size_t j = 0; j + 1 < d; ++j) {
        cells[j].stats.add(unbiased_variance(values, ni));
        values += ni;
      }
    }
  });

  std::vector<RunningStats> cells(perms.size() * (d - 1));
  for (const auto& chunk : partials) {
    for (const auto& part : chunk) cells[part.perm * (d - 1) + part.position].merge(part.stats);
  }
  rows_evaluated = static_cast<std::uint64_t>(items) * rows_per_item;
  return cells;
}

SensitivityResult assemble(const std::vector<Permutation>& perms,
                           const std::vector<RunningStats>& cells,
                           const VarianceEstimate& var, Method method, std::size_t d) {
  const double v = var.variance;
  const auto count = static_cast<double>(perms.size());

  Vector sh_acc = Vector::Zero(d);
  Vector sh_cell_var = Vector::Zero(d);
  std::vector<std::vector<double>> increments(d);
  std::vector<std::vector<double>> first_costs(d), last_costs(d);
  Vector first_cell_var = Vector::Zero(d), last_cell_var = Vector::Zero(d);

  for (std::size_t p = 0; p < perms.size(); ++p) {
    const RunningStats* c = &cells[p * (d - 1)];
    double prev = 0.0, prev_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      // The last position is closed by the total variance.
      const bool last = j + 1 == d;
      const double cur = last ? v : c[j].mean;
      const double cur_var = last ? 0.0 : c[j].variance_of_mean();
      const std::size_t input = perms[p][j];
      sh_acc(input) += cur - prev;
      sh_cell_var(input) += cur_var + prev_var;
      if (method == Method::random) increments[input].push_back((cur - prev) / v);
      prev = cur;
      prev_var = cur_var;
    }
    first_costs[perms[p][0]].push_back(c[0].mean);
    first_cell_var(perms[p][0]) += c[0].variance_of_mean();
    last_costs[perms[p][d - 1]].push_back(c[d - 2].mean);
    last_cell_var(perms[p][d - 1]) += c[d - 2].variance_of_mean();
  }

  SensitivityResult r;
  r.variance_estimate = v;
  r.mean_estimate = var.mean;
  r.shapley = sh_acc / (count * v);
  r.first_order_full = Vector(d);
  r.total_independent = Vector(d);
  r.shapley_ci_halfwidth = Vector(d);
  r.first_order_ci_halfwidth = Vector(d);
  r.total_ci_halfwidth = Vector(d);

  const double rel_var_v = var.variance_of_variance / (v * v);
  for (std::size_t i = 0; i < d; ++i) {
    const double total = mean_of(first_costs[i]) / v;
    const double first = 1.0 - mean_of(last_costs[i]) / v;
    r.total_independent(i) = total;
    r.first_order_full(i) = first;
    const auto n_first = static_cast<double>(first_costs[i].size());
    const auto n_last = static_cast<double>(last_costs[i].size());
    if (method == Method::random) {
      // CLT over the i.i.d. permutations, plus the Var(Y) estimate through
      // the delta method (it closes the n_last orderings ending with i).
      const double sh_centered = r.shapley(i) - n_last / count;
      const double sh_sd = sample_sd(increments[i]) / std::sqrt(count);
      r.shapley_ci_halfwidth(i) =
          2.0 * std::sqrt(sh_sd * sh_sd + sh_centered * sh_centered * rel_var_v);
      std::vector<double> scaled;
      for (double c : first_costs[i]) scaled.push_back(c / v);
      const double total_sd = sample_sd(scaled) / std::sqrt(n_first);
      r.total_ci_halfwidth(i) = 2.0 * std::sqrt(total_sd * total_sd + total * total * rel_var_v);
      scaled.clear();
      for (double c : last_costs[i]) scaled.push_back(c / v);
      const double first_sd = sample_sd(scaled) / std::sqrt(n_last);
      r.first_order_ci_halfwidth(i) =
          2.0 * std::sqrt(first_sd * first_sd + (1.0 - first) * (1.0 - first) * rel_var_v);
    } else {
      // CLT over the outer loop of every cell; cells are independent. The
      // shared Var(Y) estimate enters through the delta method: the last
      // position of d!/d orderings contributes V / d to the numerator.
      const double sh_centered = r.shapley(i) - 1.0 / static_cast<double>(d);
      const double sh_var = sh_cell_var(i) / (count * count * v * v) +
                            sh_centered * sh_centered * rel_var_v;
      r.shapley_ci_halfwidth(i) = 2.0 * std::sqrt(sh_var);
      const double total_var = first_cell_var(i) / (n_first * n_first * v * v) +
                               total * total * rel_var_v;
      r.total_ci_halfwidth(i) = 2.0 * std::sqrt(total_var);
      const double first_var = last_cell_var(i) / (n_last * n_last * v * v) +
                               (1.0 - first) * (1.0 - first) * rel_var_v;
      r.first_order_ci_halfwidth(i) = 2.0 * std::sqrt(first_var);
    }
  }
  return r;
}

SensitivityResult run_estimator(const Model& model, const InputDistribution& dist,
                                const EstimatorConfig& cfg,
                                const std::vector<Permutation>& perms) {
  const std::size_t d = dimension(dist);
  const VarianceEstimate var =
      estimate_variance(model, dist, cfg.variance_samples, cfg.seed);
  std::uint64_t rows = 0;
  const auto cells = run_cells(model, dist, perms, cfg, rows);
  SensitivityResult r = assemble(perms, cells, var, cfg.method, d);
  r.evaluations_used = rows + cfg.variance_samples;
  return r;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (inner_samples < 2) throw ConfigError("estimator.Ni must be >= 2");
  if (outer_samples < 1) throw ConfigError("estimator.No must be >= 1");
  if (variance_samples < 2) throw ConfigError("estimator.Nv must be >= 2");
  if (method == Method::random && permutations < 1) {
    throw ConfigError("estimator.m must be >= 1 for the random method");
  }
}

VarianceEstimate estimate_variance(const Model& model, const InputDistribution& dist,
                                   std::size_t nv, std::uint64_t seed) {
  if (nv < 2) throw ConfigError("estimator.Nv must be >= 2");
  auto stream = rng::Stream::derive(seed, rng::Purpose::variance);
  const Matrix x = sample(dist, nv, stream);
  const Vector y = model.evaluate(x);
  require_finite(y, model.name());

  const auto n = static_cast<double>(nv);
  const double mean = y.mean();
  double m2 = 0.0, m4 = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double e = (y(k) - mean) * (y(k) - mean);
    m2 += e;
    m4 += e * e;
  }
  VarianceEstimate out;
  out.mean = mean;
  out.variance = m2 / (n - 1.0);
  if (!(out.variance > 1e-12 * mean * mean)) {
    throw DegenerateOutput("output variance is zero or negligible; indices are undefined");
  }
  const double s4 = out.variance * out.variance;
  out.variance_of_variance = std::max(0.0, (m4 / n - s4 * (n - 3.0) / (n - 1.0)) / n);
  return out;
}

double prefix_cost(const Model& model, const InputDistribution& dist,
                   const IndexSet& prefix, std::size_t ni, std::size_t no,
                   std::uint64_t seed, std::uint64_t stream_index) {
  const std::size_t d = dimension(dist);
  prefix.check_within(d);
  if (ni < 2) throw ConfigError("estimator.Ni must be >= 2");
  if (no < 1) throw ConfigError("estimator.No must be >= 1");
  if (prefix.empty()) return 0.0;

  const ConditionalSampler sampler(latent_gaussian(dist), prefix);
  const std::size_t ng = sampler.given().size();
  const std::size_t nf = sampler.free().size();
  const std::size_t per_chunk = std::max<std::size_t>(1, kTargetRowsPerChunk / ni);
  std::vector<double> given(ng), free(nf), latent(d);
  RunningStats stats;
  for (std::size_t begin = 0; begin < no; begin += per_chunk) {
    const std::size_t end = std::min(no, begin + per_chunk);
    Matrix x((end - begin) * ni, d);
    Eigen::Index row = 0;
    for (std::size_t l = begin; l < end; ++l) {
      auto stream = rng::Stream::derive(seed, rng::Purpose::cell, stream_index, l);
      sampler.draw_given(stream, given);
      for (std::size_t k = 0; k < ng; ++k) latent[sampler.given()[k]] = given[k];
      for (std::size_t inner = 0; inner < ni; ++inner, ++row) {
        sampler.draw_free(stream, given, free);
        for (std::size_t k = 0; k < nf; ++k) latent[sampler.free()[k]] = free[k];
        for (std::size_t c = 0; c < d; ++c) {
          x(row, static_cast<Eigen::Index>(c)) = to_physical(dist, c, latent[c]);
        }
      }
    }
    const Vector y = model.evaluate(x);
    require_finite(y, model.name());
    for (std::size_t l = 0; l < end - begin; ++l) stats.add(unbiased_variance(y.data() + l * ni, ni));
  }
  return stats.mean;
}

SensitivityResult shapley_exact(const Model& model, const InputDistribution& dist,
                                const EstimatorConfig& cfg) {
  cfg.validate();
  check_dimension(model, dist);
  const std::size_t d = dimension(dist);
  if (d > kMaxExactDim) {
    throw SizeError("exact permutation method limited to " + std::to_string(kMaxExactDim) +
                    " inputs; use the random method");
  }
  std::vector<Permutation> perms;
  Permutation perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  EstimatorConfig exact = cfg;
  exact.method = Method::exact;
  return run_estimator(model, dist, exact, perms);
}

SensitivityResult shapley_random(const Model& model, const InputDistribution& dist,
                                 const EstimatorConfig& cfg) {
  EstimatorConfig random = cfg;
  random.method = Method::random;
  random.validate();
  check_dimension(model, dist);
  const std::size_t d = dimension(dist);
  std::vector<Permutation> perms(random.permutations, Permutation(d));
  for (std::size_t p = 0; p < perms.size(); ++p) {
    auto& perm = perms[p];
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto stream = rng::Stream::derive(random.seed, rng::Purpose::permutation, p);
    for (std::size_t i = d - 1; i > 0; --i) {
      std::swap(perm[i], perm[stream.below(i + 1)]);
    }
  }
  return run_estimator(model, dist, random, perms);
}

SensitivityResult estimate_shapley(const Model& model, const InputDistribution& dist,
                                   const EstimatorConfig& cfg) {
  return cfg.method == Method::exact ? shapley_exact(model, dist, cfg)
                                     : shapley_random(model, dist, cfg);
}

std::uint64_t equivalent_m(std::uint64_t no_exact, std::size_t d) {
  if (d > kMaxExactDim) {
    throw SizeError("equivalent_m: d! is only enumerable for d <= " +
                    std::to_string(kMaxExactDim));
  }
  std::uint64_t m = no_exact;
  for (std::uint64_t k = 2; k <= d; ++k) {
    if (__builtin_mul_overflow(m, k, &m)) throw SizeError("equivalent_m: overflow");
  }
  return m;
}

std::uint64_t evaluation_cost(const EstimatorConfig& cfg, std::size_t d) {
  if (d < 2) throw SizeError("evaluation_cost: need at least 2 inputs");
  const std::uint64_t perms =
      cfg.method == Method::exact ? equivalent_m(1, d) : cfg.permutations;
  std::uint64_t c = perms;
  if (__builtin_mul_overflow(c, static_cast<std::uint64_t>(d - 1), &c) ||
      __builtin_mul_overflow(c, static_cast<std::uint64_t>(cfg.inner_samples), &c) ||
      __builtin_mul_overflow(c, static_cast<std::uint64_t>(cfg.outer_samples), &c) ||
      __builtin_add_overflow(c, static_cast<std::uint64_t>(cfg.variance_samples), &c)) {
    throw SizeError("evaluation_cost: overflow");
  }
  return c;
}

}  // namespace gsa
