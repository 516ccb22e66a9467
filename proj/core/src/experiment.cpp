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

#include "gsa/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "gsa/design.hpp"
#include "gsa/error.hpp"
#include "gsa/kriging.hpp"
#include "gsa/rng.hpp"
#include "gsa/version.hpp"

namespace gsa {
namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
  std::filesystem::path p(cfg.output_prefix + suffix);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  return p;
}

std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct LongRow {
  double sweep_value;
  std::size_t input;
  const char* index;
  double estimate;
  double ci;
  double exact;
};

void append_rows(std::vector<LongRow>& rows, double sweep_value, const SensitivityResult& r,
                 const std::optional<analytic::AnalyticIndices>& exact) {
  const double nan = std::nan("");
  for (Eigen::Index i = 0; i < r.shapley.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    rows.push_back({sweep_value, k, "shapley", r.shapley(i), r.shapley_ci_halfwidth(i),
                    exact ? exact->shapley(i) : nan});
    rows.push_back({sweep_value, k, "first_order_full", r.first_order_full(i),
                    r.first_order_ci_halfwidth(i), exact ? exact->first_order_full(i) : nan});
    rows.push_back({sweep_value, k, "total_independent", r.total_independent(i),
                    r.total_ci_halfwidth(i), exact ? exact->total_independent(i) : nan});
  }
}

void write_long_csv(std::ostream& out, const std::vector<std::string>& names,
                    const std::vector<LongRow>& rows, bool with_exact) {
  out << "sweep_value,input,index,estimate,ci" << (with_exact ? ",exact" : "") << '\n';
  for (const auto& row : rows) {
    out << num(row.sweep_value) << ',' << names[row.input] << ',' << row.index << ','
        << num(row.estimate) << ',' << num(row.ci);
    if (with_exact) out << ',' << num(row.exact);
    out << '\n';
  }
}

std::string format_row(const std::string& label, const Vector& v) {
  std::ostringstream s;
  s << label;
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? " " : " ") << num(v(i));
  return s.str();
}

void report_result(RunSummary& summary, const SensitivityResult& r,
                   const std::optional<analytic::AnalyticIndices>& exact) {
  summary.report.push_back(format_row("shapley          ", r.shapley));
  summary.report.push_back(format_row("  ci             ", r.shapley_ci_halfwidth));
  summary.report.push_back(format_row("first_order_full ", r.first_order_full));
  summary.report.push_back(format_row("total_independent", r.total_independent));
  if (exact) {
    summary.report.push_back(format_row("exact shapley    ", exact->shapley));
    summary.report.push_back(format_row("exact first_order", exact->first_order_full));
    summary.report.push_back(format_row("exact total      ", exact->total_independent));
  }
  summary.report.push_back("variance " + num(r.variance_estimate) + ", mean " +
                           num(r.mean_estimate) + ", evaluations " +
                           std::to_string(r.evaluations_used));
}

struct SurrogateRun {
  std::shared_ptr<const KrigingModel> kriging;
  double q2 = std::nan("");
  SensitivityResult result;
  std::uint64_t model_evaluations = 0;
  std::filesystem::path model_file;
};

SurrogateRun fit_and_analyze(const RunConfig& cfg, RunSummary& summary) {
  if (cfg.model.kind == "surrogate") {
    throw ConfigError("model.kind: fit-surrogate needs the true model, not a saved surrogate");
  }
  const auto& sg = cfg.surrogate;
  const std::size_t d = cfg.distribution.dim();
  if (sg.design_size < 2) throw ConfigError("surrogate.design_size: must be >= 2");
  const auto dist = cfg.distribution.build();
  const auto model = build_model(cfg.model, d);

  SurrogateRun run;
  const std::uint64_t seed = cfg.estimator.seed;
  const Matrix x = space_filling_design(dist, sg.design_size, seed);
  const Vector y = model->evaluate(x);
  require_finite(y, model->name());
  run.model_evaluations += sg.design_size;

  FitReport fit;
  run.kriging = std::make_shared<const KrigingModel>(fit_kriging(x, y, sg.kriging, &fit));
  run.model_file = output_path(cfg, "_surrogate.krg");
  run.kriging->save(run.model_file);
  summary.files.push_back(run.model_file);
  summary.report.push_back("kriging fit on " + std::to_string(sg.design_size) +
                           " points, log-likelihood " + num(run.kriging->log_likelihood()) +
                           " (restart " + std::to_string(fit.best_restart) + ")");
  summary.report.push_back(format_row("  lengthscales", run.kriging->lengthscales()));

  if (sg.test_size >= 2) {
    auto stream = rng::Stream::derive(seed, rng::Purpose::test_sample);
    const Matrix xt = sample(dist, sg.test_size, stream);
    const Vector yt = model->evaluate(xt);
    require_finite(yt, model->name());
    run.model_evaluations += sg.test_size;
    run.q2 = q2(*run.kriging, xt, yt);
    summary.report.push_back("Q2 on " + std::to_string(sg.test_size) + " test points: " +
                             num(run.q2));
  }

  const auto surrogate = as_model(run.kriging);
  run.result = estimate_shapley(*surrogate, dist, cfg.estimator);
  return run;
}

}  // namespace

std::optional<analytic::AnalyticIndices> analytic_oracle(const ModelConfig& model,
                                                         const DistributionSpec& dist) {
  if (dist.kind != DistributionSpec::Kind::gaussian) return std::nullopt;
  const std::size_t d = dist.dim();
  if (const auto* lin = std::get_if<LinearModel>(&model.spec); lin && model.kind == "linear") {
    return analytic::linear_gaussian_indices({lin->beta0, lin->beta, dist.mean, dist.covariance});
  }
  if (const auto* proj = std::get_if<ProjectionModel>(&model.spec);
      proj && model.kind == "projection") {
    Vector beta = Vector::Zero(d);
    beta(proj->index) = 1.0;
    return analytic::linear_gaussian_indices({0.0, beta, dist.mean, dist.covariance});
  }
  if (model.kind == "interaction" && d == 3) {
    const Matrix& c = dist.covariance;
    if (dist.mean.cwiseAbs().maxCoeff() != 0.0 || c(0, 1) != 0.0 || c(1, 2) != 0.0) {
      return std::nullopt;
    }
    const Vector sd = c.diagonal().cwiseSqrt();
    return analytic::interaction_3d(sd(0), sd(1), sd(2), c(0, 2) / (sd(0) * sd(2)));
  }
  return std::nullopt;
}

void write_indices_csv(std::ostream& out, const std::vector<std::string>& names,
                       const SensitivityResult& r) {
  out << "input,shapley,shapley_ci,first_order_full,first_order_full_ci,total_independent,"
         "total_independent_ci\n";
  for (Eigen::Index i = 0; i < r.shapley.size(); ++i) {
    out << names[static_cast<std::size_t>(i)] << ',' << num(r.shapley(i)) << ','
        << num(r.shapley_ci_halfwidth(i)) << ',' << num(r.first_order_full(i)) << ','
        << num(r.first_order_ci_halfwidth(i)) << ',' << num(r.total_independent(i)) << ','
        << num(r.total_ci_halfwidth(i)) << '\n';
  }
}

void write_manifest(const RunConfig& cfg, const std::filesystem::path& path,
                    const std::string& verb, const RunSummary& summary,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  namespace pt = boost::property_tree;
  pt::ptree tree = cfg.tree;
  tree.erase("run");
  pt::ptree run;
  run.put("verb", verb);
  run.put("version", kVersionString);
  run.put("seed", std::to_string(cfg.estimator.seed));
  run.put("evaluations", std::to_string(summary.evaluations));
  run.put("wall_time_seconds", num(summary.wall_seconds));
  std::string files;
  for (const auto& f : summary.files) files += (files.empty() ? "" : ", ") + f.string();
  run.put("outputs", files);
  for (const auto& [k, v] : extra) run.put(k, v);
  tree.add_child("run", run);
  auto out = open_output(path);
  pt::write_ini(out, tree);
}

RunSummary run_analysis(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  RunSummary summary;
  const std::size_t d = cfg.distribution.dim();
  const auto model = build_model(cfg.model, d);
  const auto& names = cfg.distribution.names;

  if (cfg.sweep && cfg.sweep->parameter != SweepConfig::Parameter::rho) {
    throw ConfigError("sweep.parameter: No and m sweeps run with the converge verb");
  }
  if (cfg.sweep) {
    const auto& sw = *cfg.sweep;
    std::vector<LongRow> rows;
    bool with_exact = true;
    for (double rho : sw.values) {
      const auto spec = cfg.distribution.with_correlation(sw.first, sw.second, rho);
      const auto exact = analytic_oracle(cfg.model, spec);
      with_exact = with_exact && exact.has_value();
      const auto r = estimate_shapley(*model, spec.build(), cfg.estimator);
      summary.evaluations += r.evaluations_used;
      append_rows(rows, rho, r, exact);
      summary.report.push_back(format_row("rho " + num(rho) + " shapley", r.shapley));
    }
    const auto path = output_path(cfg, "_sweep.csv");
    auto out = open_output(path);
    write_long_csv(out, names, rows, with_exact);
    summary.files.push_back(path);
  } else {
    const auto r = estimate_shapley(*model, cfg.distribution.build(), cfg.estimator);
    summary.evaluations = r.evaluations_used;
    report_result(summary, r, analytic_oracle(cfg.model, cfg.distribution));
    const auto path = output_path(cfg, "_indices.csv");
    auto out = open_output(path);
    write_indices_csv(out, names, r);
    summary.files.push_back(path);
  }
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "analyze", summary);
  summary.files.push_back(manifest);
  return summary;
}

RunSummary run_convergence(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  if (!cfg.sweep || cfg.sweep->parameter == SweepConfig::Parameter::rho) {
    throw ConfigError("sweep.parameter: converge needs a sweep over No or m");
  }
  RunSummary summary;
  const std::size_t d = cfg.distribution.dim();
  const auto model = build_model(cfg.model, d);
  const auto dist = cfg.distribution.build();
  const auto exact = analytic_oracle(cfg.model, cfg.distribution);

  std::vector<LongRow> rows;
  for (double value : cfg.sweep->values) {
    EstimatorConfig est = cfg.estimator;
    if (cfg.sweep->parameter == SweepConfig::Parameter::outer_samples) {
      est.outer_samples = static_cast<std::size_t>(value);
    } else {
      est.permutations = static_cast<std::size_t>(value);
    }
    const auto r = estimate_shapley(*model, dist, est);
    summary.evaluations += r.evaluations_used;
    append_rows(rows, value, r, exact);
    std::string line = format_row(
        (cfg.sweep->parameter == SweepConfig::Parameter::outer_samples ? "No " : "m ") +
            num(value) + " shapley",
        r.shapley);
    if (exact) {
      line += "  max|err| " + num((r.shapley - exact->shapley).cwiseAbs().maxCoeff());
    }
    summary.report.push_back(line);
  }
  const auto path = output_path(cfg, "_convergence.csv");
  auto out = open_output(path);
  write_long_csv(out, cfg.distribution.names, rows, exact.has_value());
  summary.files.push_back(path);
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "converge", summary);
  summary.files.push_back(manifest);
  return summary;
}

RunSummary run_analytic(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  RunSummary summary;
  const auto& names = cfg.distribution.names;
  auto oracle_for = [&](const DistributionSpec& spec) {
    auto exact = analytic_oracle(cfg.model, spec);
    if (!exact) {
      throw ConfigError(
          "model.kind: closed forms cover linear and projection models with gaussian inputs, "
          "and the centred interaction model with x2 independent of (x1, x3)");
    }
    return *exact;
  };
  const auto path = output_path(cfg, "_analytic.csv");
  auto out = open_output(path);
  out << "sweep_value,input,shapley,first_order_full,total_independent\n";
  auto emit = [&](double sweep_value, const analytic::AnalyticIndices& a) {
    for (Eigen::Index i = 0; i < a.shapley.size(); ++i) {
      out << num(sweep_value) << ',' << names[static_cast<std::size_t>(i)] << ','
          << num(a.shapley(i)) << ',' << num(a.first_order_full(i)) << ','
          << num(a.total_independent(i)) << '\n';
    }
  };
  if (cfg.sweep && cfg.sweep->parameter == SweepConfig::Parameter::rho) {
    for (double rho : cfg.sweep->values) {
      const auto a =
          oracle_for(cfg.distribution.with_correlation(cfg.sweep->first, cfg.sweep->second, rho));
      emit(rho, a);
      summary.report.push_back(format_row("rho " + num(rho) + " shapley", a.shapley));
    }
  } else {
    const auto a = oracle_for(cfg.distribution);
    emit(std::nan(""), a);
    summary.report.push_back(format_row("shapley          ", a.shapley));
    summary.report.push_back(format_row("first_order_full ", a.first_order_full));
    summary.report.push_back(format_row("total_independent", a.total_independent));
    summary.report.push_back("variance " + num(a.variance));
  }
  summary.files.push_back(path);
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "analytic", summary);
  summary.files.push_back(manifest);
  return summary;
}

RunSummary run_fit_surrogate(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  RunSummary summary;
  const auto run = fit_and_analyze(cfg, summary);
  summary.evaluations = run.model_evaluations;
  report_result(summary, run.result, std::nullopt);
  const auto path = output_path(cfg, "_indices.csv");
  auto out = open_output(path);
  write_indices_csv(out, cfg.distribution.names, run.result);
  summary.files.push_back(path);
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "fit-surrogate", summary,
                 {{"q2", num(run.q2)},
                  {"surrogate_evaluations", std::to_string(run.result.evaluations_used)}});
  summary.files.push_back(manifest);
  return summary;
}

FixCheckReport fixed_input_variance_check(const Model& model, const InputDistribution& dist,
                                          const IndexSet& fixed, const Vector& values,
                                          std::size_t n, std::uint64_t seed) {
  const std::size_t d = dimension(dist);
  fixed.check_within(d);
  if (fixed.empty() || fixed.size() >= d) {
    throw DomainError("fix check: the fixed set must be a nonempty proper subset");
  }
  if (static_cast<std::size_t>(values.size()) != fixed.size()) {
    throw DomainError("fix check: one value per fixed input");
  }
  if (n < 2) throw DomainError("fix check: need at least two draws");

  FixCheckReport rep;
  rep.full_variance = estimate_variance(model, dist, n, seed).variance;

  const IndexSet free = fixed.complement(d);
  const Matrix xf = sample_conditional(
      dist, free, std::span<const double>(values.data(), fixed.size()), n, seed);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < free.size(); ++k) x.col(free[k]) = xf.col(k);
  for (std::size_t k = 0; k < fixed.size(); ++k) x.col(fixed[k]).setConstant(values(k));
  const Vector y = model.evaluate(x);
  require_finite(y, model.name());
  const double mean = y.mean();
  rep.fixed_variance = (y.array() - mean).square().sum() / static_cast<double>(n - 1);
  rep.relative_decrease = 1.0 - rep.fixed_variance / rep.full_variance;
  return rep;
}

RunSummary run_fix_check(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  if (!cfg.fix) throw ConfigError("fix.inputs: fix-check needs a [fix] section");
  RunSummary summary;
  const std::size_t d = cfg.distribution.dim();
  const auto model = build_model(cfg.model, d);
  const auto& fix = *cfg.fix;
  Vector values(fix.inputs.size());
  if (fix.values) {
    values = *fix.values;
  } else {
    const Vector means = cfg.distribution.marginal_means();
    for (std::size_t k = 0; k < fix.inputs.size(); ++k) values(k) = means(fix.inputs[k]);
  }
  const auto rep = fixed_input_variance_check(*model, cfg.distribution.build(), fix.inputs,
                                              values, fix.samples, cfg.estimator.seed);
  summary.evaluations = 2 * fix.samples;
  summary.report.push_back("variance, all inputs varying: " + num(rep.full_variance));
  summary.report.push_back("variance, inputs fixed:       " + num(rep.fixed_variance));
  summary.report.push_back("relative decrease:            " + num(rep.relative_decrease));
  const auto path = output_path(cfg, "_fixcheck.csv");
  auto out = open_output(path);
  out << "full_variance,fixed_variance,relative_decrease\n"
      << num(rep.full_variance) << ',' << num(rep.fixed_variance) << ','
      << num(rep.relative_decrease) << '\n';
  summary.files.push_back(path);
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "fix-check", summary);
  summary.files.push_back(manifest);
  return summary;
}

const std::string& weld_demo_config() {
  static const std::string text = R"ini(; Weld inspection study: 4 elastic coefficients and 7 grain orientations.
; Inputs are standardized. The model is a synthetic quadratic stand-in for
; the wave propagation code, so index values carry no physical meaning.
[model]
kind = quadratic
c0 = 0
linear = 0.7, 0.35, 0.45, 0.4, 1.0, 0.3, 0.9, 0.5, 0.25, 0.2, 0.3
quadratic_terms = 1-5:0.3, 5-7:0.2, 8-8:0.15, 10-11:0.1

[distribution]
kind = gaussian
names = C11, C13, C33, C55, Or1, Or2, Or3, Or4, Or5, Or6, Or7
mean = 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0
std = 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1
correlations = 5-6:0.80, 5-7:0.74, 5-8:0.69, 5-9:0.31, 5-10:0.23, 5-11:0.20, 6-7:0.64, 6-8:0.53, 6-9:0.59, 6-10:0.51, 6-11:0.46, 7-8:0.25, 7-9:0.60, 7-10:0.57, 7-11:0.54, 8-9:-0.25, 8-10:-0.35, 8-11:-0.33, 9-10:0.96, 9-11:0.84, 10-11:0.95

[estimator]
method = random
m = 10000
Ni = 3
No = 1
Nv = 10000
seed = 2017

[surrogate]
design_size = 500
test_size = 10000
trend = linear
restarts = 4
max_iterations = 100

[output]
prefix = weld
)ini";
  return text;
}

RunSummary run_weld_demo(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  RunSummary summary;
  const auto run = fit_and_analyze(cfg, summary);
  const auto& r = run.result;
  const std::size_t d = cfg.distribution.dim();
  summary.evaluations = run.model_evaluations;
  report_result(summary, r, std::nullopt);

  const std::uint64_t expected = evaluation_cost(cfg.estimator, d);
  summary.report.push_back("surrogate evaluations " + std::to_string(r.evaluations_used) +
                           " (cost formula " + std::to_string(expected) + ")");
  const double mean_ci = r.shapley_ci_halfwidth.mean();
  summary.report.push_back("mean Shapley CI half-width " + num(mean_ci));

  // Factors fixing: the three least influential inputs held at their means.
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.shapley(a) < r.shapley(b); });
  const IndexSet fixed({order[0], order[1], order[2]});
  const Vector means = cfg.distribution.marginal_means();
  Vector values(3);
  for (std::size_t k = 0; k < 3; ++k) values(k) = means(fixed[k]);
  constexpr std::size_t kFixSamples = 100000;
  const auto rep = fixed_input_variance_check(*as_model(run.kriging), cfg.distribution.build(),
                                              fixed, values, kFixSamples, cfg.estimator.seed);
  double shapley_sum = 0.0;
  std::string fixed_names;
  for (std::size_t i : fixed) {
    shapley_sum += r.shapley(static_cast<Eigen::Index>(i));
    fixed_names += (fixed_names.empty() ? "" : " ") + cfg.distribution.names[i];
  }
  summary.report.push_back("fixing " + fixed_names + ": variance " + num(rep.full_variance) +
                           " -> " + num(rep.fixed_variance) + ", decrease " +
                           num(rep.relative_decrease) + ", sum of their Shapley effects " +
                           num(shapley_sum));

  const auto path = output_path(cfg, "_indices.csv");
  {
    auto out = open_output(path);
    write_indices_csv(out, cfg.distribution.names, r);
  }
  summary.files.push_back(path);
  const auto fix_path = output_path(cfg, "_fixcheck.csv");
  {
    auto out = open_output(fix_path);
    out << "fixed_inputs,full_variance,fixed_variance,relative_decrease,shapley_sum\n"
        << fixed_names << ',' << num(rep.full_variance) << ',' << num(rep.fixed_variance) << ','
        << num(rep.relative_decrease) << ',' << num(shapley_sum) << '\n';
  }
  summary.files.push_back(fix_path);
  summary.wall_seconds = seconds_since(t0);
  const auto manifest = output_path(cfg, "_manifest.ini");
  write_manifest(cfg, manifest, "demo weld", summary,
                 {{"q2", num(run.q2)},
                  {"surrogate_evaluations", std::to_string(r.evaluations_used)},
                  {"mean_ci_halfwidth", num(mean_ci)}});
  summary.files.push_back(manifest);
  return summary;
}

}  // namespace gsa
