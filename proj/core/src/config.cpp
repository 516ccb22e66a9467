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

#include "gsa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "gsa/error.hpp"

namespace gsa {
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"model", {"kind", "beta0", "beta", "a", "b", "index", "c0", "linear", "quadratic",
                 "quadratic_terms", "command", "workdir", "path"}},
      {"distribution", {"kind", "names", "mean", "covariance", "std", "correlation",
                        "correlations", "marginals"}},
      {"estimator", {"method", "Ni", "No", "Nv", "m", "seed", "threads"}},
      {"sweep", {"parameter", "values", "pair"}},
      {"surrogate", {"design_size", "test_size", "trend", "nugget", "restarts",
                     "max_iterations"}},
      {"fix", {"inputs", "values", "samples"}},
      {"output", {"prefix"}},
  };
  return keys;
}

std::string trimmed(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) {
    return trimmed(*v);
  }
  return std::nullopt;
}

std::string require(const pt::ptree& tree, const std::string& key) {
  auto v = get(tree, key);
  if (!v || v->empty()) throw ConfigError(key + ": required key is missing");
  return *v;
}

double parse_scalar(const std::string& token, const std::string& key) {
  std::string t = trimmed(token);
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    std::string rest = t.substr(1);
    if (rest == "pi") return sign * std::numbers::pi;
  }
  if (t == "pi") return std::numbers::pi;
  if (auto star = t.find("*pi"); star != std::string::npos && star + 3 == t.size()) {
    return parse_scalar(t.substr(0, star), key) * std::numbers::pi;
  }
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": '" + t + "' is not a number");
  }
  return v;
}

// Splits on commas (or semicolons, as row breaks) outside parentheses.
std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if ((ch == ',' || ch == ';') && depth == 0) {
      out.push_back(trimmed(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trimmed(cur).empty() || !out.empty()) out.push_back(trimmed(cur));
  return out;
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  // Allow 1e4 and friends when they are exact integers.
  const double d = parse_scalar(text, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15) {
    throw ConfigError(key + ": '" + text + "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(d);
}

std::optional<std::uint64_t> get_count(const pt::ptree& tree, const std::string& key) {
  if (auto v = get(tree, key)) return parse_count(*v, key);
  return std::nullopt;
}

std::optional<double> get_number(const pt::ptree& tree, const std::string& key) {
  if (auto v = get(tree, key)) return parse_scalar(*v, key);
  return std::nullopt;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix square_from_list(const std::vector<double>& v, std::size_t d, const std::string& key) {
  if (v.size() != d * d) {
    throw ConfigError(key + ": expected " + std::to_string(d * d) +
                      " row-major entries, got " + std::to_string(v.size()));
  }
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) m(r, c) = v[r * d + c];
  }
  return m;
}

double clamp_correlation(double rho, const std::string& key, std::vector<std::string>& warnings) {
  if (!(std::abs(rho) <= 1.0)) throw ConfigError(key + ": correlation outside [-1, 1]");
  if (std::abs(rho) > kMaxAbsCorrelation) {
    const double clamped = std::copysign(kMaxAbsCorrelation, rho);
    std::ostringstream msg;
    msg << key << ": correlation " << rho << " clamped to " << clamped;
    warnings.push_back(msg.str());
    return clamped;
  }
  return rho;
}

std::vector<std::size_t> parse_positions(const std::string& text, std::size_t d,
                                         const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_top_level(text)) {
    const auto v = parse_count(tok, key);
    if (v < 1 || v > d) {
      throw ConfigError(key + ": input position " + tok + " outside 1.." + std::to_string(d));
    }
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  return out;
}

// Off-diagonal entries from "i-j:rho, ..." with an identity elsewhere.
Matrix sparse_correlation(const std::string& text, std::size_t d, const std::string& key,
                          std::vector<std::string>& warnings) {
  Matrix c = Matrix::Identity(d, d);
  for (const auto& item : split_top_level(text)) {
    const auto colon = item.find(':');
    const auto dash = item.find('-');
    if (colon == std::string::npos || dash == std::string::npos || dash > colon) {
      throw ConfigError(key + ": expected entries like 1-3:0.5, got '" + item + "'");
    }
    const auto i = parse_positions(item.substr(0, dash), d, key).at(0);
    const auto j = parse_positions(item.substr(dash + 1, colon - dash - 1), d, key).at(0);
    if (i == j) throw ConfigError(key + ": '" + item + "' sets a diagonal entry");
    const double rho = clamp_correlation(parse_scalar(item.substr(colon + 1), key), key, warnings);
    c(i, j) = c(j, i) = rho;
  }
  return c;
}

Matrix full_correlation(const std::string& text, std::size_t d, const std::string& key,
                        std::vector<std::string>& warnings) {
  Matrix c = square_from_list(parse_number_list(text, key), d, key);
  std::vector<std::string> mirrored;  // one warning per pair is enough
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t s = r + 1; s < d; ++s) {
      c(r, s) = clamp_correlation(c(r, s), key, warnings);
      c(s, r) = clamp_correlation(c(s, r), key, mirrored);
    }
  }
  return c;
}

Marginal parse_marginal(const std::string& text, const std::string& key) {
  const std::string t = trimmed(text);
  if (t == "normal" || t == "gaussian") return StandardNormalMarginal{};
  if (t.rfind("uniform(", 0) == 0 && t.back() == ')') {
    const auto args = split_top_level(t.substr(8, t.size() - 9));
    if (args.size() != 2) throw ConfigError(key + ": uniform needs two bounds");
    const double lo = parse_scalar(args[0], key);
    const double hi = parse_scalar(args[1], key);
    if (!(lo < hi)) throw ConfigError(key + ": uniform bounds must satisfy lo < hi");
    return UniformMarginal{lo, hi};
  }
  throw ConfigError(key + ": unknown marginal '" + t + "'");
}

DistributionSpec parse_distribution(const pt::ptree& tree, std::vector<std::string>& warnings) {
  DistributionSpec spec;
  const std::string kind = require(tree, "distribution.kind");
  std::size_t d = 0;
  auto correlation_for = [&](std::size_t dim) -> Matrix {
    const bool full = get(tree, "distribution.correlation").has_value();
    const bool sparse = get(tree, "distribution.correlations").has_value();
    if (full && sparse) {
      throw ConfigError("distribution.correlations: give either correlation or correlations");
    }
    if (full) {
      return full_correlation(*get(tree, "distribution.correlation"), dim,
                              "distribution.correlation", warnings);
    }
    if (sparse) {
      return sparse_correlation(*get(tree, "distribution.correlations"), dim,
                                "distribution.correlations", warnings);
    }
    return Matrix::Identity(dim, dim);
  };

  if (kind == "gaussian") {
    spec.kind = DistributionSpec::Kind::gaussian;
    const auto cov_text = get(tree, "distribution.covariance");
    const auto std_text = get(tree, "distribution.std");
    const auto mean_text = get(tree, "distribution.mean");
    if (cov_text && std_text) {
      throw ConfigError("distribution.std: give either covariance or std, not both");
    }
    std::vector<double> mean;
    if (mean_text) mean = parse_number_list(*mean_text, "distribution.mean");
    if (cov_text) {
      const auto cov = parse_number_list(*cov_text, "distribution.covariance");
      d = mean_text ? mean.size()
                    : static_cast<std::size_t>(std::llround(std::sqrt(double(cov.size()))));
      spec.covariance = square_from_list(cov, d, "distribution.covariance");
      if (get(tree, "distribution.correlation") || get(tree, "distribution.correlations")) {
        throw ConfigError("distribution.correlation: not allowed together with covariance");
      }
    } else if (std_text) {
      const auto sd = parse_number_list(*std_text, "distribution.std");
      d = sd.size();
      for (double s : sd) {
        if (!(s > 0.0)) throw ConfigError("distribution.std: entries must be positive");
      }
      const Vector sdv = to_vector(sd);
      spec.covariance = sdv.asDiagonal() * correlation_for(d) * sdv.asDiagonal();
    } else {
      throw ConfigError("distribution.covariance: gaussian needs covariance or std");
    }
    if (mean_text && mean.size() != d) {
      throw ConfigError("distribution.mean: length disagrees with the covariance");
    }
    spec.mean = mean_text ? to_vector(mean) : Vector::Zero(d);
  } else if (kind == "copula") {
    spec.kind = DistributionSpec::Kind::copula;
    for (const auto& m : split_top_level(require(tree, "distribution.marginals"))) {
      spec.marginals.push_back(parse_marginal(m, "distribution.marginals"));
    }
    d = spec.marginals.size();
    spec.correlation = correlation_for(d);
    for (const char* k : {"distribution.mean", "distribution.std", "distribution.covariance"}) {
      if (get(tree, k)) throw ConfigError(std::string(k) + ": not used by kind = copula");
    }
  } else {
    throw ConfigError("distribution.kind: unknown kind '" + kind + "'");
  }
  if (d == 0) throw ConfigError("distribution.kind: zero inputs");

  if (auto names = get(tree, "distribution.names")) {
    spec.names = split_top_level(*names);
    if (spec.names.size() != d) {
      throw ConfigError("distribution.names: expected " + std::to_string(d) + " names");
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) spec.names.push_back("x" + std::to_string(i + 1));
  }
  try {
    spec.build();
  } catch (const Error& e) {
    throw ConfigError(std::string("distribution: ") + e.what());
  }
  return spec;
}

ModelConfig parse_model(const pt::ptree& tree, std::size_t d) {
  ModelConfig m;
  m.kind = require(tree, "model.kind");
  auto list = [&](const char* key) { return to_vector(parse_number_list(require(tree, key), key)); };
  if (m.kind == "linear") {
    m.spec = LinearModel{get_number(tree, "model.beta0").value_or(0.0), list("model.beta")};
  } else if (m.kind == "ishigami") {
    m.spec = IshigamiModel{get_number(tree, "model.a").value_or(7.0),
                           get_number(tree, "model.b").value_or(0.1)};
  } else if (m.kind == "interaction") {
    m.spec = InteractionModel{};
  } else if (m.kind == "projection") {
    const auto idx = parse_positions(require(tree, "model.index"), d, "model.index");
    if (idx.size() != 1) throw ConfigError("model.index: expected one position");
    m.spec = ProjectionModel{idx[0]};
  } else if (m.kind == "quadratic") {
    QuadraticModel q;
    q.c0 = get_number(tree, "model.c0").value_or(0.0);
    q.linear = get(tree, "model.linear") ? list("model.linear") : Vector::Zero(d);
    q.quadratic = get(tree, "model.quadratic")
                      ? square_from_list(parse_number_list(*get(tree, "model.quadratic"),
                                                           "model.quadratic"),
                                         d, "model.quadratic")
                      : Matrix::Zero(d, d);
    // Sparse form: "i-j:c" adds c * x_i * x_j.
    if (auto terms = get(tree, "model.quadratic_terms")) {
      const std::string key = "model.quadratic_terms";
      for (const auto& item : split_top_level(*terms)) {
        const auto colon = item.find(':');
        const auto dash = item.find('-');
        if (colon == std::string::npos || dash == std::string::npos || dash > colon) {
          throw ConfigError(key + ": expected entries like 1-5:0.3, got '" + item + "'");
        }
        const auto i = parse_positions(item.substr(0, dash), d, key).at(0);
        const auto j = parse_positions(item.substr(dash + 1, colon - dash - 1), d, key).at(0);
        const double c = parse_scalar(item.substr(colon + 1), key);
        if (i == j) {
          q.quadratic(i, i) += c;
        } else {
          q.quadratic(i, j) += 0.5 * c;
          q.quadratic(j, i) += 0.5 * c;
        }
      }
    }
    m.spec = q;
  } else if (m.kind == "external") {
    m.spec = ExternalModel{require(tree, "model.command"),
                           get(tree, "model.workdir").value_or(".")};
  } else if (m.kind == "surrogate") {
    m.surrogate_path = require(tree, "model.path");
    return m;
  } else {
    throw ConfigError("model.kind: unknown kind '" + m.kind + "'");
  }
  try {
    make_model(m.spec, d);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return m;
}

EstimatorConfig parse_estimator(const pt::ptree& tree) {
  EstimatorConfig e;
  const std::string method = get(tree, "estimator.method").value_or("exact");
  if (method == "exact") {
    e.method = Method::exact;
  } else if (method == "random") {
    e.method = Method::random;
  } else {
    throw ConfigError("estimator.method: expected exact or random, got '" + method + "'");
  }
  e.inner_samples = get_count(tree, "estimator.Ni").value_or(e.inner_samples);
  e.outer_samples = get_count(tree, "estimator.No").value_or(e.outer_samples);
  e.variance_samples = get_count(tree, "estimator.Nv").value_or(e.variance_samples);
  e.permutations = get_count(tree, "estimator.m").value_or(e.permutations);
  e.seed = get_count(tree, "estimator.seed").value_or(e.seed);
  const auto threads = get_count(tree, "estimator.threads").value_or(e.threads);
  if (threads > 1024) throw ConfigError("estimator.threads: at most 1024");
  e.threads = static_cast<unsigned>(threads);
  return e;
}

void check_known_keys(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (section == "run") continue;  // manifest bookkeeping
    auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError(section + ": unknown section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(section + "." + key + ": unknown key");
    }
  }
}

}  // namespace

std::size_t DistributionSpec::dim() const {
  return kind == Kind::gaussian ? static_cast<std::size_t>(mean.size()) : marginals.size();
}

InputDistribution DistributionSpec::build() const {
  if (kind == Kind::gaussian) return GaussianJoint(mean, covariance);
  return CopulaJoint(correlation, marginals);
}

DistributionSpec DistributionSpec::with_correlation(std::size_t i, std::size_t j,
                                                    double rho) const {
  if (i >= dim() || j >= dim() || i == j) {
    throw DomainError("with_correlation: need two distinct inputs in range");
  }
  DistributionSpec out = *this;
  if (kind == Kind::gaussian) {
    const double c = rho * std::sqrt(covariance(i, i) * covariance(j, j));
    out.covariance(i, j) = out.covariance(j, i) = c;
  } else {
    out.correlation(i, j) = out.correlation(j, i) = rho;
  }
  return out;
}

Vector DistributionSpec::marginal_means() const {
  if (kind == Kind::gaussian) return mean;
  Vector m(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    m(i) = std::visit(
        [](const auto& mg) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(mg)>, UniformMarginal>) {
            return 0.5 * (mg.lo + mg.hi);
          } else {
            return 0.0;
          }
        },
        marginals[i]);
  }
  return m;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split_top_level(text)) out.push_back(parse_scalar(tok, key));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

RunConfig parse_config(pt::ptree tree, const Overrides& overrides) {
  if (overrides.seed) tree.put("estimator.seed", std::to_string(*overrides.seed));
  if (overrides.threads) tree.put("estimator.threads", std::to_string(*overrides.threads));
  if (overrides.output_prefix) tree.put("output.prefix", *overrides.output_prefix);
  check_known_keys(tree);

  RunConfig cfg;
  cfg.distribution = parse_distribution(tree, cfg.warnings);
  const std::size_t d = cfg.distribution.dim();
  cfg.model = parse_model(tree, d);
  cfg.estimator = parse_estimator(tree);
  if (cfg.estimator.method == Method::exact && d > 10) {
    throw ConfigError("estimator.method: exact enumeration supports at most 10 inputs");
  }

  if (tree.get_child_optional("sweep")) {
    SweepConfig s;
    const std::string p = require(tree, "sweep.parameter");
    if (p == "No") {
      s.parameter = SweepConfig::Parameter::outer_samples;
    } else if (p == "m") {
      s.parameter = SweepConfig::Parameter::permutations;
      if (cfg.estimator.method != Method::random) {
        throw ConfigError("sweep.parameter: m sweeps need estimator.method = random");
      }
    } else if (p == "rho") {
      s.parameter = SweepConfig::Parameter::rho;
    } else {
      throw ConfigError("sweep.parameter: expected No, m or rho, got '" + p + "'");
    }
    for (const auto& tok : split_top_level(require(tree, "sweep.values"))) {
      if (s.parameter == SweepConfig::Parameter::rho) {
        s.values.push_back(clamp_correlation(parse_scalar(tok, "sweep.values"), "sweep.values",
                                             cfg.warnings));
      } else {
        const auto n = parse_count(tok, "sweep.values");
        if (n == 0) throw ConfigError("sweep.values: loop sizes must be positive");
        s.values.push_back(static_cast<double>(n));
      }
    }
    if (s.parameter == SweepConfig::Parameter::rho) {
      const auto pair = parse_positions(require(tree, "sweep.pair"), d, "sweep.pair");
      if (pair.size() != 2 || pair[0] == pair[1]) {
        throw ConfigError("sweep.pair: expected two distinct input positions");
      }
      s.first = pair[0];
      s.second = pair[1];
      for (double rho : s.values) {
        try {
          cfg.distribution.with_correlation(s.first, s.second, rho).build();
        } catch (const Error& e) {
          throw ConfigError("sweep.values: rho = " + std::to_string(rho) + " gives an invalid law: " +
                            e.what());
        }
      }
    }
    cfg.sweep = s;
  }

  auto& sg = cfg.surrogate;
  sg.design_size = get_count(tree, "surrogate.design_size").value_or(sg.design_size);
  sg.test_size = get_count(tree, "surrogate.test_size").value_or(sg.test_size);
  if (auto t = get(tree, "surrogate.trend")) {
    if (*t == "linear") {
      sg.kriging.trend = Trend::linear;
    } else if (*t == "constant") {
      sg.kriging.trend = Trend::constant;
    } else {
      throw ConfigError("surrogate.trend: expected constant or linear, got '" + *t + "'");
    }
  }
  sg.kriging.nugget = get_number(tree, "surrogate.nugget").value_or(sg.kriging.nugget);
  sg.kriging.restarts = get_count(tree, "surrogate.restarts").value_or(sg.kriging.restarts);
  sg.kriging.max_iterations =
      get_count(tree, "surrogate.max_iterations").value_or(sg.kriging.max_iterations);
  sg.kriging.threads = cfg.estimator.threads;
  sg.kriging.validate(d);

  if (tree.get_child_optional("fix")) {
    FixConfig f;
    f.inputs = IndexSet(parse_positions(require(tree, "fix.inputs"), d, "fix.inputs"));
    if (f.inputs.empty() || f.inputs.size() >= d) {
      throw ConfigError("fix.inputs: must be a nonempty proper subset of the inputs");
    }
    if (auto v = get(tree, "fix.values")) {
      f.values = to_vector(parse_number_list(*v, "fix.values"));
      if (static_cast<std::size_t>(f.values->size()) != f.inputs.size()) {
        throw ConfigError("fix.values: one value per fixed input");
      }
    }
    f.samples = get_count(tree, "fix.samples").value_or(f.samples);
    if (f.samples < 2) throw ConfigError("fix.samples: must be >= 2");
    cfg.fix = f;
  }

  cfg.output_prefix = get(tree, "output.prefix").value_or(cfg.output_prefix);
  if (cfg.output_prefix.empty()) throw ConfigError("output.prefix: must not be empty");
  cfg.estimator.validate();
  cfg.tree = std::move(tree);
  return cfg;
}

RunConfig parse_config(std::istream& in, const Overrides& overrides) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  return parse_config(std::move(tree), overrides);
}

RunConfig parse_config_string(const std::string& text, const Overrides& overrides) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  return parse_config(in, overrides);
}

std::shared_ptr<const Model> build_model(const ModelConfig& model, std::size_t dim) {
  if (model.kind == "surrogate") {
    auto krg = std::make_shared<const KrigingModel>(KrigingModel::load(model.surrogate_path));
    if (krg->dim() != dim) {
      throw ConfigError("model.path: surrogate has " + std::to_string(krg->dim()) +
                        " inputs, the distribution has " + std::to_string(dim));
    }
    return as_model(std::move(krg));
  }
  return make_model(model.spec, dim);
}

}  // namespace gsa
