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
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "gsa/inputs.hpp"
#include "gsa/kriging.hpp"
#include "gsa/models.hpp"
#include "gsa/shapley.hpp"
#include "gsa/types.hpp"

namespace gsa {

// Input law as written in the config file. Kept in raw form so a sweep can
// rebuild it with one correlation entry changed.
struct DistributionSpec {
  enum class Kind { gaussian, copula };
  Kind kind = Kind::gaussian;
  Vector mean;                     // gaussian
  Matrix covariance;               // gaussian
  Matrix correlation;              // copula
  std::vector<Marginal> marginals; // copula
  std::vector<std::string> names;

  std::size_t dim() const;
  InputDistribution build() const;
  // Sets the correlation between inputs i and j (0-based).
  DistributionSpec with_correlation(std::size_t i, std::size_t j, double rho) const;
  // Marginal means, used as default values by the fix check.
  Vector marginal_means() const;
};

struct ModelConfig {
  std::string kind;
  ModelSpec spec;  // unused for kind == "surrogate"
  std::filesystem::path surrogate_path;
};

struct SweepConfig {
  enum class Parameter { outer_samples, permutations, rho };
  Parameter parameter = Parameter::outer_samples;
  std::vector<double> values;
  std::size_t first = 0;  // rho sweeps: the correlated pair, 0-based
  std::size_t second = 1;
};

struct SurrogateConfig {
  std::size_t design_size = 200;
  std::size_t test_size = 10000;
  KrigingConfig kriging;
};

struct FixConfig {
  IndexSet inputs;
  std::optional<Vector> values;  // defaults to the marginal means
  std::size_t samples = 10000;
};

struct RunConfig {
  ModelConfig model;
  DistributionSpec distribution;
  EstimatorConfig estimator;
  std::optional<SweepConfig> sweep;
  SurrogateConfig surrogate;
  std::optional<FixConfig> fix;
  std::string output_prefix = "gsa";
  // Non-fatal adjustments made while parsing (clamped correlations).
  std::vector<std::string> warnings;
  // The effective key-value tree, overrides applied. Written back as the
  // run manifest.
  boost::property_tree::ptree tree;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output_prefix;
};

// Correlations supplied by the user are clamped to this magnitude.
inline constexpr double kMaxAbsCorrelation = 0.9999;

// Parses an INI document. Every error is a ConfigError naming the key.
RunConfig parse_config(std::istream& in, const Overrides& overrides = {});
RunConfig parse_config_string(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
RunConfig parse_config(boost::property_tree::ptree tree, const Overrides& overrides = {});

// Builds the model evaluator, loading a saved surrogate when asked to.
std::shared_ptr<const Model> build_model(const ModelConfig& model, std::size_t dim);

// Comma-separated numbers; accepts pi, -pi and k*pi.
std::vector<double> parse_number_list(const std::string& text, const std::string& key);

}  // namespace gsa
