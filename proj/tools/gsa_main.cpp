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

// Command-line front end: gsa <verb> --config PATH [--seed N] [--out PREFIX]
// [--threads N]. Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsa/config.hpp"
#include "gsa/error.hpp"
#include "gsa/experiment.hpp"
#include "gsa/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

gsa::RunConfig load(const GlobalFlags& flags, const std::optional<std::string>& builtin) {
  gsa::Overrides o{flags.seed, flags.threads, flags.out};
  if (!flags.config.empty()) return gsa::load_config(flags.config, o);
  if (builtin) return gsa::parse_config_string(*builtin, o);
  throw gsa::ConfigError("--config: a config file is required for this verb");
}

void print(const gsa::RunSummary& s) {
  for (const auto& line : s.report) std::cout << line << '\n';
  for (const auto& f : s.files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley effects and Sobol' indices for models with dependent inputs"};
  app.set_version_flag("--version", gsa::kVersionString);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed, overrides estimator.seed");
  app.add_option("--out", flags.out, "output path prefix, overrides output.prefix");
  app.add_option("--threads", flags.threads, "worker threads (0 = all cores)");

  std::function<gsa::RunSummary(const gsa::RunConfig&)> action;
  std::optional<std::string> builtin;

  app.add_subcommand("analyze", "estimate indices, or sweep a correlation")
      ->callback([&] { action = gsa::run_analysis; });
  app.add_subcommand("converge", "sweep No or m and tabulate the estimates")
      ->callback([&] { action = gsa::run_convergence; });
  app.add_subcommand("analytic", "closed-form indices for linear Gaussian problems")
      ->callback([&] { action = gsa::run_analytic; });
  app.add_subcommand("fit-surrogate", "fit a kriging surrogate and analyze it")
      ->callback([&] { action = gsa::run_fit_surrogate; });
  app.add_subcommand("fix-check", "variance reduction from fixing inputs")
      ->callback([&] { action = gsa::run_fix_check; });
  auto* demo = app.add_subcommand("demo", "built-in demonstrations");
  demo->require_subcommand(1);
  demo->add_subcommand("weld", "11-input weld study with a synthetic model")->callback([&] {
    action = gsa::run_weld_demo;
    builtin = gsa::weld_demo_config();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto cfg = load(flags, builtin);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
    print(action(cfg));
  } catch (const gsa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gsa::ExternalModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!e.captured_stderr().empty()) std::cerr << "model stderr:\n" << e.captured_stderr();
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
