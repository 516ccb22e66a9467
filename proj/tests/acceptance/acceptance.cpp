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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// below; the master seed was chosen before any run.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gsa/analytic.hpp"
#include "gsa/config.hpp"
#include "gsa/design.hpp"
#include "gsa/experiment.hpp"
#include "gsa/inputs.hpp"
#include "gsa/kriging.hpp"
#include "gsa/models.hpp"
#include "gsa/rng.hpp"
#include "gsa/shapley.hpp"

namespace {

using namespace gsa;
namespace fs = std::filesystem;

constexpr std::uint64_t kMasterSeed = 2026;
constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kOracleTol = 1e-10;          // 1
constexpr double kAbsentInputTol = 0.01;      // 2
constexpr double kThreeInputTol = 0.02;       // 3
constexpr int kCoverageSeeds = 20;            // 3
constexpr int kCoverageRequired = 18;         // 3
constexpr double kReferenceRounding = 5e-5;   // 3, reference values have four decimals
constexpr double kOrderingCiMultiple = 2.0;   // 5
constexpr double kIdentityCiMultiple = 3.0;   // 6
constexpr int kVarianceSeeds = 50;            // 7
constexpr double kQ2Large = 0.95;             // 8
constexpr double kQ2SmallLo = 0.6;            // 8
constexpr double kQ2SmallHi = 0.9;            // 8
constexpr double kSurrogateTol = 0.05;        // 9
constexpr double kWeldMeanCi = 0.05;          // 10

struct Outcome {
  bool pass = true;
  std::string detail;
  // Every estimate the criterion produced, compared bitwise across thread
  // counts by criterion 11.
  std::vector<double> fingerprint;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
  void record(const SensitivityResult& r) {
    for (const Vector* v : {&r.shapley, &r.first_order_full, &r.total_independent,
                            &r.shapley_ci_halfwidth, &r.first_order_ci_halfwidth,
                            &r.total_ci_halfwidth})
      fingerprint.insert(fingerprint.end(), v->data(), v->data() + v->size());
    fingerprint.push_back(r.variance_estimate);
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt(const Vector& v, int digits = 4) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i), digits);
  return s + ")";
}

EstimatorConfig exact_config(std::size_t no, std::size_t nv, std::uint64_t seed, unsigned threads) {
  EstimatorConfig c;
  c.method = Method::exact;
  c.inner_samples = 3;
  c.outer_samples = no;
  c.variance_samples = nv;
  c.seed = seed;
  c.threads = threads;
  return c;
}

GaussianJoint gaussian(const Vector& sigma, std::size_t i, std::size_t j, double rho) {
  Matrix cov = sigma.cwiseAbs2().asDiagonal();
  cov(i, j) = cov(j, i) = rho * sigma(i) * sigma(j);
  return GaussianJoint(Vector::Zero(sigma.size()), cov);
}

CopulaJoint ishigami_inputs(double rho13) {
  Matrix corr = Matrix::Identity(3, 3);
  corr(0, 2) = corr(2, 0) = rho13;
  return CopulaJoint(corr, std::vector<Marginal>(3, UniformMarginal{-kPi, kPi}));
}

// The three-input linear problem shared by criteria 3, 4 and 7.
const Vector kSigma3 = (Vector(3) << 1, 1, 2).finished();
constexpr double kRho3 = 0.9;

std::shared_ptr<const Model> linear3() { return make_model(LinearModel{0.0, Vector::Ones(3)}, 3); }

bool within(const Vector& a, const Vector& b, double tol) {
  return ((a - b).cwiseAbs().array() <= tol).all();
}

// --- 1 ----------------------------------------------------------------------

Outcome oracle_two_inputs(unsigned) {
  Outcome out;
  double worst = 0.0;
  for (double s2 : {1.0, 2.0}) {
    for (int k = 0; k <= 40; ++k) {
      const double rho = -0.99 + k * (1.98 / 40);
      analytic::LinearGaussianProblem p;
      p.beta = Vector::Ones(2);
      p.mean = Vector::Zero(2);
      p.covariance = gaussian((Vector(2) << 1.0, s2).finished(), 0, 1, rho).covariance();
      const Vector general = analytic::shapley_linear_gaussian(p);
      const auto sobol = analytic::sobol_linear_gaussian(p);
      const auto special = analytic::linear_two_inputs(1.0, 1.0, 1.0, s2, rho);
      // Direct transcription of the two-input closed forms.
      const double v = 1.0 + s2 * s2 + 2.0 * rho * s2;
      const double sh1 = (1.0 - rho * rho / 2.0 + rho * s2 + s2 * s2 * rho * rho / 2.0) / v;
      const double s1 = (1.0 + rho * s2) * (1.0 + rho * s2) / v;
      const double st1 = (1.0 - rho * rho) / v;
      const Vector hand_sh = (Vector(2) << sh1, 1.0 - sh1).finished();
      const Vector hand_s =
          (Vector(2) << s1, (s2 + rho) * (s2 + rho) / v).finished();
      const Vector hand_st = (Vector(2) << st1, (1.0 - rho * rho) * s2 * s2 / v).finished();
      for (const auto& [a, b] : {std::pair{&general, &special.shapley},
                                 std::pair{&general, &hand_sh},
                                 std::pair{&sobol.first_order_full, &hand_s},
                                 std::pair{&special.first_order_full, &hand_s},
                                 std::pair{&sobol.total_independent, &hand_st},
                                 std::pair{&special.total_independent, &hand_st}})
        worst = std::max(worst, (*a - *b).cwiseAbs().maxCoeff());
    }
  }
  out.require(worst <= kOracleTol, "max deviation " + fmt(worst));
  if (out.pass) out.note("82 configurations, max deviation " + fmt(worst, 2));
  return out;
}

// --- 2 ----------------------------------------------------------------------

Outcome absent_input(unsigned threads) {
  Outcome out;
  const auto model = make_model(ProjectionModel{0}, 2);
  const auto dist = gaussian(Vector::Ones(2), 0, 1, 0.6);
  const auto r = estimate_shapley(*model, dist, exact_config(10000, 100000, kMasterSeed, threads));
  out.record(r);
  const Vector sh = (Vector(2) << 0.82, 0.18).finished();
  const Vector s = (Vector(2) << 1.0, 0.36).finished();
  const Vector st = (Vector(2) << 0.64, 0.0).finished();
  out.require(within(r.shapley, sh, kAbsentInputTol), "Sh " + fmt(r.shapley));
  out.require(within(r.first_order_full, s, kAbsentInputTol), "S " + fmt(r.first_order_full));
  out.require(within(r.total_independent, st, kAbsentInputTol), "ST " + fmt(r.total_independent));
  if (out.pass)
    out.note("Sh " + fmt(r.shapley) + " S " + fmt(r.first_order_full) + " ST " +
             fmt(r.total_independent));
  return out;
}

// --- 3 ----------------------------------------------------------------------

Outcome three_inputs(unsigned threads) {
  Outcome out;
  const auto exact = analytic::linear_three_inputs(Vector::Ones(3), kSigma3, kRho3);
  const Vector reference = (Vector(3) << 0.1042, 0.4182, 0.4776).finished();
  out.require(within(exact.shapley, reference, kReferenceRounding),
              "closed form " + fmt(exact.shapley, 6) + " vs reference values");
  const auto model = linear3();
  const auto dist = gaussian(kSigma3, 1, 2, kRho3);
  std::vector<int> covered(3, 0);
  for (int k = 0; k < kCoverageSeeds; ++k) {
    const auto r = estimate_shapley(*model, dist, exact_config(5000, 10000, kMasterSeed + k, threads));
    out.record(r);
    if (k == 0)
      out.require(within(r.shapley, exact.shapley, kThreeInputTol), "estimate " + fmt(r.shapley));
    for (int i = 0; i < 3; ++i)
      covered[i] += std::abs(r.shapley(i) - exact.shapley(i)) <= r.shapley_ci_halfwidth(i);
  }
  for (int i = 0; i < 3; ++i)
    out.require(covered[i] >= kCoverageRequired,
                "input " + std::to_string(i + 1) + " covered in " + std::to_string(covered[i]) +
                    "/" + std::to_string(kCoverageSeeds));
  if (out.pass)
    out.note("coverage " + std::to_string(covered[0]) + "/" + std::to_string(covered[1]) + "/" +
             std::to_string(covered[2]) + " of " + std::to_string(kCoverageSeeds));
  return out;
}

// --- 4 ----------------------------------------------------------------------

Outcome method_equivalence(unsigned threads) {
  Outcome out;
  const auto model = linear3();
  const auto dist = gaussian(kSigma3, 1, 2, kRho3);
  const auto ex = estimate_shapley(*model, dist, exact_config(5000, 10000, kMasterSeed, threads));
  EstimatorConfig rc = exact_config(1, 10000, kMasterSeed, threads);
  rc.method = Method::random;
  rc.permutations = equivalent_m(5000, 3);
  out.require(rc.permutations == 30000, "equivalent m " + std::to_string(rc.permutations));
  const auto rnd = estimate_shapley(*model, dist, rc);
  out.record(ex);
  out.record(rnd);
  for (int i = 0; i < 3; ++i) {
    const double gap = std::abs(ex.shapley(i) - rnd.shapley(i));
    out.require(gap <= ex.shapley_ci_halfwidth(i) + rnd.shapley_ci_halfwidth(i),
                "input " + std::to_string(i + 1) + " intervals disjoint, exact " +
                    fmt(ex.shapley(i)) + " +- " + fmt(ex.shapley_ci_halfwidth(i), 2) +
                    ", random " + fmt(rnd.shapley(i)) + " +- " +
                    fmt(rnd.shapley_ci_halfwidth(i), 2));
  }
  if (out.pass) out.note("exact " + fmt(ex.shapley) + ", random " + fmt(rnd.shapley));
  return out;
}

// --- 5 ----------------------------------------------------------------------

Outcome interaction(unsigned threads) {
  Outcome out;
  for (double rho : {0.5, 0.67, 0.70, 0.75, 0.8}) {
    const auto a = analytic::interaction_3d(1.0, 1.0, 1.0, rho);
    const bool above = a.shapley(2) > std::max(a.first_order_full(2), a.total_independent(2));
    const bool expected = rho * rho >= 3.0 / 7.0 && rho * rho <= 3.0 / 5.0;
    out.require(above == expected, "analytic ordering wrong at rho " + fmt(rho));
  }
  const auto model = make_model(InteractionModel{}, 3);
  const auto dist = gaussian(Vector::Ones(3), 0, 2, 0.70);
  const auto r = estimate_shapley(*model, dist, exact_config(200000, 1000000, kMasterSeed, threads));
  out.record(r);
  const bool s_larger = r.first_order_full(2) >= r.total_independent(2);
  const double other = s_larger ? r.first_order_full(2) : r.total_independent(2);
  const double other_ci = s_larger ? r.first_order_ci_halfwidth(2) : r.total_ci_halfwidth(2);
  const double gap = r.shapley(2) - other;
  const double margin = kOrderingCiMultiple * std::max(r.shapley_ci_halfwidth(2), other_ci);
  out.require(gap > margin, "Sh3 - max(S3, ST3) = " + fmt(gap) + " vs " + fmt(margin));
  if (out.pass) out.note("estimated gap " + fmt(gap) + " > " + fmt(margin));
  return out;
}

// --- 6 ----------------------------------------------------------------------

bool sandwiched(const SensitivityResult& r, Eigen::Index j) {
  const double lo = std::min(r.first_order_full(j), r.total_independent(j));
  const double hi = std::max(r.first_order_full(j), r.total_independent(j));
  const double slack = std::max(r.first_order_ci_halfwidth(j), r.total_ci_halfwidth(j));
  return r.shapley(j) >= lo - slack && r.shapley(j) <= hi + slack;
}

Outcome block_additive(unsigned threads) {
  Outcome out;
  const auto model = make_model(IshigamiModel{}, 3);
  const auto cfg = exact_config(20000, 10000, kMasterSeed, threads);
  const auto r = estimate_shapley(*model, ishigami_inputs(0.5), cfg);
  out.record(r);
  const double d1 = std::abs(r.first_order_full(1) - r.shapley(1));
  const double d2 = std::abs(r.shapley(1) - r.total_independent(1));
  out.require(d1 <= kIdentityCiMultiple *
                        std::max(r.first_order_ci_halfwidth(1), r.shapley_ci_halfwidth(1)),
              "|S2 - Sh2| = " + fmt(d1));
  out.require(d2 <= kIdentityCiMultiple *
                        std::max(r.shapley_ci_halfwidth(1), r.total_ci_halfwidth(1)),
              "|Sh2 - ST2| = " + fmt(d2));

  const auto strong = estimate_shapley(*model, ishigami_inputs(0.9), cfg);
  out.record(strong);
  for (Eigen::Index j : {0, 2}) {
    out.require(sandwiched(r, j), "no sandwich for input " + std::to_string(j + 1) + " at 0.5");
    out.require(sandwiched(strong, j),
                "no sandwich for input " + std::to_string(j + 1) + " at 0.9");
  }
  const double gap_mid = std::abs(r.shapley(0) - r.shapley(2));
  for (double rho : {0.99, -0.99}) {
    const auto e = estimate_shapley(*model, ishigami_inputs(rho), cfg);
    out.record(e);
    const double gap = std::abs(e.shapley(0) - e.shapley(2));
    const double ci = std::max(e.shapley_ci_halfwidth(0), e.shapley_ci_halfwidth(2));
    out.require(gap <= kIdentityCiMultiple * ci && gap < gap_mid / 5,
                "|Sh1 - Sh3| = " + fmt(gap) + " at rho " + fmt(rho));
  }
  if (out.pass)
    out.note("S2, Sh2, ST2 = " + fmt(r.first_order_full(1)) + ", " + fmt(r.shapley(1)) + ", " +
             fmt(r.total_independent(1)));
  return out;
}

// --- 7 ----------------------------------------------------------------------

Outcome variance_bound(unsigned threads) {
  Outcome out;
  const auto model = linear3();
  const auto dist = gaussian(kSigma3, 1, 2, kRho3);
  const double v = analytic::linear_three_inputs(Vector::Ones(3), kSigma3, kRho3).variance;
  EstimatorConfig rc = exact_config(1, 10000, 0, threads);
  rc.method = Method::random;
  rc.permutations = 1000;
  std::vector<Vector> effects;
  for (int k = 0; k < kVarianceSeeds; ++k) {
    rc.seed = kMasterSeed + k;
    const auto r = estimate_shapley(*model, dist, rc);
    out.record(r);
    effects.push_back(r.shapley * r.variance_estimate);
  }
  const double bound = v * v / rc.permutations;
  Vector mean = Vector::Zero(3);
  for (const auto& e : effects) mean += e;
  mean /= kVarianceSeeds;
  Vector var = Vector::Zero(3);
  for (const auto& e : effects) var += (e - mean).cwiseAbs2();
  var /= kVarianceSeeds - 1;
  out.require((var.array() <= bound).all(), "variances " + fmt(var) + " vs bound " + fmt(bound));
  if (out.pass) out.note("variances " + fmt(var, 3) + " <= " + fmt(bound, 3));
  return out;
}

// --- 8 and 9 ----------------------------------------------------------------

struct IshigamiSurrogate {
  std::shared_ptr<const KrigingModel> model;
  double q2 = 0.0;
};

IshigamiSurrogate ishigami_surrogate(std::size_t n, unsigned threads) {
  const auto dist = ishigami_inputs(0.0);
  const auto truth = make_model(IshigamiModel{}, 3);
  const Matrix x = space_filling_design(dist, n, kMasterSeed);
  KrigingConfig kc;
  kc.trend = Trend::constant;
  kc.threads = threads;
  IshigamiSurrogate s;
  s.model = std::make_shared<const KrigingModel>(fit_kriging(x, truth->evaluate(x), kc));
  auto stream = rng::Stream::derive(kMasterSeed, rng::Purpose::test_sample);
  const Matrix xt = sample(dist, 10000, stream);
  s.q2 = q2(*s.model, xt, truth->evaluate(xt));
  return s;
}

void record_fit(Outcome& out, const IshigamiSurrogate& s) {
  const Vector& t = s.model->lengthscales();
  out.fingerprint.insert(out.fingerprint.end(), t.data(), t.data() + t.size());
  out.fingerprint.push_back(s.q2);
}

Outcome kriging_predictivity(unsigned threads) {
  Outcome out;
  const auto big = ishigami_surrogate(200, threads);
  const auto small = ishigami_surrogate(50, threads);
  record_fit(out, big);
  record_fit(out, small);
  out.require(big.q2 >= kQ2Large, "Q2(200) = " + fmt(big.q2));
  out.require(small.q2 >= kQ2SmallLo && small.q2 <= kQ2SmallHi, "Q2(50) = " + fmt(small.q2));
  if (out.pass) out.note("Q2(200) = " + fmt(big.q2) + ", Q2(50) = " + fmt(small.q2));
  return out;
}

Outcome surrogate_shapley(unsigned threads) {
  Outcome out;
  const auto dist = ishigami_inputs(0.0);
  const auto surrogate = ishigami_surrogate(200, threads);
  const auto cfg = exact_config(20000, 100000, kMasterSeed, threads);
  const auto direct = estimate_shapley(*make_model(IshigamiModel{}, 3), dist, cfg);
  const auto through = estimate_shapley(*as_model(surrogate.model), dist, cfg);
  out.record(direct);
  out.record(through);
  out.require(within(direct.shapley, through.shapley, kSurrogateTol),
              "direct " + fmt(direct.shapley) + " vs surrogate " + fmt(through.shapley));
  if (out.pass)
    out.note("direct " + fmt(direct.shapley) + ", surrogate " + fmt(through.shapley));
  return out;
}

// --- 10 ---------------------------------------------------------------------

class CountingModel final : public Model {
 public:
  explicit CountingModel(std::shared_ptr<const Model> inner) : inner_(std::move(inner)) {}
  std::size_t arity() const override { return inner_->arity(); }
  Vector evaluate(const Matrix& x) const override {
    calls_ += static_cast<std::uint64_t>(x.rows());
    return inner_->evaluate(x);
  }
  std::string name() const override { return inner_->name(); }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::shared_ptr<const Model> inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

std::vector<double> csv_column(const fs::path& path, std::size_t column) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) std::getline(ls, cell, ',');
    values.push_back(std::stod(cell));
  }
  return values;
}

Outcome weld_workflow(unsigned threads) {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / ("gsa_acceptance_weld_" + std::to_string(threads));
  fs::remove_all(dir);
  Overrides o;
  o.threads = threads;
  o.output_prefix = (dir / "weld").string();
  const auto cfg = parse_config_string(weld_demo_config(), o);
  const std::size_t d = cfg.distribution.dim();
  run_weld_demo(cfg);

  // Re-run the estimation on the saved surrogate, counting every call.
  const auto kriging = std::make_shared<const KrigingModel>(
      KrigingModel::load(fs::path(dir / "weld_surrogate.krg")));
  CountingModel counted(as_model(kriging));
  const auto r = estimate_shapley(counted, cfg.distribution.build(), cfg.estimator);
  out.record(r);
  const std::uint64_t expected = 3ull * 1 * 10000 * (d - 1) + 10000;
  out.require(d == 11, "dimension " + std::to_string(d));
  out.require(counted.calls() == expected,
              "counted " + std::to_string(counted.calls()) + " evaluations");
  out.require(r.evaluations_used == expected,
              "reported " + std::to_string(r.evaluations_used) + " evaluations");

  const auto written = csv_column(dir / "weld_indices.csv", 1);
  bool same = written.size() == d;
  for (std::size_t i = 0; same && i < d; ++i) same = written[i] == r.shapley(static_cast<Eigen::Index>(i));
  out.require(same, "demo output differs from the recount");
  const double mean_ci = r.shapley_ci_halfwidth.mean();
  out.require(mean_ci <= kWeldMeanCi, "mean CI half-width " + fmt(mean_ci));
  if (out.pass)
    out.note(std::to_string(expected) + " surrogate evaluations, mean CI half-width " + fmt(mean_ci));
  fs::remove_all(dir);
  return out;
}

struct Criterion {
  int number;
  const char* title;
  std::function<Outcome(unsigned)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "two-input oracle equivalence", oracle_two_inputs},
      {2, "correlated input absent from the model", absent_input},
      {3, "three-input linear Gaussian, exact method", three_inputs},
      {4, "random vs exact method", method_equivalence},
      {5, "interaction counterexample", interaction},
      {6, "block-additive identity on Ishigami", block_additive},
      {7, "random-method variance bound", variance_bound},
      {8, "kriging predictivity on Ishigami", kriging_predictivity},
      {9, "Shapley effects through the surrogate", surrogate_shapley},
      {10, "weld workflow", weld_workflow},
  };

  bool all = true;
  std::vector<std::vector<double>> reference;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(1);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.number, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
    reference.push_back(o.fingerprint);
  }

  Outcome det;
  for (unsigned threads : {2u, 8u}) {
    for (std::size_t k = 0; k < criteria.size(); ++k) {
      std::vector<double> fp;
      try {
        fp = criteria[k].run(threads).fingerprint;
      } catch (const std::exception& e) {
        det.require(false, std::string("threw: ") + e.what());
        continue;
      }
      // Bitwise comparison; NaN half-widths compare by representation.
      const bool same = fp.size() == reference[k].size() &&
                        std::equal(fp.begin(), fp.end(), reference[k].begin(),
                                   [](double a, double b) {
                                     return std::memcmp(&a, &b, sizeof a) == 0;
                                   });
      det.require(same, "criterion " + std::to_string(criteria[k].number) + " differs at " +
                            std::to_string(threads) + " threads");
    }
  }
  if (det.pass) det.note("criteria 1-10 identical at 1, 2 and 8 threads");
  std::printf("%s 11 determinism across thread counts: %s\n", det.pass ? "PASS" : "FAIL",
              det.detail.c_str());
  all = all && det.pass;
  return all ? 0 : 1;
}
