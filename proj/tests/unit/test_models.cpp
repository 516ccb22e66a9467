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

#include <gtest/gtest.h>

#include "gsa/error.hpp"
#include "gsa/inputs.hpp"
#include "gsa/models.hpp"

namespace gsa {
namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = GSA_TEST_DATA_DIR;

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(Ishigami, PointValues) {
  const auto m = make_model(IshigamiModel{}, 3);
  const Vector y = m->evaluate(rows({{0, 0, 0}, {kPi / 2, kPi / 2, 1}}));
  EXPECT_EQ(y(0), 0.0);
  EXPECT_NEAR(y(1), 8.1, 1e-14);
}

TEST(Ishigami, OddInFirstInputWhenSecondIsZero) {
  const auto m = make_model(IshigamiModel{}, 3);
  const Matrix x = sample(GaussianJoint::standard(3), 200, 1);
  Matrix a = x, b = x;
  a.col(1).setZero();
  b.col(1).setZero();
  b.col(0) = -a.col(0);
  EXPECT_TRUE((m->evaluate(a).array() == -m->evaluate(b).array()).all());
}

TEST(Linear, PointValue) {
  Vector beta(2);
  beta << 1, -1;
  EXPECT_EQ(evaluate(LinearModel{2.0, beta}, rows({{3, 5}}))(0), 0.0);
}

TEST(Interaction, SignSymmetry) {
  const auto m = make_model(InteractionModel{}, 3);
  const Matrix x = sample(GaussianJoint::standard(3), 200, 2);
  Matrix flipped = x;
  flipped.col(1) = -x.col(1);
  flipped.col(2) = -x.col(2);
  EXPECT_TRUE((m->evaluate(x).array() == m->evaluate(flipped).array()).all());
}

TEST(Projection, SelectsColumn) {
  const Vector y = evaluate(ProjectionModel{1}, rows({{1, 2, 3}, {4, 5, 6}}));
  EXPECT_EQ(y(0), 2.0);
  EXPECT_EQ(y(1), 5.0);
}

TEST(Quadratic, MatchesFormula) {
  QuadraticModel q{1.0, Vector::Ones(2), Matrix::Identity(2, 2)};
  q.quadratic(0, 1) = q.quadratic(1, 0) = 0.5;
  // 1 + (1 + 2) + (1 + 4 + 2 * 0.5 * 2)
  EXPECT_NEAR(evaluate(q, rows({{1, 2}}))(0), 11.0, 1e-14);
}

TEST(MakeModel, RejectsArityMismatch) {
  EXPECT_THROW(make_model(IshigamiModel{}, 2), DomainError);
  EXPECT_THROW(make_model(LinearModel{0, Vector::Ones(3)}, 2), DomainError);
  EXPECT_THROW(make_model(ProjectionModel{4}, 3), DomainError);
  EXPECT_THROW(make_model(ExternalModel{"", "."}, 2), DomainError);
  const auto m = make_model(InteractionModel{}, 3);
  EXPECT_THROW(m->evaluate(Matrix::Zero(2, 4)), DomainError);
}

TEST(Builtins, AreStatelessAcrossBatches) {
  const Matrix x = sample(GaussianJoint::standard(3), 300, 3);
  QuadraticModel q{0.5, Vector::LinSpaced(3, -1, 1), Matrix::Identity(3, 3)};
  for (const ModelSpec& spec : {ModelSpec{IshigamiModel{}}, ModelSpec{InteractionModel{}},
                                ModelSpec{LinearModel{1, Vector::Ones(3)}},
                                ModelSpec{ProjectionModel{2}}, ModelSpec{q}}) {
    const Vector whole = evaluate(spec, x);
    const Vector a = evaluate(spec, x.topRows(120));
    const Vector b = evaluate(spec, x.bottomRows(180));
    EXPECT_TRUE((whole.head(120).array() == a.array()).all());
    EXPECT_TRUE((whole.tail(180).array() == b.array()).all());
  }
}

TEST(External, EchoesFirstColumn) {
  const ExternalModel m{"sh " + kData + "/first_column.sh", "."};
  const Vector y = evaluate_external(m, rows({{1, 2}, {3, 4}}));
  ASSERT_EQ(y.size(), 2);
  EXPECT_EQ(y(0), 1.0);
  EXPECT_EQ(y(1), 3.0);
}

TEST(External, RoundTripsBitExactly) {
  const Matrix x = sample(GaussianJoint::standard(2), 500, 4);
  const Vector y = evaluate_external({"sh " + kData + "/first_column.sh", "."}, x);
  ASSERT_EQ(y.size(), 500);
  EXPECT_TRUE((y.array() == x.col(0).array()).all());
}

TEST(External, RunsInWorkdir) {
  const Vector y = evaluate_external({"sh ./sum_columns.sh", kData}, rows({{1, 2, 3}}));
  EXPECT_EQ(y(0), 6.0);
}

TEST(External, CrashReportsStderr) {
  try {
    evaluate_external({"sh " + kData + "/crash.sh", "."}, rows({{1, 2}}));
    FAIL() << "expected ExternalModelError";
  } catch (const ExternalModelError& e) {
    EXPECT_NE(e.captured_stderr().find("solver diverged"), std::string::npos);
  }
}

TEST(External, MalformedAndShortOutput) {
  const Matrix x = rows({{1, 0}, {2, 0}, {3, 0}});
  EXPECT_THROW(evaluate_external({"sh " + kData + "/malformed.sh", "."}, x), ExternalModelError);
  EXPECT_THROW(evaluate_external({"sh " + kData + "/short.sh", "."}, x), ExternalModelError);
}

TEST(External, NonFiniteValueNamesRow) {
  try {
    evaluate_external({"sh " + kData + "/nan.sh", "."}, rows({{1, 0}, {2, 0}, {3, 0}}));
    FAIL() << "expected ModelEvaluationError";
  } catch (const ModelEvaluationError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
}

TEST(External, ThroughModelInterface) {
  const auto m = make_model(ExternalModel{"sh " + kData + "/sum_columns.sh", "."}, 2);
  EXPECT_EQ(m->arity(), 2u);
  EXPECT_EQ(m->evaluate(rows({{0.5, 0.25}}))(0), 0.75);
}

TEST(RequireFinite, Throws) {
  Vector y(3);
  y << 1, std::nan(""), 2;
  try {
    require_finite(y, "m");
    FAIL();
  } catch (const ModelEvaluationError& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

}  // namespace
}  // namespace gsa
