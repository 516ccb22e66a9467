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

#include "gsa/models.hpp"

#include <cmath>
#include <mutex>

#include "gsa/error.hpp"

namespace gsa {
namespace {

void check_columns(const Matrix& x, std::size_t arity, const std::string& name) {
  if (static_cast<std::size_t>(x.cols()) != arity) {
    throw DomainError(name + " expects " + std::to_string(arity) +
                      " inputs, got " + std::to_string(x.cols()));
  }
}

class LinearEvaluator final : public Model {
 public:
  explicit LinearEvaluator(LinearModel spec) : spec_(std::move(spec)) {}
  std::size_t arity() const override { return spec_.beta.size(); }
  std::string name() const override { return "linear"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, arity(), name());
    return (x * spec_.beta).array() + spec_.beta0;
  }

 private:
  LinearModel spec_;
};

class IshigamiEvaluator final : public Model {
 public:
  explicit IshigamiEvaluator(IshigamiModel spec) : spec_(spec) {}
  std::size_t arity() const override { return 3; }
  std::string name() const override { return "ishigami"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, 3, name());
    Vector y(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double s1 = std::sin(x(r, 0));
      const double s2 = std::sin(x(r, 1));
      const double x3 = x(r, 2);
      y(r) = s1 + spec_.a * s2 * s2 + spec_.b * (x3 * x3) * (x3 * x3) * s1;
    }
    return y;
  }

 private:
  IshigamiModel spec_;
};

class InteractionEvaluator final : public Model {
 public:
  std::size_t arity() const override { return 3; }
  std::string name() const override { return "interaction"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, 3, name());
    return x.col(0).array() + x.col(1).array() * x.col(2).array();
  }
};

class ProjectionEvaluator final : public Model {
 public:
  ProjectionEvaluator(std::size_t index, std::size_t dim)
      : index_(index), dim_(dim) {}
  std::size_t arity() const override { return dim_; }
  std::string name() const override { return "projection"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, dim_, name());
    return x.col(static_cast<Eigen::Index>(index_));
  }

 private:
  std::size_t index_;
  std::size_t dim_;
};

class QuadraticEvaluator final : public Model {
 public:
  explicit QuadraticEvaluator(QuadraticModel spec) : spec_(std::move(spec)) {}
  std::size_t arity() const override { return spec_.linear.size(); }
  std::string name() const override { return "quadratic"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, arity(), name());
    const Matrix xq = x * spec_.quadratic;
    Vector y = (x * spec_.linear).array() + spec_.c0;
    y += (xq.array() * x.array()).rowwise().sum().matrix();
    return y;
  }

 private:
  QuadraticModel spec_;
};

// One batch in flight per child-process model; concurrent callers queue.
class ExternalEvaluator final : public Model {
 public:
  ExternalEvaluator(ExternalModel spec, std::size_t dim)
      : spec_(std::move(spec)), dim_(dim) {}
  std::size_t arity() const override { return dim_; }
  std::string name() const override { return "external"; }
  Vector evaluate(const Matrix& x) const override {
    check_columns(x, dim_, name());
    std::lock_guard lock(mutex_);
    return evaluate_external(spec_, x);
  }

 private:
  ExternalModel spec_;
  std::size_t dim_;
  mutable std::mutex mutex_;
};

}  // namespace

void require_finite(const Vector& y, const std::string& model_name) {
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    if (!std::isfinite(y(r))) {
      throw ModelEvaluationError(model_name + " model returned a non-finite value at row " +
                                     std::to_string(r),
                                 static_cast<std::size_t>(r));
    }
  }
}

std::shared_ptr<const Model> make_model(const ModelSpec& spec, std::size_t dim) {
  return std::visit(
      [dim](const auto& s) -> std::shared_ptr<const Model> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          if (static_cast<std::size_t>(s.beta.size()) != dim) {
            throw DomainError("linear model: beta has length " +
                              std::to_string(s.beta.size()) + ", inputs have dimension " +
                              std::to_string(dim));
          }
          return std::make_shared<LinearEvaluator>(s);
        } else if constexpr (std::is_same_v<T, IshigamiModel>) {
          if (dim != 3) throw DomainError("ishigami model needs 3 inputs");
          return std::make_shared<IshigamiEvaluator>(s);
        } else if constexpr (std::is_same_v<T, InteractionModel>) {
          if (dim != 3) throw DomainError("interaction model needs 3 inputs");
          return std::make_shared<InteractionEvaluator>();
        } else if constexpr (std::is_same_v<T, ProjectionModel>) {
          if (s.index >= dim) {
            throw DomainError("projection model: index " + std::to_string(s.index + 1) +
                              " exceeds dimension " + std::to_string(dim));
          }
          return std::make_shared<ProjectionEvaluator>(s.index, dim);
        } else if constexpr (std::is_same_v<T, QuadraticModel>) {
          const auto n = static_cast<Eigen::Index>(dim);
          if (s.linear.size() != n || s.quadratic.rows() != n ||
              s.quadratic.cols() != n) {
            throw DomainError("quadratic model: coefficient shapes do not match dimension " +
                              std::to_string(dim));
          }
          return std::make_shared<QuadraticEvaluator>(s);
        } else {
          if (s.command.empty()) throw DomainError("external model: empty command");
          return std::make_shared<ExternalEvaluator>(s, dim);
        }
      },
      spec);
}

Vector evaluate(const ModelSpec& spec, const Matrix& x) {
  return make_model(spec, static_cast<std::size_t>(x.cols()))->evaluate(x);
}

}  // namespace gsa
