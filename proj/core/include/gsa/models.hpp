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
#include <filesystem>
#include <memory>
#include <string>
#include <variant>

#include "gsa/types.hpp"

namespace gsa {

// Batch evaluation contract Y = f(X): an n x d matrix in, n outputs out.
// Implementations must be safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t arity() const = 0;
  virtual Vector evaluate(const Matrix& x) const = 0;
  virtual std::string name() const = 0;
};

// y = beta0 + beta^T x
struct LinearModel {
  double beta0 = 0.0;
  Vector beta;
};

// y = sin(x1) + a sin(x2)^2 + b x3^4 sin(x1)
struct IshigamiModel {
  double a = 7.0;
  double b = 0.1;
};

// y = x1 + x2 x3
struct InteractionModel {};

// y = x_index (0-based); the remaining inputs are inert.
struct ProjectionModel {
  std::size_t index = 0;
};

// y = c0 + linear^T x + x^T quadratic x
struct QuadraticModel {
  double c0 = 0.0;
  Vector linear;
  Matrix quadratic;
};

// A child process speaking the CSV protocol on its standard streams.
struct ExternalModel {
  std::string command;
  std::filesystem::path workdir = ".";
};

using ModelSpec = std::variant<LinearModel, IshigamiModel, InteractionModel,
                               ProjectionModel, QuadraticModel, ExternalModel>;

// Builds an evaluator for `dim` inputs. Throws DomainError when the spec is
// inconsistent with `dim` (for instance a beta of the wrong length).
std::shared_ptr<const Model> make_model(const ModelSpec& spec, std::size_t dim);

Vector evaluate(const ModelSpec& spec, const Matrix& x);

// Runs `model.command` through /bin/sh in `model.workdir`. The child reads
// a CSV with header x1,...,xd on stdin and writes one value per line on
// stdout. Throws ExternalModelError on non-zero exit, malformed lines or a
// count mismatch, and ModelEvaluationError on a non-finite value.
Vector evaluate_external(const ExternalModel& model, const Matrix& x);

// Throws ModelEvaluationError naming the first non-finite entry.
void require_finite(const Vector& y, const std::string& model_name);

}  // namespace gsa
