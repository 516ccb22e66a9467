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

#include "gsa/inputs.hpp"
#include "gsa/types.hpp"

namespace gsa {

// First n points of the d-dimensional Sobol' sequence (Joe-Kuo direction
// numbers), skipping the origin so every coordinate lies in (0, 1).
Matrix sobol_points(std::size_t n, std::size_t dim);

// The same points after a random digital shift: every coordinate is XORed
// with a per-dimension 64-bit mask drawn from `seed`. Keeps the net
// structure and removes the bias of the unrandomized sequence at small n.
Matrix shifted_sobol_points(std::size_t n, std::size_t dim, std::uint64_t seed);

// A space-filling learning design for `dist`: shifted Sobol' points mapped
// through the joint quantile transform.
Matrix space_filling_design(const InputDistribution& dist, std::size_t n,
                            std::uint64_t seed);

}  // namespace gsa
