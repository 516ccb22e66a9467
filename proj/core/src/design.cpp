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

#include "gsa/design.hpp"

#include <cstdint>
#include <vector>

#include <boost/random/sobol.hpp>

#include "gsa/error.hpp"
#include "gsa/rng.hpp"

namespace gsa {

namespace {

Matrix sobol_impl(std::size_t n, std::size_t dim, const std::uint64_t* shift) {
  if (dim == 0) throw DomainError("sobol_points: dimension must be positive");
  // The engine starts after the all-zero point.
  boost::random::sobol engine(dim);
  Matrix out(n, dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      std::uint64_t v = engine();
      if (shift != nullptr) v ^= shift[c];
      // Keep 53 bits and centre them so the result never rounds onto 0 or 1.
      out(r, c) = (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
    }
  }
  return out;
}

}  // namespace

Matrix sobol_points(std::size_t n, std::size_t dim) {
  return sobol_impl(n, dim, nullptr);
}

Matrix shifted_sobol_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  auto stream = rng::Stream::derive(seed, rng::Purpose::design);
  std::vector<std::uint64_t> shift(dim);
  for (auto& s : shift) s = stream.next_u64();
  return sobol_impl(n, dim, shift.data());
}

Matrix space_filling_design(const InputDistribution& dist, std::size_t n,
                            std::uint64_t seed) {
  return from_unit_cube(dist, shifted_sobol_points(n, dimension(dist), seed));
}

}  // namespace gsa
