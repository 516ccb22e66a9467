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

#include <array>
#include <cstdint>

namespace gsa::rng {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
// (counter, key); the building block for all random streams.
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

// Tags keep streams drawn for different purposes disjoint even when their
// numeric indices coincide.
enum class Purpose : std::uint64_t {
  sample = 1,
  variance = 2,
  permutation = 3,
  cell = 4,
  design = 5,
  conditional = 6,
  fixed_check = 7,
  test_sample = 8,
};

// A counter-based random stream. The master seed is the Philox key; the
// stream id occupies the upper half of the 128-bit counter and the position
// within the stream the lower half, so distinct ids never overlap.
//
// Streams are cheap value types; derive one per independent work item.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id);

  static Stream derive(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0,
                       std::uint64_t b = 0);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached.
  double normal();

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  PhiloxKey key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int available_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gsa::rng
