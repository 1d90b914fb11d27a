// Copyright 2026 The scbf-mppi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace scbf_mppi {

/// Derives an independent stream key from a seed and up to three stream
/// identifiers (trajectory index, timestep, ...). Keys derived with distinct
/// identifiers produce statistically independent NoiseStream outputs, so
/// parallel consumers never have to share generator state.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0);

/// Counter-based pseudo-random stream (splitmix64 core). The n-th output is a
/// pure function of (key, n): draws are reproducible regardless of which
/// thread owns the stream or in which order streams are consumed.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  double uniform();

  /// Standard normal draw (Box-Muller; the paired value is cached).
  double normal();

  Eigen::VectorXd normal_vector(int n);

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace scbf_mppi
