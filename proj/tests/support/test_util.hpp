// Copyright 2026 The specmix Authors. All Rights Reserved.
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

// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specmix/rng.hpp"
#include "specmix/types.hpp"

namespace specmix::testing {

inline Image random_image(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
  std::vector<double> v(h * w * c);
  for (double& x : v) x = rng.uniform();
  return Image(h, w, c, std::move(v));
}

inline LabelMap random_labels(std::size_t h, std::size_t w, Rng& rng) {
  std::vector<std::uint8_t> v(h * w);
  for (auto& x : v) x = static_cast<std::uint8_t>(rng.below(3));
  return LabelMap(h, w, std::move(v));
}

inline BinaryMask random_mask(std::size_t h, std::size_t w, double p, Rng& rng) {
  BinaryMask m(h, w);
  for (auto& b : m.bits) b = rng.uniform() < p ? 1 : 0;
  return m;
}

/// Random strictly positive simplex map.
inline ProbMap random_probs(std::size_t h, std::size_t w, Rng& rng) {
  std::vector<double> v(h * w * kNumClasses);
  for (std::size_t p = 0; p < h * w; ++p) {
    double s = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      v[p * kNumClasses + k] = 0.05 + rng.uniform();
      s += v[p * kNumClasses + k];
    }
    for (std::size_t k = 0; k < kNumClasses; ++k) v[p * kNumClasses + k] /= s;
  }
  return ProbMap(h, w, std::move(v));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("specmix_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace specmix::testing
