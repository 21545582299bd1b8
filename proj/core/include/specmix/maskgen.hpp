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

#pragma once

#include <cstdint>
#include <utility>

#include "specmix/rng.hpp"
#include "specmix/types.hpp"

namespace specmix::maskgen {

struct LambdaInterval {
  double lo = 0.1;
  double hi = 0.5;
};

inline constexpr LambdaInterval kDefaultLambdaInterval{0.1, 0.5};
inline constexpr double kLambdaCap = 0.5;
inline constexpr int kMaxResamples = 8;

struct MaskMeta {
  double d = 0.0;
  double lambda_k = 0.0;
  std::uint64_t seed = 0;
};

struct DynamicMask {
  BinaryMask mask;
  MaskMeta meta;

  std::size_t h() const { return mask.h; }
  std::size_t w() const { return mask.w; }
};

/// Throws ValueError unless 0 < lo <= hi <= 0.5.
void validate_interval(LambdaInterval interval);

/// Target popcount floor(lambda_k * h * w).
std::size_t topk_count(double lambda_k, std::size_t h, std::size_t w);

/// 1 / max(h, w).
double min_frequency(std::size_t h, std::size_t w);

/// Euclidean norm of the signed per-axis frequencies (numpy fftfreq
/// convention, each in [-1/2, 1/2)).
double frequency_magnitude(std::size_t u, std::size_t v, std::size_t h, std::size_t w);

/// Complex standard-normal noise divided by max(freq, f_min)^d. Real then
/// imaginary parts are drawn per cell in row-major order.
ComplexGrid decay_noise(std::size_t h, std::size_t w, double d, Rng& rng);

/// Top-k binarisation with k = floor(lambda_k * h * w). Ties at the
/// threshold go to the earlier row-major index, so popcount is exactly k.
/// Throws DegenerateField when every value is equal.
DynamicMask binarize_topk(const RealGrid& field, double lambda_k);

/// d_min + (1 - i / total) * (d_max - d_min).
double schedule_d(std::size_t i, std::size_t total, double d_min, double d_max);

/// lambda_k ~ U[lo, hi), field = Re(ifft2(decay_noise)), then top-k.
/// Degenerate fields are resampled up to kMaxResamples times.
DynamicMask generate_mask(std::size_t h, std::size_t w, double d, LambdaInterval interval,
                          Rng& rng);

// Shape statistics used for coarse-to-fine checks and mask baselines.

/// Number of 1-pixels having an in-image 4-neighbour equal to 0.
std::size_t boundary_length(const BinaryMask& m);

/// Number of 4-connected components of 1-pixels.
std::size_t connected_components(const BinaryMask& m);

}  // namespace specmix::maskgen
