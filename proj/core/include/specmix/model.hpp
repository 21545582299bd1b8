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
#include <filesystem>
#include <span>
#include <vector>

#include "specmix/rng.hpp"
#include "specmix/types.hpp"

// Three-layer full-resolution convolutional scorer:
//   conv3x3(C_in -> 16) -> ReLU -> conv3x3(16 -> 16) -> ReLU -> conv1x1(16 -> 3)
//   -> per-pixel softmax
// Convolutions use zero padding. Weights are stored HWIO so the output
// channel is the fastest-varying index.

namespace specmix::model {

inline constexpr std::size_t kHidden = 16;
inline constexpr std::size_t kKernel = 3;

/// Offsets of each parameter block inside the flat vector.
struct Layout {
  std::size_t c_in = 0;
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, w3 = 0, b3 = 0, total = 0;

  explicit Layout(std::size_t c_in_);
};

/// 16(9 C_in + 1) + 16(9*16 + 1) + 3(16 + 1).
std::size_t param_count(std::size_t c_in);

struct ScorerParams {
  std::size_t c_in = 0;
  std::vector<double> values;

  ScorerParams() = default;
  /// All-zero parameters.
  explicit ScorerParams(std::size_t c_in_);

  /// Glorot-uniform weights, s = sqrt(6 / (fan_in + fan_out)); zero biases.
  static ScorerParams glorot(std::size_t c_in, Rng& rng);

  Layout layout() const { return Layout(c_in); }
  friend bool operator==(const ScorerParams&, const ScorerParams&) = default;
};

struct Gradients {
  std::size_t c_in = 0;
  std::vector<double> values;

  Gradients() = default;
  explicit Gradients(std::size_t c_in_) : c_in(c_in_), values(param_count(c_in_), 0.0) {}
  explicit Gradients(const ScorerParams& p) : Gradients(p.c_in) {}

  void add(const Gradients& other);
  void scale(double s);
};

/// Activations retained by forward() for backward().
struct ForwardCache {
  std::size_t h = 0, w = 0, c_in = 0;
  std::vector<double> input;
  std::vector<double> a1;  // post-ReLU, h*w*16
  std::vector<double> a2;  // post-ReLU, h*w*16
  std::vector<double> probs;
};

/// Throws ChannelMismatch if x.c() != params.c_in.
ProbMap forward(const ScorerParams& params, const Image& x, ForwardCache* cache = nullptr);

/// Exact reverse-mode gradient of a loss with respect to the parameters,
/// given dLoss/dProbMap. Throws CacheMismatch when the cache does not match
/// the parameters or the gradient buffer.
Gradients backward(const ScorerParams& params, const ForwardCache& cache,
                   std::span<const double> d_probs);

/// Gradient of the loss with respect to the pre-softmax logits.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> d_probs);

/// w <- w - lr * g. Throws ShapeMismatch.
ScorerParams sgd_step(const ScorerParams& params, const Gradients& grads, double lr);

struct OptimState {
  double l_init = 0.001;
  std::size_t total_iters = 1;
  std::size_t iter = 0;
  double ema_alpha = 0.99;
};

/// l_init * (1 - i / I)^0.9.
double poly_lr(const OptimState& s);

/// alpha * teacher + (1 - alpha) * student. Throws ShapeMismatch.
ScorerParams ema_update(const ScorerParams& teacher, const ScorerParams& student, double alpha);

/// Per-pixel argmax; ties resolve to the lowest class index.
LabelMap argmax_label(const ProbMap& p);

// Checkpoints: 16-byte header ("DDS1", uint32 C_in, uint64 parameter
// count, little-endian) followed by the parameters as little-endian
// IEEE-754 doubles.

std::vector<std::uint8_t> encode_checkpoint(const ScorerParams& params);
/// Throws FormatError on bad magic, truncation or inconsistent counts.
ScorerParams decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const ScorerParams& params, const std::filesystem::path& path);
ScorerParams load_checkpoint(const std::filesystem::path& path);

}  // namespace specmix::model
