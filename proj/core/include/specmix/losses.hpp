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

#include <span>
#include <vector>

#include "specmix/types.hpp"

// Segmentation losses with analytic gradients with respect to the
// probability map. Every loss optionally accumulates scale * dL/dp into a
// caller-owned buffer laid out like ProbMap::data().

namespace specmix::losses {

inline constexpr double kEpsilon = 1e-5;
inline constexpr double kProbFloor = 1e-12;

struct GradSink {
  std::span<double> grad;
  double scale = 1.0;

  bool active() const { return !grad.empty(); }
  GradSink scaled(double s) const { return {grad, scale * s}; }
};

struct LossWeights {
  double lambda_source = 0.5;
  double lambda_target = 0.5;
  double lambda_stylized = 1.0;
  double ipl_iou_weight = 0.5;
  double ipl_ce_weight = 0.5;
  double epsilon = kEpsilon;

  /// Throws ValueError on negative/non-finite weights or IPL weights not
  /// summing to 1.
  void validate() const;
};

struct LossParts {
  double l_source = 0.0;
  double l_target = 0.0;
  double l_stylized = 0.0;
  std::vector<double> gammas;
};

struct LossReport {
  double l_source = 0.0;
  double l_target = 0.0;
  double l_stylized = 0.0;
  double total = 0.0;
  std::vector<double> gamma_values;
};

/// Soft Dice on one channel: 1 - (2 sum p*y + eps) / (sum p + sum y + eps)
/// over `support` (all pixels when null). `stride`/`offset` index a channel
/// inside an interleaved buffer. Empty support gives 0.
double soft_dice(std::span<const double> p, std::size_t stride, std::size_t offset,
                 std::span<const std::uint8_t> y, const BinaryMask* support, double eps,
                 GradSink sink = {});

/// Soft IoU on one channel, same conventions as soft_dice.
double soft_iou(std::span<const double> p, std::size_t stride, std::size_t offset,
                std::span<const std::uint8_t> y, const BinaryMask* support, double eps,
                GradSink sink = {});

/// Dice averaged over the ring and cup classes.
double dice_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support = nullptr,
                 double eps = kEpsilon, GradSink sink = {});

/// IoU loss averaged over the ring and cup classes.
double iou_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support = nullptr,
                double eps = kEpsilon, GradSink sink = {});

/// Mean of -log p[y] over the support, probabilities floored at 1e-12.
double ce_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support = nullptr,
               GradSink sink = {});

double l_ipl(const ProbMap& p, const LabelMap& y_pseudo, const LossWeights& w = {},
             GradSink sink = {});

/// Mean over pixels of the largest class probability, in [1/3, 1].
double confidence_gamma(const ProbMap& p_map);

/// Prediction/label pair that contributes one masked term.
struct Term {
  const ProbMap& pred;
  const LabelMap& label;
  GradSink grad = {};
};

/// Dice + CE of `il` on the mask support plus Dice + CE of `jk` on the
/// complement. `jk` is null for uni-directional mixing.
double l_source(const Term& il, const Term* jk, const BinaryMask& mask,
                double eps = kEpsilon);

/// gamma_l (Dice + CE) of `il` against target pseudo labels on the
/// complement, plus gamma_k (Dice + CE) of `jk` on the mask.
double l_target(const Term& il, double gamma_l, const Term* jk, double gamma_k,
                const BinaryMask& mask, double eps = kEpsilon);

/// L_ipl(p_l, y~_l) + L_ipl(p_k, y~_k).
double l_stylized(const Term& l, const Term& k, const LossWeights& w = {});

LossReport total_loss(const LossParts& parts, const LossWeights& w);

}  // namespace specmix::losses
