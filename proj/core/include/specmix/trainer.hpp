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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specmix/losses.hpp"
#include "specmix/maskgen.hpp"
#include "specmix/mixing.hpp"
#include "specmix/model.hpp"
#include "specmix/synthdata.hpp"

namespace specmix::trainer {

enum class Variant { kFullNet, kIntraOnly, kCrossOnly, kCrossOnlyUni, kCrossUni, kSourceOnly };
enum class MaskBaseline { kDynamic, kStaticD, kCutMix, kMixup };
enum class AmpMode { kBatchAvg, kSingleImage };

Variant parse_variant(std::string_view s);  // throws UnknownVariant
MaskBaseline parse_baseline(std::string_view s);  // throws UnknownBaseline
AmpMode parse_amp_mode(std::string_view s);  // throws ValueError
std::string to_string(Variant v);
std::string to_string(MaskBaseline b);
std::string to_string(AmpMode a);

struct TrainConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 8;
  std::size_t pretrain_iters = 300;
  std::size_t adapt_iters = 1000;
  double l_init = 0.001;
  double pretrain_lr = 0.001;
  losses::LossWeights loss;
  double d_min = 1.0;
  double d_max = 5.0;
  maskgen::LambdaInterval lambda_k = maskgen::kDefaultLambdaInterval;
  double beta = 0.1;
  double ema_alpha = 0.99;
  Variant variant = Variant::kFullNet;
  MaskBaseline mask_baseline = MaskBaseline::kDynamic;
  AmpMode amp_mode = AmpMode::kBatchAvg;
  std::size_t eval_every = 50;
  bool postprocess = false;  // fill holes in predictions before scoring

  /// Throws ValueError on any out-of-range field.
  void validate() const;
};

/// Which loss terms and pathways a variant runs.
struct Toggles {
  bool adapt = true;                 // false: adaptation is a no-op
  bool stylized_loss = true;         // intra-domain pseudo-label term
  bool cross_pathway = true;         // mixed-image source/target terms
  bool bidirectional = true;         // build x_m_jk as well as x_m_il
  bool stylized_cross_inputs = false;  // stylised targets replace raw ones
};

Toggles apply_variant(Variant v);

/// Mask (and, for mixup, a global blend coefficient) used for one
/// quadruple.
struct MixSpec {
  maskgen::DynamicMask mask;
  std::optional<double> blend;  // source weight of x_m_il under mixup
};

/// `d_scheduled` is the dynamic-generator attenuation for this iteration.
MixSpec mask_baseline(const TrainConfig& cfg, double d_scheduled, std::size_t h, std::size_t w,
                      Rng& rng);

struct RunLogRow {
  std::size_t iter = 0;
  double lr = 0.0;
  double d = 0.0;
  double lambda_k_mean = 0.0;
  double l_source = 0.0;
  double l_target = 0.0;
  double l_stylized = 0.0;
  double total = 0.0;
  double gamma_mean = 0.0;
};

struct EvalRow {
  std::size_t iter = 0;
  double dice_od = 0.0;
  double dice_oc = 0.0;
};

struct RunLog {
  std::vector<RunLogRow> rows;
  std::vector<EvalRow> evals;

  /// Header `iter,lr,d,lambda_k_mean,L_S,L_T,L_Tsty,total,gamma_mean`.
  std::string csv() const;
  std::string eval_csv() const;
};

/// Per-iteration detail handed to an observer; not persisted.
struct IterationTrace {
  std::size_t iter = 0;
  std::vector<mixing::Provenance> provenance;
  std::vector<bool> bidirectional;
  std::vector<std::size_t> mask_popcounts;
  std::vector<double> lambda_k;
  double d = 0.0;
  double lr = 0.0;
};

using AdaptObserver = std::function<void(const IterationTrace&, const model::ScorerParams& student,
                                         const model::ScorerParams& teacher)>;

struct PretrainResult {
  model::ScorerParams params;
  RunLog log;
  double best_mean_dice = 0.0;
  std::size_t best_iter = 0;
};

/// SGD on the Dice loss over augmented source batches with a fixed
/// learning rate; returns the checkpoint with the best source-test mean
/// Dice, scored every eval_every iterations. Throws IoError on an empty
/// training split and DivergenceError on a non-finite loss.
PretrainResult pretrain(const TrainConfig& cfg, const std::vector<synth::Sample>& source_train,
                        const std::vector<synth::LoadedSample>& source_test);

struct AdaptResult {
  model::ScorerParams student;
  model::ScorerParams teacher;
  RunLog log;
};

/// Teacher-student adaptation on labelled source and unlabelled target
/// images. The teacher starts as a copy of `init` and only moves by EMA.
AdaptResult adapt(const TrainConfig& cfg, const std::vector<synth::Sample>& source_train,
                  const std::vector<Image>& target_train, const model::ScorerParams& init,
                  const AdaptObserver& observer = {});

std::vector<synth::Sample> samples_of(const std::vector<synth::LoadedSample>& loaded);
std::vector<Image> images_of(const std::vector<synth::LoadedSample>& loaded);

}  // namespace specmix::trainer
