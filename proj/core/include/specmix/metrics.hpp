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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "specmix/model.hpp"
#include "specmix/synthdata.hpp"
#include "specmix/types.hpp"

namespace specmix::metrics {

/// Sets background components not 4-connected to the border to foreground.
BinaryMask fill_holes(const BinaryMask& mask);

/// 100 * 2|A n B| / (|A| + |B|); two empty masks score 100.
double dice_coeff(const BinaryMask& a, const BinaryMask& b);

/// Foreground pixels with a 4-neighbour outside the mask or on the border.
std::vector<std::size_t> boundary_pixels(const BinaryMask& m);

/// Exact squared Euclidean distance from every pixel to the nearest pixel
/// of `sites` (two-pass lower-envelope transform).
std::vector<double> squared_distance_transform(std::size_t h, std::size_t w,
                                               const std::vector<std::size_t>& sites);

/// Linear-interpolation percentile of `values` (sorted in place) at
/// index q * (n - 1).
double percentile(std::vector<double>& values, double q);

/// Symmetric 95th-percentile Hausdorff distance between boundaries, in
/// pixels. Throws EmptyMask if either mask is empty.
double hd95(const BinaryMask& a, const BinaryMask& b);

struct ImageMetrics {
  std::string name;
  double dice_od = 0.0;
  double dice_oc = 0.0;
  double hd95_od = 0.0;  // NaN when undefined
  double hd95_oc = 0.0;
};

struct MetricsReport {
  double dice_od = 0.0;
  double dice_oc = 0.0;
  double hd95_od = 0.0;  // mean over defined images; NaN if none
  double hd95_oc = 0.0;
  std::size_t n_images = 0;
  std::size_t undefined = 0;  // images with at least one undefined HD95
  std::size_t undefined_od = 0;
  std::size_t undefined_oc = 0;
  std::vector<ImageMetrics> per_image;

  double mean_dice() const { return 0.5 * (dice_od + dice_oc); }
};

using Predictor = std::function<LabelMap(const Image&)>;

/// Scores predictions against ground truth on derived disc/cup masks.
/// Dice averages every image; HD95 averages only images where both masks
/// are nonempty.
MetricsReport evaluate(const Predictor& predict, const std::vector<synth::LoadedSample>& split,
                       bool postprocess);

MetricsReport evaluate(const model::ScorerParams& params,
                       const std::vector<synth::LoadedSample>& split, bool postprocess);

/// Header `scope,dice_od,dice_oc,hd95_od,hd95_oc,n,undefined`, one summary
/// row, then one row per image (scope = image path, n = 1).
std::string metrics_csv(const MetricsReport& r, const std::string& scope);
void write_metrics_csv(const MetricsReport& r, const std::string& scope,
                       const std::filesystem::path& path);

}  // namespace specmix::metrics
