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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specmix/rng.hpp"
#include "specmix/types.hpp"

namespace specmix::synth {

/// Appearance knobs for one synthetic acquisition domain.
struct DomainStyle {
  std::array<double, 3> base_color{0.3, 0.2, 0.1};
  double brightness_gain = 1.0;
  double gamma = 1.0;
  std::array<double, 3> channel_scale{1.0, 1.0, 1.0};
  double texture_amp = 0.05;
  std::pair<double, double> texture_freq_band{2.0, 6.0};  // cycles per image
  double noise_sigma = 0.02;
  int blur_radius = 0;

  void validate() const;
};

/// Deterministic style for `domain_id`: a fixed per-domain template plus a
/// small jitter drawn from (seed, domain_id).
DomainStyle domain_style(std::uint64_t seed, std::size_t domain_id);

/// Disc/cup geometry. The cup is the disc scaled by cup_scale about the
/// same centre.
struct SampleSpec {
  std::array<double, 2> disc_center{32.0, 32.0};  // (row, col)
  std::array<double, 2> disc_axes{12.0, 10.0};    // semi-axes (a, b), pixels
  double cup_scale = 0.5;
  double rotation = 0.0;  // radians

  /// Throws InvalidGeometry unless the disc fits with a 2-pixel margin and
  /// cup_scale lies in (0.3, 0.8).
  void validate(std::size_t h, std::size_t w) const;
};

SampleSpec random_spec(Rng& rng, std::size_t h, std::size_t w);

struct Sample {
  Image image;
  LabelMap label;
};

/// Renders one RGB image and its exact ellipse label map. `seed` drives the
/// texture sinusoids and pixel noise.
Sample render_sample(const DomainStyle& style, const SampleSpec& spec, std::size_t h,
                     std::size_t w, std::uint64_t seed);

enum class Augment : std::uint8_t { kIdentity, kFlipH, kFlipV, kRot90, kRot180, kRot270 };
inline constexpr std::size_t kNumAugments = 6;

/// Source coordinate in the input for output pixel (r, c) of `op` applied
/// to an h x w grid.
std::pair<std::size_t, std::size_t> preimage(Augment op, std::size_t h, std::size_t w,
                                             std::size_t r, std::size_t c);

Sample apply_augment(const Sample& s, Augment op);
Image apply_augment(const Image& x, Augment op);

/// Uniform choice among the six ops, applied to image and label together.
Sample augment(const Sample& s, Rng& rng);

// NetPBM I/O. Images are binary P6 (maxval 255, round half up); labels are
// P5 with classes {0,1,2} stored as {0,128,255}; masks as {0,255}.

std::vector<std::uint8_t> encode_ppm(const Image& x);
Image decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const LabelMap& y);
std::vector<std::uint8_t> encode_pgm(const BinaryMask& m);
std::vector<std::uint8_t> encode_pgm(const Image& gray);
LabelMap decode_pgm_labels(std::span<const std::uint8_t> bytes);
BinaryMask decode_pgm_mask(std::span<const std::uint8_t> bytes);
Image decode_pgm_image(std::span<const std::uint8_t> bytes);

void write_ppm(const Image& x, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);
void write_pgm(const LabelMap& y, const std::filesystem::path& path);
void write_pgm(const BinaryMask& m, const std::filesystem::path& path);
LabelMap read_pgm_labels(const std::filesystem::path& path);
BinaryMask read_pgm_mask(const std::filesystem::path& path);

/// Reads a P6 or P5 file as a 3- or 1-channel image.
Image read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

enum class Split : std::uint8_t { kTrain, kTest };
const char* split_name(Split s);

struct ManifestRow {
  std::string image;  // relative to the manifest directory
  std::string label;
  std::size_t domain = 0;
  Split split = Split::kTrain;
};

struct Manifest {
  std::filesystem::path path;
  std::vector<ManifestRow> rows;

  std::filesystem::path dir() const { return path.parent_path(); }
};

/// CSV with header `image,label,domain,split`.
void write_manifest(const Manifest& m);
/// Throws IoError when the file or a referenced path is missing and
/// FormatError on malformed rows or overlapping splits.
Manifest read_manifest(const std::filesystem::path& path);

struct DatasetConfig {
  std::uint64_t seed = 7;
  std::size_t n_domains = 2;
  std::size_t n_per_domain = 40;
  std::size_t h = 64;
  std::size_t w = 64;
};

/// Writes d<domain>/img_<idx>.ppm and d<domain>/lbl_<idx>.pgm plus
/// manifest.csv. The first 80% of each domain's indices form the train
/// split.
Manifest gen_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

/// Samples rendered in memory exactly as gen_dataset would write them
/// (before 8-bit quantisation).
std::vector<Sample> render_domain(const DatasetConfig& cfg, std::size_t domain_id);

struct LoadedSample {
  Sample sample;
  std::string image_path;
};

std::vector<LoadedSample> load_split(const Manifest& m, const std::vector<std::size_t>& domains,
                                     Split split);

}  // namespace specmix::synth
