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

#include "specmix/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "specmix/error.hpp"

namespace specmix {

namespace {

void clamp_unit(std::vector<double>& v) {
  for (double& x : v) {
    if (std::isnan(x)) throw ValueError("image value is NaN");
    x = std::clamp(x, 0.0, 1.0);
  }
}

}  // namespace

Image::Image(std::size_t h, std::size_t w, std::size_t c, double fill)
    : g_(h, w, c, std::clamp(fill, 0.0, 1.0)) {
  if (std::isnan(fill)) throw ValueError("image value is NaN");
}

Image::Image(std::size_t h, std::size_t w, std::size_t c, std::vector<double> data) {
  if (data.size() != h * w * c) {
    throw DimensionMismatch("image data length " + std::to_string(data.size()) +
                            " != h*w*c " + std::to_string(h * w * c));
  }
  clamp_unit(data);
  g_.h = h;
  g_.w = w;
  g_.c = c;
  g_.data = std::move(data);
}

Image::Image(RealGrid grid) : g_(std::move(grid)) { clamp_unit(g_.data); }

double Image::mean() const {
  if (g_.data.empty()) return 0.0;
  return std::accumulate(g_.data.begin(), g_.data.end(), 0.0) /
         static_cast<double>(g_.data.size());
}

std::size_t BinaryMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out(h, w);
  for (std::size_t i = 0; i < bits.size(); ++i) out.bits[i] = bits[i] ? 0 : 1;
  return out;
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
  if (h != other.h || w != other.w) throw DimensionMismatch("mask subset: shape");
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] && !other.bits[i]) return false;
  }
  return true;
}

LabelMap::LabelMap(std::size_t h, std::size_t w, std::uint8_t fill)
    : h_(h), w_(w), data_(h * w, fill) {
  if (fill >= kNumClasses) throw ValueError("label class out of range");
}

LabelMap::LabelMap(std::size_t h, std::size_t w, std::vector<std::uint8_t> data)
    : h_(h), w_(w), data_(std::move(data)) {
  if (data_.size() != h * w) throw DimensionMismatch("label data length != h*w");
  for (auto v : data_) {
    if (v >= kNumClasses) throw ValueError("label class out of range: " + std::to_string(v));
  }
}

void LabelMap::set(std::size_t r, std::size_t c, std::uint8_t cls) {
  if (cls >= kNumClasses) throw ValueError("label class out of range");
  data_[r * w_ + c] = cls;
}

BinaryMask LabelMap::disc_mask() const {
  BinaryMask m(h_, w_);
  for (std::size_t i = 0; i < data_.size(); ++i) m.bits[i] = data_[i] != 0;
  return m;
}

BinaryMask LabelMap::cup_mask() const { return class_mask(2); }

BinaryMask LabelMap::class_mask(std::uint8_t cls) const {
  BinaryMask m(h_, w_);
  for (std::size_t i = 0; i < data_.size(); ++i) m.bits[i] = data_[i] == cls;
  return m;
}

std::size_t LabelMap::count(std::uint8_t cls) const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), cls));
}

ProbMap::ProbMap(std::size_t h, std::size_t w, std::vector<double> data)
    : h_(h), w_(w), data_(std::move(data)) {
  if (data_.size() != h * w * kNumClasses) throw DimensionMismatch("prob map length");
  if (!is_simplex(data_)) throw ValueError("prob map pixel is not on the simplex");
}

ProbMap ProbMap::uniform(std::size_t h, std::size_t w) {
  return ProbMap(h, w, std::vector<double>(h * w * kNumClasses, 1.0 / 3.0));
}

ProbMap ProbMap::one_hot(const LabelMap& y) {
  std::vector<double> d(y.pixels() * kNumClasses, 0.0);
  for (std::size_t i = 0; i < y.pixels(); ++i) d[i * kNumClasses + y.data()[i]] = 1.0;
  return ProbMap(y.h(), y.w(), std::move(d));
}

bool ProbMap::is_simplex(std::span<const double> data, double tol) {
  if (data.size() % kNumClasses != 0) return false;
  for (std::size_t i = 0; i < data.size(); i += kNumClasses) {
    double s = 0.0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const double v = data[i + k];
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace specmix
