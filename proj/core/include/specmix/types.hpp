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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace specmix {

/// Dense H x W x C grid, row-major and channel-last.
template <typename T>
struct Grid3 {
  std::size_t h = 0;
  std::size_t w = 0;
  std::size_t c = 0;
  std::vector<T> data;

  Grid3() = default;
  Grid3(std::size_t h_, std::size_t w_, std::size_t c_, T fill = T{})
      : h(h_), w(w_), c(c_), data(h_ * w_ * c_, fill) {}

  std::size_t index(std::size_t r, std::size_t col, std::size_t ch) const {
    return (r * w + col) * c + ch;
  }
  T& at(std::size_t r, std::size_t col, std::size_t ch = 0) {
    return data[index(r, col, ch)];
  }
  const T& at(std::size_t r, std::size_t col, std::size_t ch = 0) const {
    return data[index(r, col, ch)];
  }
  std::size_t pixels() const { return h * w; }
  std::size_t size() const { return data.size(); }
  bool same_shape(std::size_t h2, std::size_t w2, std::size_t c2) const {
    return h == h2 && w == w2 && c == c2;
  }
  template <typename U>
  bool same_shape(const Grid3<U>& o) const {
    return same_shape(o.h, o.w, o.c);
  }
  friend bool operator==(const Grid3&, const Grid3&) = default;
};

using RealGrid = Grid3<double>;
using ComplexGrid = Grid3<std::complex<double>>;

/// Image with intensities in [0,1]. The constructor clamps; NaN is rejected.
class Image {
 public:
  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0);
  Image(std::size_t h, std::size_t w, std::size_t c, std::vector<double> data);
  /// Clamps every value of `grid` into [0,1].
  explicit Image(RealGrid grid);

  std::size_t h() const { return g_.h; }
  std::size_t w() const { return g_.w; }
  std::size_t c() const { return g_.c; }
  std::size_t pixels() const { return g_.pixels(); }
  double at(std::size_t r, std::size_t col, std::size_t ch = 0) const {
    return g_.at(r, col, ch);
  }
  std::span<const double> data() const { return g_.data; }
  const RealGrid& grid() const { return g_; }
  double mean() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  RealGrid g_;
};

/// Binary {0,1} mask over an H x W grid.
struct BinaryMask {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::size_t h_, std::size_t w_, std::uint8_t fill = 0)
      : h(h_), w(w_), bits(h_ * w_, fill) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return bits[r * w + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return bits[r * w + c]; }
  std::size_t popcount() const;
  BinaryMask complement() const;
  bool subset_of(const BinaryMask& other) const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

enum class Label : std::uint8_t { kBackground = 0, kRing = 1, kCup = 2 };
inline constexpr std::size_t kNumClasses = 3;

/// Per-pixel class ids in {0 background, 1 disc ring, 2 cup}.
/// Disc = {1,2}, cup = {2}, so cup is a subset of disc by construction.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0);
  LabelMap(std::size_t h, std::size_t w, std::vector<std::uint8_t> data);

  std::size_t h() const { return h_; }
  std::size_t w() const { return w_; }
  std::size_t pixels() const { return h_ * w_; }
  std::uint8_t at(std::size_t r, std::size_t c) const { return data_[r * w_ + c]; }
  void set(std::size_t r, std::size_t c, std::uint8_t cls);
  std::span<const std::uint8_t> data() const { return data_; }

  BinaryMask disc_mask() const;
  BinaryMask cup_mask() const;
  BinaryMask class_mask(std::uint8_t cls) const;
  std::size_t count(std::uint8_t cls) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Three-class per-pixel probabilities; each pixel lies on the simplex.
class ProbMap {
 public:
  static constexpr double kSimplexTol = 1e-9;

  ProbMap() = default;
  /// Throws ValueError unless every pixel is nonnegative and sums to 1.
  ProbMap(std::size_t h, std::size_t w, std::vector<double> data);
  static ProbMap uniform(std::size_t h, std::size_t w);
  static ProbMap one_hot(const LabelMap& y);

  std::size_t h() const { return h_; }
  std::size_t w() const { return w_; }
  std::size_t pixels() const { return h_ * w_; }
  double at(std::size_t pixel, std::size_t cls) const {
    return data_[pixel * kNumClasses + cls];
  }
  std::span<const double> data() const { return data_; }

  static bool is_simplex(std::span<const double> data, double tol = kSimplexTol);

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<double> data_;
};

}  // namespace specmix
