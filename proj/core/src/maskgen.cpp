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

#include "specmix/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "specmix/error.hpp"
#include "specmix/spectral.hpp"

namespace specmix::maskgen {

void validate_interval(LambdaInterval interval) {
  if (!(interval.lo > 0.0 && interval.lo <= interval.hi && interval.hi <= kLambdaCap)) {
    throw ValueError("lambda_k interval must satisfy 0 < lo <= hi <= 0.5");
  }
}

std::size_t topk_count(double lambda_k, std::size_t h, std::size_t w) {
  return static_cast<std::size_t>(std::floor(lambda_k * static_cast<double>(h * w)));
}

double min_frequency(std::size_t h, std::size_t w) {
  return 1.0 / static_cast<double>(std::max(h, w));
}

namespace {

double signed_freq(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (k < (n + 1) / 2 ? kk : kk - nn) / nn;
}

}  // namespace

double frequency_magnitude(std::size_t u, std::size_t v, std::size_t h, std::size_t w) {
  return std::hypot(signed_freq(u, h), signed_freq(v, w));
}

ComplexGrid decay_noise(std::size_t h, std::size_t w, double d, Rng& rng) {
  if (!(d >= 0.0)) throw ValueError("attenuation factor d must be >= 0");
  ComplexGrid z(h, w, 1);
  const double fmin = min_frequency(h, w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      const double div = std::pow(std::max(frequency_magnitude(u, v, h, w), fmin), d);
      z.at(u, v) = {re / div, im / div};
    }
  }
  return z;
}

DynamicMask binarize_topk(const RealGrid& field, double lambda_k) {
  if (!(lambda_k > 0.0 && lambda_k <= kLambdaCap)) {
    throw ValueError("lambda_k must lie in (0, 0.5]");
  }
  if (field.c != 1) throw DimensionMismatch("binarize_topk expects a single-channel field");
  const std::size_t n = field.pixels();
  const std::size_t k = topk_count(lambda_k, field.h, field.w);
  if (k == 0) throw ValueError("lambda_k * h * w < 1 yields an empty mask");
  for (double v : field.data) {
    if (!std::isfinite(v)) throw ValueError("binarize_topk: non-finite field value");
  }
  const auto [lo, hi] = std::minmax_element(field.data.begin(), field.data.end());
  if (*lo == *hi) throw DegenerateField("binarize_topk: constant field");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& f = field.data;
  // (value desc, index asc) is a strict total order, so the selected set is
  // unique.
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return f[a] > f[b] || (f[a] == f[b] && a < b);
                   });
  DynamicMask out{BinaryMask(field.h, field.w), MaskMeta{0.0, lambda_k, 0}};
  for (std::size_t i = 0; i < k; ++i) out.mask.bits[order[i]] = 1;
  return out;
}

double schedule_d(std::size_t i, std::size_t total, double d_min, double d_max) {
  if (total == 0) return d_min;
  const double frac = static_cast<double>(i) / static_cast<double>(total);
  return d_min + (1.0 - frac) * (d_max - d_min);
}

DynamicMask generate_mask(std::size_t h, std::size_t w, double d, LambdaInterval interval,
                          Rng& rng) {
  validate_interval(interval);
  if (!spectral::is_power_of_two(h) || !spectral::is_power_of_two(w)) {
    throw NonPowerOfTwo("generate_mask requires power-of-two dims");
  }
  const double lambda_k = rng.uniform(interval.lo, interval.hi);
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    RealGrid field = spectral::ifft2(decay_noise(h, w, d, rng));
    try {
      DynamicMask m = binarize_topk(field, lambda_k);
      m.meta = MaskMeta{d, lambda_k, rng.seed()};
      return m;
    } catch (const DegenerateField&) {
      continue;
    }
  }
  throw DegenerateField("generate_mask: field stayed constant after resampling");
}

std::size_t boundary_length(const BinaryMask& m) {
  std::size_t count = 0;
  for (std::size_t r = 0; r < m.h; ++r) {
    for (std::size_t c = 0; c < m.w; ++c) {
      if (!m.at(r, c)) continue;
      const bool edge = (r > 0 && !m.at(r - 1, c)) || (r + 1 < m.h && !m.at(r + 1, c)) ||
                        (c > 0 && !m.at(r, c - 1)) || (c + 1 < m.w && !m.at(r, c + 1));
      count += edge;
    }
  }
  return count;
}

std::size_t connected_components(const BinaryMask& m) {
  std::vector<std::uint8_t> seen(m.bits.size(), 0);
  std::vector<std::size_t> stack;
  std::size_t components = 0;
  for (std::size_t start = 0; start < m.bits.size(); ++start) {
    if (!m.bits[start] || seen[start]) continue;
    ++components;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / m.w;
      const std::size_t c = p % m.w;
      auto visit = [&](std::size_t q) {
        if (m.bits[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (r > 0) visit(p - m.w);
      if (r + 1 < m.h) visit(p + m.w);
      if (c > 0) visit(p - 1);
      if (c + 1 < m.w) visit(p + 1);
    }
  }
  return components;
}

}  // namespace specmix::maskgen
