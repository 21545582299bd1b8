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

#include "specmix/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "specmix/error.hpp"

namespace specmix::spectral {

namespace {

using cd = std::complex<double>;

void require_pow2(std::size_t h, std::size_t w) {
  if (!is_power_of_two(h) || !is_power_of_two(w)) {
    throw NonPowerOfTwo("fft requires power-of-two dims, got " + std::to_string(h) +
                        "x" + std::to_string(w));
  }
}

// Iterative radix-2 transform over `n` elements spaced `stride` apart.
// Twiddles are evaluated directly per stage index to avoid accumulated
// rotation error.
void fft1d(cd* base, std::size_t n, std::size_t stride, bool inverse,
           std::vector<cd>& scratch, const std::vector<cd>& twiddle) {
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = base[i * stride];

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(scratch[i], scratch[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cd tw = twiddle[k * step];
        if (inverse) tw = std::conj(tw);
        const cd a = scratch[start + k];
        const cd b = scratch[start + k + half] * tw;
        scratch[start + k] = a + b;
        scratch[start + k + half] = a - b;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) base[i * stride] = scratch[i];
}

std::vector<cd> twiddles(std::size_t n) {
  std::vector<cd> t(n / 2 + 1);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    t[k] = {std::cos(a), std::sin(a)};
  }
  return t;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t LowFreqMask::zeros() const {
  std::size_t z = 0;
  for (auto b : bits) z += b == 0;
  return z;
}

Spectrum dft2(const RealGrid& x) {
  Spectrum f(x.h, x.w, x.c);
  const double H = static_cast<double>(x.h);
  const double W = static_cast<double>(x.w);
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    for (std::size_t u = 0; u < x.h; ++u) {
      for (std::size_t v = 0; v < x.w; ++v) {
        cd acc{0.0, 0.0};
        for (std::size_t r = 0; r < x.h; ++r) {
          for (std::size_t c = 0; c < x.w; ++c) {
            // Reduce the phase index modulo the period before scaling.
            const double ph = static_cast<double>((r * u) % x.h) / H +
                              static_cast<double>((c * v) % x.w) / W;
            const double a = -2.0 * std::numbers::pi * ph;
            acc += x.at(r, c, ch) * cd{std::cos(a), std::sin(a)};
          }
        }
        f.at(u, v, ch) = acc;
      }
    }
  }
  return f;
}

void fft2_inplace(Spectrum& f, bool inverse) {
  require_pow2(f.h, f.w);
  std::vector<cd> scratch;
  const auto tw_w = twiddles(f.w);
  const auto tw_h = twiddles(f.h);
  for (std::size_t ch = 0; ch < f.c; ++ch) {
    for (std::size_t r = 0; r < f.h; ++r) {
      fft1d(&f.at(r, 0, ch), f.w, f.c, inverse, scratch, tw_w);
    }
    for (std::size_t c = 0; c < f.w; ++c) {
      fft1d(&f.at(0, c, ch), f.h, f.w * f.c, inverse, scratch, tw_h);
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(f.h * f.w);
    for (auto& z : f.data) z *= scale;
  }
}

Spectrum fft2(const RealGrid& x) {
  require_pow2(x.h, x.w);
  Spectrum f(x.h, x.w, x.c);
  for (std::size_t i = 0; i < x.data.size(); ++i) f.data[i] = x.data[i];
  fft2_inplace(f, false);
  return f;
}

Spectrum ifft2_complex(const Spectrum& f) {
  Spectrum out = f;
  fft2_inplace(out, true);
  return out;
}

RealGrid ifft2(const Spectrum& f) {
  const Spectrum z = ifft2_complex(f);
  RealGrid out(f.h, f.w, f.c);
  for (std::size_t i = 0; i < z.data.size(); ++i) out.data[i] = z.data[i].real();
  return out;
}

AmplitudePhase decompose(const Spectrum& f) {
  AmplitudePhase ap{RealGrid(f.h, f.w, f.c), RealGrid(f.h, f.w, f.c)};
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    ap.amplitude.data[i] = std::abs(f.data[i]);
    ap.phase.data[i] = std::arg(f.data[i]);
  }
  return ap;
}

Spectrum recompose(const AmplitudePhase& ap) {
  if (!ap.amplitude.same_shape(ap.phase)) throw DimensionMismatch("amplitude/phase shape");
  Spectrum f(ap.amplitude.h, ap.amplitude.w, ap.amplitude.c);
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    f.data[i] = std::polar(ap.amplitude.data[i], ap.phase.data[i]);
  }
  return f;
}

RealGrid batch_mean_amplitude(std::span<const Image> batch) {
  if (batch.empty()) throw EmptyBatch("batch_mean_amplitude: empty batch");
  const Image& first = batch.front();
  RealGrid mean(first.h(), first.w(), first.c());
  for (const Image& img : batch) {
    if (!img.grid().same_shape(mean)) {
      throw DimensionMismatch("batch_mean_amplitude: images differ in shape");
    }
    const Spectrum f = fft2(img);
    for (std::size_t i = 0; i < f.data.size(); ++i) mean.data[i] += std::abs(f.data[i]);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : mean.data) v *= inv;
  return mean;
}

LowFreqMask make_low_freq_mask(std::size_t h, std::size_t w, double beta) {
  if (!(beta >= 0.0 && beta <= 0.5)) throw ValueError("beta must lie in [0, 0.5]");
  LowFreqMask m{h, w, beta, std::vector<std::uint8_t>(h * w, 1)};
  const auto side = static_cast<std::size_t>(std::floor(beta * static_cast<double>(std::min(h, w))));
  if (side == 0) return m;
  // Square in the centred layout, then shifted back so DC is at (0,0).
  Grid3<std::uint8_t> centred(h, w, 1, 1);
  const std::size_t r0 = h / 2 - side / 2;
  const std::size_t c0 = w / 2 - side / 2;
  for (std::size_t r = r0; r < r0 + side; ++r) {
    for (std::size_t c = c0; c < c0 + side; ++c) centred.at(r, c) = 0;
  }
  m.bits = fftshift(centred, /*inverse=*/true).data;
  return m;
}

RealGrid splice_amplitude(const RealGrid& target_amp, const RealGrid& source_amp,
                          const LowFreqMask& mask) {
  if (!target_amp.same_shape(source_amp) || mask.h != target_amp.h || mask.w != target_amp.w) {
    throw DimensionMismatch("splice_amplitude: shapes disagree");
  }
  RealGrid out = target_amp;
  for (std::size_t u = 0; u < out.h; ++u) {
    for (std::size_t v = 0; v < out.w; ++v) {
      if (mask.at(u, v)) continue;
      for (std::size_t ch = 0; ch < out.c; ++ch) out.at(u, v, ch) = source_amp.at(u, v, ch);
    }
  }
  return out;
}

RealGrid stylize_target_unclamped(const Image& target, const RealGrid& mean_amp,
                                  const LowFreqMask& mask) {
  if (!target.grid().same_shape(mean_amp) || mask.h != target.h() || mask.w != target.w()) {
    throw DimensionMismatch("stylize_target: shapes disagree");
  }
  AmplitudePhase ap = decompose(fft2(target));
  ap.amplitude = splice_amplitude(ap.amplitude, mean_amp, mask);
  return ifft2(recompose(ap));
}

Image stylize_target(const Image& target, const RealGrid& mean_amp, const LowFreqMask& mask) {
  return Image(stylize_target_unclamped(target, mean_amp, mask));
}

}  // namespace specmix::spectral
