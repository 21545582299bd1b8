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

#include "specmix/types.hpp"

namespace specmix::spectral {

/// Complex spectrum with the same layout as the image it came from.
/// The DC term sits at index (0,0).
using Spectrum = ComplexGrid;

struct AmplitudePhase {
  RealGrid amplitude;  // |F| >= 0
  RealGrid phase;      // atan2(Im, Re) in (-pi, pi]
};

/// Low-frequency replacement mask, stored in the natural (DC at 0) layout.
/// Cells inside the DC-centred square of side floor(beta * min(h,w)) are 0.
struct LowFreqMask {
  std::size_t h = 0;
  std::size_t w = 0;
  double beta = 0.0;
  std::vector<std::uint8_t> bits;

  std::uint8_t at(std::size_t u, std::size_t v) const { return bits[u * w + v]; }
  std::size_t zeros() const;
};

inline constexpr double kDefaultBeta = 0.1;

bool is_power_of_two(std::size_t n);

/// Direct double sum; O((HW)^2) per channel. Reference for fft2.
Spectrum dft2(const RealGrid& x);
inline Spectrum dft2(const Image& x) { return dft2(x.grid()); }

/// Radix-2 row-column FFT. Throws NonPowerOfTwo.
Spectrum fft2(const RealGrid& x);
inline Spectrum fft2(const Image& x) { return fft2(x.grid()); }

/// In-place complex transform; `inverse` applies the conjugate kernel and
/// the 1/(HW) normalisation.
void fft2_inplace(Spectrum& f, bool inverse);

/// Full complex inverse transform, normalised by 1/(HW).
Spectrum ifft2_complex(const Spectrum& f);

/// Real part of the normalised inverse transform. Not clamped.
RealGrid ifft2(const Spectrum& f);

AmplitudePhase decompose(const Spectrum& f);
Spectrum recompose(const AmplitudePhase& ap);

/// Elementwise mean of the per-image amplitude spectra.
/// Throws EmptyBatch or DimensionMismatch.
RealGrid batch_mean_amplitude(std::span<const Image> batch);

/// Circular shift moving the DC term to (h/2, w/2); `inverse` undoes it.
template <typename T>
Grid3<T> fftshift(const Grid3<T>& g, bool inverse = false) {
  Grid3<T> out(g.h, g.w, g.c);
  const std::size_t sh = inverse ? g.h - g.h / 2 : g.h / 2;
  const std::size_t sw = inverse ? g.w - g.w / 2 : g.w / 2;
  for (std::size_t r = 0; r < g.h; ++r) {
    for (std::size_t c = 0; c < g.w; ++c) {
      for (std::size_t ch = 0; ch < g.c; ++ch) {
        out.at((r + sh) % g.h, (c + sw) % g.w, ch) = g.at(r, c, ch);
      }
    }
  }
  return out;
}

/// beta outside [0, 0.5] throws ValueError.
LowFreqMask make_low_freq_mask(std::size_t h, std::size_t w, double beta);

/// A_t * M + A_s * (1 - M), per channel, in the natural layout.
RealGrid splice_amplitude(const RealGrid& target_amp, const RealGrid& source_amp,
                          const LowFreqMask& mask);

/// Stylised target before clamping: ifft2(recompose(splice, P_t)).
RealGrid stylize_target_unclamped(const Image& target, const RealGrid& mean_amp,
                                  const LowFreqMask& mask);

/// Replaces the low-frequency amplitude of `target` with `mean_amp` while
/// keeping its phase, then clamps into [0,1].
Image stylize_target(const Image& target, const RealGrid& mean_amp,
                     const LowFreqMask& mask);

}  // namespace specmix::spectral
