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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "specmix/error.hpp"
#include "specmix/synthdata.hpp"
#include "test_util.hpp"

namespace specmix::spectral {
namespace {

using testing::random_image;
using cd = std::complex<double>;

// Textbook DFT written independently of the library: explicit cos/sin of
// the full phase, no index reduction.
Spectrum naive_dft(const RealGrid& x) {
  Spectrum out(x.h, x.w, x.c);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    for (std::size_t u = 0; u < x.h; ++u) {
      for (std::size_t v = 0; v < x.w; ++v) {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < x.h; ++m) {
          for (std::size_t n = 0; n < x.w; ++n) {
            const double angle = -two_pi * (static_cast<double>(u * m) / x.h +
                                            static_cast<double>(v * n) / x.w);
            re += x.at(m, n, ch) * std::cos(angle);
            im += x.at(m, n, ch) * std::sin(angle);
          }
        }
        out.at(u, v, ch) = {re, im};
      }
    }
  }
  return out;
}

double max_abs_diff(const Spectrum& a, const Spectrum& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

TEST(Spectral, PowerOfTwo) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_TRUE(is_power_of_two(64));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(63));
}

TEST(Spectral, Dft2MatchesNaiveOracle) {
  Rng rng(1);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {4, 8}, {6, 5}}) {
    const Image x = random_image(h, w, 2, rng);
    EXPECT_LT(max_abs_diff(dft2(x), naive_dft(x.grid())), 1e-10) << h << "x" << w;
  }
}

TEST(Spectral, Dft2HandCases) {
  const Image ones(4, 4, 1, 1.0);
  const Spectrum f = dft2(ones);
  EXPECT_NEAR(std::abs(f.at(0, 0) - cd(16.0, 0.0)), 0.0, 1e-12);
  for (std::size_t i = 1; i < f.data.size(); ++i) EXPECT_NEAR(std::abs(f.data[i]), 0.0, 1e-12);
  Image delta(4, 4, 1, std::vector<double>(16, 0.0));
  std::vector<double> d(16, 0.0);
  d[0] = 1.0;
  const Spectrum g = dft2(Image(4, 4, 1, d));
  for (const cd& v : g.data) EXPECT_NEAR(std::abs(v - cd(1.0, 0.0)), 0.0, 1e-12);
}

TEST(Spectral, Fft2MatchesDft2) {
  Rng rng(2);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 8}, {8, 8}, {16, 16},
                      {16, 4}}) {
    const Image x = random_image(h, w, 3, rng);
    EXPECT_LT(max_abs_diff(fft2(x), dft2(x)), 1e-9) << h << "x" << w;
  }
}

TEST(Spectral, RoundTripAndParseval) {
  Rng rng(3);
  const Image x = random_image(16, 8, 3, rng);
  const Spectrum f = fft2(x);
  const RealGrid back = ifft2(f);
  double err = 0.0, e_space = 0.0, e_freq = 0.0;
  for (std::size_t i = 0; i < back.data.size(); ++i) {
    err = std::max(err, std::abs(back.data[i] - x.data()[i]));
    e_space += x.data()[i] * x.data()[i];
    e_freq += std::norm(f.data[i]);
  }
  EXPECT_LT(err, 1e-12);
  EXPECT_NEAR(e_space, e_freq / (16.0 * 8.0), 1e-9);
  const Spectrum g = ifft2_complex(f);
  for (const cd& v : g.data) EXPECT_LT(std::abs(v.imag()), 1e-12);
}

TEST(Spectral, RejectsNonPowerOfTwo) {
  EXPECT_THROW(fft2(Image(6, 8, 1)), NonPowerOfTwo);
  EXPECT_THROW(fft2(Image(8, 12, 1)), NonPowerOfTwo);
}

TEST(Spectral, DecomposeRecompose) {
  Rng rng(4);
  const Spectrum f = fft2(random_image(8, 8, 3, rng));
  const AmplitudePhase ap = decompose(f);
  for (double a : ap.amplitude.data) EXPECT_GE(a, 0.0);
  for (double p : ap.phase.data) {
    EXPECT_GT(p, -std::numbers::pi - 1e-15);
    EXPECT_LE(p, std::numbers::pi);
  }
  EXPECT_LT(max_abs_diff(recompose(ap), f), 1e-12);
}

TEST(Spectral, BatchMeanAmplitude) {
  Rng rng(5);
  const Image a = random_image(8, 8, 3, rng), b = random_image(8, 8, 3, rng);
  const std::vector<Image> both{a, b};
  const RealGrid mean = batch_mean_amplitude(both);
  const RealGrid aa = decompose(fft2(a)).amplitude, ab = decompose(fft2(b)).amplitude;
  for (std::size_t i = 0; i < mean.data.size(); ++i) {
    EXPECT_NEAR(mean.data[i], 0.5 * (aa.data[i] + ab.data[i]), 1e-12);
  }
  EXPECT_THROW(batch_mean_amplitude(std::vector<Image>{}), EmptyBatch);
  EXPECT_THROW(batch_mean_amplitude(std::vector<Image>{a, Image(8, 4, 3)}), DimensionMismatch);
}

TEST(Spectral, FftshiftRoundTrip) {
  RealGrid g(5, 4, 1);
  for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = static_cast<double>(i);
  const RealGrid s = fftshift(g);
  EXPECT_EQ(s.at(2, 2), g.at(0, 0));
  EXPECT_EQ(fftshift(s, true), g);
}

TEST(Spectral, LowFreqMaskGeometry) {
  for (auto [h, w, beta] : {std::tuple<std::size_t, std::size_t, double>{64, 64, 0.1},
                            {32, 64, 0.25}, {16, 16, 0.5}, {8, 8, 0.0}}) {
    const LowFreqMask m = make_low_freq_mask(h, w, beta);
    const auto side = static_cast<std::size_t>(std::floor(beta * static_cast<double>(std::min(h, w))));
    EXPECT_EQ(m.zeros(), side * side);
    // In the centred layout the square starts at (h/2 - side/2, w/2 - side/2).
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t u = (r + h - h / 2) % h, v = (c + w - w / 2) % w;
        const bool inside = r >= h / 2 - side / 2 && r < h / 2 - side / 2 + side &&
                            c >= w / 2 - side / 2 && c < w / 2 - side / 2 + side;
        EXPECT_EQ(m.at(u, v), inside ? 0 : 1);
      }
    }
    if (side > 0) { EXPECT_EQ(m.at(0, 0), 0); }
  }
  EXPECT_THROW(make_low_freq_mask(8, 8, -0.1), ValueError);
  EXPECT_THROW(make_low_freq_mask(8, 8, 0.6), ValueError);
}

TEST(Spectral, SpliceTakesSourceInsideSquare) {
  Rng rng(6);
  const RealGrid at = decompose(fft2(random_image(16, 16, 3, rng))).amplitude;
  const RealGrid as = decompose(fft2(random_image(16, 16, 3, rng))).amplitude;
  const LowFreqMask m = make_low_freq_mask(16, 16, 0.25);
  const RealGrid s = splice_amplitude(at, as, m);
  for (std::size_t u = 0; u < 16; ++u) {
    for (std::size_t v = 0; v < 16; ++v) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        EXPECT_EQ(s.at(u, v, ch), m.at(u, v) ? at.at(u, v, ch) : as.at(u, v, ch));
      }
    }
  }
}

TEST(Spectral, StylizedOutputKeepsTargetPhase) {
  Rng rng(7);
  const Image t = random_image(16, 16, 3, rng);
  const std::vector<Image> src{random_image(16, 16, 3, rng), random_image(16, 16, 3, rng)};
  const RealGrid amp = batch_mean_amplitude(src);
  const LowFreqMask m = make_low_freq_mask(16, 16, 0.25);
  const RealGrid y = stylize_target_unclamped(t, amp, m);
  const AmplitudePhase ot = decompose(fft2(t));
  const AmplitudePhase oy = decompose(fft2(y));
  const RealGrid spliced = splice_amplitude(ot.amplitude, amp, m);
  for (std::size_t u = 0; u < 16; ++u) {
    for (std::size_t v = 0; v < 16; ++v) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        // Taking the real part symmetrises the amplitude over (u,v) and its
        // mirror while leaving the conjugate-symmetric target phase intact.
        const double sym = 0.5 * (spliced.at(u, v, ch) + spliced.at((16 - u) % 16, (16 - v) % 16, ch));
        EXPECT_NEAR(oy.amplitude.at(u, v, ch), sym, 1e-9);
        if (sym > 1e-6) {
          const double dp = std::remainder(oy.phase.at(u, v, ch) - ot.phase.at(u, v, ch),
                                           2.0 * std::numbers::pi);
          EXPECT_NEAR(dp, 0.0, 1e-6);
        }
      }
    }
  }
}

TEST(Spectral, IdentityCasesAt8Bit) {
  Rng rng(8);
  const Image t = synth::decode_ppm(synth::encode_ppm(random_image(16, 16, 3, rng)));
  const Image other = random_image(16, 16, 3, rng);
  const std::vector<Image> self{t};
  const std::vector<Image> foreign{other};
  EXPECT_EQ(synth::encode_ppm(stylize_target(t, batch_mean_amplitude(self),
                                             make_low_freq_mask(16, 16, 0.3))),
            synth::encode_ppm(t));
  EXPECT_EQ(synth::encode_ppm(stylize_target(t, batch_mean_amplitude(foreign),
                                             make_low_freq_mask(16, 16, 0.0))),
            synth::encode_ppm(t));
  EXPECT_NE(synth::encode_ppm(stylize_target(t, batch_mean_amplitude(foreign),
                                             make_low_freq_mask(16, 16, 0.3))),
            synth::encode_ppm(t));
}

TEST(Spectral, StylizeClampsIntoUnitRange) {
  Rng rng(9);
  const Image t = random_image(8, 8, 3, rng);
  const std::vector<Image> bright{Image(8, 8, 3, 1.0)};
  const Image y = stylize_target(t, batch_mean_amplitude(bright), make_low_freq_mask(8, 8, 0.5));
  for (double v : y.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

}  // namespace
}  // namespace specmix::spectral
