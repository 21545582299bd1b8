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

#include "specmix/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "specmix/error.hpp"
#include "test_util.hpp"

namespace specmix::model {
namespace {

using testing::random_image;

// Direct re-implementation of the scorer used as a forward oracle.
std::vector<double> naive_forward(const ScorerParams& p, const Image& x) {
  const Layout L = p.layout();
  const std::size_t h = x.h(), w = x.w(), cin = x.c();
  auto conv = [&](const std::vector<double>& in, std::size_t ci_n, std::size_t wo,
                  std::size_t bo) {
    std::vector<double> out(h * w * kHidden);
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t co = 0; co < kHidden; ++co) {
          double s = p.values[bo + co];
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const long rr = static_cast<long>(r) + dy, cc = static_cast<long>(c) + dx;
              if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w)) {
                continue;
              }
              for (std::size_t ci = 0; ci < ci_n; ++ci) {
                const std::size_t k = static_cast<std::size_t>((dy + 1) * 3 + (dx + 1));
                s += in[(static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc)) * ci_n + ci] *
                     p.values[wo + (k * ci_n + ci) * kHidden + co];
              }
            }
          }
          out[(r * w + c) * kHidden + co] = std::max(s, 0.0);
        }
      }
    }
    return out;
  };
  const std::vector<double> in(x.data().begin(), x.data().end());
  const auto a1 = conv(in, cin, L.w1, L.b1);
  const auto a2 = conv(a1, kHidden, L.w2, L.b2);
  std::vector<double> probs(h * w * 3);
  for (std::size_t px = 0; px < h * w; ++px) {
    double z[3];
    for (std::size_t k = 0; k < 3; ++k) {
      z[k] = p.values[L.b3 + k];
      for (std::size_t ci = 0; ci < kHidden; ++ci) {
        z[k] += a2[px * kHidden + ci] * p.values[L.w3 + ci * 3 + k];
      }
    }
    const double m = std::max({z[0], z[1], z[2]});
    const double s = std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m);
    for (std::size_t k = 0; k < 3; ++k) probs[px * 3 + k] = std::exp(z[k] - m) / s;
  }
  return probs;
}

ScorerParams random_params(std::size_t c_in, Rng& rng) {
  ScorerParams p = ScorerParams::glorot(c_in, rng);
  // Nonzero biases so every block is exercised.
  const Layout L = p.layout();
  for (std::size_t off : {L.b1, L.b2}) {
    for (std::size_t i = 0; i < kHidden; ++i) p.values[off + i] = rng.uniform(-0.1, 0.3);
  }
  for (std::size_t i = 0; i < 3; ++i) p.values[L.b3 + i] = rng.uniform(-0.2, 0.2);
  return p;
}

TEST(Model, ParameterLayout) {
  EXPECT_EQ(param_count(3), 2819u);
  EXPECT_EQ(param_count(1), 16u * 10 + 16 * 145 + 3 * 17);
  const Layout L(3);
  EXPECT_EQ(L.w1, 0u);
  EXPECT_EQ(L.b1, 9u * 3 * 16);
  EXPECT_EQ(L.total, 2819u);
}

TEST(Model, GlorotInit) {
  Rng a(1), b(1);
  const ScorerParams p = ScorerParams::glorot(3, a);
  EXPECT_EQ(p, ScorerParams::glorot(3, b));
  const Layout L = p.layout();
  const double s1 = std::sqrt(6.0 / (27.0 + 144.0));
  for (std::size_t i = L.w1; i < L.b1; ++i) EXPECT_LE(std::abs(p.values[i]), s1);
  for (std::size_t i = L.b1; i < L.w2; ++i) EXPECT_EQ(p.values[i], 0.0);
  for (std::size_t i = L.b3; i < L.total; ++i) EXPECT_EQ(p.values[i], 0.0);
}

TEST(Model, ForwardMatchesNaiveOracle) {
  Rng rng(2);
  for (std::size_t c_in : {1u, 3u}) {
    const ScorerParams p = random_params(c_in, rng);
    const Image x = random_image(7, 9, c_in, rng);
    const ProbMap out = forward(p, x);
    const auto ref = naive_forward(p, x);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out.data()[i], ref[i], 1e-12);
    EXPECT_TRUE(ProbMap::is_simplex(out.data()));
  }
  EXPECT_THROW(forward(ScorerParams(3), Image(4, 4, 1)), ChannelMismatch);
}

TEST(Model, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  const ScorerParams p = random_params(3, rng);
  const Image x = random_image(8, 8, 3, rng);
  std::vector<double> g(8 * 8 * 3);
  for (double& v : g) v = rng.uniform(-1.0, 1.0);
  // L(theta) = sum g * forward(theta), whose exact gradient is backward(g).
  auto loss = [&](const ScorerParams& q) {
    const ProbMap pm = forward(q, x);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * pm.data()[i];
    return s;
  };
  ForwardCache cache;
  forward(p, x, &cache);
  const Gradients an = backward(p, cache, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    ScorerParams a = p, b = p;
    a.values[i] += 1e-6;
    b.values[i] -= 1e-6;
    const double fd = (loss(a) - loss(b)) / 2e-6;
    const double denom = std::max(1e-6, std::abs(fd) + std::abs(an.values[i]));
    worst = std::max(worst, std::abs(fd - an.values[i]) / denom);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Model, BackwardValidatesCache) {
  Rng rng(4);
  const ScorerParams p = random_params(3, rng);
  ForwardCache cache;
  forward(p, random_image(4, 4, 3, rng), &cache);
  EXPECT_THROW(backward(p, cache, std::vector<double>(5)), CacheMismatch);
  EXPECT_THROW(backward(ScorerParams(1), cache, std::vector<double>(48)), CacheMismatch);
}

TEST(Model, SgdAndSchedules) {
  Rng rng(5);
  const ScorerParams p = random_params(3, rng);
  Gradients g(p);
  for (double& v : g.values) v = rng.uniform();
  const ScorerParams q = sgd_step(p, g, 0.1);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    EXPECT_EQ(q.values[i], p.values[i] - 0.1 * g.values[i]);
  }
  EXPECT_EQ(sgd_step(p, g, 0.0), p);
  EXPECT_THROW(sgd_step(p, Gradients(1), 0.1), ShapeMismatch);

  EXPECT_EQ(poly_lr({0.001, 1000, 0, 0.99}), 0.001);
  EXPECT_EQ(poly_lr({0.001, 1000, 1000, 0.99}), 0.0);
  EXPECT_NEAR(poly_lr({0.001, 1000, 500, 0.99}), 0.001 * std::pow(0.5, 0.9), 1e-18);
  for (std::size_t i = 1; i <= 1000; ++i) {
    EXPECT_LT(poly_lr({0.001, 1000, i, 0.99}), poly_lr({0.001, 1000, i - 1, 0.99}));
  }
}

TEST(Model, EmaIdentities) {
  Rng rng(6);
  const ScorerParams t = random_params(3, rng), s = random_params(3, rng);
  EXPECT_EQ(ema_update(t, s, 1.0), t);
  EXPECT_EQ(ema_update(t, s, 0.0), s);
  const ScorerParams e = ema_update(t, s, 0.99);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    EXPECT_EQ(e.values[i], 0.99 * t.values[i] + (1.0 - 0.99) * s.values[i]);
  }
  EXPECT_THROW(ema_update(t, ScorerParams(1), 0.5), ShapeMismatch);
  EXPECT_THROW(ema_update(t, s, 1.5), ValueError);
}

TEST(Model, ArgmaxTiesGoToLowestClass) {
  const ProbMap p(1, 3, {0.5, 0.5, 0.0, 0.2, 0.4, 0.4, 1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_EQ(argmax_label(p).data()[0], 0);
  EXPECT_EQ(argmax_label(p).data()[1], 1);
  EXPECT_EQ(argmax_label(p).data()[2], 0);
}

TEST(Model, CheckpointFormat) {
  Rng rng(7);
  const ScorerParams p = random_params(3, rng);
  const auto bytes = encode_checkpoint(p);
  ASSERT_EQ(bytes.size(), 16u + 8u * 2819u);
  const std::uint8_t header[16] = {'D', 'D', 'S', '1', 3, 0, 0, 0, 0x03, 0x0b, 0, 0, 0, 0, 0, 0};
  EXPECT_TRUE(std::equal(header, header + 16, bytes.begin()));
  EXPECT_EQ(decode_checkpoint(bytes), p);

  ScorerParams one(3);
  one.values[0] = 1.0;  // 0x3ff0000000000000, little-endian
  const auto b1 = encode_checkpoint(one);
  const std::uint8_t le_one[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  EXPECT_TRUE(std::equal(le_one, le_one + 8, b1.begin() + 16));

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  EXPECT_THROW(decode_checkpoint(std::span(bytes).first(100)), FormatError);
  auto wrong_count = bytes;
  wrong_count[8] = 0x04;
  EXPECT_THROW(decode_checkpoint(wrong_count), FormatError);

  const auto dir = testing::scratch_dir("ckpt");
  save_checkpoint(p, dir / "p.bin");
  EXPECT_EQ(load_checkpoint(dir / "p.bin"), p);
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), IoError);
}

}  // namespace
}  // namespace specmix::model
