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

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "specmix/error.hpp"

namespace specmix::model {

namespace {

constexpr char kMagic[4] = {'D', 'D', 'S', '1'};
constexpr std::size_t kHeaderBytes = 16;
constexpr std::size_t kClasses = kNumClasses;

// Sixteen doubles held as eight two-lane vectors (GCC/Clang vector
// extension). Named members rather than an array keep the accumulator in
// registers; the hidden width is fixed at 16 by the architecture.
static_assert(kHidden == 16, "Lane16 kernels assume 16 hidden channels");
using v2 = double __attribute__((vector_size(16)));

inline v2 load2(const double* p) {
  v2 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}
inline void store2(double* p, v2 v) { std::memcpy(p, &v, sizeof v); }

struct Lane16 {
  v2 a0, a1, a2, a3, a4, a5, a6, a7;

  static Lane16 zero() {
    const v2 z = {0.0, 0.0};
    return {z, z, z, z, z, z, z, z};
  }
  static Lane16 load(const double* p) {
    return {load2(p),      load2(p + 2),  load2(p + 4),  load2(p + 6),
            load2(p + 8),  load2(p + 10), load2(p + 12), load2(p + 14)};
  }
  void store(double* p) const {
    store2(p, a0);
    store2(p + 2, a1);
    store2(p + 4, a2);
    store2(p + 6, a3);
    store2(p + 8, a4);
    store2(p + 10, a5);
    store2(p + 12, a6);
    store2(p + 14, a7);
  }
  // this += x * w[0..16)
  void axpy(double x, const double* w) {
    const v2 xv = {x, x};
    a0 += xv * load2(w);
    a1 += xv * load2(w + 2);
    a2 += xv * load2(w + 4);
    a3 += xv * load2(w + 6);
    a4 += xv * load2(w + 8);
    a5 += xv * load2(w + 10);
    a6 += xv * load2(w + 12);
    a7 += xv * load2(w + 14);
  }
};

// out[p][co] = b[co] + sum_{ky,kx,ci} in[p + (ky-1, kx-1)][ci] * w[ky][kx][ci][co]
// with zero padding; cout = 16, b may be null (zero bias).
void conv3x3(const double* in, std::size_t h, std::size_t w, std::size_t cin,
             const double* weights, const double* bias, double* out) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      Lane16 acc = bias ? Lane16::load(bias) : Lane16::zero();
      for (std::size_t ky = 0; ky < kKernel; ++ky) {
        const std::size_t rr = r + ky;
        if (rr < 1 || rr > h) continue;
        for (std::size_t kx = 0; kx < kKernel; ++kx) {
          const std::size_t cc = c + kx;
          if (cc < 1 || cc > w) continue;
          const double* x = in + ((rr - 1) * w + (cc - 1)) * cin;
          const double* wk = weights + (ky * kKernel + kx) * cin * kHidden;
          for (std::size_t ci = 0; ci < cin; ++ci) acc.axpy(x[ci], wk + ci * kHidden);
        }
      }
      acc.store(out + (r * w + c) * kHidden);
    }
  }
}

// Accumulates weight/bias gradients and (optionally, for cin = 16) the
// input gradient of conv3x3 given dz = dLoss/dout.
void conv3x3_backward(const double* in, std::size_t h, std::size_t w, std::size_t cin,
                      const double* weights, const double* dz, double* dw, double* db,
                      double* din) {
  // Bias: column sums of dz.
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t co = 0; co < kHidden; ++co) db[co] += dz[p * kHidden + co];
  }
  // Weights: dw[k][ci][:] = sum_p in[p + off_k][ci] * dz[p][:], reduced one
  // image row at a time in registers.
  for (std::size_t ky = 0; ky < kKernel; ++ky) {
    for (std::size_t kx = 0; kx < kKernel; ++kx) {
      double* dwk = dw + (ky * kKernel + kx) * cin * kHidden;
      for (std::size_t r = 0; r < h; ++r) {
        const std::size_t rr = r + ky;
        if (rr < 1 || rr > h) continue;
        const std::size_t c_lo = kx == 0 ? 1 : 0;
        const std::size_t c_hi = kx == 2 ? w - 1 : w;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          Lane16 acc = Lane16::zero();
          const double* x = in + (rr - 1) * w * cin + ci;
          const double* g = dz + r * w * kHidden;
          for (std::size_t c = c_lo; c < c_hi; ++c) {
            acc.axpy(x[(c + kx - 1) * cin], g + c * kHidden);
          }
          double* dwrow = dwk + ci * kHidden;
          double tmp[kHidden];
          acc.store(tmp);
          for (std::size_t co = 0; co < kHidden; ++co) dwrow[co] += tmp[co];
        }
      }
    }
  }
  if (!din) return;
  // Input: din[q][:] = sum_k sum_co dz[q - off_k][co] * w[k][:][co], i.e. a
  // forward convolution of dz with spatially flipped, transposed weights.
  if (cin != kHidden) throw CacheMismatch("conv3x3_backward: input gradient needs 16 channels");
  std::vector<double> wt(kKernel * kKernel * kHidden * kHidden);
  for (std::size_t k = 0; k < kKernel * kKernel; ++k) {
    const std::size_t kf = kKernel * kKernel - 1 - k;
    for (std::size_t ci = 0; ci < kHidden; ++ci) {
      for (std::size_t co = 0; co < kHidden; ++co) {
        wt[(kf * kHidden + co) * kHidden + ci] = weights[(k * kHidden + ci) * kHidden + co];
      }
    }
  }
  std::vector<double> tmp(h * w * kHidden);
  conv3x3(dz, h, w, kHidden, wt.data(), nullptr, tmp.data());
  for (std::size_t i = 0; i < tmp.size(); ++i) din[i] += tmp[i];
}



void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return v;
}

void check_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeMismatch(std::string(what) + ": parameter shapes differ");
}

}  // namespace

Layout::Layout(std::size_t c_in_) : c_in(c_in_) {
  std::size_t off = 0;
  w1 = off;
  off += kKernel * kKernel * c_in * kHidden;
  b1 = off;
  off += kHidden;
  w2 = off;
  off += kKernel * kKernel * kHidden * kHidden;
  b2 = off;
  off += kHidden;
  w3 = off;
  off += kHidden * kClasses;
  b3 = off;
  off += kClasses;
  total = off;
}

std::size_t param_count(std::size_t c_in) { return Layout(c_in).total; }

ScorerParams::ScorerParams(std::size_t c_in_) : c_in(c_in_), values(param_count(c_in_), 0.0) {}

ScorerParams ScorerParams::glorot(std::size_t c_in, Rng& rng) {
  ScorerParams p(c_in);
  const Layout L(c_in);
  auto fill = [&](std::size_t off, std::size_t n, double fan_in, double fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < n; ++i) p.values[off + i] = rng.uniform(-s, s);
  };
  const double k2 = kKernel * kKernel;
  fill(L.w1, L.b1 - L.w1, k2 * static_cast<double>(c_in), k2 * kHidden);
  fill(L.w2, L.b2 - L.w2, k2 * kHidden, k2 * kHidden);
  fill(L.w3, L.b3 - L.w3, kHidden, kClasses);
  return p;
}

void Gradients::add(const Gradients& other) {
  check_same(values.size(), other.values.size(), "Gradients::add");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
}

void Gradients::scale(double s) {
  for (double& v : values) v *= s;
}

ProbMap forward(const ScorerParams& params, const Image& x, ForwardCache* cache) {
  if (x.c() != params.c_in) {
    throw ChannelMismatch("forward: image has " + std::to_string(x.c()) +
                          " channels, scorer expects " + std::to_string(params.c_in));
  }
  const Layout L = params.layout();
  if (params.values.size() != L.total) throw ShapeMismatch("forward: parameter count");
  const std::size_t h = x.h(), w = x.w(), n = h * w;
  const double* P = params.values.data();

  std::vector<double> a1(n * kHidden), a2(n * kHidden);
  conv3x3(x.data().data(), h, w, x.c(), P + L.w1, P + L.b1, a1.data());
  for (double& v : a1) v = std::max(v, 0.0);
  conv3x3(a1.data(), h, w, kHidden, P + L.w2, P + L.b2, a2.data());
  for (double& v : a2) v = std::max(v, 0.0);

  std::vector<double> probs(n * kClasses);
  const double* w3 = P + L.w3;
  const double* b3 = P + L.b3;
  for (std::size_t p = 0; p < n; ++p) {
    double z[kClasses] = {b3[0], b3[1], b3[2]};
    const double* a = a2.data() + p * kHidden;
    for (std::size_t ci = 0; ci < kHidden; ++ci) {
      for (std::size_t k = 0; k < kClasses; ++k) z[k] += a[ci] * w3[ci * kClasses + k];
    }
    const double zmax = std::max({z[0], z[1], z[2]});
    double e[kClasses], s = 0.0;
    for (std::size_t k = 0; k < kClasses; ++k) {
      e[k] = std::exp(z[k] - zmax);
      s += e[k];
    }
    for (std::size_t k = 0; k < kClasses; ++k) probs[p * kClasses + k] = e[k] / s;
  }

  if (cache) {
    cache->h = h;
    cache->w = w;
    cache->c_in = x.c();
    cache->input.assign(x.data().begin(), x.data().end());
    cache->a1 = std::move(a1);
    cache->a2 = std::move(a2);
    cache->probs = probs;
  }
  return ProbMap(h, w, std::move(probs));
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> d_probs) {
  if (probs.size() != d_probs.size()) throw CacheMismatch("softmax_backward: size");
  std::vector<double> dz(probs.size());
  for (std::size_t p = 0; p < probs.size(); p += kClasses) {
    double dot = 0.0;
    for (std::size_t k = 0; k < kClasses; ++k) dot += probs[p + k] * d_probs[p + k];
    for (std::size_t k = 0; k < kClasses; ++k) dz[p + k] = probs[p + k] * (d_probs[p + k] - dot);
  }
  return dz;
}

Gradients backward(const ScorerParams& params, const ForwardCache& cache,
                   std::span<const double> d_probs) {
  const std::size_t n = cache.h * cache.w;
  if (cache.c_in != params.c_in || cache.input.size() != n * cache.c_in ||
      cache.a1.size() != n * kHidden || cache.a2.size() != n * kHidden ||
      cache.probs.size() != n * kClasses || d_probs.size() != n * kClasses) {
    throw CacheMismatch("backward: cache does not match parameters or gradient");
  }
  const Layout L = params.layout();
  const double* P = params.values.data();
  Gradients g(params);
  double* G = g.values.data();

  const std::vector<double> dz3 = softmax_backward(cache.probs, d_probs);

  std::vector<double> dz2(n * kHidden, 0.0);
  const double* w3 = P + L.w3;
  double* dw3 = G + L.w3;
  double* db3 = G + L.b3;
  for (std::size_t p = 0; p < n; ++p) {
    const double* a = cache.a2.data() + p * kHidden;
    const double* gz = dz3.data() + p * kClasses;
    for (std::size_t k = 0; k < kClasses; ++k) db3[k] += gz[k];
    for (std::size_t ci = 0; ci < kHidden; ++ci) {
      double da = 0.0;
      for (std::size_t k = 0; k < kClasses; ++k) {
        dw3[ci * kClasses + k] += a[ci] * gz[k];
        da += w3[ci * kClasses + k] * gz[k];
      }
      dz2[p * kHidden + ci] = a[ci] > 0.0 ? da : 0.0;
    }
  }

  std::vector<double> da1(n * kHidden, 0.0);
  conv3x3_backward(cache.a1.data(), cache.h, cache.w, kHidden, P + L.w2, dz2.data(),
                            G + L.w2, G + L.b2, da1.data());
  for (std::size_t i = 0; i < da1.size(); ++i) {
    if (!(cache.a1[i] > 0.0)) da1[i] = 0.0;
  }
  conv3x3_backward(cache.input.data(), cache.h, cache.w, cache.c_in, P + L.w1,
                            da1.data(), G + L.w1, G + L.b1, nullptr);
  return g;
}

ScorerParams sgd_step(const ScorerParams& params, const Gradients& grads, double lr) {
  if (params.c_in != grads.c_in) throw ShapeMismatch("sgd_step: channel count differs");
  check_same(params.values.size(), grads.values.size(), "sgd_step");
  ScorerParams out = params;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= lr * grads.values[i];
  return out;
}

double poly_lr(const OptimState& s) {
  if (s.total_iters == 0) return 0.0;
  const double frac = 1.0 - static_cast<double>(s.iter) / static_cast<double>(s.total_iters);
  return s.l_init * std::pow(std::max(frac, 0.0), 0.9);
}

ScorerParams ema_update(const ScorerParams& teacher, const ScorerParams& student, double alpha) {
  if (teacher.c_in != student.c_in) throw ShapeMismatch("ema_update: channel count differs");
  check_same(teacher.values.size(), student.values.size(), "ema_update");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValueError("ema alpha must lie in [0,1]");
  ScorerParams out = teacher;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = alpha * teacher.values[i] + (1.0 - alpha) * student.values[i];
  }
  return out;
}

LabelMap argmax_label(const ProbMap& p) {
  std::vector<std::uint8_t> out(p.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint8_t best = 0;
    for (std::uint8_t k = 1; k < kClasses; ++k) {
      if (p.at(i, k) > p.at(i, best)) best = k;
    }
    out[i] = best;
  }
  return LabelMap(p.h(), p.w(), std::move(out));
}

std::vector<std::uint8_t> encode_checkpoint(const ScorerParams& params) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * params.values.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(params.c_in));
  put_u64(out, params.values.size());
  for (double v : params.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

ScorerParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes || !std::equal(std::begin(kMagic), std::end(kMagic),
                                                 bytes.begin(), [](char a, std::uint8_t b) {
                                                   return static_cast<std::uint8_t>(a) == b;
                                                 })) {
    throw FormatError("checkpoint: bad magic or truncated header");
  }
  const auto c_in = static_cast<std::size_t>(get_le(bytes, 4, 4));
  const auto count = static_cast<std::size_t>(get_le(bytes, 8, 8));
  if (c_in == 0 || count != param_count(c_in)) {
    throw FormatError("checkpoint: parameter count does not match C_in");
  }
  if (bytes.size() != kHeaderBytes + 8 * count) throw FormatError("checkpoint: truncated payload");
  ScorerParams p(c_in);
  for (std::size_t i = 0; i < count; ++i) {
    p.values[i] = std::bit_cast<double>(get_le(bytes, kHeaderBytes + 8 * i, 8));
  }
  return p;
}

void save_checkpoint(const ScorerParams& params, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open checkpoint for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing checkpoint: " + path.string());
}

ScorerParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace specmix::model
