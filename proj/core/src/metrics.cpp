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

#include "specmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "specmix/error.hpp"

namespace specmix::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const BinaryMask& a, const BinaryMask& b) {
  if (a.h != b.h || a.w != b.w) throw DimensionMismatch("metric: mask shapes differ");
}

// 1D squared distance transform of f (Felzenszwalb & Huttenlocher).
void dt1d(const double* f, std::size_t n, double* out, std::vector<std::size_t>& v,
          std::vector<double>& z) {
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  std::size_t k = 0;
  std::size_t first = n;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] < kInf) {
      first = q;
      break;
    }
  }
  if (first == n) {
    std::fill(out, out + n, kInf);
    return;
  }
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (std::size_t q = first + 1; q < n; ++q) {
    if (!(f[q] < kInf)) continue;
    const auto qd = static_cast<double>(q);
    while (true) {
      const auto vk = static_cast<double>(v[k]);
      const double s = ((f[q] + qd * qd) - (f[v[k]] + vk * vk)) / (2.0 * qd - 2.0 * vk);
      if (s <= z[k]) {
        if (k == 0) {
          v[0] = q;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto qd = static_cast<double>(q);
    while (z[k + 1] < qd) ++k;
    const auto d = qd - static_cast<double>(v[k]);
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

BinaryMask fill_holes(const BinaryMask& mask) {
  const std::size_t h = mask.h, w = mask.w;
  std::vector<std::uint8_t> outside(mask.bits.size(), 0);
  std::vector<std::size_t> stack;
  auto seed = [&](std::size_t p) {
    if (!mask.bits[p] && !outside[p]) {
      outside[p] = 1;
      stack.push_back(p);
    }
  };
  for (std::size_t c = 0; c < w; ++c) {
    seed(c);
    seed((h - 1) * w + c);
  }
  for (std::size_t r = 0; r < h; ++r) {
    seed(r * w);
    seed(r * w + w - 1);
  }
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    const std::size_t r = p / w, c = p % w;
    if (r > 0) seed(p - w);
    if (r + 1 < h) seed(p + w);
    if (c > 0) seed(p - 1);
    if (c + 1 < w) seed(p + 1);
  }
  BinaryMask out(h, w);
  for (std::size_t p = 0; p < out.bits.size(); ++p) out.bits[p] = mask.bits[p] || !outside[p];
  return out;
}

double dice_coeff(const BinaryMask& a, const BinaryMask& b) {
  check_dims(a, b);
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    na += a.bits[i] != 0;
    nb += b.bits[i] != 0;
    inter += a.bits[i] && b.bits[i];
  }
  if (na + nb == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::vector<std::size_t> boundary_pixels(const BinaryMask& m) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < m.h; ++r) {
    for (std::size_t c = 0; c < m.w; ++c) {
      if (!m.at(r, c)) continue;
      const bool edge = r == 0 || c == 0 || r + 1 == m.h || c + 1 == m.w || !m.at(r - 1, c) ||
                        !m.at(r + 1, c) || !m.at(r, c - 1) || !m.at(r, c + 1);
      if (edge) out.push_back(r * m.w + c);
    }
  }
  return out;
}

std::vector<double> squared_distance_transform(std::size_t h, std::size_t w,
                                               const std::vector<std::size_t>& sites) {
  std::vector<double> grid(h * w, kInf);
  for (auto p : sites) grid[p] = 0.0;
  std::vector<std::size_t> v;
  std::vector<double> z;
  std::vector<double> col_in(h), col_out(h);
  for (std::size_t c = 0; c < w; ++c) {
    for (std::size_t r = 0; r < h; ++r) col_in[r] = grid[r * w + c];
    dt1d(col_in.data(), h, col_out.data(), v, z);
    for (std::size_t r = 0; r < h; ++r) grid[r * w + c] = col_out[r];
  }
  std::vector<double> row_out(w);
  for (std::size_t r = 0; r < h; ++r) {
    dt1d(grid.data() + r * w, w, row_out.data(), v, z);
    std::copy(row_out.begin(), row_out.end(), grid.begin() + static_cast<std::ptrdiff_t>(r * w));
  }
  return grid;
}

double percentile(std::vector<double>& values, double q) {
  if (values.empty()) throw ValueError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double hd95(const BinaryMask& a, const BinaryMask& b) {
  check_dims(a, b);
  const auto ba = boundary_pixels(a);
  const auto bb = boundary_pixels(b);
  if (ba.empty() || bb.empty()) throw EmptyMask("hd95: empty mask");
  auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    const auto dt = squared_distance_transform(a.h, a.w, to);
    std::vector<double> d;
    d.reserve(from.size());
    for (auto p : from) d.push_back(std::sqrt(dt[p]));
    return percentile(d, 0.95);
  };
  return std::max(directed(ba, bb), directed(bb, ba));
}

MetricsReport evaluate(const Predictor& predict, const std::vector<synth::LoadedSample>& split,
                       bool postprocess) {
  if (split.empty()) throw ValueError("evaluate: empty split");
  MetricsReport r;
  double sum_hd_od = 0.0, sum_hd_oc = 0.0;
  for (const auto& item : split) {
    const LabelMap pred = predict(item.sample.image);
    BinaryMask od = pred.disc_mask();
    BinaryMask oc = pred.cup_mask();
    if (postprocess) {
      od = fill_holes(od);
      oc = fill_holes(oc);
    }
    const BinaryMask gt_od = item.sample.label.disc_mask();
    const BinaryMask gt_oc = item.sample.label.cup_mask();
    ImageMetrics m{item.image_path, dice_coeff(od, gt_od), dice_coeff(oc, gt_oc), 0.0, 0.0};
    bool undefined = false;
    try {
      m.hd95_od = hd95(od, gt_od);
      sum_hd_od += m.hd95_od;
    } catch (const EmptyMask&) {
      m.hd95_od = std::numeric_limits<double>::quiet_NaN();
      ++r.undefined_od;
      undefined = true;
    }
    try {
      m.hd95_oc = hd95(oc, gt_oc);
      sum_hd_oc += m.hd95_oc;
    } catch (const EmptyMask&) {
      m.hd95_oc = std::numeric_limits<double>::quiet_NaN();
      ++r.undefined_oc;
      undefined = true;
    }
    r.undefined += undefined;
    r.dice_od += m.dice_od;
    r.dice_oc += m.dice_oc;
    r.per_image.push_back(std::move(m));
  }
  r.n_images = split.size();
  const auto n = static_cast<double>(r.n_images);
  r.dice_od /= n;
  r.dice_oc /= n;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t def_od = r.n_images - r.undefined_od;
  const std::size_t def_oc = r.n_images - r.undefined_oc;
  r.hd95_od = def_od ? sum_hd_od / static_cast<double>(def_od) : nan;
  r.hd95_oc = def_oc ? sum_hd_oc / static_cast<double>(def_oc) : nan;
  return r;
}

MetricsReport evaluate(const model::ScorerParams& params,
                       const std::vector<synth::LoadedSample>& split, bool postprocess) {
  return evaluate(
      [&params](const Image& x) { return model::argmax_label(model::forward(params, x)); }, split,
      postprocess);
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string metrics_csv(const MetricsReport& r, const std::string& scope) {
  std::string out = "scope,dice_od,dice_oc,hd95_od,hd95_oc,n,undefined\n";
  out += scope + "," + fmt(r.dice_od) + "," + fmt(r.dice_oc) + "," + fmt(r.hd95_od) + "," +
         fmt(r.hd95_oc) + "," + std::to_string(r.n_images) + "," + std::to_string(r.undefined) +
         "\n";
  for (const auto& m : r.per_image) {
    const bool undef = std::isnan(m.hd95_od) || std::isnan(m.hd95_oc);
    out += m.name + "," + fmt(m.dice_od) + "," + fmt(m.dice_oc) + "," + fmt(m.hd95_od) + "," +
           fmt(m.hd95_oc) + ",1," + (undef ? "1" : "0") + "\n";
  }
  return out;
}

void write_metrics_csv(const MetricsReport& r, const std::string& scope,
                       const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << metrics_csv(r, scope);
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace specmix::metrics
