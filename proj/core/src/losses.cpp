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

#include "specmix/losses.hpp"

#include <algorithm>
#include <cmath>

#include "specmix/error.hpp"

namespace specmix::losses {

namespace {

constexpr std::uint8_t kForeground[] = {1, 2};

bool in_support(const BinaryMask* support, std::size_t pixel) {
  return support == nullptr || support->bits[pixel] != 0;
}

void check_shapes(const ProbMap& p, const LabelMap& y, const BinaryMask* support) {
  if (p.h() != y.h() || p.w() != y.w()) throw DimensionMismatch("loss: prediction/label shape");
  if (support && (support->h != p.h() || support->w != p.w())) {
    throw DimensionMismatch("loss: support shape");
  }
}

void check_sink(const GradSink& s, std::size_t n) {
  if (s.active() && s.grad.size() != n) throw DimensionMismatch("loss: gradient buffer size");
}

bool support_empty(const BinaryMask* support) {
  return support != nullptr && std::none_of(support->bits.begin(), support->bits.end(),
                                            [](std::uint8_t b) { return b != 0; });
}

std::vector<std::uint8_t> one_class(const LabelMap& y, std::uint8_t cls) {
  std::vector<std::uint8_t> out(y.pixels());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y.data()[i] == cls;
  return out;
}

double dice_ce(const Term& t, const BinaryMask* support, double eps, double weight) {
  const GradSink g = t.grad.scaled(weight);
  return weight * (dice_loss(t.pred, t.label, support, eps, g) +
                   ce_loss(t.pred, t.label, support, g));
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda_source, lambda_target, lambda_stylized, ipl_iou_weight, ipl_ce_weight,
                   epsilon}) {
    if (!std::isfinite(v) || v < 0.0) throw ValueError("loss weights must be finite and >= 0");
  }
  if (std::abs(ipl_iou_weight + ipl_ce_weight - 1.0) > 1e-12) {
    throw ValueError("ipl weights must sum to 1");
  }
}

double soft_dice(std::span<const double> p, std::size_t stride, std::size_t offset,
                 std::span<const std::uint8_t> y, const BinaryMask* support, double eps,
                 GradSink sink) {
  const std::size_t n = y.size();
  double inter = 0.0, sum_p = 0.0, sum_y = 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_support(support, i)) continue;
    ++covered;
    const double pv = p[i * stride + offset];
    inter += pv * y[i];
    sum_p += pv;
    sum_y += y[i];
  }
  if (covered == 0) return 0.0;
  const double denom = sum_p + sum_y + eps;
  const double numer = 2.0 * inter + eps;
  if (sink.active()) {
    const double d2 = denom * denom;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_support(support, i)) continue;
      sink.grad[i * stride + offset] += sink.scale * -(2.0 * y[i] * denom - numer) / d2;
    }
  }
  return 1.0 - numer / denom;
}

double soft_iou(std::span<const double> p, std::size_t stride, std::size_t offset,
                std::span<const std::uint8_t> y, const BinaryMask* support, double eps,
                GradSink sink) {
  const std::size_t n = y.size();
  double inter = 0.0, sum_p = 0.0, sum_y = 0.0;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_support(support, i)) continue;
    ++covered;
    const double pv = p[i * stride + offset];
    inter += pv * y[i];
    sum_p += pv;
    sum_y += y[i];
  }
  if (covered == 0) return 0.0;
  const double numer = inter + eps;
  const double denom = sum_p + sum_y - inter + eps;
  if (sink.active()) {
    const double d2 = denom * denom;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_support(support, i)) continue;
      // d(numer)/dp = y, d(denom)/dp = 1 - y.
      const double g = -(y[i] * denom - numer * (1.0 - y[i])) / d2;
      sink.grad[i * stride + offset] += sink.scale * g;
    }
  }
  return 1.0 - numer / denom;
}

double dice_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support, double eps,
                 GradSink sink) {
  check_shapes(p, y, support);
  check_sink(sink, p.data().size());
  if (support_empty(support)) return 0.0;
  double total = 0.0;
  const GradSink half = sink.scaled(0.5);
  for (std::uint8_t cls : kForeground) {
    const auto yc = one_class(y, cls);
    total += soft_dice(p.data(), kNumClasses, cls, yc, support, eps, half);
  }
  return 0.5 * total;
}

double iou_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support, double eps,
                GradSink sink) {
  check_shapes(p, y, support);
  check_sink(sink, p.data().size());
  if (support_empty(support)) return 0.0;
  double total = 0.0;
  const GradSink half = sink.scaled(0.5);
  for (std::uint8_t cls : kForeground) {
    const auto yc = one_class(y, cls);
    total += soft_iou(p.data(), kNumClasses, cls, yc, support, eps, half);
  }
  return 0.5 * total;
}

double ce_loss(const ProbMap& p, const LabelMap& y, const BinaryMask* support, GradSink sink) {
  check_shapes(p, y, support);
  check_sink(sink, p.data().size());
  std::size_t covered = 0;
  for (std::size_t i = 0; i < y.pixels(); ++i) covered += in_support(support, i);
  if (covered == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(covered);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.pixels(); ++i) {
    if (!in_support(support, i)) continue;
    const std::size_t idx = i * kNumClasses + y.data()[i];
    const double pv = p.data()[idx];
    acc += -std::log(std::clamp(pv, kProbFloor, 1.0));
    if (sink.active() && pv >= kProbFloor) sink.grad[idx] += sink.scale * (-inv_n / pv);
  }
  return acc * inv_n;
}

double l_ipl(const ProbMap& p, const LabelMap& y_pseudo, const LossWeights& w, GradSink sink) {
  double out = 0.0;
  if (w.ipl_iou_weight != 0.0) {
    out += w.ipl_iou_weight *
           iou_loss(p, y_pseudo, nullptr, w.epsilon, sink.scaled(w.ipl_iou_weight));
  }
  if (w.ipl_ce_weight != 0.0) {
    out += w.ipl_ce_weight * ce_loss(p, y_pseudo, nullptr, sink.scaled(w.ipl_ce_weight));
  }
  return out;
}

double confidence_gamma(const ProbMap& p_map) {
  if (p_map.pixels() == 0) return 1.0;
  double acc = 0.0;
  const auto d = p_map.data();
  for (std::size_t i = 0; i < p_map.pixels(); ++i) {
    acc += std::max({d[i * 3], d[i * 3 + 1], d[i * 3 + 2]});
  }
  return acc / static_cast<double>(p_map.pixels());
}

double l_source(const Term& il, const Term* jk, const BinaryMask& mask, double eps) {
  double out = dice_ce(il, &mask, eps, 1.0);
  if (jk) {
    const BinaryMask off = mask.complement();
    out += dice_ce(*jk, &off, eps, 1.0);
  }
  return out;
}

double l_target(const Term& il, double gamma_l, const Term* jk, double gamma_k,
                const BinaryMask& mask, double eps) {
  double out = 0.0;
  if (gamma_l != 0.0) {
    const BinaryMask off = mask.complement();
    out += dice_ce(il, &off, eps, gamma_l);
  }
  if (jk && gamma_k != 0.0) out += dice_ce(*jk, &mask, eps, gamma_k);
  return out;
}

double l_stylized(const Term& l, const Term& k, const LossWeights& w) {
  return l_ipl(l.pred, l.label, w, l.grad) + l_ipl(k.pred, k.label, w, k.grad);
}

LossReport total_loss(const LossParts& parts, const LossWeights& w) {
  LossReport r;
  r.l_source = parts.l_source;
  r.l_target = parts.l_target;
  r.l_stylized = parts.l_stylized;
  r.total = w.lambda_source * parts.l_source + w.lambda_target * parts.l_target +
            w.lambda_stylized * parts.l_stylized;
  r.gamma_values = parts.gammas;
  return r;
}

}  // namespace specmix::losses
