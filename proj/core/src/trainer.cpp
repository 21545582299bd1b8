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

#include "specmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "specmix/error.hpp"
#include "specmix/metrics.hpp"
#include "specmix/spectral.hpp"

namespace specmix::trainer {

namespace {

using model::ForwardCache;
using model::Gradients;
using model::ScorerParams;

// Independent streams per concern so toggling one pathway does not shift
// the random numbers another pathway sees.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kSourceBatchStream = 2,
  kTargetBatchStream = 3,
  kAugmentStream = 4,
  kMaskStream = 5,
};

// B distinct indices from [0, n): prefix of a partial Fisher-Yates shuffle.
std::vector<std::size_t> draw_batch(std::size_t n, std::size_t b, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(b);
  return idx;
}

std::size_t effective_batch(std::size_t requested, std::size_t a, std::size_t b) {
  std::size_t eff = std::min({requested, a, b});
  eff -= eff % 2;
  return eff;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Image blend(const Image& a, const Image& b, double wa) {
  std::vector<double> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = wa * a.data()[i] + (1.0 - wa) * b.data()[i];
  }
  return Image(a.h(), a.w(), a.c(), std::move(out));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One forward pass whose probability gradient is filled in by the losses.
struct Pass {
  ForwardCache cache;
  ProbMap probs;
  std::vector<double> grad;

  losses::GradSink sink(double scale) {
    if (scale == 0.0) return {};
    if (grad.empty()) grad.assign(probs.data().size(), 0.0);
    return {grad, scale};
  }
};

Pass run_forward(const ScorerParams& p, const Image& x) {
  Pass pass;
  pass.probs = model::forward(p, x, &pass.cache);
  return pass;
}

}  // namespace

Variant parse_variant(std::string_view s) {
  if (s == "fullnet") return Variant::kFullNet;
  if (s == "intra_only") return Variant::kIntraOnly;
  if (s == "cross_only") return Variant::kCrossOnly;
  if (s == "cross_only_uni") return Variant::kCrossOnlyUni;
  if (s == "cross_uni") return Variant::kCrossUni;
  if (s == "source_only") return Variant::kSourceOnly;
  throw UnknownVariant("unknown variant: " + std::string(s));
}

MaskBaseline parse_baseline(std::string_view s) {
  if (s == "dynamic") return MaskBaseline::kDynamic;
  if (s == "static_d") return MaskBaseline::kStaticD;
  if (s == "cutmix") return MaskBaseline::kCutMix;
  if (s == "mixup") return MaskBaseline::kMixup;
  throw UnknownBaseline("unknown mask baseline: " + std::string(s));
}

AmpMode parse_amp_mode(std::string_view s) {
  if (s == "batch_avg") return AmpMode::kBatchAvg;
  if (s == "single_image") return AmpMode::kSingleImage;
  throw ValueError("unknown amp mode: " + std::string(s));
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kFullNet: return "fullnet";
    case Variant::kIntraOnly: return "intra_only";
    case Variant::kCrossOnly: return "cross_only";
    case Variant::kCrossOnlyUni: return "cross_only_uni";
    case Variant::kCrossUni: return "cross_uni";
    case Variant::kSourceOnly: return "source_only";
  }
  return "?";
}

std::string to_string(MaskBaseline b) {
  switch (b) {
    case MaskBaseline::kDynamic: return "dynamic";
    case MaskBaseline::kStaticD: return "static_d";
    case MaskBaseline::kCutMix: return "cutmix";
    case MaskBaseline::kMixup: return "mixup";
  }
  return "?";
}

std::string to_string(AmpMode a) {
  return a == AmpMode::kBatchAvg ? "batch_avg" : "single_image";
}

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) throw ValueError("batch_size must be even and >= 2");
  if (!(l_init >= 0.0) || !(pretrain_lr >= 0.0)) throw ValueError("learning rates must be >= 0");
  loss.validate();
  if (!(d_min >= 0.0 && d_min <= d_max)) throw ValueError("need 0 <= d_min <= d_max");
  maskgen::validate_interval(lambda_k);
  if (!(beta >= 0.0 && beta <= 0.5)) throw ValueError("beta must lie in [0, 0.5]");
  if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0)) throw ValueError("ema_alpha must lie in [0, 1]");
  if (eval_every == 0) throw ValueError("eval_every must be >= 1");
}

Toggles apply_variant(Variant v) {
  switch (v) {
    case Variant::kFullNet: return {true, true, true, true, false};
    case Variant::kIntraOnly: return {true, true, false, true, false};
    case Variant::kCrossOnly: return {true, false, true, true, true};
    case Variant::kCrossOnlyUni: return {true, false, true, false, true};
    case Variant::kCrossUni: return {true, true, true, false, false};
    case Variant::kSourceOnly: return {false, false, false, false, false};
  }
  throw UnknownVariant("unknown variant");
}

MixSpec mask_baseline(const TrainConfig& cfg, double d_scheduled, std::size_t h, std::size_t w,
                      Rng& rng) {
  switch (cfg.mask_baseline) {
    case MaskBaseline::kDynamic:
      return {maskgen::generate_mask(h, w, d_scheduled, cfg.lambda_k, rng), std::nullopt};
    case MaskBaseline::kStaticD:
      return {maskgen::generate_mask(h, w, 0.5 * (cfg.d_min + cfg.d_max), cfg.lambda_k, rng),
              std::nullopt};
    case MaskBaseline::kCutMix: {
      const double lam = rng.uniform(cfg.lambda_k.lo, cfg.lambda_k.hi);
      const auto H = static_cast<double>(h), W = static_cast<double>(w);
      const auto rh = static_cast<std::size_t>(
          std::clamp(std::round(std::sqrt(lam) * H), 1.0, H));
      const auto rw = static_cast<std::size_t>(
          std::clamp(std::round(lam * H * W / static_cast<double>(rh)), 1.0, W));
      const std::size_t top = rng.below(h - rh + 1);
      const std::size_t left = rng.below(w - rw + 1);
      maskgen::DynamicMask m{BinaryMask(h, w), {0.0, lam, rng.seed()}};
      for (std::size_t r = top; r < top + rh; ++r) {
        for (std::size_t c = left; c < left + rw; ++c) m.mask.at(r, c) = 1;
      }
      return {std::move(m), std::nullopt};
    }
    case MaskBaseline::kMixup: {
      const double lam = rng.uniform(cfg.lambda_k.lo, cfg.lambda_k.hi);
      // Labels follow whichever side dominates the blend.
      const std::uint8_t bit = lam > 0.5 ? 1 : 0;
      return {maskgen::DynamicMask{BinaryMask(h, w, bit), {0.0, lam, rng.seed()}}, lam};
    }
  }
  throw UnknownBaseline("unknown mask baseline");
}

std::string RunLog::csv() const {
  std::string out = "iter,lr,d,lambda_k_mean,L_S,L_T,L_Tsty,total,gamma_mean\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter) + "," + fmt17(r.lr) + "," + fmt17(r.d) + "," +
           fmt17(r.lambda_k_mean) + "," + fmt17(r.l_source) + "," + fmt17(r.l_target) + "," +
           fmt17(r.l_stylized) + "," + fmt17(r.total) + "," + fmt17(r.gamma_mean) + "\n";
  }
  return out;
}

std::string RunLog::eval_csv() const {
  std::string out = "iter,dice_od,dice_oc,mean_dice\n";
  for (const auto& e : evals) {
    out += std::to_string(e.iter) + "," + fmt17(e.dice_od) + "," + fmt17(e.dice_oc) + "," +
           fmt17(0.5 * (e.dice_od + e.dice_oc)) + "\n";
  }
  return out;
}

std::vector<synth::Sample> samples_of(const std::vector<synth::LoadedSample>& loaded) {
  std::vector<synth::Sample> out;
  out.reserve(loaded.size());
  for (const auto& l : loaded) out.push_back(l.sample);
  return out;
}

std::vector<Image> images_of(const std::vector<synth::LoadedSample>& loaded) {
  std::vector<Image> out;
  out.reserve(loaded.size());
  for (const auto& l : loaded) out.push_back(l.sample.image);
  return out;
}

PretrainResult pretrain(const TrainConfig& cfg, const std::vector<synth::Sample>& source_train,
                        const std::vector<synth::LoadedSample>& source_test) {
  cfg.validate();
  if (source_train.empty()) throw IoError("pretrain: source training split is empty");
  const std::size_t c_in = source_train.front().image.c();
  const Rng root(cfg.seed);
  Rng init_rng = root.child(kInitStream);
  Rng batch_rng = root.child(kSourceBatchStream);
  Rng aug_rng = root.child(kAugmentStream);

  PretrainResult res;
  ScorerParams params = ScorerParams::glorot(c_in, init_rng);
  res.params = params;
  res.best_mean_dice = -1.0;
  const std::size_t b = std::min(cfg.batch_size, source_train.size());
  const double inv_b = 1.0 / static_cast<double>(b);

  for (std::size_t it = 1; it <= cfg.pretrain_iters; ++it) {
    Gradients grads(params);
    double loss = 0.0;
    for (std::size_t idx : draw_batch(source_train.size(), b, batch_rng)) {
      const synth::Sample s = synth::augment(source_train[idx], aug_rng);
      Pass pass = run_forward(params, s.image);
      loss += inv_b * losses::dice_loss(pass.probs, s.label, nullptr, cfg.loss.epsilon,
                                        pass.sink(inv_b));
      grads.add(model::backward(params, pass.cache, pass.grad));
    }
    if (!std::isfinite(loss) || !all_finite(grads.values)) {
      throw DivergenceError("pretrain: non-finite loss at iteration " + std::to_string(it));
    }
    params = model::sgd_step(params, grads, cfg.pretrain_lr);
    res.log.rows.push_back({it, cfg.pretrain_lr, 0.0, 0.0, 0.0, 0.0, 0.0, loss, 0.0});

    if (it % cfg.eval_every == 0 || it == cfg.pretrain_iters) {
      if (source_test.empty()) {
        res.params = params;
        res.best_iter = it;
        continue;
      }
      const auto rep = metrics::evaluate(params, source_test, cfg.postprocess);
      res.log.evals.push_back({it, rep.dice_od, rep.dice_oc});
      if (rep.mean_dice() > res.best_mean_dice) {
        res.best_mean_dice = rep.mean_dice();
        res.best_iter = it;
        res.params = params;
      }
    }
  }
  if (cfg.pretrain_iters == 0) res.params = params;
  return res;
}

AdaptResult adapt(const TrainConfig& cfg, const std::vector<synth::Sample>& source_train,
                  const std::vector<Image>& target_train, const model::ScorerParams& init,
                  const AdaptObserver& observer) {
  cfg.validate();
  const Toggles tg = apply_variant(cfg.variant);
  AdaptResult res{init, init, {}};
  if (!tg.adapt) return res;
  if (source_train.empty() || target_train.empty()) {
    throw IoError("adapt: source and target training splits must be nonempty");
  }
  const std::size_t b = effective_batch(cfg.batch_size, source_train.size(), target_train.size());
  if (b < 2) throw ValueError("adapt: need at least two source and two target images");
  const std::size_t quads = b / 2;
  const double inv_q = 1.0 / static_cast<double>(quads);
  const std::size_t h = target_train.front().h(), w = target_train.front().w();

  const Rng root(cfg.seed ^ 0xADA9ULL);
  Rng src_rng = root.child(kSourceBatchStream);
  Rng tgt_rng = root.child(kTargetBatchStream);
  Rng aug_rng = root.child(kAugmentStream);
  Rng mask_rng = root.child(kMaskStream);
  const spectral::LowFreqMask low_mask = spectral::make_low_freq_mask(h, w, cfg.beta);
  const auto& lw = cfg.loss;
  const bool need_stylized = tg.stylized_loss || tg.stylized_cross_inputs;

  ScorerParams student = init;
  ScorerParams teacher = init;

  for (std::size_t it = 0; it < cfg.adapt_iters; ++it) {
    IterationTrace trace;
    trace.iter = it;

    // batches
    std::vector<synth::Sample> src;
    std::vector<Image> tgt;
    for (std::size_t idx : draw_batch(source_train.size(), b, src_rng)) {
      src.push_back(synth::augment(source_train[idx], aug_rng));
    }
    for (std::size_t idx : draw_batch(target_train.size(), b, tgt_rng)) {
      tgt.push_back(synth::apply_augment(
          target_train[idx], static_cast<synth::Augment>(aug_rng.below(synth::kNumAugments))));
    }

    // spectrum-stylised targets and teacher pseudo labels
    std::vector<Image> stylized;
    std::vector<LabelMap> teacher_labels;
    if (need_stylized) {
      std::vector<Image> src_images;
      for (const auto& s : src) src_images.push_back(s.image);
      const RealGrid batch_amp = spectral::batch_mean_amplitude(src_images);
      for (std::size_t m = 0; m < b; ++m) {
        const RealGrid amp =
            cfg.amp_mode == AmpMode::kBatchAvg
                ? batch_amp
                : spectral::batch_mean_amplitude(std::span<const Image>(&src_images[m], 1));
        stylized.push_back(spectral::stylize_target(tgt[m], amp, low_mask));
      }
      if (tg.stylized_loss) {
        for (const auto& xs : stylized) {
          teacher_labels.push_back(model::argmax_label(model::forward(teacher, xs)));
        }
      }
    }

    // student on the targets
    const std::vector<Image>& tgt_inputs = tg.stylized_cross_inputs ? stylized : tgt;
    std::vector<Pass> tgt_pass;
    std::vector<LabelMap> tgt_hard;
    std::vector<double> gammas;
    for (const auto& x : tgt_inputs) {
      tgt_pass.push_back(run_forward(student, x));
      tgt_hard.push_back(model::argmax_label(tgt_pass.back().probs));
      gammas.push_back(losses::confidence_gamma(tgt_pass.back().probs));
    }

    losses::LossParts parts;
    parts.gammas = gammas;
    if (tg.stylized_loss) {
      const double scale = lw.lambda_stylized * inv_q;
      for (std::size_t q = 0; q < quads; ++q) {
        Pass& pl = tgt_pass[2 * q];
        Pass& pk = tgt_pass[2 * q + 1];
        const losses::Term tl{pl.probs, teacher_labels[2 * q], pl.sink(scale)};
        const losses::Term tk{pk.probs, teacher_labels[2 * q + 1], pk.sink(scale)};
        parts.l_stylized += inv_q * losses::l_stylized(tl, tk, lw);
      }
    }

    // cross-domain mixing
    std::vector<Pass> mixed_pass;
    double lambda_sum = 0.0;
    if (tg.cross_pathway) {
      const double d_sched = maskgen::schedule_d(it, cfg.adapt_iters, cfg.d_min, cfg.d_max);
      trace.d = cfg.mask_baseline == MaskBaseline::kDynamic   ? d_sched
                : cfg.mask_baseline == MaskBaseline::kStaticD ? 0.5 * (cfg.d_min + cfg.d_max)
                                                              : 0.0;
      const double s_scale = lw.lambda_source * inv_q;
      const double t_scale = lw.lambda_target * inv_q;
      for (std::size_t q = 0; q < quads; ++q) {
        const std::size_t i = 2 * q, j = 2 * q + 1, l = 2 * q, k = 2 * q + 1;
        MixSpec spec = mask_baseline(cfg, d_sched, h, w, mask_rng);
        lambda_sum += spec.mask.meta.lambda_k;
        trace.lambda_k.push_back(spec.mask.meta.lambda_k);
        trace.mask_popcounts.push_back(spec.mask.mask.popcount());
        const mixing::QuadrupleInputs in{src[i].image,  src[i].label, src[j].image,
                                         src[j].label,  tgt_inputs[l], tgt_hard[l],
                                         tgt_inputs[k], tgt_hard[k]};
        mixing::MixedPair pair =
            mixing::make_mixed_pair(in, std::move(spec.mask), {i, j, l, k}, tg.bidirectional);
        if (spec.blend) {
          pair.x_m_il = blend(src[i].image, tgt_inputs[l], *spec.blend);
          if (pair.x_m_jk) pair.x_m_jk = blend(src[j].image, tgt_inputs[k], 1.0 - *spec.blend);
        }
        trace.provenance.push_back(pair.provenance);
        trace.bidirectional.push_back(pair.bidirectional());

        Pass p_il = run_forward(student, pair.x_m_il);
        const BinaryMask& m = pair.mask.mask;
        const losses::Term s_il{p_il.probs, pair.y_m_il, p_il.sink(s_scale)};
        const losses::Term t_il{p_il.probs, pair.y_m_il, p_il.sink(t_scale)};
        if (pair.bidirectional()) {
          Pass p_jk = run_forward(student, *pair.x_m_jk);
          const losses::Term s_jk{p_jk.probs, *pair.y_m_jk, p_jk.sink(s_scale)};
          const losses::Term t_jk{p_jk.probs, *pair.y_m_jk, p_jk.sink(t_scale)};
          parts.l_source += inv_q * losses::l_source(s_il, &s_jk, m, lw.epsilon);
          parts.l_target +=
              inv_q * losses::l_target(t_il, gammas[l], &t_jk, gammas[k], m, lw.epsilon);
          mixed_pass.push_back(std::move(p_il));
          mixed_pass.push_back(std::move(p_jk));
        } else {
          parts.l_source += inv_q * losses::l_source(s_il, nullptr, m, lw.epsilon);
          parts.l_target += inv_q * losses::l_target(t_il, gammas[l], nullptr, 0.0, m, lw.epsilon);
          mixed_pass.push_back(std::move(p_il));
        }
      }
    }

    const losses::LossReport report = losses::total_loss(parts, lw);
    if (!std::isfinite(report.total)) {
      throw DivergenceError("adapt: non-finite loss at iteration " + std::to_string(it));
    }

    // backward in fixed order, SGD with poly lr, EMA teacher
    Gradients grads(student);
    for (auto* passes : {&tgt_pass, &mixed_pass}) {
      for (const Pass& p : *passes) {
        if (!p.grad.empty()) grads.add(model::backward(student, p.cache, p.grad));
      }
    }
    if (!all_finite(grads.values)) {
      throw DivergenceError("adapt: non-finite gradient at iteration " + std::to_string(it));
    }
    const double lr = model::poly_lr({cfg.l_init, cfg.adapt_iters, it, cfg.ema_alpha});
    student = model::sgd_step(student, grads, lr);
    teacher = model::ema_update(teacher, student, cfg.ema_alpha);
    trace.lr = lr;

    const double gamma_mean =
        std::accumulate(gammas.begin(), gammas.end(), 0.0) / static_cast<double>(gammas.size());
    res.log.rows.push_back({it, lr, trace.d,
                            tg.cross_pathway ? lambda_sum * inv_q : 0.0, report.l_source,
                            report.l_target, report.l_stylized, report.total, gamma_mean});
    if (observer) observer(trace, student, teacher);
  }
  res.student = std::move(student);
  res.teacher = std::move(teacher);
  return res;
}

}  // namespace specmix::trainer
