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

#include "specmix_cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "specmix/error.hpp"
#include "specmix/maskgen.hpp"
#include "specmix/metrics.hpp"
#include "specmix/mixing.hpp"
#include "specmix/model.hpp"
#include "specmix/spectral.hpp"
#include "specmix/synthdata.hpp"
#include "specmix/trainer.hpp"
#include "specmix_cli/config.hpp"

namespace specmix::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw IoError("cannot write " + path.string());
}

fs::path make_run_dir(const RunConfig& cfg, const std::string& cmd, const std::string& extra) {
  const fs::path dir = fs::path(cfg.runs_dir) / (cmd + "-" + config_hash(cfg, extra));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  write_text(dir / "config.txt", to_text(cfg));
  return dir;
}

std::string split_scope(std::size_t domain, synth::Split split) {
  return "d" + std::to_string(domain) + "_" + synth::split_name(split);
}

// Options shared by the training subcommands: --config plus one
// --kebab-case override per config key.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app, bool with_postprocess_key = true) {
    app->add_option("--config", config_path, "key=value config file");
    for (const auto& key : config_keys()) {
      if (key == "postprocess" && !with_postprocess_key) continue;
      app->add_option("--" + flag_name(key), overrides[key], "override `" + key + "`");
    }
  }

  RunConfig resolve(CLI::App* app) const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& key : config_keys()) {
      const auto it = overrides.find(key);
      if (it == overrides.end()) continue;
      if (app->count("--" + flag_name(key)) > 0) set_key(cfg, key, it->second);
    }
    cfg.validate();
    return cfg;
  }
};

struct Splits {
  std::vector<synth::LoadedSample> source_train, source_test, target_train, target_test;
};

Splits load_splits(const RunConfig& cfg) {
  const synth::Manifest m = synth::read_manifest(cfg.manifest);
  Splits s;
  s.source_train = synth::load_split(m, {cfg.source_domain}, synth::Split::kTrain);
  s.source_test = synth::load_split(m, {cfg.source_domain}, synth::Split::kTest);
  s.target_train = synth::load_split(m, {cfg.target_domain}, synth::Split::kTrain);
  s.target_test = synth::load_split(m, {cfg.target_domain}, synth::Split::kTest);
  return s;
}

// Keys that influence pretraining; used to reuse one pretrain across a
// sweep.
std::string pretrain_key(const RunConfig& cfg) {
  std::string k;
  for (const char* key : {"data_seed", "domains", "n_per_domain", "size", "manifest",
                          "source_domain", "seed", "batch_size", "pretrain_iters",
                          "pretrain_lr", "epsilon", "eval_every", "postprocess", "init"}) {
    k += std::string(key) + "=" + get_key(cfg, key) + "\n";
  }
  return k;
}

trainer::PretrainResult run_pretrain(const RunConfig& cfg, const Splits& s) {
  return trainer::pretrain(cfg.train, trainer::samples_of(s.source_train), s.source_test);
}

struct AdaptOutcome {
  std::optional<trainer::PretrainResult> pretrained;
  model::ScorerParams init;
  trainer::AdaptResult result;
  metrics::MetricsReport report;

  const model::ScorerParams& evaluated(EvalModel m) const {
    return m == EvalModel::kTeacher ? result.teacher : result.student;
  }
};

AdaptOutcome run_adapt(const RunConfig& cfg, const Splits& s,
                       std::map<std::string, model::ScorerParams>* cache = nullptr) {
  AdaptOutcome o;
  if (!cfg.init.empty()) {
    o.init = model::load_checkpoint(cfg.init);
  } else {
    const std::string key = pretrain_key(cfg);
    if (cache != nullptr && cache->count(key) > 0) {
      o.init = cache->at(key);
    } else {
      o.pretrained = run_pretrain(cfg, s);
      o.init = o.pretrained->params;
      if (cache != nullptr) cache->emplace(key, o.init);
    }
  }
  o.result = trainer::adapt(cfg.train, trainer::samples_of(s.source_train),
                            trainer::images_of(s.target_train), o.init);
  o.report = metrics::evaluate(o.evaluated(cfg.eval_model), s.target_test, cfg.train.postprocess);
  return o;
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  synth::DatasetConfig data;
  std::size_t size = 64;
  std::string out = "data";
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (!spectral::is_power_of_two(a.size)) throw ValueError("gen: --size must be a power of two");
  if (a.data.n_domains == 0 || a.data.n_per_domain == 0) {
    throw ValueError("gen: --domains and --n must be >= 1");
  }
  synth::DatasetConfig d = a.data;
  d.h = d.w = a.size;
  const synth::Manifest m = synth::gen_dataset(d, a.out);
  out << m.path.string() << "\n";
  return kExitOk;
}

// --- mask ------------------------------------------------------------------

struct MaskArgs {
  double d = 5.0;
  double lam = 0.3;
  std::uint64_t seed = 1;
  std::size_t size = 64;
  std::string out = "mask.pgm";
};

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  if (!spectral::is_power_of_two(a.size)) throw ValueError("mask: --size must be a power of two");
  if (!(a.d >= 0.0)) throw ValueError("mask: --d must be >= 0");
  maskgen::validate_interval({a.lam, a.lam});
  Rng rng(a.seed);
  const auto m = maskgen::generate_mask(a.size, a.size, a.d, {a.lam, a.lam}, rng);
  synth::write_pgm(m.mask, a.out);
  out << a.out << "\n";
  return kExitOk;
}

// --- stylize ---------------------------------------------------------------

struct StylizeArgs {
  std::string target;
  std::vector<std::string> sources;
  double beta = spectral::kDefaultBeta;
  std::string out = "stylized.ppm";
};

int cmd_stylize(const StylizeArgs& a, std::ostream& out) {
  const Image target = synth::read_image(a.target);
  std::vector<Image> sources;
  for (const auto& p : a.sources) sources.push_back(synth::read_image(p));
  const RealGrid amp = spectral::batch_mean_amplitude(sources);
  if (!amp.same_shape(RealGrid(target.h(), target.w(), target.c()))) {
    throw DimensionMismatch("stylize: source and target shapes differ");
  }
  const auto mask = spectral::make_low_freq_mask(target.h(), target.w(), a.beta);
  synth::write_ppm(spectral::stylize_target(target, amp, mask), a.out);
  out << a.out << "\n";
  return kExitOk;
}

// --- mix -------------------------------------------------------------------

struct MixArgs {
  std::string manifest = "data/manifest.csv";
  std::size_t source_domain = 0, target_domain = 1;
  std::size_t i = 0, j = 1, l = 0, k = 1;
  double d = 5.0;
  double lam = 0.3;
  std::uint64_t seed = 1;
  bool uni = false;
  std::string out = "mix";
};

int cmd_mix(const MixArgs& a, std::ostream& out) {
  const synth::Manifest m = synth::read_manifest(a.manifest);
  const auto src = synth::load_split(m, {a.source_domain}, synth::Split::kTrain);
  const auto tgt = synth::load_split(m, {a.target_domain}, synth::Split::kTrain);
  for (std::size_t idx : {a.i, a.j}) {
    if (idx >= src.size()) throw ValueError("mix: source index out of range");
  }
  for (std::size_t idx : {a.l, a.k}) {
    if (idx >= tgt.size()) throw ValueError("mix: target index out of range");
  }
  const Image& x_l = tgt[a.l].sample.image;
  maskgen::validate_interval({a.lam, a.lam});
  Rng rng(a.seed);
  auto mask = maskgen::generate_mask(x_l.h(), x_l.w(), a.d, {a.lam, a.lam}, rng);
  // Debug view: target ground truth stands in for the pseudo labels.
  const mixing::QuadrupleInputs in{src[a.i].sample.image, src[a.i].sample.label,
                                   src[a.j].sample.image, src[a.j].sample.label,
                                   x_l,                   tgt[a.l].sample.label,
                                   tgt[a.k].sample.image, tgt[a.k].sample.label};
  const auto pair = mixing::make_mixed_pair(in, std::move(mask), {a.i, a.j, a.l, a.k}, !a.uni);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
  const fs::path dir = a.out;
  synth::write_pgm(pair.mask.mask, dir / "mask.pgm");
  synth::write_ppm(pair.x_m_il, dir / "x_m_il.ppm");
  synth::write_pgm(pair.y_m_il, dir / "y_m_il.pgm");
  if (pair.bidirectional()) {
    synth::write_ppm(*pair.x_m_jk, dir / "x_m_jk.ppm");
    synth::write_pgm(*pair.y_m_jk, dir / "y_m_jk.pgm");
  }
  out << dir.string() << "\n";
  return kExitOk;
}

// --- pretrain / adapt / eval -------------------------------------------------

int cmd_pretrain(const RunConfig& cfg, std::ostream& out) {
  const Splits s = load_splits(cfg);
  const fs::path dir = make_run_dir(cfg, "pretrain", "");
  const auto res = run_pretrain(cfg, s);
  model::save_checkpoint(res.params, dir / "checkpoint.bin");
  write_text(dir / "runlog.csv", res.log.csv());
  write_text(dir / "pretrain_eval.csv", res.log.eval_csv());
  const auto report = metrics::evaluate(res.params, s.source_test, cfg.train.postprocess);
  metrics::write_metrics_csv(report, split_scope(cfg.source_domain, synth::Split::kTest),
                             dir / "eval.csv");
  out << dir.string() << "\n";
  return kExitOk;
}

int cmd_adapt(const RunConfig& cfg, std::ostream& out) {
  const Splits s = load_splits(cfg);
  const fs::path dir = make_run_dir(cfg, "adapt", "");
  const AdaptOutcome o = run_adapt(cfg, s);
  if (o.pretrained) {
    model::save_checkpoint(o.pretrained->params, dir / "pretrain.bin");
    write_text(dir / "pretrain_runlog.csv", o.pretrained->log.csv());
    write_text(dir / "pretrain_eval.csv", o.pretrained->log.eval_csv());
  }
  model::save_checkpoint(o.result.student, dir / "student.bin");
  model::save_checkpoint(o.result.teacher, dir / "teacher.bin");
  model::save_checkpoint(o.evaluated(cfg.eval_model), dir / "checkpoint.bin");
  write_text(dir / "runlog.csv", o.result.log.csv());
  metrics::write_metrics_csv(o.report, split_scope(cfg.target_domain, synth::Split::kTest),
                             dir / "eval.csv");
  out << dir.string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::optional<std::size_t> domain;
  std::string split = "test";
  bool postprocess = false;
};

int cmd_eval(const RunConfig& cfg, const EvalArgs& a, std::ostream& out) {
  synth::Split split;
  if (a.split == "test") {
    split = synth::Split::kTest;
  } else if (a.split == "train") {
    split = synth::Split::kTrain;
  } else {
    throw ValueError("eval: --split must be train or test");
  }
  const std::size_t domain = a.domain.value_or(cfg.target_domain);
  const model::ScorerParams params = model::load_checkpoint(a.checkpoint);
  const synth::Manifest m = synth::read_manifest(cfg.manifest);
  const auto samples = synth::load_split(m, {domain}, split);
  const std::string scope = split_scope(domain, split);
  // The flag can only switch post-processing on; a config file that sets
  // postprocess=true is honoured so eval matches pretrain/adapt scoring.
  const bool post = a.postprocess || cfg.train.postprocess;
  const fs::path dir =
      make_run_dir(cfg, "eval",
                   "checkpoint=" + a.checkpoint + "\nscope=" + scope +
                       "\neval_postprocess=" + (post ? "true" : "false") + "\n");
  const auto report = metrics::evaluate(params, samples, post);
  metrics::write_metrics_csv(report, scope, dir / "eval.csv");
  out << dir.string() << "\n";
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------

std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(
    const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, std::vector<std::string>>> grid;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ValueError("sweep: --grid expects key=v1,v2,..., got '" + spec + "'");
    }
    std::pair<std::string, std::vector<std::string>> axis{spec.substr(0, eq), {}};
    std::istringstream vs(spec.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      if (v.empty()) throw ValueError("sweep: empty value in '" + spec + "'");
      axis.second.push_back(v);
    }
    if (axis.first == "runs_dir") throw ValueError("sweep: runs_dir cannot be swept");
    get_key(RunConfig{}, axis.first);  // rejects unknown keys
    grid.push_back(std::move(axis));
  }
  if (grid.empty()) throw ValueError("sweep: at least one --grid axis is required");
  return grid;
}

int cmd_sweep(const RunConfig& base, const std::vector<std::string>& grid_specs,
              std::ostream& out) {
  const auto grid = parse_grid(grid_specs);
  std::string extra;
  for (const auto& g : grid_specs) extra += "grid=" + g + "\n";
  const Splits s = load_splits(base);
  const fs::path dir = make_run_dir(base, "sweep", extra);

  std::string csv;
  for (const auto& axis : grid) csv += axis.first + ",";
  csv += "dice_od,dice_oc,hd95_od,hd95_oc,mean_dice,undefined\n";
  std::map<std::string, model::ScorerParams> cache;
  std::vector<std::size_t> pos(grid.size(), 0);
  while (true) {
    RunConfig cfg = base;
    std::string row;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      set_key(cfg, grid[a].first, grid[a].second[pos[a]]);
      row += grid[a].second[pos[a]] + ",";
    }
    cfg.validate();
    const AdaptOutcome o = run_adapt(cfg, s, &cache);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n", o.report.dice_od,
                  o.report.dice_oc, o.report.hd95_od, o.report.hd95_oc, o.report.mean_dice(),
                  o.report.undefined);
    csv += row + buf;
    // Odometer increment, last axis fastest.
    std::size_t a = grid.size();
    while (a > 0) {
      --a;
      if (++pos[a] < grid[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) {
        a = grid.size() + 1;
        break;
      }
    }
    if (a == grid.size() + 1) break;
  }
  write_text(dir / "sweep.csv", csv);
  out << (dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"specmix: spectral style transfer and dynamic-mask mixing for segmentation UDA"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic multi-domain dataset");
  gen->add_option("--seed", gen_args.data.seed, "dataset seed");
  gen->add_option("--domains", gen_args.data.n_domains, "number of domains");
  gen->add_option("--n", gen_args.data.n_per_domain, "images per domain");
  gen->add_option("--size", gen_args.size, "image side (power of two)");
  gen->add_option("--out", gen_args.out, "output directory");

  MaskArgs mask_args;
  auto* mask = app.add_subcommand("mask", "write one dynamic mask as PGM");
  mask->add_option("--d", mask_args.d, "frequency attenuation d");
  mask->add_option("--lam", mask_args.lam, "foreground fraction lambda (0, 0.5]");
  mask->add_option("--seed", mask_args.seed, "noise seed");
  mask->add_option("--size", mask_args.size, "mask side (power of two)");
  mask->add_option("--out", mask_args.out, "output PGM");

  StylizeArgs sty_args;
  auto* sty = app.add_subcommand("stylize", "replace a target's low-frequency amplitude");
  sty->add_option("--target", sty_args.target, "target PPM")->required();
  sty->add_option("--source", sty_args.sources, "source PPM (repeatable)")->required();
  sty->add_option("--beta", sty_args.beta, "low-frequency square size in [0, 0.5]");
  sty->add_option("--out", sty_args.out, "output PPM");

  MixArgs mix_args;
  auto* mix = app.add_subcommand("mix", "debug: write one bidirectional mixed pair");
  mix->add_option("--manifest", mix_args.manifest, "dataset manifest");
  mix->add_option("--source-domain", mix_args.source_domain, "source domain id");
  mix->add_option("--target-domain", mix_args.target_domain, "target domain id");
  mix->add_option("--i", mix_args.i, "source index pasted on the mask");
  mix->add_option("--j", mix_args.j, "source index pasted off the mask");
  mix->add_option("--l", mix_args.l, "target index of the first mixed image");
  mix->add_option("--k", mix_args.k, "target index of the second mixed image");
  mix->add_option("--d", mix_args.d, "frequency attenuation d");
  mix->add_option("--lam", mix_args.lam, "mask fraction lambda (0, 0.5]");
  mix->add_option("--seed", mix_args.seed, "mask seed");
  mix->add_flag("--uni", mix_args.uni, "uni-directional: only x_m_il");
  mix->add_option("--out", mix_args.out, "output directory");

  ConfigOptions pre_opts, adapt_opts, eval_opts, sweep_opts;
  auto* pre = app.add_subcommand("pretrain", "Dice-loss pretraining on the source domain");
  pre_opts.attach(pre);
  auto* ada = app.add_subcommand("adapt", "teacher-student adaptation to the target domain");
  adapt_opts.attach(ada);
  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "score a checkpoint on a manifest split");
  eval_opts.attach(ev, false);
  ev->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  ev->add_option("--domain", eval_args.domain, "domain id (default: target_domain)");
  ev->add_option("--split", eval_args.split, "train or test");
  ev->add_flag("--postprocess", eval_args.postprocess, "fill holes before scoring");
  std::vector<std::string> grid_specs;
  auto* sw = app.add_subcommand("sweep", "grid of adaptation runs summarised as CSV");
  sweep_opts.attach(sw);
  sw->add_option("--grid", grid_specs, "key=v1,v2,... (repeatable)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);

    if (gen->parsed()) return cmd_gen(gen_args, out);
    if (mask->parsed()) return cmd_mask(mask_args, out);
    if (sty->parsed()) return cmd_stylize(sty_args, out);
    if (mix->parsed()) return cmd_mix(mix_args, out);
    if (pre->parsed()) return cmd_pretrain(pre_opts.resolve(pre), out);
    if (ada->parsed()) return cmd_adapt(adapt_opts.resolve(ada), out);
    if (ev->parsed()) return cmd_eval(eval_opts.resolve(ev), eval_args, out);
    if (sw->parsed()) return cmd_sweep(sweep_opts.resolve(sw), grid_specs, out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace specmix::cli
