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

#include "specmix_cli/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "specmix/error.hpp"
#include "specmix/spectral.hpp"

namespace specmix::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValueError("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValueError("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValueError("config: " + key + " expects true/false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Entry real(std::string key, T RunConfig::*outer, double T::*inner) {
  return {key,
          [key, outer, inner](RunConfig& c, const std::string& v) {
            c.*outer.*inner = parse_double(key, v);
          },
          [outer, inner](const RunConfig& c) { return fmt(c.*outer.*inner); }};
}

template <typename T, typename U>
Entry count(std::string key, T RunConfig::*outer, U T::*inner) {
  return {key,
          [key, outer, inner](RunConfig& c, const std::string& v) {
            c.*outer.*inner = static_cast<U>(parse_uint(key, v));
          },
          [outer, inner](const RunConfig& c) { return std::to_string(c.*outer.*inner); }};
}

Entry loss_real(std::string key, double losses::LossWeights::*field) {
  return {key,
          [key, field](RunConfig& c, const std::string& v) {
            c.train.loss.*field = parse_double(key, v);
          },
          [field](const RunConfig& c) { return fmt(c.train.loss.*field); }};
}

using TC = trainer::TrainConfig;
using DC = synth::DatasetConfig;

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    // data generation
    t.push_back(count("data_seed", &RunConfig::data, &DC::seed));
    t.push_back(count("domains", &RunConfig::data, &DC::n_domains));
    t.push_back(count("n_per_domain", &RunConfig::data, &DC::n_per_domain));
    t.push_back({"size",
                 [](RunConfig& c, const std::string& v) {
                   c.data.h = c.data.w = static_cast<std::size_t>(parse_uint("size", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.data.h); }});
    t.push_back({"manifest", [](RunConfig& c, const std::string& v) { c.manifest = v; },
                 [](const RunConfig& c) { return c.manifest; }});
    t.push_back({"source_domain",
                 [](RunConfig& c, const std::string& v) {
                   c.source_domain = static_cast<std::size_t>(parse_uint("source_domain", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.source_domain); }});
    t.push_back({"target_domain",
                 [](RunConfig& c, const std::string& v) {
                   c.target_domain = static_cast<std::size_t>(parse_uint("target_domain", v));
                 },
                 [](const RunConfig& c) { return std::to_string(c.target_domain); }});
    // training
    t.push_back(count("seed", &RunConfig::train, &TC::seed));
    t.push_back(count("batch_size", &RunConfig::train, &TC::batch_size));
    t.push_back(count("pretrain_iters", &RunConfig::train, &TC::pretrain_iters));
    t.push_back(count("adapt_iters", &RunConfig::train, &TC::adapt_iters));
    t.push_back(real("l_init", &RunConfig::train, &TC::l_init));
    t.push_back(real("pretrain_lr", &RunConfig::train, &TC::pretrain_lr));
    t.push_back(loss_real("lambda_s", &losses::LossWeights::lambda_source));
    t.push_back(loss_real("lambda_t", &losses::LossWeights::lambda_target));
    t.push_back(loss_real("lambda_t_stylized", &losses::LossWeights::lambda_stylized));
    t.push_back(loss_real("ipl_iou_weight", &losses::LossWeights::ipl_iou_weight));
    t.push_back(loss_real("ipl_ce_weight", &losses::LossWeights::ipl_ce_weight));
    t.push_back(loss_real("epsilon", &losses::LossWeights::epsilon));
    t.push_back(real("d_min", &RunConfig::train, &TC::d_min));
    t.push_back(real("d_max", &RunConfig::train, &TC::d_max));
    t.push_back({"lambda_k_lo",
                 [](RunConfig& c, const std::string& v) {
                   c.train.lambda_k.lo = parse_double("lambda_k_lo", v);
                 },
                 [](const RunConfig& c) { return fmt(c.train.lambda_k.lo); }});
    t.push_back({"lambda_k_hi",
                 [](RunConfig& c, const std::string& v) {
                   c.train.lambda_k.hi = parse_double("lambda_k_hi", v);
                 },
                 [](const RunConfig& c) { return fmt(c.train.lambda_k.hi); }});
    t.push_back(real("beta", &RunConfig::train, &TC::beta));
    t.push_back(real("ema_alpha", &RunConfig::train, &TC::ema_alpha));
    t.push_back({"variant",
                 [](RunConfig& c, const std::string& v) {
                   c.train.variant = trainer::parse_variant(v);
                 },
                 [](const RunConfig& c) { return trainer::to_string(c.train.variant); }});
    t.push_back({"mask_baseline",
                 [](RunConfig& c, const std::string& v) {
                   c.train.mask_baseline = trainer::parse_baseline(v);
                 },
                 [](const RunConfig& c) { return trainer::to_string(c.train.mask_baseline); }});
    t.push_back({"amp_mode",
                 [](RunConfig& c, const std::string& v) {
                   c.train.amp_mode = trainer::parse_amp_mode(v);
                 },
                 [](const RunConfig& c) { return trainer::to_string(c.train.amp_mode); }});
    t.push_back(count("eval_every", &RunConfig::train, &TC::eval_every));
    t.push_back({"postprocess",
                 [](RunConfig& c, const std::string& v) {
                   c.train.postprocess = parse_bool("postprocess", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.train.postprocess ? "true" : "false");
                 }});
    // orchestration
    t.push_back({"init", [](RunConfig& c, const std::string& v) { c.init = v; },
                 [](const RunConfig& c) { return c.init; }});
    t.push_back({"eval_model",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "teacher") {
                     c.eval_model = EvalModel::kTeacher;
                   } else if (v == "student") {
                     c.eval_model = EvalModel::kStudent;
                   } else {
                     throw ValueError("config: eval_model must be teacher or student");
                   }
                 },
                 [](const RunConfig& c) {
                   return std::string(c.eval_model == EvalModel::kTeacher ? "teacher"
                                                                          : "student");
                 }});
    t.push_back({"runs_dir", [](RunConfig& c, const std::string& v) { c.runs_dir = v; },
                 [](const RunConfig& c) { return c.runs_dir; }});
    return t;
  }();
  return table;
}

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key == key) return e;
  }
  throw ValueError("config: unknown key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (data.n_domains == 0 || data.n_per_domain == 0) {
    throw ValueError("config: domains and n_per_domain must be >= 1");
  }
  if (!spectral::is_power_of_two(data.h)) throw ValueError("config: size must be a power of two");
  if (source_domain == target_domain) {
    throw ValueError("config: source_domain and target_domain must differ");
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_entry(key).set(cfg, value);
}

std::string get_key(const RunConfig& cfg, const std::string& key) {
  return find_entry(key).get(cfg);
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValueError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_key(cfg, key, value);
    } catch (const ValueError& e) {
      throw ValueError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str(), path.string());
  return cfg;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += e.key + "=" + e.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg, const std::string& extra) {
  std::string text;
  for (const auto& e : entries()) {
    if (e.key != "runs_dir") text += e.key + "=" + e.get(cfg) + "\n";
  }
  text += extra;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& ch : out) {
    if (ch == '_') ch = '-';
  }
  return out;
}

}  // namespace specmix::cli
