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

#include "specmix/synthdata.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

#include "specmix/error.hpp"

namespace specmix::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kTextureWaves = 6;
constexpr double kMargin = 2.0;
// Additive brightening inside the disc and (further) inside the cup, before
// any domain styling.
constexpr std::array<double, 3> kDiscBoost{0.30, 0.26, 0.16};
constexpr std::array<double, 3> kCupBoost{0.22, 0.24, 0.22};

struct StyleTemplate {
  std::array<double, 3> base;
  double gain;
  double gamma;
  std::array<double, 3> scale;
  double tex_amp;
  std::pair<double, double> band;
  double noise;
  int blur;
};

// Domain 0 is a warm, dim camera; domain 1 a cool, bright, low-gamma one; the
// others sit in between so any pair differs in gain and base colour.
constexpr StyleTemplate kTemplates[] = {
    {{0.34, 0.16, 0.08}, 0.90, 1.00, {1.00, 0.90, 0.80}, 0.06, {2.0, 6.0}, 0.020, 0},
    {{0.16, 0.22, 0.28}, 1.20, 0.70, {0.80, 1.00, 1.10}, 0.10, {4.0, 10.0}, 0.040, 1},
    {{0.40, 0.28, 0.14}, 0.75, 1.35, {1.05, 0.95, 0.70}, 0.08, {3.0, 8.0}, 0.030, 1},
    {{0.22, 0.10, 0.18}, 1.05, 0.85, {0.90, 0.85, 1.00}, 0.05, {1.0, 4.0}, 0.015, 0},
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

bool inside_ellipse(double dr, double dc, double a, double b, double rot) {
  const double cs = std::cos(rot), sn = std::sin(rot);
  const double x = dr * cs + dc * sn;
  const double y = -dr * sn + dc * cs;
  return (x / a) * (x / a) + (y / b) * (y / b) <= 1.0;
}

std::string format_index(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t domain, std::size_t index) {
  return splitmix64(splitmix64(seed ^ (0xD0D0ULL + domain)) ^ index);
}

// --- NetPBM parsing -------------------------------------------------------

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  std::size_t w = 0, h = 0, maxval = 0, data_offset = 0;
};

PnmHeader parse_header(std::span<const std::uint8_t> b) {
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '6')) {
    throw FormatError("netpbm: bad magic");
  }
  PnmHeader hd;
  hd.kind = static_cast<char>(b[1]);
  std::size_t pos = 2;
  auto skip_ws = [&] {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> std::size_t {
    skip_ws();
    if (pos >= b.size() || !std::isdigit(b[pos])) throw FormatError("netpbm: truncated header");
    std::size_t v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + (b[pos] - '0');
      if (v > (1u << 24)) throw FormatError("netpbm: header value too large");
      ++pos;
    }
    return v;
  };
  hd.w = number();
  hd.h = number();
  hd.maxval = number();
  if (pos >= b.size() || !std::isspace(b[pos])) throw FormatError("netpbm: truncated header");
  ++pos;
  if (hd.w == 0 || hd.h == 0 || hd.maxval == 0 || hd.maxval > 255) {
    throw FormatError("netpbm: unsupported dimensions or maxval");
  }
  hd.data_offset = pos;
  const std::size_t channels = hd.kind == '6' ? 3 : 1;
  if (b.size() < pos + hd.w * hd.h * channels) throw FormatError("netpbm: truncated pixel data");
  return hd;
}

std::vector<std::uint8_t> header_bytes(const char* magic, std::size_t w, std::size_t h) {
  const std::string s = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) +
                        "\n255\n";
  return {s.begin(), s.end()};
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::floor(clamp01(v) * 255.0 + 0.5));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void DomainStyle::validate() const {
  if (brightness_gain < 0 || noise_sigma < 0 || texture_amp < 0 || blur_radius < 0) {
    throw ValueError("domain style: gains and sigmas must be >= 0");
  }
  for (double s : channel_scale) {
    if (s < 0) throw ValueError("domain style: channel scale must be >= 0");
  }
  if (!(gamma >= 0.5 && gamma <= 2.0)) throw ValueError("domain style: gamma outside [0.5, 2]");
  if (texture_freq_band.first > texture_freq_band.second) {
    throw ValueError("domain style: texture band lo > hi");
  }
}

DomainStyle domain_style(std::uint64_t seed, std::size_t domain_id) {
  constexpr std::size_t kCount = std::size(kTemplates);
  const StyleTemplate& t = kTemplates[domain_id % kCount];
  Rng rng(splitmix64(seed ^ (0x57E1ULL + domain_id)));
  DomainStyle s;
  // Domains beyond the template table wrap with a gain/colour offset so
  // styles stay distinct.
  const double wrap = static_cast<double>(domain_id / kCount);
  for (std::size_t k = 0; k < 3; ++k) {
    s.base_color[k] = clamp01(t.base[k] + 0.04 * wrap + rng.uniform(-0.015, 0.015));
    s.channel_scale[k] = t.scale[k];
  }
  s.brightness_gain = t.gain + 0.07 * wrap + rng.uniform(-0.02, 0.02);
  s.gamma = std::clamp(t.gamma + rng.uniform(-0.03, 0.03), 0.5, 2.0);
  s.texture_amp = t.tex_amp;
  s.texture_freq_band = t.band;
  s.noise_sigma = t.noise;
  s.blur_radius = t.blur;
  return s;
}

void SampleSpec::validate(std::size_t h, std::size_t w) const {
  const double a = disc_axes[0], b = disc_axes[1];
  if (!(a > 0 && b > 0)) throw InvalidGeometry("disc axes must be positive");
  if (!(cup_scale > 0.3 && cup_scale < 0.8)) throw InvalidGeometry("cup_scale outside (0.3, 0.8)");
  const double cs = std::cos(rotation), sn = std::sin(rotation);
  const double ext_r = std::sqrt(a * a * cs * cs + b * b * sn * sn);
  const double ext_c = std::sqrt(a * a * sn * sn + b * b * cs * cs);
  const double H = static_cast<double>(h), W = static_cast<double>(w);
  if (disc_center[0] - ext_r < kMargin || disc_center[0] + ext_r > H - 1.0 - kMargin ||
      disc_center[1] - ext_c < kMargin || disc_center[1] + ext_c > W - 1.0 - kMargin) {
    throw InvalidGeometry("disc does not fit inside the image with a 2-pixel margin");
  }
}

SampleSpec random_spec(Rng& rng, std::size_t h, std::size_t w) {
  const double H = static_cast<double>(h), W = static_cast<double>(w);
  const double m = std::min(H, W);
  SampleSpec s;
  s.disc_center = {H / 2.0 + rng.uniform(-0.1, 0.1) * H, W / 2.0 + rng.uniform(-0.1, 0.1) * W};
  const double a = rng.uniform(0.15, 0.24) * m;
  s.disc_axes = {a, a * rng.uniform(0.8, 1.0)};
  s.cup_scale = rng.uniform(0.38, 0.68);
  s.rotation = rng.uniform(0.0, kPi);
  return s;
}

Sample render_sample(const DomainStyle& style, const SampleSpec& spec, std::size_t h,
                     std::size_t w, std::uint64_t seed) {
  style.validate();
  spec.validate(h, w);
  Rng rng(seed);

  struct Wave {
    double fr, fc, phase;
  };
  std::array<Wave, kTextureWaves> waves{};
  const double n = static_cast<double>(std::max(h, w));
  for (auto& wv : waves) {
    const double f = rng.uniform(style.texture_freq_band.first, style.texture_freq_band.second);
    const double theta = rng.uniform(0.0, kPi);
    wv = {f * std::cos(theta) / n, f * std::sin(theta) / n, rng.uniform(0.0, 2.0 * kPi)};
  }
  const double wave_amp = style.texture_amp / static_cast<double>(kTextureWaves);

  RealGrid img(h, w, 3);
  std::vector<std::uint8_t> labels(h * w, 0);
  const double a = spec.disc_axes[0], b = spec.disc_axes[1];
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double dr = static_cast<double>(r) - spec.disc_center[0];
      const double dc = static_cast<double>(c) - spec.disc_center[1];
      const bool disc = inside_ellipse(dr, dc, a, b, spec.rotation);
      const bool cup =
          disc && inside_ellipse(dr, dc, a * spec.cup_scale, b * spec.cup_scale, spec.rotation);
      labels[r * w + c] = cup ? 2 : (disc ? 1 : 0);
      double tex = 0.0;
      for (const auto& wv : waves) {
        tex += wave_amp * std::sin(2.0 * kPi * (wv.fr * r + wv.fc * c) + wv.phase);
      }
      for (std::size_t k = 0; k < 3; ++k) {
        double v = style.base_color[k] + tex;
        if (disc) v += kDiscBoost[k];
        if (cup) v += kCupBoost[k];
        v *= style.channel_scale[k] * style.brightness_gain;
        img.at(r, c, k) = std::pow(clamp01(v), style.gamma);
      }
    }
  }

  if (style.blur_radius > 0) {
    const auto rad = static_cast<std::ptrdiff_t>(style.blur_radius);
    RealGrid blurred(h, w, 3);
    const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(w);
    for (std::ptrdiff_t r = 0; r < H; ++r) {
      for (std::ptrdiff_t c = 0; c < W; ++c) {
        for (std::size_t k = 0; k < 3; ++k) {
          double acc = 0.0;
          for (std::ptrdiff_t dy = -rad; dy <= rad; ++dy) {
            for (std::ptrdiff_t dx = -rad; dx <= rad; ++dx) {
              const auto rr = static_cast<std::size_t>(std::clamp(r + dy, std::ptrdiff_t{0}, H - 1));
              const auto cc = static_cast<std::size_t>(std::clamp(c + dx, std::ptrdiff_t{0}, W - 1));
              acc += img.at(rr, cc, k);
            }
          }
          blurred.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k) =
              acc / static_cast<double>((2 * rad + 1) * (2 * rad + 1));
        }
      }
    }
    img = std::move(blurred);
  }
  if (style.noise_sigma > 0) {
    for (double& v : img.data) v += style.noise_sigma * rng.gaussian();
  }
  LabelMap y(h, w, std::move(labels));
  if (y.count(1) == 0 || y.count(2) == 0) {
    throw InvalidGeometry("rendered label has an empty ring or cup");
  }
  return {Image(std::move(img)), std::move(y)};
}

std::pair<std::size_t, std::size_t> preimage(Augment op, std::size_t h, std::size_t w,
                                             std::size_t r, std::size_t c) {
  switch (op) {
    case Augment::kIdentity: return {r, c};
    case Augment::kFlipH: return {r, w - 1 - c};
    case Augment::kFlipV: return {h - 1 - r, c};
    // Clockwise quarter turns; output is w x h for odd turns.
    case Augment::kRot90: return {h - 1 - c, r};
    case Augment::kRot180: return {h - 1 - r, w - 1 - c};
    case Augment::kRot270: return {c, w - 1 - r};
  }
  return {r, c};
}

Image apply_augment(const Image& x, Augment op) {
  const std::size_t h = x.h(), w = x.w(), ch = x.c();
  const bool swap = op == Augment::kRot90 || op == Augment::kRot270;
  const std::size_t oh = swap ? w : h, ow = swap ? h : w;
  std::vector<double> img(oh * ow * ch);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      const auto [sr, sc] = preimage(op, h, w, r, c);
      for (std::size_t k = 0; k < ch; ++k) img[(r * ow + c) * ch + k] = x.at(sr, sc, k);
    }
  }
  return Image(oh, ow, ch, std::move(img));
}

Sample apply_augment(const Sample& s, Augment op) {
  const std::size_t h = s.label.h(), w = s.label.w();
  const bool swap = op == Augment::kRot90 || op == Augment::kRot270;
  const std::size_t oh = swap ? w : h, ow = swap ? h : w;
  std::vector<std::uint8_t> lab(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      const auto [sr, sc] = preimage(op, h, w, r, c);
      lab[r * ow + c] = s.label.at(sr, sc);
    }
  }
  return {apply_augment(s.image, op), LabelMap(oh, ow, std::move(lab))};
}

Sample augment(const Sample& s, Rng& rng) {
  return apply_augment(s, static_cast<Augment>(rng.below(kNumAugments)));
}

std::vector<std::uint8_t> encode_ppm(const Image& x) {
  if (x.c() != 3) throw ValueError("PPM requires a 3-channel image");
  auto out = header_bytes("P6", x.w(), x.h());
  for (double v : x.data()) out.push_back(quantize(v));
  return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
  const PnmHeader hd = parse_header(bytes);
  if (hd.kind != '6') throw FormatError("expected a P6 image");
  std::vector<double> d(hd.w * hd.h * 3);
  const double scale = 1.0 / static_cast<double>(hd.maxval);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = bytes[hd.data_offset + i] * scale;
  return Image(hd.h, hd.w, 3, std::move(d));
}

std::vector<std::uint8_t> encode_pgm(const LabelMap& y) {
  static constexpr std::uint8_t kLevels[] = {0, 128, 255};
  auto out = header_bytes("P5", y.w(), y.h());
  for (auto v : y.data()) out.push_back(kLevels[v]);
  return out;
}

std::vector<std::uint8_t> encode_pgm(const BinaryMask& m) {
  auto out = header_bytes("P5", m.w, m.h);
  for (auto v : m.bits) out.push_back(v ? 255 : 0);
  return out;
}

std::vector<std::uint8_t> encode_pgm(const Image& gray) {
  if (gray.c() != 1) throw ValueError("PGM image requires a single channel");
  auto out = header_bytes("P5", gray.w(), gray.h());
  for (double v : gray.data()) out.push_back(quantize(v));
  return out;
}

LabelMap decode_pgm_labels(std::span<const std::uint8_t> bytes) {
  const PnmHeader hd = parse_header(bytes);
  if (hd.kind != '5' || hd.maxval != 255) throw FormatError("expected a P5 label map, maxval 255");
  std::vector<std::uint8_t> d(hd.w * hd.h);
  for (std::size_t i = 0; i < d.size(); ++i) {
    switch (bytes[hd.data_offset + i]) {
      case 0: d[i] = 0; break;
      case 128: d[i] = 1; break;
      case 255: d[i] = 2; break;
      default:
        throw ValueError("unexpected gray level " + std::to_string(bytes[hd.data_offset + i]) +
                         " in label map");
    }
  }
  return LabelMap(hd.h, hd.w, std::move(d));
}

BinaryMask decode_pgm_mask(std::span<const std::uint8_t> bytes) {
  const PnmHeader hd = parse_header(bytes);
  if (hd.kind != '5' || hd.maxval != 255) throw FormatError("expected a P5 mask, maxval 255");
  BinaryMask m(hd.h, hd.w);
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    const auto v = bytes[hd.data_offset + i];
    if (v != 0 && v != 255) {
      throw ValueError("unexpected gray level " + std::to_string(v) + " in mask");
    }
    m.bits[i] = v == 255;
  }
  return m;
}

Image decode_pgm_image(std::span<const std::uint8_t> bytes) {
  const PnmHeader hd = parse_header(bytes);
  if (hd.kind != '5') throw FormatError("expected a P5 image");
  std::vector<double> d(hd.w * hd.h);
  const double scale = 1.0 / static_cast<double>(hd.maxval);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = bytes[hd.data_offset + i] * scale;
  return Image(hd.h, hd.w, 1, std::move(d));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

void write_ppm(const Image& x, const std::filesystem::path& path) {
  write_bytes(path, encode_ppm(x));
}
Image read_ppm(const std::filesystem::path& path) { return decode_ppm(read_bytes(path)); }
void write_pgm(const LabelMap& y, const std::filesystem::path& path) {
  write_bytes(path, encode_pgm(y));
}
void write_pgm(const BinaryMask& m, const std::filesystem::path& path) {
  write_bytes(path, encode_pgm(m));
}
LabelMap read_pgm_labels(const std::filesystem::path& path) {
  return decode_pgm_labels(read_bytes(path));
}
BinaryMask read_pgm_mask(const std::filesystem::path& path) {
  return decode_pgm_mask(read_bytes(path));
}

Image read_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm_image(bytes);
  return decode_ppm(bytes);
}

const char* split_name(Split s) { return s == Split::kTrain ? "train" : "test"; }

void write_manifest(const Manifest& m) {
  std::ofstream f(m.path, std::ios::trunc);
  if (!f) throw IoError("cannot write manifest " + m.path.string());
  f << "image,label,domain,split\n";
  for (const auto& r : m.rows) {
    f << r.image << ',' << r.label << ',' << r.domain << ',' << split_name(r.split) << '\n';
  }
  if (!f) throw IoError("failed writing manifest " + m.path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest " + path.string());
  Manifest m{path, {}};
  std::string line;
  if (!std::getline(f, line) || line != "image,label,domain,split") {
    throw FormatError("manifest: missing header image,label,domain,split");
  }
  std::set<std::string> train_images, test_images;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != 4) throw FormatError("manifest: expected 4 columns: " + line);
    ManifestRow row;
    row.image = cols[0];
    row.label = cols[1];
    try {
      std::size_t used = 0;
      row.domain = std::stoul(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("manifest: bad domain id: " + cols[2]);
    }
    if (cols[3] == "train") {
      row.split = Split::kTrain;
    } else if (cols[3] == "test") {
      row.split = Split::kTest;
    } else {
      throw FormatError("manifest: bad split: " + cols[3]);
    }
    for (const auto& rel : {row.image, row.label}) {
      if (!std::filesystem::exists(m.dir() / rel)) {
        throw IoError("manifest references missing file " + (m.dir() / rel).string());
      }
    }
    (row.split == Split::kTrain ? train_images : test_images).insert(row.image);
    m.rows.push_back(std::move(row));
  }
  for (const auto& img : train_images) {
    if (test_images.count(img)) throw FormatError("manifest: " + img + " in both splits");
  }
  return m;
}

std::vector<Sample> render_domain(const DatasetConfig& cfg, std::size_t domain_id) {
  const DomainStyle style = domain_style(cfg.seed, domain_id);
  std::vector<Sample> out;
  out.reserve(cfg.n_per_domain);
  for (std::size_t i = 0; i < cfg.n_per_domain; ++i) {
    Rng rng(sample_seed(cfg.seed, domain_id, i));
    for (int attempt = 0;; ++attempt) {
      const SampleSpec spec = random_spec(rng, cfg.h, cfg.w);
      const std::uint64_t render_seed = rng.next_u64();
      try {
        out.push_back(render_sample(style, spec, cfg.h, cfg.w, render_seed));
        break;
      } catch (const InvalidGeometry&) {
        if (attempt >= 64) throw;
      }
    }
  }
  return out;
}

Manifest gen_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.n_domains < 2) throw ValueError("gen_dataset needs at least 2 domains");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  Manifest m{out_dir / "manifest.csv", {}};
  const std::size_t n_train = cfg.n_per_domain * 4 / 5;
  for (std::size_t d = 0; d < cfg.n_domains; ++d) {
    const std::string sub = "d" + std::to_string(d);
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string());
    const auto samples = render_domain(cfg, d);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      ManifestRow row{sub + "/img_" + format_index(i) + ".ppm",
                      sub + "/lbl_" + format_index(i) + ".pgm", d,
                      i < n_train ? Split::kTrain : Split::kTest};
      write_ppm(samples[i].image, out_dir / row.image);
      write_pgm(samples[i].label, out_dir / row.label);
      m.rows.push_back(std::move(row));
    }
  }
  write_manifest(m);
  return m;
}

std::vector<LoadedSample> load_split(const Manifest& m, const std::vector<std::size_t>& domains,
                                     Split split) {
  std::vector<LoadedSample> out;
  for (const auto& row : m.rows) {
    if (row.split != split) continue;
    if (std::find(domains.begin(), domains.end(), row.domain) == domains.end()) continue;
    Sample s{read_image(m.dir() / row.image), read_pgm_labels(m.dir() / row.label)};
    if (s.image.h() != s.label.h() || s.image.w() != s.label.w()) {
      throw DimensionMismatch("image/label size mismatch for " + row.image);
    }
    out.push_back({std::move(s), row.image});
  }
  return out;
}

}  // namespace specmix::synth
