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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "specmix/error.hpp"
#include "test_util.hpp"

namespace specmix::synth {
namespace {

using testing::random_image;
using testing::random_labels;
using testing::scratch_dir;

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

TEST(NetPbm, GoldenPpmBytes) {
  // 1x2 image with dyadic values so the scaled products are exact:
  // 127.5 rounds up to 128, 63.75 to 64, 191.25 to 191, 31.875 to 32.
  const Image x(1, 2, 3, {0.0, 0.5, 1.0, 0.25, 0.75, 0.125});
  const auto b = encode_ppm(x);
  std::vector<std::uint8_t> want = bytes_of("P6\n2 1\n255\n");
  for (std::uint8_t v : {0, 128, 255, 64, 191, 32}) want.push_back(v);
  EXPECT_EQ(b, want);
}

TEST(NetPbm, GoldenPgmLabelAndMaskBytes) {
  const LabelMap y(1, 3, {0, 1, 2});
  std::vector<std::uint8_t> want = bytes_of("P5\n3 1\n255\n");
  for (std::uint8_t v : {0, 128, 255}) want.push_back(v);
  EXPECT_EQ(encode_pgm(y), want);

  BinaryMask m(2, 1);
  m.bits = {1, 0};
  std::vector<std::uint8_t> want_m = bytes_of("P5\n1 2\n255\n");
  want_m.push_back(255);
  want_m.push_back(0);
  EXPECT_EQ(encode_pgm(m), want_m);
}

TEST(NetPbm, RoundHalfUp) {
  // 255 / 1024 = 0.249 rounds down; 0.5 -> 127.5 rounds up.
  const Image x(1, 4, 1, {0.0, 1.0 / 1024.0, 0.5, 1.0});
  const auto b = encode_pgm(x);
  const std::size_t off = b.size() - 4;
  EXPECT_EQ(b[off + 0], 0);
  EXPECT_EQ(b[off + 1], 0);  // 0.249 -> 0
  EXPECT_EQ(b[off + 2], 128);
  EXPECT_EQ(b[off + 3], 255);
}

TEST(NetPbm, RoundTripIsWithinHalfStep) {
  Rng rng(3);
  const Image x = random_image(5, 7, 3, rng);
  const Image back = decode_ppm(encode_ppm(x));
  ASSERT_EQ(back.h(), 5u);
  ASSERT_EQ(back.w(), 7u);
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    EXPECT_LE(std::abs(back.data()[i] - x.data()[i]), 0.5 / 255.0 + 1e-12);
  }
  // A second cycle is exact.
  EXPECT_EQ(encode_ppm(back), encode_ppm(x));

  const LabelMap y = random_labels(4, 6, rng);
  const LabelMap yb = decode_pgm_labels(encode_pgm(y));
  EXPECT_EQ(yb, y);
}

TEST(NetPbm, HeaderCommentsAndWhitespace) {
  std::vector<std::uint8_t> b = bytes_of("P5 # comment\n# another\n 2\t1 \n255\n");
  b.push_back(128);
  b.push_back(255);
  const LabelMap y = decode_pgm_labels(b);
  EXPECT_EQ(y.h(), 1u);
  EXPECT_EQ(y.w(), 2u);
  EXPECT_EQ(y.at(0, 0), 1);
  EXPECT_EQ(y.at(0, 1), 2);
  const Image g = decode_pgm_image(b);
  EXPECT_DOUBLE_EQ(g.at(0, 0, 0), 128.0 / 255.0);
}

TEST(NetPbm, MalformedInputsRaise) {
  EXPECT_THROW(decode_ppm(bytes_of("P3\n1 1\n255\n000")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n2 2\n255\n\x01\x02")), FormatError);  // truncated
  EXPECT_THROW(decode_ppm(bytes_of("P6\n1 1\n")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n0 1\n255\n")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P6\n1 1\n65535\n\0\0\0\0\0\0")), FormatError);
  EXPECT_THROW(decode_ppm(bytes_of("P5\n1 1\n255\nx")), FormatError);  // wrong kind
  EXPECT_THROW(decode_pgm_labels(bytes_of("P6\n1 1\n255\nxyz")), FormatError);

  std::vector<std::uint8_t> odd = bytes_of("P5\n1 1\n255\n");
  odd.push_back(77);
  EXPECT_THROW(decode_pgm_labels(odd), ValueError);
  EXPECT_THROW(decode_pgm_mask(odd), ValueError);

  EXPECT_THROW(encode_ppm(Image(2, 2, 1)), ValueError);
  EXPECT_THROW(encode_pgm(Image(2, 2, 3)), ValueError);
}

TEST(NetPbm, FileIo) {
  const auto dir = scratch_dir("netpbm");
  Rng rng(4);
  const LabelMap y = random_labels(3, 3, rng);
  write_pgm(y, dir / "y.pgm");
  EXPECT_EQ(read_pgm_labels(dir / "y.pgm"), y);
  const Image x = random_image(3, 3, 3, rng);
  write_ppm(x, dir / "x.ppm");
  EXPECT_EQ(read_image(dir / "x.ppm").c(), 3u);
  write_bytes(dir / "g.pgm", encode_pgm(Image(2, 2, 1)));
  EXPECT_EQ(read_image(dir / "g.pgm").c(), 1u);
  EXPECT_THROW(read_ppm(dir / "missing.ppm"), IoError);
  EXPECT_THROW(write_bytes(dir / "no_such_dir" / "f", {}), IoError);
}

TEST(Augment, PreimageMatchesGeometry) {
  // 2x3 grid with distinct values; check each op against hand-derived output.
  const Image x(2, 3, 1, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  // Read back as tenths so the expectations stay readable.
  auto vals = [](const Image& im) {
    std::vector<double> v;
    for (double p : im.data()) v.push_back(std::round(p * 10.0));
    return v;
  };
  EXPECT_EQ(vals(apply_augment(x, Augment::kIdentity)), (std::vector<double>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(vals(apply_augment(x, Augment::kFlipH)), (std::vector<double>{2, 1, 0, 5, 4, 3}));
  EXPECT_EQ(vals(apply_augment(x, Augment::kFlipV)), (std::vector<double>{3, 4, 5, 0, 1, 2}));
  EXPECT_EQ(vals(apply_augment(x, Augment::kRot180)), (std::vector<double>{5, 4, 3, 2, 1, 0}));
  const Image r90 = apply_augment(x, Augment::kRot90);
  EXPECT_EQ(r90.h(), 3u);
  EXPECT_EQ(r90.w(), 2u);
  // Clockwise: first row of the output is the first column read bottom-up.
  EXPECT_EQ(vals(r90), (std::vector<double>{3, 0, 4, 1, 5, 2}));
  EXPECT_EQ(vals(apply_augment(x, Augment::kRot270)), (std::vector<double>{2, 5, 1, 4, 0, 3}));
}

TEST(Augment, InversesAndLabelConsistency) {
  Rng rng(5);
  const Image x = random_image(4, 4, 3, rng);
  const LabelMap y = random_labels(4, 4, rng);
  const Sample s{x, y};
  for (std::size_t k = 0; k < kNumAugments; ++k) {
    const auto op = static_cast<Augment>(k);
    const Sample t = apply_augment(s, op);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        const auto [sr, sc] = preimage(op, 4, 4, r, c);
        EXPECT_EQ(t.label.at(r, c), y.at(sr, sc));
        EXPECT_EQ(t.image.at(r, c, 1), x.at(sr, sc, 1));
      }
    }
  }
  const Image rt = apply_augment(apply_augment(x, Augment::kRot90), Augment::kRot270);
  EXPECT_EQ(rt, x);
  const Image ff = apply_augment(apply_augment(x, Augment::kFlipH), Augment::kFlipH);
  EXPECT_EQ(ff, x);
}

TEST(Render, DeterministicAndCupInsideDisc) {
  const DomainStyle st = domain_style(7, 0);
  SampleSpec spec;
  const Sample a = render_sample(st, spec, 64, 64, 99);
  const Sample b = render_sample(st, spec, 64, 64, 99);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.label, b.label);
  const Sample c = render_sample(st, spec, 64, 64, 100);
  EXPECT_NE(a.image, c.image);
  EXPECT_EQ(a.label, c.label);
  const BinaryMask disc = a.label.disc_mask();
  const BinaryMask cup = a.label.cup_mask();
  for (std::size_t i = 0; i < disc.bits.size(); ++i) {
    if (cup.bits[i]) { EXPECT_TRUE(disc.bits[i]); }
  }
  EXPECT_GT(a.label.count(1), 0u);
  EXPECT_GT(a.label.count(2), 0u);
  // The default ellipse holds about pi * 12 * 10 disc pixels.
  const double disc_px = static_cast<double>(a.label.count(1) + a.label.count(2));
  EXPECT_NEAR(disc_px, 3.14159 * 120.0, 20.0);
  for (double v : a.image.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Render, InvalidGeometry) {
  const DomainStyle st;
  SampleSpec off;
  off.disc_center = {5.0, 32.0};
  EXPECT_THROW(render_sample(st, off, 64, 64, 1), InvalidGeometry);
  SampleSpec cup;
  cup.cup_scale = 0.9;
  EXPECT_THROW(render_sample(st, cup, 64, 64, 1), InvalidGeometry);
  SampleSpec neg;
  neg.disc_axes = {-1.0, 3.0};
  EXPECT_THROW(neg.validate(64, 64), InvalidGeometry);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) EXPECT_NO_THROW(random_spec(rng, 64, 64).validate(64, 64));
}

TEST(DomainStyle, ValidationAndDistinctDomains) {
  DomainStyle s;
  EXPECT_NO_THROW(s.validate());
  s.gamma = 2.5;
  EXPECT_THROW(s.validate(), ValueError);
  s = {};
  s.noise_sigma = -0.1;
  EXPECT_THROW(s.validate(), ValueError);
  s = {};
  s.texture_freq_band = {5.0, 1.0};
  EXPECT_THROW(s.validate(), ValueError);
  s = {};
  s.channel_scale[2] = -1.0;
  EXPECT_THROW(s.validate(), ValueError);

  const DomainStyle d0 = domain_style(7, 0), d1 = domain_style(7, 1);
  EXPECT_NE(d0.brightness_gain, d1.brightness_gain);
  EXPECT_NE(d0.base_color, d1.base_color);
  EXPECT_EQ(domain_style(7, 1).base_color, d1.base_color);
  EXPECT_NE(domain_style(8, 1).base_color, d1.base_color);
  // Wrapped domains still differ from their template.
  EXPECT_NE(domain_style(7, 4).brightness_gain, d0.brightness_gain);
  for (std::size_t d = 0; d < 8; ++d) EXPECT_NO_THROW(domain_style(3, d).validate());
}

TEST(Manifest, RoundTripAndErrors) {
  const auto dir = scratch_dir("manifest");
  write_bytes(dir / "a.ppm", encode_ppm(Image(2, 2, 3)));
  write_bytes(dir / "a.pgm", encode_pgm(LabelMap(2, 2)));
  write_bytes(dir / "b.ppm", encode_ppm(Image(2, 2, 3)));
  Manifest m{dir / "manifest.csv",
             {{"a.ppm", "a.pgm", 0, Split::kTrain}, {"b.ppm", "a.pgm", 3, Split::kTest}}};
  write_manifest(m);
  const Manifest back = read_manifest(m.path);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[1].image, "b.ppm");
  EXPECT_EQ(back.rows[1].domain, 3u);
  EXPECT_EQ(back.rows[1].split, Split::kTest);

  auto write = [&](const std::string& text) {
    std::ofstream(dir / "bad.csv") << text;
    return dir / "bad.csv";
  };
  EXPECT_THROW(read_manifest(write("img,lbl\n")), FormatError);
  EXPECT_THROW(read_manifest(write("image,label,domain,split\na.ppm,a.pgm,0\n")), FormatError);
  EXPECT_THROW(read_manifest(write("image,label,domain,split\na.ppm,a.pgm,x,train\n")),
               FormatError);
  EXPECT_THROW(read_manifest(write("image,label,domain,split\na.ppm,a.pgm,0,val\n")),
               FormatError);
  EXPECT_THROW(read_manifest(write("image,label,domain,split\nz.ppm,a.pgm,0,train\n")), IoError);
  EXPECT_THROW(read_manifest(write("image,label,domain,split\n"
                                   "a.ppm,a.pgm,0,train\na.ppm,a.pgm,0,test\n")),
               FormatError);
  EXPECT_THROW(read_manifest(dir / "nope.csv"), IoError);
  EXPECT_STREQ(split_name(Split::kTrain), "train");
  EXPECT_STREQ(split_name(Split::kTest), "test");
}

TEST(GenDataset, LayoutSplitsAndDeterminism) {
  const DatasetConfig cfg{};  // 2 domains x 40 at 64x64
  const auto d1 = scratch_dir("gen_a");
  const auto d2 = scratch_dir("gen_b");
  const Manifest m = gen_dataset(cfg, d1);
  ASSERT_EQ(m.rows.size(), 80u);
  EXPECT_EQ(m.rows[0].image, "d0/img_0000.ppm");
  EXPECT_EQ(m.rows[0].label, "d0/lbl_0000.pgm");
  std::size_t train = 0;
  std::set<std::size_t> domains;
  for (const auto& r : m.rows) {
    train += r.split == Split::kTrain;
    domains.insert(r.domain);
  }
  EXPECT_EQ(train, 64u);
  EXPECT_EQ(domains, (std::set<std::size_t>{0, 1}));
  EXPECT_EQ(read_manifest(m.path).rows.size(), 80u);

  gen_dataset(cfg, d2);
  for (const auto& r : m.rows) {
    EXPECT_EQ(read_bytes(d1 / r.image), read_bytes(d2 / r.image));
    EXPECT_EQ(read_bytes(d1 / r.label), read_bytes(d2 / r.label));
  }
  EXPECT_EQ(read_bytes(d1 / "manifest.csv"), read_bytes(d2 / "manifest.csv"));

  // Files equal the in-memory rendering after quantisation.
  const auto mem = render_domain(cfg, 1);
  EXPECT_EQ(read_bytes(d1 / "d1/img_0005.ppm"), encode_ppm(mem[5].image));
  EXPECT_EQ(read_bytes(d1 / "d1/lbl_0005.pgm"), encode_pgm(mem[5].label));

  const auto tgt_test = load_split(m, {1}, Split::kTest);
  EXPECT_EQ(tgt_test.size(), 8u);
  EXPECT_EQ(tgt_test[0].image_path, "d1/img_0032.ppm");
  EXPECT_EQ(load_split(m, {0, 1}, Split::kTrain).size(), 64u);

  DatasetConfig one = cfg;
  one.n_domains = 1;
  EXPECT_THROW(gen_dataset(one, scratch_dir("gen_c")), ValueError);
}

TEST(GenDataset, DomainsDifferInAppearance) {
  DatasetConfig cfg{};
  cfg.n_per_domain = 8;
  const auto a = render_domain(cfg, 0);
  const auto b = render_domain(cfg, 1);
  auto mean = [](const std::vector<Sample>& s) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& x : s) {
      for (double v : x.image.data()) acc += v, ++n;
    }
    return acc / static_cast<double>(n);
  };
  EXPECT_GT(std::abs(mean(a) - mean(b)), 0.02);
}

}  // namespace
}  // namespace specmix::synth
