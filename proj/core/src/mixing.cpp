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

#include "specmix/mixing.hpp"

#include <vector>

#include "specmix/error.hpp"

namespace specmix::mixing {

namespace {

bool on_source(std::uint8_t bit, Direction d) {
  return d == Direction::kSourceOnMask ? bit != 0 : bit == 0;
}

}  // namespace

Image mix_images(const Image& x_src, const Image& x_tgt, const BinaryMask& mask,
                 Direction direction) {
  if (!x_src.grid().same_shape(x_tgt.grid()) || mask.h != x_src.h() || mask.w != x_src.w()) {
    throw DimensionMismatch("mix_images: shapes disagree");
  }
  const std::size_t c = x_src.c();
  std::vector<double> out(x_src.data().size());
  const auto src = x_src.data();
  const auto tgt = x_tgt.data();
  for (std::size_t p = 0; p < mask.bits.size(); ++p) {
    const auto& from = on_source(mask.bits[p], direction) ? src : tgt;
    for (std::size_t ch = 0; ch < c; ++ch) out[p * c + ch] = from[p * c + ch];
  }
  return Image(x_src.h(), x_src.w(), c, std::move(out));
}

LabelMap mix_labels(const LabelMap& y_src, const LabelMap& y_tgt, const BinaryMask& mask,
                    Direction direction) {
  if (y_src.h() != y_tgt.h() || y_src.w() != y_tgt.w() || mask.h != y_src.h() ||
      mask.w != y_src.w()) {
    throw DimensionMismatch("mix_labels: shapes disagree");
  }
  std::vector<std::uint8_t> out(y_src.pixels());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = on_source(mask.bits[p], direction) ? y_src.data()[p] : y_tgt.data()[p];
  }
  return LabelMap(y_src.h(), y_src.w(), std::move(out));
}

MixedPair make_mixed_pair(const QuadrupleInputs& in, maskgen::DynamicMask mask,
                          Provenance provenance, bool bidirectional) {
  if (provenance.i == provenance.j || provenance.l == provenance.k) {
    throw ValueError("make_mixed_pair: quadruple members must be distinct");
  }
  const BinaryMask& m = mask.mask;
  MixedPair out{
      mix_images(in.x_i_s, in.x_l_t, m, Direction::kSourceOnMask),
      mix_labels(in.y_i_s, in.p_l_t, m, Direction::kSourceOnMask),
      std::nullopt,
      std::nullopt,
      {},
      provenance,
  };
  if (bidirectional) {
    out.x_m_jk = mix_images(in.x_j_s, in.x_k_t, m, Direction::kTargetOnMask);
    out.y_m_jk = mix_labels(in.y_j_s, in.p_k_t, m, Direction::kTargetOnMask);
  }
  out.mask = std::move(mask);
  return out;
}

}  // namespace specmix::mixing
