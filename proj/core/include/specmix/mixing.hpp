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

#pragma once

#include <cstddef>
#include <optional>

#include "specmix/maskgen.hpp"
#include "specmix/types.hpp"

namespace specmix::mixing {

enum class Direction {
  kSourceOnMask,  // x_src * M + x_tgt * (1 - M)
  kTargetOnMask,  // x_src * (1 - M) + x_tgt * M
};

Image mix_images(const Image& x_src, const Image& x_tgt, const BinaryMask& mask,
                 Direction direction);

/// Categorical splice under the same semantics as mix_images.
LabelMap mix_labels(const LabelMap& y_src, const LabelMap& y_tgt, const BinaryMask& mask,
                    Direction direction);

struct Provenance {
  std::size_t i = 0;  // source, pasted on the mask in x_m_il
  std::size_t j = 1;  // source, pasted off the mask in x_m_jk
  std::size_t l = 0;  // target, off the mask in x_m_il
  std::size_t k = 1;  // target, on the mask in x_m_jk
};

struct QuadrupleInputs {
  const Image& x_i_s;
  const LabelMap& y_i_s;
  const Image& x_j_s;
  const LabelMap& y_j_s;
  const Image& x_l_t;
  const LabelMap& p_l_t;
  const Image& x_k_t;
  const LabelMap& p_k_t;
};

/// Both mixed images of a source/target quadruple, built from one mask.
/// In uni-directional mode only the (i,l) member is present.
struct MixedPair {
  Image x_m_il;
  LabelMap y_m_il;
  std::optional<Image> x_m_jk;
  std::optional<LabelMap> y_m_jk;
  maskgen::DynamicMask mask;
  Provenance provenance;

  bool bidirectional() const { return x_m_jk.has_value(); }
};

/// Throws DimensionMismatch on shape disagreement and ValueError when the
/// provenance repeats a source (i == j) or target (l == k) index.
MixedPair make_mixed_pair(const QuadrupleInputs& in, maskgen::DynamicMask mask,
                          Provenance provenance = {}, bool bidirectional = true);

}  // namespace specmix::mixing
