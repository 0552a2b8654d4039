// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "tensor.hpp"

namespace canweave {

/// Parallel convolutions of several widths, T filters each, ReLU then
/// global max pooling.
struct ConvBank {
  std::vector<std::size_t> widths;
  std::size_t filters_per_width = 0;
  std::vector<Tensor> filters;  // per width, [T, h*d]
  std::vector<Tensor> biases;   // per width, [T]

  std::size_t output_size() const { return widths.size() * filters_per_width; }
};

/// Filters uniform(-0.1, 0.1) from the seed; biases zero.
ConvBank init_conv_bank(std::vector<std::size_t> widths, std::size_t filters_per_width, std::size_t dim,
                        std::uint64_t seed);

/// Pooled features m, ordered by width (ascending as configured) then
/// filter index. Only windows lying inside the valid rows are pooled; a
/// sentence shorter than the width gets one window whose missing rows read
/// as zero (PAD).
Tensor encode(const ConvBank &bank, const Tensor &sentence, std::size_t valid_len);

/// Softmax head without bias over o = [v; m].
struct ClassifierHead {
  Tensor weight;  // W_s, [d + |H|*T, C]
};

ClassifierHead init_head(std::size_t input_size, std::size_t classes, std::uint64_t seed);

struct Classification {
  Tensor features;       // o
  Tensor probabilities;  // y-hat, [C]
};

Classification classify(const Tensor &fused, const Tensor &pooled, const ClassifierHead &head);

}  // namespace canweave
