// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "tensor.hpp"

namespace canweave {

inline constexpr double kCrossEntropyEps = 1e-12;
inline constexpr double kKlEps = 1e-8;
inline constexpr double kKlClip = 10.0;

struct LossBreakdown {
  double l_c = 0.0;
  double l_d = 0.0;
  double l_i = 0.0;
  double total = 0.0;
};

/// Mean cross entropy -log(y-hat_label + 1e-12) over the batch.
Tensor supervised_loss(std::span<const Tensor> probabilities, std::span<const int> labels);

/// KL(p||q) + KL(q||p) with 1e-8 added inside every logarithm.
Tensor symmetric_kl(const Tensor &p, const Tensor &q);

/// Per-sample summed attention mass of the two categories over valid positions.
struct AttentionMass {
  Tensor positive;  // sum_k s_k^pos, total mass K
  Tensor negative;
};

/// -(mean over source of min(symKL, 10)) - (mean over target of the same),
/// with each mass divided by K first. An empty domain contributes nothing.
Tensor distribution_loss(std::span<const AttentionMass> source, std::span<const AttentionMass> target,
                         std::size_t top_k);

/// Euclidean distance between the mean source and mean target features.
Tensor mmd_loss(std::span<const Tensor> source_features, std::span<const Tensor> target_features);

/// l_c + alpha * l_d + beta * l_i; the weights must be non-negative.
Tensor combine(const Tensor &l_c, const Tensor &l_d, const Tensor &l_i, double alpha, double beta);

}  // namespace canweave
