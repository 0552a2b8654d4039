// SPDX-License-Identifier: Apache-2.0
//
// Category attention network: dynamic matching of memory entries against
// the sentence, attention of each matched entry over the sentence, and
// aggregation into per-category feature vectors.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace canweave {

/// One attention head shared across categories and domains.
struct AttentionParams {
  Tensor weight;  // W_a, [d, d]
  Tensor bias;    // b, [d]
};

AttentionParams init_attention(std::size_t dim, std::uint64_t seed);

struct MatchResult {
  /// Per category, the K selected memory indices, best first.
  std::vector<std::vector<std::size_t>> indices;
  /// Per category, max-over-positions cosine of each selected entry.
  std::vector<std::vector<double>> scores;
};

/// Scores every memory entry by its best cosine against the first
/// `valid_len` sentence rows and keeps the top K per category (ties go to
/// the lower index). Pure selection: nothing is recorded on the tape.
MatchResult dynamic_match(const Tensor &sentence, std::span<const Tensor> memories, std::size_t top_k,
                          std::size_t valid_len);

/// Attention of each query row over the valid sentence positions:
/// softmax_l(q^T tanh(W_a w_l + b)). `queries` is [K, d]; the result is
/// [K, valid_len], every row a distribution. PAD positions are excluded and
/// carry implicit zero weight.
Tensor category_attention(const Tensor &sentence, const Tensor &queries, const AttentionParams &params,
                          std::size_t valid_len);

struct AttentionOutput {
  MatchResult match;
  std::vector<Tensor> weights;          // per category, [K, valid_len]
  std::vector<Tensor> category_vectors; // per category v^c, [d]
  Tensor fused;                         // v = sum_c v^c, [d]
};

/// v^c = sum_k sum_l s_{k,l} w_l over the valid rows of `sentence`.
Tensor aggregate(const Tensor &sentence, const Tensor &weights);

/// Full forward: match, attend, aggregate for every category.
AttentionOutput attend(const Tensor &sentence, std::span<const Tensor> memories, const AttentionParams &params,
                       std::size_t top_k, std::size_t valid_len);

/// Weight distribution of one (category, k) padded out to `length` with zeros.
std::vector<double> padded_weights(const Tensor &weights, std::size_t k, std::size_t length);

}  // namespace canweave
