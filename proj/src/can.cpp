// SPDX-License-Identifier: Apache-2.0
#include "can.hpp"

#include <algorithm>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace canweave {

namespace {
constexpr double kAttentionInitRange = 0.1;

void require_valid_len(const char *op, const Tensor &sentence, std::size_t valid_len) {
  if (valid_len == 0) throw InvalidArgument(std::string(op) + ": valid_len must be at least 1");
  if (sentence.rank() != 2 || valid_len > sentence.dim(0))
    throw ShapeError(std::string(op) + ": valid_len " + std::to_string(valid_len) + " exceeds sentence " +
                     shape_string(sentence.shape()));
}
}  // namespace

AttentionParams init_attention(std::size_t dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTagAttention));
  std::vector<double> w(dim * dim);
  for (double &x : w) x = rng.uniform(-kAttentionInitRange, kAttentionInitRange);
  return {Tensor::from({dim, dim}, std::move(w), true), Tensor::zeros({dim}, true)};
}

MatchResult dynamic_match(const Tensor &sentence, std::span<const Tensor> memories, std::size_t top_k,
                          std::size_t valid_len) {
  require_valid_len("dynamic_match", sentence, valid_len);
  if (top_k == 0) throw InvalidArgument("dynamic_match: K must be at least 1");
  const std::size_t d = sentence.dim(1);
  const auto words = sentence.values();
  MatchResult result;
  for (const Tensor &memory : memories) {
    if (memory.rank() != 2 || memory.dim(1) != d)
      throw ShapeError("dynamic_match: memory " + shape_string(memory.shape()) + " does not match sentence " +
                       shape_string(sentence.shape()));
    const std::size_t m_count = memory.dim(0);
    if (top_k > m_count)
      throw InvalidArgument("dynamic_match: K = " + std::to_string(top_k) + " exceeds memory size M = " +
                            std::to_string(m_count));
    const auto entries = memory.values();
    std::vector<double> score(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
      double best = cosine_value(words.subspan(0, d), entries.subspan(m * d, d));
      for (std::size_t l = 1; l < valid_len; ++l)
        best = std::max(best, cosine_value(words.subspan(l * d, d), entries.subspan(m * d, d)));
      score[m] = best;
    }
    std::vector<std::size_t> order(m_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    order.resize(top_k);
    std::vector<double> picked;
    for (std::size_t m : order) picked.push_back(score[m]);
    result.indices.push_back(std::move(order));
    result.scores.push_back(std::move(picked));
  }
  return result;
}

Tensor category_attention(const Tensor &sentence, const Tensor &queries, const AttentionParams &params,
                          std::size_t valid_len) {
  require_valid_len("category_attention", sentence, valid_len);
  const Tensor words = valid_len == sentence.dim(0) ? sentence : slice_rows(sentence, 0, valid_len);
  // keys[l] = tanh(W_a w_l + b)
  const Tensor keys = tanh(add_row_vector(matmul(words, transpose(params.weight)), params.bias));
  const Tensor logits = matmul(queries, transpose(keys));  // [K, valid_len]
  return softmax(logits);
}

Tensor aggregate(const Tensor &sentence, const Tensor &weights) {
  const std::size_t valid_len = weights.dim(1);
  const Tensor words = valid_len == sentence.dim(0) ? sentence : slice_rows(sentence, 0, valid_len);
  return sum_rows(matmul(weights, words));
}

AttentionOutput attend(const Tensor &sentence, std::span<const Tensor> memories, const AttentionParams &params,
                       std::size_t top_k, std::size_t valid_len) {
  AttentionOutput out;
  out.match = dynamic_match(sentence, memories, top_k, valid_len);
  for (std::size_t c = 0; c < memories.size(); ++c) {
    const Tensor queries = gather_rows(memories[c], out.match.indices[c]);
    Tensor weights = category_attention(sentence, queries, params, valid_len);
    out.category_vectors.push_back(aggregate(sentence, weights));
    out.weights.push_back(std::move(weights));
  }
  out.fused = out.category_vectors[0];
  for (std::size_t c = 1; c < out.category_vectors.size(); ++c) out.fused = add(out.fused, out.category_vectors[c]);
  return out;
}

std::vector<double> padded_weights(const Tensor &weights, std::size_t k, std::size_t length) {
  const std::size_t valid_len = weights.dim(1);
  if (length < valid_len) throw ShapeError("padded_weights: length shorter than the distribution");
  std::vector<double> out(length, 0.0);
  for (std::size_t l = 0; l < valid_len; ++l) out[l] = weights.at(k, l);
  return out;
}

}  // namespace canweave
