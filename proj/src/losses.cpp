// SPDX-License-Identifier: Apache-2.0
#include "losses.hpp"

#include <vector>

#include "error.hpp"

namespace canweave {

Tensor supervised_loss(std::span<const Tensor> probabilities, std::span<const int> labels) {
  if (probabilities.empty() || probabilities.size() != labels.size())
    throw InvalidArgument("supervised_loss: need one label per prediction and a non-empty batch");
  std::vector<Tensor> terms;
  terms.reserve(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probabilities[i].size())
      throw InvalidArgument("supervised_loss: label out of range");
    terms.push_back(log(pick(probabilities[i], static_cast<std::size_t>(labels[i])), kCrossEntropyEps));
  }
  return neg(mean(concat(terms)));
}

Tensor symmetric_kl(const Tensor &p, const Tensor &q) {
  // KL(p||q) + KL(q||p) = sum (p - q)(log p - log q)
  return sum(mul(sub(p, q), sub(log(p, kKlEps), log(q, kKlEps))));
}

namespace {

Tensor clipped_mean_divergence(std::span<const AttentionMass> batch, std::size_t top_k) {
  const double inv_k = 1.0 / static_cast<double>(top_k);
  std::vector<Tensor> terms;
  terms.reserve(batch.size());
  for (const AttentionMass &mass : batch) {
    if (!mass.positive.defined() || mass.positive.size() == 0)
      throw InvalidArgument("distribution_loss: sample has no valid positions");
    terms.push_back(clamp_max(symmetric_kl(scale(mass.positive, inv_k), scale(mass.negative, inv_k)), kKlClip));
  }
  return mean(concat(terms));
}

}  // namespace

Tensor distribution_loss(std::span<const AttentionMass> source, std::span<const AttentionMass> target,
                         std::size_t top_k) {
  if (top_k == 0) throw InvalidArgument("distribution_loss: K must be at least 1");
  if (source.empty() && target.empty()) throw InvalidArgument("distribution_loss: empty batches");
  if (target.empty()) return neg(clipped_mean_divergence(source, top_k));
  if (source.empty()) return neg(clipped_mean_divergence(target, top_k));
  return neg(add(clipped_mean_divergence(source, top_k), clipped_mean_divergence(target, top_k)));
}

Tensor mmd_loss(std::span<const Tensor> source_features, std::span<const Tensor> target_features) {
  if (source_features.empty() || target_features.empty())
    throw InvalidArgument("mmd_loss: both batches must be non-empty");
  if (source_features[0].size() != target_features[0].size())
    throw ShapeError("mmd_loss: feature dimensions differ (" + std::to_string(source_features[0].size()) + " vs " +
                     std::to_string(target_features[0].size()) + ")");
  return norm(sub(mean_rows(stack_rows(source_features)), mean_rows(stack_rows(target_features))));
}

Tensor combine(const Tensor &l_c, const Tensor &l_d, const Tensor &l_i, double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw InvalidArgument("combine: alpha and beta must be non-negative");
  return add(l_c, add(scale(l_d, alpha), scale(l_i, beta)));
}

}  // namespace canweave
