// SPDX-License-Identifier: Apache-2.0
#include "cnn_encoder.hpp"

#include <algorithm>

#include "error.hpp"
#include "rng.hpp"

namespace canweave {

namespace {
constexpr double kFilterInitRange = 0.1;
constexpr double kHeadInitRange = 0.1;
}  // namespace

ConvBank init_conv_bank(std::vector<std::size_t> widths, std::size_t filters_per_width, std::size_t dim,
                        std::uint64_t seed) {
  if (widths.empty() || filters_per_width == 0 || dim == 0)
    throw InvalidArgument("conv bank needs at least one width, one filter and dim > 0");
  ConvBank bank;
  bank.widths = std::move(widths);
  bank.filters_per_width = filters_per_width;
  Rng rng(derive_seed(seed, kTagConv));
  for (std::size_t h : bank.widths) {
    if (h == 0) throw InvalidArgument("filter width must be positive");
    std::vector<double> w(filters_per_width * h * dim);
    for (double &x : w) x = rng.uniform(-kFilterInitRange, kFilterInitRange);
    bank.filters.push_back(Tensor::from({filters_per_width, h * dim}, std::move(w), true));
    bank.biases.push_back(Tensor::zeros({filters_per_width}, true));
  }
  return bank;
}

Tensor encode(const ConvBank &bank, const Tensor &sentence, std::size_t valid_len) {
  if (valid_len == 0) throw InvalidArgument("encode: valid_len must be at least 1");
  if (sentence.rank() != 2 || valid_len > sentence.dim(0))
    throw ShapeError("encode: valid_len exceeds sentence " + shape_string(sentence.shape()));
  const Tensor words = valid_len == sentence.dim(0) ? sentence : slice_rows(sentence, 0, valid_len);
  std::vector<Tensor> pooled;
  for (std::size_t i = 0; i < bank.widths.size(); ++i) {
    const std::size_t h = bank.widths[i];
    const std::size_t windows = valid_len >= h ? valid_len - h + 1 : 1;
    const Tensor response = relu(conv1d(words, bank.filters[i], bank.biases[i], h, windows));
    pooled.push_back(max_rows(response));
  }
  return pooled.size() == 1 ? pooled[0] : concat(pooled);
}

ClassifierHead init_head(std::size_t input_size, std::size_t classes, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kTagHead));
  std::vector<double> w(input_size * classes);
  for (double &x : w) x = rng.uniform(-kHeadInitRange, kHeadInitRange);
  return {Tensor::from({input_size, classes}, std::move(w), true)};
}

Classification classify(const Tensor &fused, const Tensor &pooled, const ClassifierHead &head) {
  const Tensor parts[] = {fused, pooled};
  Tensor features = concat(parts);
  if (features.dim(0) != head.weight.dim(0))
    throw ShapeError("classify: features " + shape_string(features.shape()) + " do not match head " +
                     shape_string(head.weight.shape()));
  const Tensor logits = matmul(reshape(features, {1, features.dim(0)}), head.weight);
  Tensor probabilities = softmax(reshape(logits, {head.weight.dim(1)}));
  return {std::move(features), std::move(probabilities)};
}

}  // namespace canweave
