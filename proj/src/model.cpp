// SPDX-License-Identifier: Apache-2.0
#include "model.hpp"

#include <algorithm>

#include "error.hpp"

namespace canweave {

std::vector<NamedParameter> Model::parameters() const {
  std::vector<NamedParameter> out;
  out.push_back({"embeddings", embeddings.matrix});
  out.push_back({"attention.weight", attention.weight});
  out.push_back({"attention.bias", attention.bias});
  for (std::size_t i = 0; i < conv.widths.size(); ++i) {
    const std::string prefix = "conv." + std::to_string(i) + ".";
    out.push_back({prefix + "filters", conv.filters[i]});
    out.push_back({prefix + "bias", conv.biases[i]});
  }
  out.push_back({"head.weight", head.weight});
  for (int c = 0; c < static_cast<int>(target_memory.vectors.size()); ++c)
    out.push_back({std::string("target_memory.") + category_name(c), target_memory.vectors[c]});
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto &p : parameters()) n += p.tensor.size();
  return n;
}

Model build_model(Vocabulary vocabulary, EmbeddingTable embeddings, CategoryMemory source_memory,
                  const ModelShape &shape, std::uint64_t seed) {
  if (embeddings.dim != shape.dim) throw InvalidArgument("embedding dim does not match model dim");
  if (embeddings.rows() != vocabulary.size()) throw InvalidArgument("embedding rows do not match vocabulary");
  if (shape.top_k == 0 || shape.top_k > shape.memory_size) throw InvalidArgument("need 1 <= K <= M");
  if (source_memory.size != shape.memory_size) throw InvalidArgument("source memory size does not match M");
  Model model;
  model.vocabulary = std::move(vocabulary);
  model.embeddings = std::move(embeddings);
  model.source_memory = std::move(source_memory);
  model.target_memory = init_target_cmm(shape.memory_size, shape.dim, seed);
  for (const Tensor &t : model.target_memory.vectors) model.target_memory_initial.push_back(t.detach());
  model.embeddings_initial = model.embeddings.matrix.detach();
  model.attention = init_attention(shape.dim, seed);
  model.conv = init_conv_bank(shape.widths, shape.filters_per_width, shape.dim, seed);
  model.head = init_head(shape.dim + model.conv.output_size(), kNumClasses, seed);
  model.top_k = shape.top_k;
  return model;
}

SampleForward forward(const Model &model, const Sample &sample) {
  const Tensor words = model.embeddings.embed_valid(sample);
  const CategoryMemory &memory = model.memory_for(sample.domain);
  std::vector<Tensor> memories;
  for (int c = 0; c < kNumClasses; ++c) memories.push_back(memory.matrix(c, model.embeddings));
  SampleForward out;
  out.attention = attend(words, memories, model.attention, model.top_k, sample.valid_len);
  out.pooled = encode(model.conv, words, sample.valid_len);
  out.classification = classify(out.attention.fused, out.pooled, model.head);
  return out;
}

int predict(const Model &model, const Sample &sample) {
  NoGradGuard no_grad;
  const SampleForward f = forward(model, sample);
  const auto probs = f.classification.probabilities.values();
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

std::vector<std::vector<double>> averaged_attention(const AttentionOutput &attention) {
  std::vector<std::vector<double>> out;
  for (const Tensor &w : attention.weights) {
    const std::size_t k = w.dim(0), n = w.dim(1);
    std::vector<double> avg(n, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < n; ++l) avg[l] += w.at(i, l);
    for (double &x : avg) x /= static_cast<double>(k);
    out.push_back(std::move(avg));
  }
  return out;
}

std::vector<std::vector<double>> snapshot(const Model &model) {
  std::vector<std::vector<double>> out;
  for (const auto &p : model.parameters()) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore(Model &model, const std::vector<std::vector<double>> &values) {
  auto params = model.parameters();
  if (params.size() != values.size()) throw InvalidArgument("snapshot does not match model parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].tensor.mutable_values();
    if (dst.size() != values[i].size()) throw InvalidArgument("snapshot tensor size mismatch for " + params[i].name);
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace canweave
