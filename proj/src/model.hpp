// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "can.hpp"
#include "cmm.hpp"
#include "cnn_encoder.hpp"
#include "corpus.hpp"
#include "embeddings.hpp"

namespace canweave {

struct ModelShape {
  std::size_t dim = 300;
  std::size_t memory_size = 50;
  std::size_t top_k = 5;
  std::vector<std::size_t> widths{3, 4, 5};
  std::size_t filters_per_width = 100;
};

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

/// Everything needed to classify a sample of either domain. Both domains
/// share every parameter except their category memory.
struct Model {
  Vocabulary vocabulary;
  EmbeddingTable embeddings;
  CategoryMemory source_memory;
  CategoryMemory target_memory;
  /// Target memory values at initialization, for before/after reports.
  std::vector<Tensor> target_memory_initial;
  /// Embedding values at initialization, the space of the "before" report.
  Tensor embeddings_initial;
  AttentionParams attention;
  ConvBank conv;
  ClassifierHead head;
  std::size_t top_k = 0;

  const CategoryMemory &memory_for(Domain domain) const {
    return domain == Domain::kSource ? source_memory : target_memory;
  }
  /// Trainable tensors in a fixed order; handles alias the model's storage.
  std::vector<NamedParameter> parameters() const;
  std::size_t parameter_count() const;
};

/// Initializes every parameter from the run seed around a given vocabulary,
/// embedding table and source memory.
Model build_model(Vocabulary vocabulary, EmbeddingTable embeddings, CategoryMemory source_memory,
                  const ModelShape &shape, std::uint64_t seed);

struct SampleForward {
  AttentionOutput attention;
  Tensor pooled;  // m
  Classification classification;
};

/// One sample through embedding, CAN, CNN and the softmax head, using the
/// memory of the sample's domain.
SampleForward forward(const Model &model, const Sample &sample);

/// Argmax class, ties to the lower index. Records nothing on the tape.
int predict(const Model &model, const Sample &sample);

/// Per category, (1/K) sum_k s_{k,l} over the valid positions.
std::vector<std::vector<double>> averaged_attention(const AttentionOutput &attention);

/// Value snapshot of all parameters, and its restoration.
std::vector<std::vector<double>> snapshot(const Model &model);
void restore(Model &model, const std::vector<std::vector<double>> &values);

}  // namespace canweave
