// SPDX-License-Identifier: Apache-2.0
//
// Category memory: per-class banks of attribute vectors. The source bank
// is a ranked list of vocabulary words whose vectors are the live
// embedding rows; the target bank is a set of free trainable vectors.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "embeddings.hpp"
#include "tensor.hpp"

namespace canweave {

inline constexpr int kNumClasses = 2;
inline constexpr int kNegative = 0;
inline constexpr int kPositive = 1;

const char *category_name(int category);

/// Token-occurrence counts per word id in positive and negative documents.
struct CountTable {
  std::vector<std::uint64_t> positive;
  std::vector<std::uint64_t> negative;
  std::size_t positive_docs = 0;
  std::size_t negative_docs = 0;
};

/// Counts over the valid tokens of labeled samples.
CountTable count_words(std::span<const Sample> labeled, std::size_t vocab_size);

/// log(pos + 1) - log(neg + 1) per word id. Throws when a class has no documents.
std::vector<double> score_words(const CountTable &counts);

struct CategoryMemory {
  Domain domain = Domain::kSource;
  std::size_t size = 0;                          // M, entries per category
  std::vector<std::vector<std::size_t>> words;   // source: word ids per category, best first
  std::vector<Tensor> vectors;                   // target: [M, d] per category

  /// [M, d] attribute matrix for a category. Source memories gather the
  /// current embedding rows, so gradients reach the tied words.
  Tensor matrix(int category, const EmbeddingTable &embeddings) const;
  /// Plain values of entry m, for neighbour queries.
  std::vector<double> entry(int category, std::size_t m, const EmbeddingTable &embeddings) const;
};

/// Top-M words by score for the positive class and bottom-M for the
/// negative class, PAD and UNK excluded, ties broken lexicographically.
CategoryMemory build_source_cmm(const CountTable &counts, const Vocabulary &vocab, std::size_t memory_size);

/// 2M free vectors drawn uniform(-0.25, 0.25) from the seed.
CategoryMemory init_target_cmm(std::size_t memory_size, std::size_t dim, std::uint64_t seed);

struct Neighbor {
  std::size_t id = 0;
  std::string word;
  double similarity = 0.0;
};

/// Top-n vocabulary words by cosine similarity to `query`, PAD and UNK
/// excluded, ties broken lexicographically.
std::vector<Neighbor> nearest_vocab_neighbors(std::span<const double> query, const EmbeddingTable &embeddings,
                                              const Vocabulary &vocab, std::size_t n);

}  // namespace canweave
