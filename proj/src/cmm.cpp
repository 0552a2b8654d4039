// SPDX-License-Identifier: Apache-2.0
#include "cmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace canweave {

const char *category_name(int category) { return category == kPositive ? "pos" : "neg"; }

CountTable count_words(std::span<const Sample> labeled, std::size_t vocab_size) {
  CountTable counts;
  counts.positive.assign(vocab_size, 0);
  counts.negative.assign(vocab_size, 0);
  for (const Sample &s : labeled) {
    if (!s.label) throw InvalidArgument("count_words: unlabeled sample");
    const bool positive = *s.label == kPositive;
    (positive ? counts.positive_docs : counts.negative_docs) += 1;
    auto &bucket = positive ? counts.positive : counts.negative;
    for (std::size_t i = 0; i < s.valid_len; ++i) {
      const std::size_t id = s.tokens[i];
      if (id >= vocab_size) throw InvalidArgument("count_words: token id out of range");
      ++bucket[id];
    }
  }
  return counts;
}

std::vector<double> score_words(const CountTable &counts) {
  if (counts.positive_docs == 0 || counts.negative_docs == 0)
    throw InvalidArgument("score_words: need at least one positive and one negative document");
  std::vector<double> scores(counts.positive.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = std::log(static_cast<double>(counts.positive[i]) + 1.0) -
                std::log(static_cast<double>(counts.negative[i]) + 1.0);
  }
  return scores;
}

Tensor CategoryMemory::matrix(int category, const EmbeddingTable &embeddings) const {
  if (domain == Domain::kSource) return gather_rows(embeddings.matrix, words.at(category));
  return vectors.at(category);
}

std::vector<double> CategoryMemory::entry(int category, std::size_t m, const EmbeddingTable &embeddings) const {
  if (m >= size) throw InvalidArgument("memory entry index out of range");
  if (domain == Domain::kSource) {
    const auto values = embeddings.matrix.values();
    const std::size_t id = words.at(category)[m];
    return {values.begin() + id * embeddings.dim, values.begin() + (id + 1) * embeddings.dim};
  }
  const auto values = vectors.at(category).values();
  const std::size_t d = vectors.at(category).dim(1);
  return {values.begin() + m * d, values.begin() + (m + 1) * d};
}

CategoryMemory build_source_cmm(const CountTable &counts, const Vocabulary &vocab, std::size_t memory_size) {
  if (memory_size == 0) throw InvalidArgument("memory size M must be at least 1");
  if (counts.positive.size() != vocab.size()) throw InvalidArgument("count table does not match vocabulary");
  const std::size_t candidates = vocab.size() - 2;
  if (candidates < 2 * memory_size) {
    throw InvalidArgument("vocabulary has " + std::to_string(candidates) + " candidate words, need at least 2M = " +
                          std::to_string(2 * memory_size));
  }
  if (counts.positive_docs == 0 || counts.negative_docs == 0) score_words(counts);  // same error as scoring
  std::vector<std::size_t> ids(candidates);
  std::iota(ids.begin(), ids.end(), std::size_t{2});

  auto top = [&](bool descending) {
    std::vector<std::size_t> ranked = ids;
    std::partial_sort(ranked.begin(), ranked.begin() + memory_size, ranked.end(), [&](std::size_t a, std::size_t b) {
      // Exact comparison of (pos+1)/(neg+1), so equal scores tie exactly.
      using Wide = unsigned __int128;
      const Wide lhs = Wide(counts.positive[a] + 1) * Wide(counts.negative[b] + 1);
      const Wide rhs = Wide(counts.positive[b] + 1) * Wide(counts.negative[a] + 1);
      if (lhs != rhs) return descending ? lhs > rhs : lhs < rhs;
      return vocab.word(a) < vocab.word(b);
    });
    ranked.resize(memory_size);
    return ranked;
  };

  CategoryMemory memory;
  memory.domain = Domain::kSource;
  memory.size = memory_size;
  memory.words.resize(kNumClasses);
  memory.words[kPositive] = top(true);
  memory.words[kNegative] = top(false);
  return memory;
}

CategoryMemory init_target_cmm(std::size_t memory_size, std::size_t dim, std::uint64_t seed) {
  if (memory_size == 0 || dim == 0) throw InvalidArgument("target memory needs M >= 1 and dim >= 1");
  Rng rng(derive_seed(seed, kTagTargetMemory));
  CategoryMemory memory;
  memory.domain = Domain::kTarget;
  memory.size = memory_size;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<double> values(memory_size * dim);
    for (double &x : values) x = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
    memory.vectors.push_back(Tensor::from({memory_size, dim}, std::move(values), true));
  }
  return memory;
}

std::vector<Neighbor> nearest_vocab_neighbors(std::span<const double> query, const EmbeddingTable &embeddings,
                                              const Vocabulary &vocab, std::size_t n) {
  if (n == 0) throw InvalidArgument("neighbour count must be at least 1");
  if (query.size() != embeddings.dim) throw ShapeError("neighbour query dimension does not match embeddings");
  const std::size_t d = embeddings.dim;
  const auto table = embeddings.matrix.values();
  std::vector<Neighbor> all;
  for (std::size_t id = 2; id < vocab.size(); ++id) {
    all.push_back({id, vocab.word(id), cosine_value(query, table.subspan(id * d, d))});
  }
  const std::size_t keep = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), [](const Neighbor &a, const Neighbor &b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.word < b.word;
  });
  all.resize(keep);
  return all;
}

}  // namespace canweave
