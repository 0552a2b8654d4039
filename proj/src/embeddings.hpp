// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "corpus.hpp"
#include "tensor.hpp"

namespace canweave {

/// Trainable |V| x d word-vector matrix shared by both domains. Row PAD is
/// held at zero: its gradient is discarded and its value re-zeroed after
/// every optimizer step.
struct EmbeddingTable {
  Tensor matrix;
  std::size_t dim = 0;
  std::vector<bool> pretrained;  // per row

  std::size_t rows() const { return matrix.dim(0); }

  /// L x d stack of the sample's rows (PAD positions included).
  Tensor embed(const Sample &sample) const;
  /// valid_len x d stack of the sample's non-PAD rows.
  Tensor embed_valid(const Sample &sample) const;

  void zero_pad_row();
  void zero_pad_grad();
};

inline constexpr double kEmbeddingInitRange = 0.25;

/// Every row uniform(-0.25, 0.25) from the run seed, PAD zeroed.
EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

/// Text format: header `count dim`, then `word f_1 ... f_dim` per line. Rows
/// of vocabulary words found in the file are copied; the rest keep their
/// seeded random values.
EmbeddingTable load_pretrained(const std::filesystem::path &path, const Vocabulary &vocab, std::size_t dim,
                               std::uint64_t seed);

}  // namespace canweave
