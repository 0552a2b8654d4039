// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace canweave {

enum class Domain { kSource, kTarget };

const char *domain_name(Domain domain);

inline constexpr std::size_t kPadId = 0;
inline constexpr std::size_t kUnkId = 1;

/// Lowercases ASCII, splits every ASCII punctuation character into its own
/// token, then splits on whitespace.
std::vector<std::string> tokenize(std::string_view text);

struct Document {
  std::optional<int> label;
  std::vector<std::string> tokens;
};

enum class LabelSchema {
  kLabeled,    // every line is `label<TAB>text`
  kUnlabeled,  // every line is `text`; a leading numeric label column is ignored
};

/// Reads one document per non-empty line. Labels must lie in [0, num_classes).
std::vector<Document> read_documents(const std::filesystem::path &path, LabelSchema schema, int num_classes = 2);

class Vocabulary {
 public:
  Vocabulary();

  /// Ids in order of first occurrence across `corpora`, after PAD and UNK.
  static Vocabulary build(std::span<const std::vector<Document> *const> corpora);
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t lookup(std::string_view word) const;
  const std::string &word(std::size_t id) const { return words_.at(id); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string> &words() const noexcept { return words_; }
  /// Add a word if absent; returns its id.
  std::size_t add(const std::string &word);
  /// FNV-1a digest of the id -> word list.
  std::uint64_t digest() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Sample {
  std::vector<std::size_t> tokens;  // length L, PAD-filled
  std::size_t valid_len = 0;
  std::optional<int> label;
  Domain domain = Domain::kSource;
};

/// Maps a document onto ids, truncating at the tail and PAD-filling to max_len.
Sample encode(const Document &doc, const Vocabulary &vocab, std::size_t max_len, Domain domain);
std::vector<Sample> encode_all(std::span<const Document> docs, const Vocabulary &vocab, std::size_t max_len,
                               Domain domain, bool keep_labels = true);
/// Words for the non-PAD ids.
std::vector<std::string> detokenize(const Sample &sample, const Vocabulary &vocab);

struct LoadedCorpus {
  std::vector<Sample> samples;
  Vocabulary vocabulary;
};

/// Single-file convenience: reads, builds a vocabulary from this file, encodes.
LoadedCorpus load_dataset(const std::filesystem::path &path, LabelSchema schema, Domain domain,
                          std::size_t max_len, int num_classes = 2);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // sample index -> fold id

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle, then round-robin assignment; fold sizes differ by at most one.
FoldPlan make_folds(std::size_t sample_count, std::size_t k, std::uint64_t seed);

/// Shuffled index batches; the permutation depends only on (seed, epoch) and
/// the final short batch is kept.
std::vector<std::vector<std::size_t>> make_batches(std::size_t sample_count, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch);

/// Seeded permutation of [0, n).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t stream_seed);

template <typename T>
std::vector<T> select(std::span<const T> items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items[i]);
  return out;
}

}  // namespace canweave
