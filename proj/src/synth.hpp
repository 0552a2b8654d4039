// SPDX-License-Identifier: Apache-2.0
//
// Two-domain binary sentiment corpora with planted lexicons.
//
// Each domain has its own sentiment lexicon (half positive, half negative)
// and both share a pivot lexicon. A document mixes neutral filler with an
// odd number of planted sentiment words; its label is the majority polarity
// of the planted words. An optional embeddings file gives every word a
// vector in which words of the same (group, polarity) cluster together,
// sentiment words share a polarity axis, and each group shares a topic axis.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace canweave {

struct SynthSpec {
  std::size_t vocab_size = 200;
  std::size_t lexicon_size = 40;  // per domain, half positive
  std::size_t pivot_count = 20;   // shared, half positive
  std::size_t docs_per_domain = 500;
  std::size_t doc_length = 24;
  std::size_t planted_per_doc = 5;  // odd
  double pivot_probability = 0.3;
  double agreement = 0.8;  // P(planted polarity == latent label)
  /// Fraction of each target lexicon polarity replaced by target-only
  /// words; 0 gives identical lexicons, 1 disjoint ones.
  double shift = 1.0;
  std::size_t embed_dim = 0;  // 0: no embeddings file
  double polarity_strength = 0.45;
  double topic_strength = 0.6;
  double cluster_strength = 0.5;
  double noise = 0.35;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class LexiconGroup { kPivot, kSource, kTarget };

struct LexiconEntry {
  std::string word;
  LexiconGroup group;
  int polarity;  // kPositive or kNegative
};

struct SynthCorpus {
  std::vector<std::string> neutral;
  std::vector<LexiconEntry> lexicon;  // every sentiment word once
  /// Per domain and polarity, the words documents draw from.
  std::vector<std::string> source_lexicon[2];
  std::vector<std::string> target_lexicon[2];
  std::vector<std::string> pivots[2];
  std::vector<Document> source;
  std::vector<Document> target;
  /// word -> vector, present when embed_dim > 0.
  std::map<std::string, std::vector<double>> embeddings;

  std::vector<std::string> all_words() const;
  /// Polarity per sentiment word.
  std::map<std::string, int> polarity_map() const;
};

const char *group_name(LexiconGroup group);

SynthCorpus synthesize(const SynthSpec &spec);

/// Majority polarity of the lexicon words in `tokens`.
int planted_label(const std::vector<std::string> &tokens, const std::map<std::string, int> &polarity);

/// Swaps every planted word for the same-index word of the opposite polarity.
std::vector<std::string> flip_planted(const std::vector<std::string> &tokens, const SynthCorpus &corpus);

/// Writes source.tsv, target.tsv, lexicon.tsv and, with embeddings,
/// embeddings.txt into `dir`.
void write_synth_corpus(const SynthCorpus &corpus, const std::filesystem::path &dir);

}  // namespace canweave
