// SPDX-License-Identifier: Apache-2.0
#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cmm.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "run_config.hpp"

namespace canweave {

void SynthSpec::validate() const {
  if (lexicon_size == 0 || lexicon_size % 2 != 0)
    throw InvalidArgument("synth: lexicon_size must be a positive even number");
  if (pivot_count % 2 != 0) throw InvalidArgument("synth: pivot_count must be even");
  if (planted_per_doc == 0 || planted_per_doc % 2 == 0)
    throw InvalidArgument("synth: planted_per_doc must be odd");
  if (doc_length < planted_per_doc) throw InvalidArgument("synth: doc_length shorter than planted_per_doc");
  if (docs_per_domain == 0) throw InvalidArgument("synth: docs_per_domain must be positive");
  if (!(shift >= 0.0 && shift <= 1.0)) throw InvalidArgument("synth: shift must lie in [0, 1]");
  if (!(agreement >= 0.5 && agreement <= 1.0)) throw InvalidArgument("synth: agreement must lie in [0.5, 1]");
  if (!(pivot_probability >= 0.0 && pivot_probability <= 1.0))
    throw InvalidArgument("synth: pivot_probability must lie in [0, 1]");
  if (pivot_count == 0 && pivot_probability > 0.0)
    throw InvalidArgument("synth: pivot_probability > 0 needs pivots");
  if (pivot_probability == 1.0 && pivot_count == 0) throw InvalidArgument("synth: empty lexicon");
  const std::size_t half = lexicon_size / 2;
  const auto exclusive = static_cast<std::size_t>(std::lround(shift * static_cast<double>(half)));
  const std::size_t used = pivot_count + lexicon_size + 2 * exclusive;
  if (vocab_size <= used)
    throw InvalidArgument("synth: vocab_size " + std::to_string(vocab_size) + " leaves no neutral words (lexicons use " +
                          std::to_string(used) + ")");
  if (doc_length > planted_per_doc && vocab_size == used) throw InvalidArgument("synth: no filler words");
  if (noise < 0.0 || polarity_strength < 0.0 || topic_strength < 0.0 || cluster_strength < 0.0)
    throw InvalidArgument("synth: embedding strengths must be non-negative");
}

const char *group_name(LexiconGroup group) {
  switch (group) {
    case LexiconGroup::kPivot: return "pivot";
    case LexiconGroup::kSource: return "source";
    case LexiconGroup::kTarget: return "target";
  }
  return "?";
}

std::vector<std::string> SynthCorpus::all_words() const {
  std::vector<std::string> words = neutral;
  for (const auto &e : lexicon) words.push_back(e.word);
  return words;
}

std::map<std::string, int> SynthCorpus::polarity_map() const {
  std::map<std::string, int> out;
  for (const auto &e : lexicon) out[e.word] = e.polarity;
  return out;
}

namespace {

std::string numbered(const std::string &prefix, std::size_t i, int digits = 2) {
  std::string n = std::to_string(i);
  while (n.size() < static_cast<std::size_t>(digits)) n.insert(n.begin(), '0');
  return prefix + n;
}

std::vector<Document> generate_documents(const SynthSpec &spec, const std::vector<std::string> &neutral,
                                         const std::vector<std::string> (&lexicon)[2],
                                         const std::vector<std::string> (&pivots)[2], Rng &rng) {
  std::vector<Document> docs;
  docs.reserve(spec.docs_per_domain);
  for (std::size_t n = 0; n < spec.docs_per_domain; ++n) {
    const int latent = rng.bernoulli(0.5) ? kPositive : kNegative;
    std::vector<std::string> tokens;
    int positive_votes = 0;
    for (std::size_t j = 0; j < spec.planted_per_doc; ++j) {
      const int polarity = rng.bernoulli(spec.agreement) ? latent : 1 - latent;
      positive_votes += polarity == kPositive;
      const bool use_pivot = !pivots[polarity].empty() && rng.bernoulli(spec.pivot_probability);
      const auto &bank = use_pivot ? pivots[polarity] : lexicon[polarity];
      tokens.push_back(bank[rng.below(bank.size())]);
    }
    for (std::size_t j = spec.planted_per_doc; j < spec.doc_length; ++j)
      tokens.push_back(neutral[rng.below(neutral.size())]);
    rng.shuffle(std::span<std::string>(tokens));
    Document doc;
    doc.label = 2 * positive_votes > static_cast<int>(spec.planted_per_doc) ? kPositive : kNegative;
    doc.tokens = std::move(tokens);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<double> random_unit(std::size_t dim, Rng &rng) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (double &x : v) {
    x = rng.normal();
    sq += x * x;
  }
  for (double &x : v) x /= std::sqrt(sq);
  return v;
}

}  // namespace

SynthCorpus synthesize(const SynthSpec &spec) {
  spec.validate();
  const std::size_t half = spec.lexicon_size / 2;
  const auto exclusive = static_cast<std::size_t>(std::lround(spec.shift * static_cast<double>(half)));
  const std::size_t neutral_count = spec.vocab_size - spec.pivot_count - spec.lexicon_size - 2 * exclusive;

  SynthCorpus corpus;
  for (std::size_t i = 0; i < neutral_count; ++i) corpus.neutral.push_back(numbered("n", i, 3));
  for (int p : {kPositive, kNegative}) {
    const std::string tag = p == kPositive ? "pos" : "neg";
    for (std::size_t i = 0; i < spec.pivot_count / 2; ++i) {
      corpus.pivots[p].push_back(numbered("piv" + tag, i));
      corpus.lexicon.push_back({corpus.pivots[p].back(), LexiconGroup::kPivot, p});
    }
    for (std::size_t i = 0; i < half; ++i) {
      corpus.source_lexicon[p].push_back(numbered("src" + tag, i));
      corpus.lexicon.push_back({corpus.source_lexicon[p].back(), LexiconGroup::kSource, p});
    }
    for (std::size_t i = 0; i < exclusive; ++i) {
      corpus.target_lexicon[p].push_back(numbered("tgt" + tag, i));
      corpus.lexicon.push_back({corpus.target_lexicon[p].back(), LexiconGroup::kTarget, p});
    }
    for (std::size_t i = exclusive; i < half; ++i) corpus.target_lexicon[p].push_back(corpus.source_lexicon[p][i]);
  }

  Rng source_rng(derive_seed(spec.seed, kTagSynth, 0));
  Rng target_rng(derive_seed(spec.seed, kTagSynth, 1));
  corpus.source = generate_documents(spec, corpus.neutral, corpus.source_lexicon, corpus.pivots, source_rng);
  corpus.target = generate_documents(spec, corpus.neutral, corpus.target_lexicon, corpus.pivots, target_rng);

  if (spec.embed_dim > 0) {
    const std::size_t d = spec.embed_dim;
    Rng rng(derive_seed(spec.seed, kTagSynth, 2));
    const auto polarity_axis = random_unit(d, rng);
    std::vector<double> topic[3];
    std::vector<double> cluster[3][2];
    for (int g = 0; g < 3; ++g) {
      topic[g] = random_unit(d, rng);
      for (int p = 0; p < 2; ++p) cluster[g][p] = random_unit(d, rng);
    }
    const double noise_scale = spec.noise / std::sqrt(static_cast<double>(d));
    // Neutral words get isotropic vectors of comparable norm.
    const double neutral_scale =
        std::sqrt(spec.polarity_strength * spec.polarity_strength + spec.topic_strength * spec.topic_strength +
                  spec.cluster_strength * spec.cluster_strength + spec.noise * spec.noise) /
        std::sqrt(static_cast<double>(d));
    for (const std::string &w : corpus.neutral) {
      std::vector<double> v(d);
      for (double &x : v) x = neutral_scale * rng.normal();
      corpus.embeddings[w] = std::move(v);
    }
    for (const LexiconEntry &e : corpus.lexicon) {
      const int g = static_cast<int>(e.group);
      const double sign = e.polarity == kPositive ? 1.0 : -1.0;
      std::vector<double> v(d);
      for (std::size_t j = 0; j < d; ++j) {
        v[j] = spec.polarity_strength * sign * polarity_axis[j] + spec.topic_strength * topic[g][j] +
               spec.cluster_strength * cluster[g][e.polarity][j] + noise_scale * rng.normal();
      }
      corpus.embeddings[e.word] = std::move(v);
    }
  }
  return corpus;
}

int planted_label(const std::vector<std::string> &tokens, const std::map<std::string, int> &polarity) {
  int positive = 0, total = 0;
  for (const auto &t : tokens) {
    auto it = polarity.find(t);
    if (it == polarity.end()) continue;
    ++total;
    positive += it->second == kPositive;
  }
  return 2 * positive > total ? kPositive : kNegative;
}

std::vector<std::string> flip_planted(const std::vector<std::string> &tokens, const SynthCorpus &corpus) {
  std::map<std::string, std::string> counterpart;
  auto pair_up = [&](const std::vector<std::string> (&banks)[2]) {
    for (std::size_t i = 0; i < banks[kPositive].size(); ++i) {
      counterpart[banks[kPositive][i]] = banks[kNegative][i];
      counterpart[banks[kNegative][i]] = banks[kPositive][i];
    }
  };
  pair_up(corpus.pivots);
  pair_up(corpus.source_lexicon);
  pair_up(corpus.target_lexicon);
  std::vector<std::string> out = tokens;
  for (auto &t : out) {
    auto it = counterpart.find(t);
    if (it != counterpart.end()) t = it->second;
  }
  return out;
}

namespace {

void write_documents(const std::vector<Document> &docs, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Document &doc : docs) {
    out << *doc.label << '\t';
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) out << (i ? " " : "") << doc.tokens[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_synth_corpus(const SynthCorpus &corpus, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  write_documents(corpus.source, dir / "source.tsv");
  write_documents(corpus.target, dir / "target.tsv");
  {
    std::ofstream out(dir / "lexicon.tsv", std::ios::binary);
    if (!out) throw IoError("cannot write lexicon.tsv");
    out << "word\tgroup\tpolarity\n";
    for (const auto &e : corpus.lexicon)
      out << e.word << '\t' << group_name(e.group) << '\t' << category_name(e.polarity) << '\n';
  }
  if (!corpus.embeddings.empty()) {
    std::ofstream out(dir / "embeddings.txt", std::ios::binary);
    if (!out) throw IoError("cannot write embeddings.txt");
    out << corpus.embeddings.size() << ' ' << corpus.embeddings.begin()->second.size() << '\n';
    for (const auto &[word, vec] : corpus.embeddings) {
      out << word;
      for (double x : vec) out << ' ' << format_double(x);
      out << '\n';
    }
  }
}

}  // namespace canweave
