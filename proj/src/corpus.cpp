// SPDX-License-Identifier: Apache-2.0
#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>

#include "error.hpp"
#include "rng.hpp"

namespace canweave {

const char *domain_name(Domain domain) { return domain == Domain::kSource ? "source" : "target"; }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw);
    }
  }
  flush();
  return tokens;
}

namespace {

std::optional<int> parse_label(std::string_view field) {
  int value = 0;
  const auto *end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::vector<Document> read_documents(const std::filesystem::path &path, LabelSchema schema, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Document doc;
    std::string_view text = line;
    const auto tab = line.find('\t');
    if (schema == LabelSchema::kLabeled) {
      if (tab == std::string::npos) throw ParseError("expected `label<TAB>text` in " + path.string(), line_no);
      auto label = parse_label(std::string_view(line).substr(0, tab));
      if (!label || *label < 0 || *label >= num_classes) {
        throw ParseError("label must be an integer in [0, " + std::to_string(num_classes) + ") in " + path.string(),
                         line_no);
      }
      doc.label = label;
      text = std::string_view(line).substr(tab + 1);
    } else if (tab != std::string::npos && parse_label(std::string_view(line).substr(0, tab))) {
      text = std::string_view(line).substr(tab + 1);
    }
    doc.tokens = tokenize(text);
    if (doc.tokens.empty()) throw ParseError("empty document in " + path.string(), line_no);
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw ParseError("dataset " + path.string() + " contains no documents", 0);
  return docs;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

Vocabulary Vocabulary::build(std::span<const std::vector<Document> *const> corpora) {
  Vocabulary vocab;
  for (const auto *docs : corpora)
    for (const Document &doc : *docs)
      for (const std::string &token : doc.tokens) vocab.add(token);
  return vocab;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < 2 || words[kPadId] != "<pad>" || words[kUnkId] != "<unk>")
    throw InvalidArgument("vocabulary word list must start with <pad>, <unk>");
  Vocabulary vocab;
  for (std::size_t i = 2; i < words.size(); ++i) {
    if (vocab.index_.count(words[i])) throw InvalidArgument("duplicate vocabulary word '" + words[i] + "'");
    vocab.add(words[i]);
  }
  return vocab;
}

std::size_t Vocabulary::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

std::size_t Vocabulary::add(const std::string &word) {
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (inserted) words_.push_back(word);
  return it->second;
}

std::uint64_t Vocabulary::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string &w : words_) {
    for (unsigned char c : w) h = (h ^ c) * 0x100000001b3ULL;
    h = (h ^ 0xffU) * 0x100000001b3ULL;  // word separator
  }
  return h;
}

Sample encode(const Document &doc, const Vocabulary &vocab, std::size_t max_len, Domain domain) {
  if (max_len == 0) throw InvalidArgument("max_len must be positive");
  Sample s;
  s.tokens.assign(max_len, kPadId);
  s.valid_len = std::min(max_len, doc.tokens.size());
  for (std::size_t i = 0; i < s.valid_len; ++i) s.tokens[i] = vocab.lookup(doc.tokens[i]);
  s.label = doc.label;
  s.domain = domain;
  return s;
}

std::vector<Sample> encode_all(std::span<const Document> docs, const Vocabulary &vocab, std::size_t max_len,
                               Domain domain, bool keep_labels) {
  std::vector<Sample> out;
  out.reserve(docs.size());
  for (const Document &doc : docs) {
    out.push_back(encode(doc, vocab, max_len, domain));
    if (!keep_labels) out.back().label.reset();
  }
  return out;
}

std::vector<std::string> detokenize(const Sample &sample, const Vocabulary &vocab) {
  std::vector<std::string> words;
  for (std::size_t id : sample.tokens)
    if (id != kPadId) words.push_back(vocab.word(id));
  return words;
}

LoadedCorpus load_dataset(const std::filesystem::path &path, LabelSchema schema, Domain domain, std::size_t max_len,
                          int num_classes) {
  auto docs = read_documents(path, schema, num_classes);
  const std::vector<Document> *corpora[] = {&docs};
  LoadedCorpus out{{}, Vocabulary::build(corpora)};
  out.samples = encode_all(docs, out.vocabulary, max_len, domain);
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t stream_seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(stream_seed);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

FoldPlan make_folds(std::size_t sample_count, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("fold count must be at least 2");
  if (sample_count < k)
    throw InvalidArgument("cannot split " + std::to_string(sample_count) + " samples into " + std::to_string(k) +
                          " folds");
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(sample_count, 0);
  const auto order = seeded_permutation(sample_count, derive_seed(seed, kTagFolds));
  for (std::size_t pos = 0; pos < sample_count; ++pos) plan.assignments[order[pos]] = pos % k;
  return plan;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t f : assignments) ++sizes[f];
  return sizes;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t sample_count, std::size_t batch_size,
                                                   std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  const auto order = seeded_permutation(sample_count, derive_seed(seed, kTagBatches, epoch));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < sample_count; start += batch_size) {
    const std::size_t end = std::min(sample_count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace canweave
