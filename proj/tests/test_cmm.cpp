// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "cmm.hpp"
#include "error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace canweave;
using namespace canweave::testing;

namespace {

struct Built {
  Vocabulary vocab;
  CountTable counts;
  CategoryMemory memory;
};

Built build(const std::vector<Document> &docs, std::size_t m) {
  const std::vector<Document> *corpora[] = {&docs};
  Built b{Vocabulary::build(corpora), {}, {}};
  const auto samples = encode_all(docs, b.vocab, 64, Domain::kSource);
  b.counts = count_words(samples, b.vocab.size());
  b.memory = build_source_cmm(b.counts, b.vocab, m);
  return b;
}

std::vector<std::string> words_of(const Built &b, int c) {
  std::vector<std::string> out;
  for (auto id : b.memory.words[c]) out.push_back(b.vocab.word(id));
  return out;
}

std::vector<Document> random_corpus(Rng &rng, std::size_t docs, std::size_t vocab) {
  std::vector<Document> out;
  for (std::size_t i = 0; i < docs; ++i) {
    Document d{static_cast<int>(i % 2), {}};
    const std::size_t len = 1 + rng.below(8);
    for (std::size_t j = 0; j < len; ++j) d.tokens.push_back("t" + std::to_string(rng.below(vocab)));
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

TEST_CASE("score examples") {
  CountTable c;
  c.positive = {0, 0, 2, 4, 0};
  c.negative = {0, 0, 0, 4, 3};
  c.positive_docs = c.negative_docs = 1;
  const auto s = score_words(c);
  CHECK(s[2] == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(1.0986).epsilon(1e-4));
  CHECK(s[3] == 0.0);
  std::swap(c.positive, c.negative);
  const auto swapped = score_words(c);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(swapped[i] == -s[i]);
  c.positive_docs = 0;
  CHECK_THROWS_AS(score_words(c), InvalidArgument);
}

TEST_CASE("good/bad toy corpus") {
  const std::vector<Document> docs{{1, {"good", "good", "fun"}}, {0, {"bad", "sad"}}};
  const Built b = build(docs, 1);
  CHECK(words_of(b, kPositive) == std::vector<std::string>{"good"});
  CHECK(words_of(b, kNegative) == std::vector<std::string>{"bad"});
  CHECK_THROWS_AS(build(docs, 0), InvalidArgument);
  CHECK_THROWS_AS(build(docs, 3), InvalidArgument);
}

TEST_CASE("counts equal summed token multiplicities") {
  Rng rng(4);
  const auto docs = random_corpus(rng, 30, 12);
  const Built b = build(docs, 2);
  std::uint64_t total = 0, expected = 0;
  for (std::size_t i = 0; i < b.vocab.size(); ++i) total += b.counts.positive[i] + b.counts.negative[i];
  for (const auto &d : docs) expected += d.tokens.size();
  CHECK(total == expected);
  CHECK(b.counts.positive_docs == 15);
  CHECK(b.counts.negative_docs == 15);
}

TEST_CASE("exactly M distinct entries per category, PAD and UNK excluded") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Built b = build(random_corpus(rng, 20, 15), 3);
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(b.memory.words[c].size() == 3);
      std::set<std::size_t> ids(b.memory.words[c].begin(), b.memory.words[c].end());
      CHECK(ids.size() == 3);
      CHECK(ids.count(kPadId) == 0);
      CHECK(ids.count(kUnkId) == 0);
    }
  }
}

TEST_CASE("source memory matches the brute-force oracle on 200 random corpora") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto docs = random_corpus(rng, 2 + rng.below(20), 4 + rng.below(12));
    const std::size_t m = 1 + rng.below(3);
    std::set<std::string> distinct;
    for (const auto &d : docs) distinct.insert(d.tokens.begin(), d.tokens.end());
    if (distinct.size() < 2 * m) continue;
    const Built b = build(docs, m);
    std::vector<std::pair<int, std::vector<std::string>>> plain;
    for (const auto &d : docs) plain.emplace_back(*d.label, d.tokens);
    const auto ref = oracle::source_cmm(plain, m);
    CHECK(words_of(b, kPositive) == ref.positive);
    CHECK(words_of(b, kNegative) == ref.negative);
  }
}

TEST_CASE("swapping labels swaps the category lists exactly") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto docs = random_corpus(rng, 4 + rng.below(20), 5 + rng.below(15));
    std::set<std::string> distinct;
    for (const auto &d : docs) distinct.insert(d.tokens.begin(), d.tokens.end());
    const std::size_t m = std::min<std::size_t>(3, distinct.size() / 2);
    const Built b = build(docs, m);
    for (auto &d : docs) d.label = 1 - *d.label;
    const Built swapped = build(docs, m);
    CHECK(words_of(b, kPositive) == words_of(swapped, kNegative));
    CHECK(words_of(b, kNegative) == words_of(swapped, kPositive));
  }
}

TEST_CASE("score sign is preserved when the corpus is duplicated") {
  Rng rng(8);
  auto docs = random_corpus(rng, 12, 8);
  const Built once = build(docs, 1);
  const auto original = docs;
  for (int k = 0; k < 3; ++k) docs.insert(docs.end(), original.begin(), original.end());
  const Built four = build(docs, 1);
  const auto s1 = score_words(once.counts), s4 = score_words(four.counts);
  for (std::size_t i = 2; i < s1.size(); ++i) {
    CHECK((s1[i] > 0) == (s4[i] > 0));
    CHECK((s1[i] < 0) == (s4[i] < 0));
  }
}

TEST_CASE("source memory rows are live views of the embedding table") {
  const std::vector<Document> docs{{1, {"good", "good", "fun"}}, {0, {"bad", "sad"}}};
  const Built b = build(docs, 2);
  EmbeddingTable table = random_embeddings(b.vocab.size(), 3, 2);
  const auto id = b.memory.words[kPositive][0];
  table.matrix.mutable_values()[id * 3 + 1] = 42.0;
  CHECK(b.memory.matrix(kPositive, table).at(0, 1) == 42.0);
  CHECK(b.memory.entry(kPositive, 0, table)[1] == 42.0);
  current_tape().clear();
  backward(sum(b.memory.matrix(kPositive, table)));
  const auto g = table.matrix.grad();
  for (std::size_t j = 0; j < 3; ++j) CHECK(g[id * 3 + j] == 1.0);
}

TEST_CASE("target memory is seeded uniform(-0.25, 0.25)") {
  const auto a = init_target_cmm(4, 3, 1), b = init_target_cmm(4, 3, 1), c = init_target_cmm(4, 3, 2);
  for (int k = 0; k < kNumClasses; ++k) {
    CHECK(a.vectors[k].shape() == Shape{4, 3});
    CHECK(a.vectors[k].requires_grad());
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(a.vectors[k].at(i) == b.vectors[k].at(i));
      CHECK(std::abs(a.vectors[k].at(i)) < 0.25);
    }
  }
  CHECK(a.vectors[0].at(0) != c.vectors[0].at(0));
}

TEST_CASE("nearest neighbours") {
  const Vocabulary vocab = Vocabulary::from_words({"<pad>", "<unk>", "great", "fine", "awful", "meh", "plot"});
  EmbeddingTable t = random_embeddings(vocab.size(), 2, 1);
  const std::vector<double> rows{0, 0, 9, 9, 1, 0, 0.8, 0.6, 0, 1, -1, 0, 0.6, 0.8};
  std::copy(rows.begin(), rows.end(), t.matrix.mutable_values().begin());

  SUBCASE("self neighbour comes first") {
    const auto n = nearest_vocab_neighbors(std::vector<double>{0.8, 0.6}, t, vocab, 1);
    CHECK(n[0].word == "fine");
    CHECK(n[0].similarity == doctest::Approx(1.0));
  }
  SUBCASE("ranking matches a brute-force cosine sort") {
    const std::vector<double> q{0.3, -0.7};
    const auto n = nearest_vocab_neighbors(q, t, vocab, 5);
    std::vector<std::pair<long double, std::string>> ref;
    for (std::size_t id = 2; id < vocab.size(); ++id) {
      std::vector<long double> row{rows[id * 2], rows[id * 2 + 1]};
      ref.emplace_back(-oracle::cosine({0.3L, -0.7L}, row), vocab.word(id));
    }
    std::sort(ref.begin(), ref.end());
    for (std::size_t i = 0; i < 5; ++i) CHECK(n[i].word == ref[i].second);
  }
  SUBCASE("orthogonal ties resolve alphabetically") {
    const auto n = nearest_vocab_neighbors(std::vector<double>{0, 0}, t, vocab, 5);
    std::vector<std::string> names;
    for (const auto &x : n) names.push_back(x.word);
    CHECK(names == std::vector<std::string>{"awful", "fine", "great", "meh", "plot"});
  }
}
