// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "embeddings.hpp"
#include "error.hpp"
#include "test_util.hpp"

using namespace canweave;
using namespace canweave::testing;

namespace {

Vocabulary small_vocab() { return Vocabulary::from_words({"<pad>", "<unk>", "good", "bad", "plot"}); }

}  // namespace

TEST_CASE("pretrained rows are copied exactly, the rest seeded") {
  const auto dir = temp_dir("emb_load");
  write_file(dir / "e.txt", "3 2\ngood 0.125 -1.5\nextra 9 9\nbad 1e-3 2.75\n");
  const Vocabulary vocab = small_vocab();
  const EmbeddingTable t = load_pretrained(dir / "e.txt", vocab, 2, 5);
  CHECK(t.matrix.at(2, 0) == 0.125);
  CHECK(t.matrix.at(2, 1) == -1.5);
  CHECK(t.matrix.at(3, 0) == 1e-3);
  CHECK(t.matrix.at(3, 1) == 2.75);
  CHECK(t.pretrained[2]);
  CHECK_FALSE(t.pretrained[4]);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(t.matrix.at(0, j) == 0.0);
    CHECK(std::abs(t.matrix.at(4, j)) < 0.25);
  }
  const EmbeddingTable again = load_pretrained(dir / "e.txt", vocab, 2, 5);
  CHECK(std::equal(t.matrix.values().begin(), t.matrix.values().end(), again.matrix.values().begin()));
}

TEST_CASE("embedding file errors") {
  const auto dir = temp_dir("emb_errors");
  const Vocabulary vocab = small_vocab();
  write_file(dir / "dim.txt", "1 3\ngood 1 2 3\n");
  CHECK_THROWS_AS(load_pretrained(dir / "dim.txt", vocab, 2, 1), InvalidArgument);
  write_file(dir / "short.txt", "2 2\ngood 1 2\nbad 1\n");
  try {
    load_pretrained(dir / "short.txt", vocab, 2, 1);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 3);
  }
  write_file(dir / "count.txt", "3 2\ngood 1 2\n");
  CHECK_THROWS_AS(load_pretrained(dir / "count.txt", vocab, 2, 1), ParseError);
  CHECK_THROWS_AS(load_pretrained(dir / "none.txt", vocab, 2, 1), IoError);
}

TEST_CASE("random table: PAD zero, others in range, seeded") {
  const EmbeddingTable t = random_embeddings(50, 4, 3);
  for (std::size_t j = 0; j < 4; ++j) CHECK(t.matrix.at(0, j) == 0.0);
  for (std::size_t i = 4; i < t.matrix.size(); ++i) CHECK(std::abs(t.matrix.at(i)) < 0.25);
  const EmbeddingTable u = random_embeddings(50, 4, 3);
  const EmbeddingTable v = random_embeddings(50, 4, 4);
  CHECK(std::equal(t.matrix.values().begin(), t.matrix.values().end(), u.matrix.values().begin()));
  CHECK_FALSE(std::equal(t.matrix.values().begin(), t.matrix.values().end(), v.matrix.values().begin()));
}

TEST_CASE("embed gathers rows including PAD") {
  EmbeddingTable t = random_embeddings(5, 3, 1);
  Sample s;
  s.tokens = {2, 3, 0};
  s.valid_len = 2;
  const Tensor e = t.embed(s);
  REQUIRE(e.shape() == Shape{3, 3});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(e.at(0, j) == t.matrix.at(2, j));
    CHECK(e.at(1, j) == t.matrix.at(3, j));
    CHECK(e.at(2, j) == 0.0);
  }
  CHECK(t.embed_valid(s).shape() == Shape{2, 3});
}

TEST_CASE("embedding gradient is a scatter-add") {
  EmbeddingTable t = random_embeddings(5, 2, 1);
  Sample s;
  s.tokens = {2, 4, 2, 0};
  s.valid_len = 3;
  current_tape().clear();
  backward(sum(t.embed(s)));
  const auto g = t.matrix.grad();
  const std::vector<double> expected{0, 0, 0, 0, 2, 2, 0, 0, 1, 1};
  for (std::size_t i = 2; i < expected.size(); ++i) CHECK(g[i] == expected[i]);
  t.zero_pad_grad();
  CHECK(t.matrix.grad()[0] == 0.0);
  CHECK(t.matrix.grad()[1] == 0.0);
}

TEST_CASE("embedding lookup gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    EmbeddingTable t = random_embeddings(6, 3, seed);
    Rng rng(seed);
    Sample s;
    s.tokens = {1 + rng.below(5), 1 + rng.below(5), 1 + rng.below(5)};
    s.valid_len = 3;
    const Tensor w = random_tensor(rng, {3, 3}, -1, 1, false);
    const auto r = check_gradients({{"emb", t.matrix}}, [&] { return sum(tanh(mul(t.embed(s), w))); });
    CHECK(r.max_relative_error < 1e-6);
    CHECK(r.skipped * 20 <= r.checked);
  }
}
