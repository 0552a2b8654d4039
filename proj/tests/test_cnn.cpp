// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "cnn_encoder.hpp"
#include "error.hpp"
#include "test_util.hpp"

using namespace canweave;
using namespace canweave::testing;

namespace {

Tensor pad_rows(const Tensor &t, std::size_t rows) {
  std::vector<double> v(t.values().begin(), t.values().end());
  v.resize(rows * t.dim(1), 0.0);
  return Tensor::from({rows, t.dim(1)}, std::move(v));
}

// max over full windows (one zero-extended window when the sentence is
// shorter than h) of relu(f . window + b).
double pooled_oracle(const Tensor &x, std::size_t valid, const Tensor &f, const Tensor &b, std::size_t filter,
                     std::size_t h) {
  const std::size_t d = x.dim(1);
  const std::size_t windows = valid >= h ? valid - h + 1 : 1;
  double best = 0.0;
  for (std::size_t s = 0; s < windows; ++s) {
    long double acc = b.at(filter);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t k = 0; k < d; ++k)
        if (s + r < valid) acc += static_cast<long double>(f.at(filter, r * d + k)) * x.at(s + r, k);
    best = std::max(best, static_cast<double>(acc));
  }
  return best;
}

}  // namespace

TEST_CASE("zero embeddings and zero biases pool to zero") {
  const ConvBank bank = init_conv_bank({3, 4, 5}, 2, 4, 1);
  const Tensor m = encode(bank, Tensor::zeros({7, 4}), 7);
  CHECK(m.shape() == Shape{6});
  for (double x : m.values()) CHECK(x == 0.0);
}

TEST_CASE("pooled features match a sliding-window oracle") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const ConvBank bank = init_conv_bank({2, 3, 5}, 3, 4, seed);
    for (auto &b : bank.biases) {
      Tensor t = b;
      for (double &x : t.mutable_values()) x = rng.uniform(-0.2, 0.2);
    }
    const std::size_t n = 1 + rng.below(8);
    const Tensor x = random_tensor(rng, {n, 4}, -1, 1, false);
    const std::size_t valid = 1 + rng.below(n);
    const Tensor m = encode(bank, x, valid);
    REQUIRE(m.size() == 9);
    for (std::size_t w = 0; w < 3; ++w)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(m.at(w * 3 + j) -
                       pooled_oracle(x, valid, bank.filters[w], bank.biases[w], j, bank.widths[w])) < 1e-12);
  }
}

TEST_CASE("a filter equal to a planted trigram peaks at that window") {
  ConvBank bank = init_conv_bank({3}, 1, 2, 1);
  const Tensor x = Tensor::from({5, 2}, {0.1, 0, 0, 0.1, 1, 2, 3, -1, 0.5, 0.5});
  Tensor f = bank.filters[0];
  const std::vector<double> trigram{1, 2, 3, -1, 0.5, 0.5};  // rows 2..4
  std::copy(trigram.begin(), trigram.end(), f.mutable_values().begin());
  const Tensor m = encode(bank, x, 5);
  CHECK(m.at(0) == doctest::Approx(1 + 4 + 9 + 1 + 0.25 + 0.25));
}

TEST_CASE("appending PAD leaves pooled features unchanged") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    const ConvBank bank = init_conv_bank({1, 2, 3}, 2, 3, seed);
    const std::size_t n = 1 + rng.below(6);
    const Tensor x = random_tensor(rng, {n, 3}, -1, 1, false);
    const Tensor a = encode(bank, x, n);
    const Tensor b = encode(bank, pad_rows(x, n + 4), n);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end()));
  }
}

TEST_CASE("classifier head") {
  SUBCASE("zero weights are uniform") {
    ClassifierHead head{Tensor::zeros({3, 2}, true)};
    const auto out = classify(Tensor::vector({1, 2}), Tensor::vector({3}), head);
    CHECK(out.features.shape() == Shape{3});
    CHECK(out.probabilities.at(0) == 0.5);
    CHECK(out.probabilities.at(1) == 0.5);
  }
  SUBCASE("logits (ln 3, 0) give (0.75, 0.25)") {
    ClassifierHead head{Tensor::from({2, 2}, {std::log(3.0), 0, 0, 0}, true)};
    const auto out = classify(Tensor::vector({1}), Tensor::vector({0}), head);
    CHECK(out.probabilities.at(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(out.probabilities.at(1) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("outputs are on the simplex") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Rng rng(seed);
      const ClassifierHead head{random_tensor(rng, {5, 2}, -3, 3)};
      const auto out = classify(random_tensor(rng, {2}, -5, 5), random_tensor(rng, {3}, -5, 5), head);
      CHECK(std::abs(out.probabilities.at(0) + out.probabilities.at(1) - 1.0) < 1e-12);
      CHECK(out.probabilities.at(0) >= 0.0);
    }
  }
  CHECK_THROWS_AS(classify(Tensor::vector({1}), Tensor::vector({1}), ClassifierHead{Tensor::zeros({3, 2})}),
                  ShapeError);
}

TEST_CASE("o has length d + |H| T") {
  const ConvBank bank = init_conv_bank({3, 4, 5}, 100, 300, 1);
  CHECK(bank.output_size() == 300);
  const ClassifierHead head = init_head(300 + bank.output_size(), 2, 1);
  CHECK(head.weight.shape() == Shape{600, 2});
}

TEST_CASE("conv and head gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    ConvBank bank = init_conv_bank({2, 3}, 3, 3, seed);
    for (std::size_t i = 0; i < bank.filters.size(); ++i) {
      Tensor f = bank.filters[i], b = bank.biases[i];
      for (double &x : f.mutable_values()) x = rng.uniform(-1, 1);
      for (double &x : b.mutable_values()) x = rng.uniform(-0.5, 0.5);
    }
    const ClassifierHead head{random_tensor(rng, {3 + 6, 2})};
    const Tensor x = random_tensor(rng, {5, 3});
    const Tensor v = random_tensor(rng, {3});
    std::vector<NamedParameter> params{{"head", head.weight}, {"words", x}};
    for (std::size_t i = 0; i < bank.filters.size(); ++i) {
      params.push_back({"filters" + std::to_string(i), bank.filters[i]});
      params.push_back({"bias" + std::to_string(i), bank.biases[i]});
    }
    const auto r = check_gradients(params, [&] {
      return log(pick(classify(v, encode(bank, x, 4), head).probabilities, seed % 2));
    });
    INFO("seed " << seed << " " << r.worst);
    CHECK(r.max_relative_error < 1e-6);
    CHECK(r.skipped * 20 <= r.checked);
  }
}
