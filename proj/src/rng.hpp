// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace canweave {

/// Mixes a run seed with a purpose tag and an index into an independent
/// stream seed (splitmix64 finalizer). Every random draw in the engine goes
/// through a stream derived this way.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

/// Seeded generator with platform-independent draws. std::mt19937_64 output
/// is fixed by the standard; the distribution helpers below are not, so
/// they are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stream tags.
inline constexpr std::uint64_t kTagEmbedding = 0x656d62;
inline constexpr std::uint64_t kTagTargetMemory = 0x746d656d;
inline constexpr std::uint64_t kTagConv = 0x636f6e76;
inline constexpr std::uint64_t kTagAttention = 0x61747474;
inline constexpr std::uint64_t kTagHead = 0x68656164;
inline constexpr std::uint64_t kTagBatches = 0x62617463;
inline constexpr std::uint64_t kTagFolds = 0x666f6c64;
inline constexpr std::uint64_t kTagValidation = 0x76616c;
inline constexpr std::uint64_t kTagTargetStream = 0x74677374;
inline constexpr std::uint64_t kTagSynth = 0x73796e74;

}  // namespace canweave
