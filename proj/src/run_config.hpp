// SPDX-License-Identifier: Apache-2.0
//
// Training hyperparameters and the fully resolved run description, with a
// flat `key = value` text form used for config files and for echoing the
// resolved run next to its outputs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"
#include "synth.hpp"

namespace canweave {

struct TrainConfig {
  std::size_t memory_size = 50;  // M
  std::size_t top_k = 5;         // K
  double alpha = 0.05;
  double beta = 0.01;
  std::size_t dim = 300;
  std::vector<std::size_t> widths{3, 4, 5};
  std::size_t filters = 100;  // T per width
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  std::size_t max_len = 256;
  double val_fraction = 0.10;
  double clip_norm = 5.0;  // global gradient norm; 0 disables
  std::size_t folds = 10;

  /// Throws InvalidArgument naming the offending key(s).
  void validate() const;
  ModelShape model_shape() const;
};

/// Ordered `key -> value` text form of a config (values round-trip exactly).
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig &config);
/// Sets one key from text. Throws InvalidArgument for unknown keys or bad values.
void set_config_value(TrainConfig &config, const std::string &key, const std::string &value);
/// Hex FNV-1a digest of the canonical entries.
std::string config_digest(const TrainConfig &config);

/// A subcommand with everything it needs, resolved from config file,
/// environment and flags.
struct RunSpec {
  std::string command;
  TrainConfig train;
  SynthSpec synth;
  std::optional<std::filesystem::path> source;
  std::optional<std::filesystem::path> target;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> test;
  std::string test_domain = "target";
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
  std::size_t neighbors = 5;
  std::size_t heatmap_samples = 20;
  bool seed_set = false;  // seed given explicitly (file or flag)

  /// Routes a key to the run, training or synthesis settings.
  void set(const std::string &key, const std::string &value);
  std::vector<std::pair<std::string, std::string>> entries() const;
  /// Checks the training settings and the inputs the command needs.
  void validate() const;

  static const std::vector<std::string> &commands();
};

/// Parses `key = value` lines; `#` starts a comment; quoted values are unquoted.
std::map<std::string, std::string> parse_config_text(const std::string &text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path &path);
std::string format_entries(const std::vector<std::pair<std::string, std::string>> &entries);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

/// Environment variable consulted for the seed when none is configured.
inline constexpr const char *kSeedEnvVar = "CANWEAVE_SEED";

}  // namespace canweave
