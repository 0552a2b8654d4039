// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container:
//
//   bytes 0..7   magic "CANWEAVE"
//   u32 LE       format version
//   u64 LE       length of the JSON manifest
//   manifest     UTF-8 JSON: config entries, vocabulary and its digest,
//                source memory word lists, tensor names and shapes
//   payload      every tensor in manifest order as little-endian float64
#pragma once

#include <filesystem>

#include "model.hpp"
#include "run_config.hpp"

namespace canweave {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  TrainConfig config;
};

void save_checkpoint(const Model &model, const TrainConfig &config, const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace canweave
