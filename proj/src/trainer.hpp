// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "corpus.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "run_config.hpp"

namespace canweave {

/// Adam moments for every trainable tensor, in Model::parameters() order.
struct OptimizerState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(const Model &model);

  /// One bias-corrected update of every parameter from its current gradient.
  void step(const std::vector<NamedParameter> &params, double learning_rate);
  const OptimizerState &state() const { return state_; }

 private:
  OptimizerState state_;
};

/// Global L2 norm of all gradients, rescaled to `max_norm` when larger.
/// Returns the norm before clipping.
double clip_gradients(const std::vector<NamedParameter> &params, double max_norm);

/// The combined objective of one source and one target batch, recorded on
/// the current tape. With alpha = beta = 0 the target batch is evaluated
/// without recording, so it cannot reach any gradient.
struct BatchLoss {
  Tensor l_c;
  Tensor l_d;
  Tensor l_i;
  Tensor total;
};
BatchLoss batch_loss(const Model &model, std::span<const Sample> source_batch, std::span<const Sample> target_batch,
                     const TrainConfig &config);

/// Forward both batches, backward the combined loss, one Adam update. The
/// returned breakdown is evaluated before the update.
LossBreakdown train_step(Model &model, Adam &optimizer, std::span<const Sample> source_batch,
                         std::span<const Sample> target_batch, const TrainConfig &config);

struct StepRecord {
  std::size_t step = 0;   // 1-based, across epochs
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double validation_accuracy = 0.0;
  double mean_supervised_loss = 0.0;
};

struct FitResult {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_accuracy = 0.0;
};

/// 1-based index of the highest accuracy; ties keep the earlier epoch.
std::size_t select_best_epoch(std::span<const double> validation_accuracies);

struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded hold-out of round(fraction * n) samples (at least one each side).
ValidationSplit split_validation(std::size_t n, double fraction, std::uint64_t seed);

/// Trains for config.epochs over labeled source and unlabeled target
/// samples, scoring the held-out source split after every epoch, and
/// leaves the model at its best-validation epoch.
FitResult fit(Model &model, std::span<const Sample> source, std::span<const Sample> target,
              const TrainConfig &config);

/// Vocabulary over source and target training text, encoded samples
/// (target labels dropped), embeddings, source memory and a fresh model.
struct PreparedRun {
  Model model;
  std::vector<Sample> source;
  std::vector<Sample> target;
};

PreparedRun prepare_run(std::span<const Document> source_docs, std::span<const Document> target_docs,
                        const TrainConfig &config, const std::optional<std::filesystem::path> &embeddings);

}  // namespace canweave
