// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmm.hpp"
#include "model.hpp"
#include "run_config.hpp"

namespace canweave {

struct FitResult;

/// Fraction of labeled samples whose argmax prediction (ties to the lower
/// class) equals the label.
double evaluate(const Model &model, std::span<const Sample> labeled);

struct FoldResult {
  std::size_t fold = 0;
  double accuracy = 0.0;
  std::size_t test_size = 0;
  std::size_t best_epoch = 0;
};

struct EvalResult {
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation over folds
  std::string config_digest;
};

struct CrossValidationOptions {
  std::optional<std::filesystem::path> embeddings;
  std::size_t jobs = 1;
  /// When set, each fold writes fold_<i>/model.ckpt and fold_<i>/training_log.jsonl.
  std::optional<std::filesystem::path> out_dir;
};

/// k folds over the labeled target documents. Each fold trains on all source
/// documents plus the unlabeled text of the other target folds and is scored
/// on its own target fold. Folds run as independent jobs.
EvalResult cross_validate(std::span<const Document> source, std::span<const Document> target,
                          const TrainConfig &config, const CrossValidationOptions &options = {});

void write_results_json(const EvalResult &result, const std::filesystem::path &path);
void write_training_log(const FitResult &fit, const std::filesystem::path &path);

struct HeatmapRecord {
  std::vector<std::string> tokens;
  /// Per category, the attention averaged over the K matched entries.
  std::vector<std::vector<double>> weights;
  std::vector<double> probabilities;
  int predicted = 0;
  std::optional<int> label;
  Domain domain = Domain::kTarget;
};

HeatmapRecord heatmap_record(const Model &model, const Sample &sample);
std::string render_heatmap_html(std::span<const HeatmapRecord> records);
std::string render_heatmap_json(std::span<const HeatmapRecord> records);
/// Writes heatmap.html and heatmap.json into `out_dir`.
void emit_heatmap(const Model &model, std::span<const Sample> samples, const std::filesystem::path &out_dir);

/// Top-n vocabulary neighbours of every target memory slot as TSV: the
/// initial slot among the initial embeddings, and the current slot among
/// the current embeddings.
std::string render_cmm_neighbors(const Model &model, std::size_t n);
void emit_cmm_report(const Model &model, std::size_t n, const std::filesystem::path &path);

/// Ranked source memory words per category; with counts the score and
/// occurrence columns are filled.
std::string render_source_cmm(const CategoryMemory &memory, const Vocabulary &vocab,
                              const CountTable *counts = nullptr);

void write_text_file(const std::filesystem::path &path, const std::string &text);

}  // namespace canweave
