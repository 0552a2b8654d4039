// SPDX-License-Identifier: Apache-2.0
#include "report.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>
#include <thread>

#include "checkpoint.hpp"
#include "error.hpp"
#include "trainer.hpp"

namespace canweave {

double evaluate(const Model &model, std::span<const Sample> labeled) {
  if (labeled.empty()) throw InvalidArgument("evaluate: empty test set");
  std::size_t correct = 0;
  for (const Sample &s : labeled) {
    if (!s.label) throw InvalidArgument("evaluate: test sample without label");
    correct += predict(model, s) == *s.label;
  }
  return static_cast<double>(correct) / static_cast<double>(labeled.size());
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace {

FoldResult run_fold(std::span<const Document> source, std::span<const Document> target, const FoldPlan &plan,
                    std::size_t fold, const TrainConfig &config, const CrossValidationOptions &options) {
  const auto train_idx = plan.train_indices(fold);
  const auto test_idx = plan.test_indices(fold);
  const auto target_train = select(target, std::span<const std::size_t>(train_idx));
  const auto target_test = select(target, std::span<const std::size_t>(test_idx));

  PreparedRun run = prepare_run(source, target_train, config, options.embeddings);
  const FitResult history = fit(run.model, run.source, run.target, config);
  const auto test = encode_all(target_test, run.model.vocabulary, config.max_len, Domain::kTarget);

  FoldResult result;
  result.fold = fold;
  result.accuracy = evaluate(run.model, test);
  result.test_size = test.size();
  result.best_epoch = history.best_epoch;
  if (options.out_dir) {
    const auto dir = *options.out_dir / ("fold_" + std::to_string(fold));
    save_checkpoint(run.model, config, dir / "model.ckpt");
    write_training_log(history, dir / "training_log.jsonl");
  }
  return result;
}

}  // namespace

EvalResult cross_validate(std::span<const Document> source, std::span<const Document> target,
                          const TrainConfig &config, const CrossValidationOptions &options) {
  config.validate();
  if (options.jobs == 0) throw InvalidArgument("cross_validate: jobs must be at least 1");
  for (const Document &doc : target)
    if (!doc.label) throw InvalidArgument("cross_validate: target documents need labels for testing");
  const FoldPlan plan = make_folds(target.size(), config.folds, config.seed);

  std::vector<FoldResult> results(config.folds);
  std::vector<std::exception_ptr> errors(config.folds);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t f = next++; f < config.folds; f = next++) {
      try {
        results[f] = run_fold(source, target, plan, f, config, options);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(options.jobs, config.folds);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  for (const auto &e : errors)
    if (e) std::rethrow_exception(e);

  EvalResult out;
  out.folds = std::move(results);
  out.config_digest = config_digest(config);
  double total = 0.0;
  for (const auto &f : out.folds) total += f.accuracy;
  out.mean = total / static_cast<double>(out.folds.size());
  double sq = 0.0;
  for (const auto &f : out.folds) sq += (f.accuracy - out.mean) * (f.accuracy - out.mean);
  out.stddev = std::sqrt(sq / static_cast<double>(out.folds.size() - 1));
  return out;
}

void write_results_json(const EvalResult &result, const std::filesystem::path &path) {
  nlohmann::ordered_json j;
  j["config_digest"] = result.config_digest;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto &f : result.folds) {
    j["folds"].push_back(
        {{"fold", f.fold}, {"accuracy", f.accuracy}, {"test_size", f.test_size}, {"best_epoch", f.best_epoch}});
  }
  j["mean_accuracy"] = result.mean;
  j["stddev_accuracy"] = result.stddev;
  write_text_file(path, j.dump(2) + "\n");
}

void write_training_log(const FitResult &fit, const std::filesystem::path &path) {
  std::string text;
  std::size_t next_epoch = 0;
  for (std::size_t i = 0; i < fit.steps.size(); ++i) {
    const StepRecord &s = fit.steps[i];
    nlohmann::ordered_json line{{"step", s.step},       {"l_c", s.loss.l_c}, {"l_d", s.loss.l_d},
                                {"l_i", s.loss.l_i},    {"total", s.loss.total}};
    text += line.dump() + "\n";
    const bool epoch_ends = i + 1 == fit.steps.size() || fit.steps[i + 1].epoch != s.epoch;
    if (epoch_ends && next_epoch < fit.epochs.size()) {
      const EpochRecord &e = fit.epochs[next_epoch++];
      nlohmann::ordered_json summary{{"epoch", e.epoch},
                                     {"val_accuracy", e.validation_accuracy},
                                     {"mean_l_c", e.mean_supervised_loss},
                                     {"best", e.epoch == fit.best_epoch}};
      text += summary.dump() + "\n";
    }
  }
  write_text_file(path, text);
}

// ---------------------------------------------------------------------------
// Heatmaps

HeatmapRecord heatmap_record(const Model &model, const Sample &sample) {
  NoGradGuard no_grad;
  const SampleForward f = forward(model, sample);
  HeatmapRecord r;
  for (std::size_t i = 0; i < sample.valid_len; ++i) r.tokens.push_back(model.vocabulary.word(sample.tokens[i]));
  r.weights = averaged_attention(f.attention);
  const auto probs = f.classification.probabilities.values();
  r.probabilities.assign(probs.begin(), probs.end());
  r.predicted = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  r.label = sample.label;
  r.domain = sample.domain;
  return r;
}

namespace {

std::string escape_html(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

}  // namespace

std::string render_heatmap_html(std::span<const HeatmapRecord> records) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Category attention</title>\n"
         "<style>\n"
         "body { font-family: sans-serif; margin: 2em; }\n"
         ".sample { margin-bottom: 1.5em; }\n"
         ".row { margin: 0.2em 0; line-height: 1.8; }\n"
         ".tag { display: inline-block; width: 3em; font-weight: bold; }\n"
         ".tok { padding: 0.1em 0.25em; margin-right: 0.1em; border-radius: 3px; }\n"
         ".meta { color: #555; font-size: 0.9em; }\n"
         "</style>\n</head>\n<body>\n<h1>Category attention</h1>\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const HeatmapRecord &r = records[i];
    out << "<div class=\"sample\" id=\"sample-" << i << "\">\n<div class=\"meta\">#" << i << " "
        << domain_name(r.domain) << " predicted=" << category_name(r.predicted);
    if (r.label) out << " label=" << category_name(*r.label);
    out << "</div>\n";
    for (int c = kNumClasses - 1; c >= 0; --c) {
      const auto &w = r.weights[c];
      double peak = 0.0;
      for (double x : w) peak = std::max(peak, x);
      const char *rgb = c == kPositive ? "0,150,60" : "200,30,30";
      out << "<div class=\"row\"><span class=\"tag\">" << category_name(c) << "</span>";
      for (std::size_t l = 0; l < r.tokens.size(); ++l) {
        const double intensity = peak > 0.0 ? w[l] / peak : 0.0;
        out << "<span class=\"tok\" title=\"" << fixed4(w[l]) << "\" style=\"background: rgba(" << rgb << ","
            << fixed4(intensity) << ")\">" << escape_html(r.tokens[l]) << "</span>";
      }
      out << "</div>\n";
    }
    out << "</div>\n";
  }
  out << "</body>\n</html>\n";
  return out.str();
}

std::string render_heatmap_json(std::span<const HeatmapRecord> records) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const HeatmapRecord &r : records) {
    nlohmann::ordered_json item;
    item["domain"] = domain_name(r.domain);
    item["tokens"] = r.tokens;
    for (int c = kNumClasses - 1; c >= 0; --c) item["weights"][category_name(c)] = r.weights[c];
    item["probabilities"] = r.probabilities;
    item["predicted"] = r.predicted;
    item["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
    j.push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

void emit_heatmap(const Model &model, std::span<const Sample> samples, const std::filesystem::path &out_dir) {
  std::vector<HeatmapRecord> records;
  for (const Sample &s : samples) records.push_back(heatmap_record(model, s));
  write_text_file(out_dir / "heatmap.html", render_heatmap_html(records));
  write_text_file(out_dir / "heatmap.json", render_heatmap_json(records));
}

// ---------------------------------------------------------------------------
// Category memory tables

std::string render_cmm_neighbors(const Model &model, std::size_t n) {
  std::ostringstream out;
  out << "category\tslot\trank\tbefore_word\tbefore_similarity\tafter_word\tafter_similarity\n";
  const std::size_t d = model.embeddings.dim;
  EmbeddingTable initial_table;
  initial_table.matrix = model.embeddings_initial;
  initial_table.dim = d;
  for (int c = kNumClasses - 1; c >= 0; --c) {
    for (std::size_t m = 0; m < model.target_memory.size; ++m) {
      const auto initial = model.target_memory_initial[c].values().subspan(m * d, d);
      const auto current = model.target_memory.entry(c, m, model.embeddings);
      const auto before = nearest_vocab_neighbors(initial, initial_table, model.vocabulary, n);
      const auto after = nearest_vocab_neighbors(current, model.embeddings, model.vocabulary, n);
      for (std::size_t r = 0; r < std::min(before.size(), after.size()); ++r) {
        out << category_name(c) << '\t' << m << '\t' << r + 1 << '\t' << before[r].word << '\t'
            << fixed4(before[r].similarity) << '\t' << after[r].word << '\t' << fixed4(after[r].similarity) << '\n';
      }
    }
  }
  return out.str();
}

void emit_cmm_report(const Model &model, std::size_t n, const std::filesystem::path &path) {
  write_text_file(path, render_cmm_neighbors(model, n));
}

std::string render_source_cmm(const CategoryMemory &memory, const Vocabulary &vocab, const CountTable *counts) {
  std::ostringstream out;
  out << "category\trank\tword";
  std::vector<double> scores;
  if (counts) {
    out << "\tscore\tpositive_count\tnegative_count";
    scores = score_words(*counts);
  }
  out << '\n';
  for (int c = kNumClasses - 1; c >= 0; --c) {
    for (std::size_t r = 0; r < memory.words[c].size(); ++r) {
      const std::size_t id = memory.words[c][r];
      out << category_name(c) << '\t' << r + 1 << '\t' << vocab.word(id);
      if (counts) out << '\t' << fixed4(scores[id]) << '\t' << counts->positive[id] << '\t' << counts->negative[id];
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace canweave
