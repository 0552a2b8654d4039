// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <json.hpp>

#include "checkpoint.hpp"
#include "error.hpp"
#include "report.hpp"
#include "trainer.hpp"

namespace canweave {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Labeled when every line carries a label column, otherwise text only.
std::vector<Document> read_any(const fs::path &path) {
  try {
    return read_documents(path, LabelSchema::kLabeled, kNumClasses);
  } catch (const ParseError &) {
    return read_documents(path, LabelSchema::kUnlabeled, kNumClasses);
  }
}

Domain parse_domain(const std::string &name) { return name == "source" ? Domain::kSource : Domain::kTarget; }

Json cmd_train(const RunSpec &spec) {
  const auto source = read_documents(*spec.source, LabelSchema::kLabeled, kNumClasses);
  const auto target = read_documents(*spec.target, LabelSchema::kUnlabeled, kNumClasses);
  PreparedRun run = prepare_run(source, target, spec.train, spec.embeddings);
  const FitResult history = fit(run.model, run.source, run.target, spec.train);
  save_checkpoint(run.model, spec.train, spec.out_dir / "model.ckpt");
  write_training_log(history, spec.out_dir / "training_log.jsonl");
  return {{"command", "train"},
          {"best_epoch", history.best_epoch},
          {"validation_accuracy", history.best_validation_accuracy},
          {"checkpoint", (spec.out_dir / "model.ckpt").string()}};
}

Json cmd_eval(const RunSpec &spec) {
  const Checkpoint ck = load_checkpoint(*spec.checkpoint);
  const auto docs = read_documents(*spec.test, LabelSchema::kLabeled, kNumClasses);
  const auto samples = encode_all(docs, ck.model.vocabulary, ck.config.max_len, parse_domain(spec.test_domain));
  const double accuracy = evaluate(ck.model, samples);
  Json results{{"config_digest", config_digest(ck.config)},
               {"domain", spec.test_domain},
               {"test_size", samples.size()},
               {"accuracy", accuracy}};
  write_text_file(spec.out_dir / "results.json", results.dump(2) + "\n");
  return {{"command", "eval"}, {"accuracy", accuracy}, {"test_size", samples.size()}};
}

Json cmd_cv(const RunSpec &spec) {
  const auto source = read_documents(*spec.source, LabelSchema::kLabeled, kNumClasses);
  const auto target = read_documents(*spec.target, LabelSchema::kLabeled, kNumClasses);
  CrossValidationOptions options;
  options.embeddings = spec.embeddings;
  options.jobs = spec.jobs;
  options.out_dir = spec.out_dir;
  const EvalResult result = cross_validate(source, target, spec.train, options);
  write_results_json(result, spec.out_dir / "results.json");
  return {{"command", "cv"}, {"mean_accuracy", result.mean}, {"stddev_accuracy", result.stddev}};
}

Json cmd_extract_cmm(const RunSpec &spec) {
  const auto source = read_documents(*spec.source, LabelSchema::kLabeled, kNumClasses);
  std::vector<Document> target;
  if (spec.target) target = read_documents(*spec.target, LabelSchema::kUnlabeled, kNumClasses);
  const std::vector<Document> *corpora[] = {&source, &target};
  const Vocabulary vocab = Vocabulary::build(corpora);
  const auto samples = encode_all(source, vocab, spec.train.max_len, Domain::kSource);
  const CountTable counts = count_words(samples, vocab.size());
  const CategoryMemory memory = build_source_cmm(counts, vocab, spec.train.memory_size);
  write_text_file(spec.out_dir / "cmm_source.tsv", render_source_cmm(memory, vocab, &counts));
  return {{"command", "extract-cmm"}, {"memory_size", memory.size}, {"vocabulary_size", vocab.size()}};
}

Json cmd_export_cmm(const RunSpec &spec) {
  const Checkpoint ck = load_checkpoint(*spec.checkpoint);
  emit_cmm_report(ck.model, spec.neighbors, spec.out_dir / "cmm_neighbors.tsv");
  write_text_file(spec.out_dir / "cmm_source.tsv", render_source_cmm(ck.model.source_memory, ck.model.vocabulary));
  return {{"command", "export-cmm"}, {"neighbors", spec.neighbors}};
}

Json cmd_heatmap(const RunSpec &spec) {
  const Checkpoint ck = load_checkpoint(*spec.checkpoint);
  auto docs = read_any(*spec.test);
  if (spec.heatmap_samples > 0 && docs.size() > spec.heatmap_samples) docs.resize(spec.heatmap_samples);
  const auto samples = encode_all(docs, ck.model.vocabulary, ck.config.max_len, parse_domain(spec.test_domain));
  emit_heatmap(ck.model, samples, spec.out_dir);
  return {{"command", "heatmap"}, {"samples", samples.size()}};
}

Json cmd_synth(const RunSpec &spec) {
  const SynthCorpus corpus = synthesize(spec.synth);
  write_synth_corpus(corpus, spec.out_dir);
  return {{"command", "synth-data"},
          {"source_docs", corpus.source.size()},
          {"target_docs", corpus.target.size()},
          {"embeddings", !corpus.embeddings.empty()}};
}

}  // namespace

std::string run_command(const RunSpec &spec) {
  spec.validate();
  fs::create_directories(spec.out_dir);
  write_text_file(spec.out_dir / "run_spec.toml", format_entries(spec.entries()));
  Json summary;
  if (spec.command == "train") summary = cmd_train(spec);
  else if (spec.command == "eval") summary = cmd_eval(spec);
  else if (spec.command == "cv") summary = cmd_cv(spec);
  else if (spec.command == "extract-cmm") summary = cmd_extract_cmm(spec);
  else if (spec.command == "export-cmm") summary = cmd_export_cmm(spec);
  else if (spec.command == "heatmap") summary = cmd_heatmap(spec);
  else summary = cmd_synth(spec);
  return summary.dump();
}

}  // namespace canweave
