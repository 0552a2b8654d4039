// SPDX-License-Identifier: Apache-2.0
//
// canweave command-line front end over the C API.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.
#include <CLI11.hpp>
#include <canweave/canweave.h>

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct FlagDef {
  const char *key;
  const char *help;
};

const std::vector<FlagDef> kTrainFlags{
    {"memory-size", "category memory entries per class (M)"},
    {"top-k", "matched memory entries per class (K)"},
    {"alpha", "weight of the attention distribution loss"},
    {"beta", "weight of the domain discrepancy loss"},
    {"dim", "embedding dimension"},
    {"widths", "convolution widths, comma separated"},
    {"filters", "filters per width"},
    {"batch-size", "minibatch size"},
    {"learning-rate", "Adam step size"},
    {"epochs", "training epochs"},
    {"max-len", "maximum tokens per document"},
    {"val-fraction", "held-out share of the source data"},
    {"clip-norm", "global gradient norm limit, 0 disables"},
};

const std::vector<FlagDef> kSynthFlags{
    {"synth-vocab", "neutral vocabulary size"},
    {"synth-lexicon", "sentiment words per domain"},
    {"synth-pivots", "shared sentiment words"},
    {"synth-docs", "documents per domain"},
    {"synth-doc-length", "tokens per document"},
    {"synth-planted", "planted sentiment words per document (odd)"},
    {"synth-pivot-prob", "chance a planted word is a pivot"},
    {"synth-agreement", "chance a planted word agrees with the label"},
    {"synth-shift", "share of target lexicon not shared with the source"},
    {"synth-embed-dim", "dimension of the generated embeddings file, 0 for none"},
    {"synth-polarity-strength", "polarity axis weight in generated embeddings"},
    {"synth-topic-strength", "domain topic axis weight in generated embeddings"},
    {"synth-cluster-strength", "cluster axis weight in generated embeddings"},
    {"synth-noise", "noise in generated embeddings"},
};

struct Command {
  CLI::App *app = nullptr;
  std::string config;
  std::map<std::string, std::string> values;  // flag key -> raw value
  std::map<std::string, CLI::Option *> options;

  void flag(const std::string &key, const std::string &help) {
    options[key] = app->add_option("--" + key, values[key], help);
  }
  void flags(const std::vector<FlagDef> &defs) {
    for (const auto &d : defs) flag(d.key, d.help);
  }
};

struct SpecHandle {
  cw_spec *spec = nullptr;
  ~SpecHandle() { cw_spec_destroy(spec); }
};

int report(cw_status status, int exit_code) {
  std::fprintf(stderr, "canweave: %s: %s\n", cw_status_name(status), cw_last_error());
  return exit_code;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"canweave: cross-domain sentiment classification with category attention"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cw_version());

  std::map<std::string, Command> commands;
  auto add = [&](const std::string &name, const std::string &help) -> Command & {
    Command &c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.app->add_option("--config", c.config, "flat key = value config file")->check(CLI::ExistingFile);
    c.flag("out-dir", "output directory");
    c.flag("seed", "run seed (default: $CANWEAVE_SEED, then 1)");
    return c;
  };

  Command &train = add("train", "train on labeled source and unlabeled target data");
  train.flag("source", "labeled source documents (label<TAB>text)");
  train.flag("target", "target documents; labels, if any, are ignored");
  train.flag("embeddings", "pretrained vectors (text format with a `count dim` header)");
  train.flags(kTrainFlags);

  Command &cv = add("cv", "k-fold cross-validation over labeled target data");
  cv.flag("source", "labeled source documents");
  cv.flag("target", "labeled target documents, labels used only for testing");
  cv.flag("embeddings", "pretrained vectors");
  cv.flag("folds", "number of folds");
  cv.flag("jobs", "folds trained in parallel");
  cv.flags(kTrainFlags);

  Command &eval = add("eval", "accuracy of a checkpoint on labeled documents");
  eval.flag("checkpoint", "model checkpoint");
  eval.flag("test", "labeled documents");
  eval.flag("test-domain", "memory used for the documents: source or target");

  Command &heatmap = add("heatmap", "category attention heatmap for documents");
  heatmap.flag("checkpoint", "model checkpoint");
  heatmap.flag("test", "documents, labeled or not");
  heatmap.flag("test-domain", "memory used for the documents: source or target");
  heatmap.flag("heatmap-samples", "number of leading documents rendered, 0 for all");

  Command &extract = add("extract-cmm", "rank source category memory words from labeled data");
  extract.flag("source", "labeled source documents");
  extract.flag("target", "target documents, only extend the vocabulary");
  extract.flag("memory-size", "words per class (M)");
  extract.flag("max-len", "maximum tokens per document");

  Command &exported = add("export-cmm", "category memory word lists and neighbour tables from a checkpoint");
  exported.flag("checkpoint", "model checkpoint");
  exported.flag("neighbors", "neighbours listed per target memory slot");

  Command &synth = add("synth-data", "generate a synthetic two-domain sentiment task");
  synth.flags(kSynthFlags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  for (auto &[name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    SpecHandle handle;
    cw_status st = cw_spec_create(name.c_str(), &handle.spec);
    if (st != CW_OK) return report(st, kExitRuntime);
    if ((st = cw_spec_apply_env(handle.spec)) != CW_OK) return report(st, kExitUsage);
    if (!cmd.config.empty() && (st = cw_spec_load_config(handle.spec, cmd.config.c_str())) != CW_OK)
      return report(st, st == CW_ERR_IO ? kExitRuntime : kExitUsage);
    for (const auto &[key, opt] : cmd.options) {
      if (opt->count() == 0) continue;
      if ((st = cw_spec_set(handle.spec, key.c_str(), cmd.values[key].c_str())) != CW_OK)
        return report(st, kExitUsage);
    }
    if ((st = cw_spec_validate(handle.spec)) != CW_OK) return report(st, kExitUsage);
    char *summary = nullptr;
    if ((st = cw_run(handle.spec, &summary)) != CW_OK) return report(st, kExitRuntime);
    std::printf("%s\n", summary);
    cw_string_free(summary);
    return kExitOk;
  }
  return kExitUsage;
}
