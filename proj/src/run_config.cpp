// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace canweave {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw InvalidArgument("cannot format number");
  return std::string(buf, ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string normalize_key(std::string key) {
  for (char &c : key)
    if (c == '-') c = '_';
  return key;
}

std::uint64_t parse_u64(const std::string &key, const std::string &value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
    throw InvalidArgument(key + ": expected a non-negative integer, got '" + value + "'");
  return out;
}

std::size_t parse_size(const std::string &key, const std::string &value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(const std::string &key, const std::string &value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty() || !std::isfinite(out))
    throw InvalidArgument(key + ": expected a number, got '" + value + "'");
  return out;
}

std::vector<std::size_t> parse_widths(const std::string &key, const std::string &value) {
  std::vector<std::size_t> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_size(key, trim(item)));
  if (out.empty()) throw InvalidArgument(key + ": expected a comma-separated list of widths");
  return out;
}

std::string join_widths(const std::vector<std::size_t> &widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) out += (i ? "," : "") + std::to_string(widths[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  std::vector<std::string> problems;
  if (memory_size == 0) problems.push_back("memory_size must be positive");
  if (top_k == 0) problems.push_back("top_k must be positive");
  if (top_k > memory_size)
    problems.push_back("top_k (" + std::to_string(top_k) + ") conflicts with memory_size (" +
                       std::to_string(memory_size) + "): need top_k <= memory_size");
  if (!(alpha >= 0.0)) problems.push_back("alpha must be >= 0");
  if (!(beta >= 0.0)) problems.push_back("beta must be >= 0");
  if (dim == 0) problems.push_back("dim must be positive");
  if (widths.empty()) problems.push_back("widths must not be empty");
  for (std::size_t h : widths)
    if (h == 0) problems.push_back("widths must be positive");
  if (filters == 0) problems.push_back("filters must be positive");
  if (batch_size == 0) problems.push_back("batch_size must be positive");
  if (!(learning_rate >= 0.0)) problems.push_back("learning_rate must be >= 0");
  if (epochs == 0) problems.push_back("epochs must be positive");
  if (max_len == 0) problems.push_back("max_len must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) problems.push_back("val_fraction must lie in (0, 1)");
  if (!(clip_norm >= 0.0)) problems.push_back("clip_norm must be >= 0");
  if (folds < 2) problems.push_back("folds must be at least 2");
  if (problems.empty()) return;
  std::string msg = "invalid configuration: ";
  for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
  throw InvalidArgument(msg);
}

ModelShape TrainConfig::model_shape() const { return {dim, memory_size, top_k, widths, filters}; }

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig &c) {
  return {
      {"alpha", format_double(c.alpha)},
      {"batch_size", std::to_string(c.batch_size)},
      {"beta", format_double(c.beta)},
      {"clip_norm", format_double(c.clip_norm)},
      {"dim", std::to_string(c.dim)},
      {"epochs", std::to_string(c.epochs)},
      {"filters", std::to_string(c.filters)},
      {"folds", std::to_string(c.folds)},
      {"learning_rate", format_double(c.learning_rate)},
      {"max_len", std::to_string(c.max_len)},
      {"memory_size", std::to_string(c.memory_size)},
      {"seed", std::to_string(c.seed)},
      {"top_k", std::to_string(c.top_k)},
      {"val_fraction", format_double(c.val_fraction)},
      {"widths", join_widths(c.widths)},
  };
}

void set_config_value(TrainConfig &c, const std::string &raw_key, const std::string &value) {
  const std::string key = normalize_key(raw_key);
  if (key == "alpha") c.alpha = parse_real(key, value);
  else if (key == "beta") c.beta = parse_real(key, value);
  else if (key == "batch_size") c.batch_size = parse_size(key, value);
  else if (key == "clip_norm") c.clip_norm = parse_real(key, value);
  else if (key == "dim") c.dim = parse_size(key, value);
  else if (key == "epochs") c.epochs = parse_size(key, value);
  else if (key == "filters") c.filters = parse_size(key, value);
  else if (key == "folds") c.folds = parse_size(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_real(key, value);
  else if (key == "max_len") c.max_len = parse_size(key, value);
  else if (key == "memory_size") c.memory_size = parse_size(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "top_k") c.top_k = parse_size(key, value);
  else if (key == "val_fraction") c.val_fraction = parse_real(key, value);
  else if (key == "widths") c.widths = parse_widths(key, value);
  else throw InvalidArgument("unknown configuration key '" + raw_key + "'");
}

std::string config_digest(const TrainConfig &config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto &[k, v] : config_entries(config)) {
    for (unsigned char ch : k + "=" + v + "\n") h = (h ^ ch) * 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// RunSpec

namespace {

bool set_synth_value(SynthSpec &s, const std::string &key, const std::string &value) {
  if (key == "synth_vocab") s.vocab_size = parse_size(key, value);
  else if (key == "synth_lexicon") s.lexicon_size = parse_size(key, value);
  else if (key == "synth_pivots") s.pivot_count = parse_size(key, value);
  else if (key == "synth_docs") s.docs_per_domain = parse_size(key, value);
  else if (key == "synth_doc_length") s.doc_length = parse_size(key, value);
  else if (key == "synth_planted") s.planted_per_doc = parse_size(key, value);
  else if (key == "synth_pivot_prob") s.pivot_probability = parse_real(key, value);
  else if (key == "synth_agreement") s.agreement = parse_real(key, value);
  else if (key == "synth_shift") s.shift = parse_real(key, value);
  else if (key == "synth_embed_dim") s.embed_dim = parse_size(key, value);
  else if (key == "synth_polarity_strength") s.polarity_strength = parse_real(key, value);
  else if (key == "synth_topic_strength") s.topic_strength = parse_real(key, value);
  else if (key == "synth_cluster_strength") s.cluster_strength = parse_real(key, value);
  else if (key == "synth_noise") s.noise = parse_real(key, value);
  else return false;
  return true;
}

}  // namespace

void RunSpec::set(const std::string &raw_key, const std::string &value) {
  const std::string key = normalize_key(raw_key);
  auto path_or_empty = [&](std::optional<std::filesystem::path> &slot) {
    if (value.empty()) slot.reset();
    else slot = value;
  };
  if (key == "command") command = value;
  else if (key == "source") path_or_empty(source);
  else if (key == "target") path_or_empty(target);
  else if (key == "embeddings") path_or_empty(embeddings);
  else if (key == "checkpoint") path_or_empty(checkpoint);
  else if (key == "test") path_or_empty(test);
  else if (key == "test_domain") {
    if (value != "source" && value != "target") throw InvalidArgument("test_domain must be 'source' or 'target'");
    test_domain = value;
  } else if (key == "out_dir") {
    if (value.empty()) throw InvalidArgument("out_dir must not be empty");
    out_dir = value;
  } else if (key == "jobs") jobs = parse_size(key, value);
  else if (key == "neighbors") neighbors = parse_size(key, value);
  else if (key == "heatmap_samples") heatmap_samples = parse_size(key, value);
  else if (set_synth_value(synth, key, value)) {
  } else {
    set_config_value(train, key, value);
    if (key == "seed") {
      synth.seed = train.seed;
      seed_set = true;
    }
  }
}

std::vector<std::pair<std::string, std::string>> RunSpec::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  auto opt = [](const std::optional<std::filesystem::path> &p) { return p ? p->string() : std::string(); };
  out.emplace_back("command", command);
  out.emplace_back("source", opt(source));
  out.emplace_back("target", opt(target));
  out.emplace_back("embeddings", opt(embeddings));
  out.emplace_back("checkpoint", opt(checkpoint));
  out.emplace_back("test", opt(test));
  out.emplace_back("test_domain", test_domain);
  out.emplace_back("out_dir", out_dir.string());
  out.emplace_back("jobs", std::to_string(jobs));
  out.emplace_back("neighbors", std::to_string(neighbors));
  out.emplace_back("heatmap_samples", std::to_string(heatmap_samples));
  for (auto &e : config_entries(train)) out.push_back(std::move(e));
  out.emplace_back("synth_vocab", std::to_string(synth.vocab_size));
  out.emplace_back("synth_lexicon", std::to_string(synth.lexicon_size));
  out.emplace_back("synth_pivots", std::to_string(synth.pivot_count));
  out.emplace_back("synth_docs", std::to_string(synth.docs_per_domain));
  out.emplace_back("synth_doc_length", std::to_string(synth.doc_length));
  out.emplace_back("synth_planted", std::to_string(synth.planted_per_doc));
  out.emplace_back("synth_pivot_prob", format_double(synth.pivot_probability));
  out.emplace_back("synth_agreement", format_double(synth.agreement));
  out.emplace_back("synth_shift", format_double(synth.shift));
  out.emplace_back("synth_embed_dim", std::to_string(synth.embed_dim));
  out.emplace_back("synth_polarity_strength", format_double(synth.polarity_strength));
  out.emplace_back("synth_topic_strength", format_double(synth.topic_strength));
  out.emplace_back("synth_cluster_strength", format_double(synth.cluster_strength));
  out.emplace_back("synth_noise", format_double(synth.noise));
  return out;
}

const std::vector<std::string> &RunSpec::commands() {
  static const std::vector<std::string> names{"train", "eval", "cv", "extract-cmm", "export-cmm", "heatmap",
                                              "synth-data"};
  return names;
}

void RunSpec::validate() const {
  const auto &known = commands();
  if (std::find(known.begin(), known.end(), command) == known.end())
    throw InvalidArgument("unknown command '" + command + "'");
  train.validate();
  if (jobs == 0) throw InvalidArgument("jobs must be at least 1");
  if (neighbors == 0) throw InvalidArgument("neighbors must be at least 1");
  std::vector<std::string> missing;
  auto need = [&](const std::optional<std::filesystem::path> &p, const char *flag) {
    if (!p) missing.push_back(flag);
  };
  if (command == "train" || command == "cv") {
    need(source, "--source");
    need(target, "--target");
  } else if (command == "eval" || command == "heatmap") {
    need(checkpoint, "--checkpoint");
    need(test, "--test");
  } else if (command == "export-cmm") {
    need(checkpoint, "--checkpoint");
  } else if (command == "extract-cmm") {
    need(source, "--source");
  } else if (command == "synth-data") {
    synth.validate();
  }
  if (!missing.empty()) {
    std::string msg = command + " requires";
    for (const auto &m : missing) msg += " " + m;
    throw InvalidArgument(msg);
  }
}

std::map<std::string, std::string> parse_config_text(const std::string &text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string content = trim(line);
    if (content.empty()) continue;
    if (content.front() == '[') throw ParseError("config tables are not supported", line_no);
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected `key = value`", line_no);
    const std::string key = normalize_key(trim(std::string_view(content).substr(0, eq)));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ParseError("empty key", line_no);
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string format_entries(const std::vector<std::pair<std::string, std::string>> &entries) {
  std::string out;
  for (const auto &[k, v] : entries) {
    const bool numeric = !v.empty() && v.find_first_not_of("0123456789.-+e") == std::string::npos;
    out += k + " = " + (numeric ? v : "\"" + v + "\"") + "\n";
  }
  return out;
}

}  // namespace canweave
