// SPDX-License-Identifier: Apache-2.0
#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "error.hpp"

namespace canweave {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'N', 'W', 'E', 'A', 'V', 'E'};

template <typename T>
void write_le(std::ostream &out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream &in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char *>(bytes), sizeof(T))) throw ParseError("checkpoint truncated", 0);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct TensorSlot {
  std::string name;
  Tensor tensor;
};

// Everything stored in the payload, in order.
std::vector<TensorSlot> payload_tensors(const Model &model) {
  std::vector<TensorSlot> out;
  for (const auto &p : model.parameters()) out.push_back({p.name, p.tensor});
  for (int c = 0; c < static_cast<int>(model.target_memory_initial.size()); ++c)
    out.push_back({std::string("target_memory_initial.") + category_name(c), model.target_memory_initial[c]});
  out.push_back({"embeddings_initial", model.embeddings_initial});
  return out;
}

}  // namespace

void save_checkpoint(const Model &model, const TrainConfig &config, const std::filesystem::path &path) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "canweave-checkpoint";
  for (const auto &[k, v] : config_entries(config)) manifest["config"][k] = v;
  manifest["vocabulary_digest"] = hex64(model.vocabulary.digest());
  manifest["vocabulary"] = model.vocabulary.words();
  for (int c = 0; c < kNumClasses; ++c) manifest["source_memory"][category_name(c)] = model.source_memory.words[c];
  const auto tensors = payload_tensors(model);
  manifest["tensors"] = nlohmann::ordered_json::array();
  for (const auto &slot : tensors)
    manifest["tensors"].push_back({{"name", slot.name}, {"shape", slot.tensor.shape()}});
  const std::string text = manifest.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto &slot : tensors)
    for (double x : slot.tensor.values()) write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path.string() + " is not a canweave checkpoint", 0);
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  const auto length = read_le<std::uint64_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw ParseError("checkpoint truncated", 0);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad checkpoint manifest: ") + e.what(), 0);
  }

  Checkpoint ckpt;
  try {
    for (const auto &[k, v] : manifest.at("config").items()) set_config_value(ckpt.config, k, v.get<std::string>());
    Vocabulary vocab = Vocabulary::from_words(manifest.at("vocabulary").get<std::vector<std::string>>());
    if (hex64(vocab.digest()) != manifest.at("vocabulary_digest").get<std::string>())
      throw ParseError("checkpoint vocabulary digest mismatch", 0);

    CategoryMemory source;
    source.domain = Domain::kSource;
    source.words.resize(kNumClasses);
    for (int c = 0; c < kNumClasses; ++c)
      source.words[c] = manifest.at("source_memory").at(category_name(c)).get<std::vector<std::size_t>>();
    source.size = source.words[kPositive].size();
    for (const auto &list : source.words)
      for (std::size_t id : list)
        if (id >= vocab.size()) throw ParseError("source memory word id out of range", 0);

    // Build a model of the right shape, then overwrite every tensor.
    const TrainConfig &cfg = ckpt.config;
    EmbeddingTable table = random_embeddings(vocab.size(), cfg.dim, cfg.seed);
    ckpt.model = build_model(std::move(vocab), std::move(table), std::move(source), cfg.model_shape(), cfg.seed);

    const auto slots = payload_tensors(ckpt.model);
    const auto &entries = manifest.at("tensors");
    if (entries.size() != slots.size()) throw ParseError("checkpoint tensor count mismatch", 0);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (entries[i].at("name").get<std::string>() != slots[i].name ||
          entries[i].at("shape").get<Shape>() != slots[i].tensor.shape())
        throw ParseError("checkpoint tensor " + slots[i].name + " does not match the configured model", 0);
      Tensor t = slots[i].tensor;
      for (double &x : t.mutable_values()) x = std::bit_cast<double>(read_le<std::uint64_t>(in));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("bad checkpoint manifest: ") + e.what(), 0);
  }
  ckpt.model.embeddings.pretrained.assign(ckpt.model.embeddings.rows(), false);
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after checkpoint payload", 0);
  return ckpt;
}

}  // namespace canweave
