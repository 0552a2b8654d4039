// SPDX-License-Identifier: Apache-2.0
#include "embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace canweave {

Tensor EmbeddingTable::embed(const Sample &sample) const {
  for (std::size_t id : sample.tokens) {
    if (id >= rows()) throw InvalidArgument("embed: token id " + std::to_string(id) + " out of range");
  }
  return gather_rows(matrix, sample.tokens);
}

Tensor EmbeddingTable::embed_valid(const Sample &sample) const {
  if (sample.valid_len == 0) throw InvalidArgument("embed: sample has no tokens");
  std::span<const std::size_t> ids(sample.tokens.data(), sample.valid_len);
  for (std::size_t id : ids) {
    if (id >= rows()) throw InvalidArgument("embed: token id " + std::to_string(id) + " out of range");
  }
  return gather_rows(matrix, ids);
}

void EmbeddingTable::zero_pad_row() {
  auto values = matrix.mutable_values();
  std::fill_n(values.begin() + kPadId * dim, dim, 0.0);
}

void EmbeddingTable::zero_pad_grad() {
  if (!matrix.has_grad()) return;
  auto grad = matrix.mutable_grad();
  std::fill_n(grad.begin() + kPadId * dim, dim, 0.0);
}

EmbeddingTable random_embeddings(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  if (vocab_size < 2 || dim == 0) throw InvalidArgument("embedding table needs at least PAD, UNK and dim > 0");
  Rng rng(derive_seed(seed, kTagEmbedding));
  std::vector<double> values(vocab_size * dim);
  for (double &x : values) x = rng.uniform(-kEmbeddingInitRange, kEmbeddingInitRange);
  std::fill_n(values.begin() + kPadId * dim, dim, 0.0);
  EmbeddingTable table;
  table.matrix = Tensor::from({vocab_size, dim}, std::move(values), true);
  table.dim = dim;
  table.pretrained.assign(vocab_size, false);
  return table;
}

namespace {

bool parse_double(std::string_view field, double &out) {
  const char *end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

}  // namespace

EmbeddingTable load_pretrained(const std::filesystem::path &path, const Vocabulary &vocab, std::size_t dim,
                               std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embeddings file " + path.string() + " is empty", 1);
  std::size_t declared_count = 0, declared_dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> declared_count >> declared_dim)) {
      throw ParseError("embeddings header must be `count dim` in " + path.string(), 1);
    }
  }
  if (declared_dim != dim) {
    throw InvalidArgument("embeddings dimension " + std::to_string(declared_dim) + " in " + path.string() +
                          " does not match configured dim " + std::to_string(dim));
  }

  EmbeddingTable table = random_embeddings(vocab.size(), dim, seed);
  auto values = table.matrix.mutable_values();
  std::vector<bool> seen(vocab.size(), false);
  std::size_t line_no = 1, rows_read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_spaces(line);
    if (fields.size() != dim + 1) {
      throw ParseError("expected a word and " + std::to_string(dim) + " values in " + path.string(), line_no);
    }
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_double(fields[j + 1], row[j]) || !std::isfinite(row[j]))
        throw ParseError("bad vector component '" + std::string(fields[j + 1]) + "' in " + path.string(), line_no);
    }
    ++rows_read;
    const std::size_t id = vocab.lookup(fields[0]);
    if (id == kUnkId && fields[0] != "<unk>") continue;
    if (id == kPadId || seen[id]) continue;
    seen[id] = true;
    std::copy(row.begin(), row.end(), values.begin() + id * dim);
    table.pretrained[id] = true;
  }
  if (rows_read != declared_count) {
    throw ParseError("embeddings header declares " + std::to_string(declared_count) + " rows but " + path.string() +
                         " holds " + std::to_string(rows_read),
                     0);
  }
  return table;
}

}  // namespace canweave
