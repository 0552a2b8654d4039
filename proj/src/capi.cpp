// SPDX-License-Identifier: Apache-2.0
#include "canweave/canweave.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "checkpoint.hpp"
#include "commands.hpp"
#include "error.hpp"

struct cw_spec {
  canweave::RunSpec spec;
};

struct cw_model {
  canweave::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

cw_status fail(cw_status status, const std::string &message) {
  g_last_error = message;
  return status;
}

template <typename F>
cw_status guarded(F &&body) {
  try {
    body();
    g_last_error.clear();
    return CW_OK;
  } catch (const canweave::ParseError &e) {
    return fail(CW_ERR_PARSE, e.what());
  } catch (const canweave::ShapeError &e) {
    return fail(CW_ERR_SHAPE, e.what());
  } catch (const canweave::NumericError &e) {
    return fail(CW_ERR_NUMERIC, e.what());
  } catch (const canweave::InvalidArgument &e) {
    return fail(CW_ERR_INVALID_ARGUMENT, e.what());
  } catch (const canweave::IoError &e) {
    return fail(CW_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error &e) {
    return fail(CW_ERR_IO, e.what());
  } catch (const nlohmann::json::exception &e) {
    return fail(CW_ERR_PARSE, e.what());
  } catch (const std::exception &e) {
    return fail(CW_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CW_ERR_INTERNAL, "unknown error");
  }
}

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define CW_REQUIRE(cond, what) \
  if (!(cond)) return fail(CW_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char *cw_version(void) { return "0.1.0"; }

const char *cw_status_name(cw_status status) {
  switch (status) {
    case CW_OK: return "ok";
    case CW_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CW_ERR_IO: return "i/o error";
    case CW_ERR_PARSE: return "parse error";
    case CW_ERR_SHAPE: return "shape error";
    case CW_ERR_NUMERIC: return "numeric error";
    case CW_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *cw_last_error(void) { return g_last_error.c_str(); }

void cw_string_free(char *text) { std::free(text); }

cw_status cw_spec_create(const char *command, cw_spec **out) {
  CW_REQUIRE(command && out, "cw_spec_create: null argument");
  *out = nullptr;
  return guarded([&] {
    const auto &known = canweave::RunSpec::commands();
    if (std::find(known.begin(), known.end(), command) == known.end())
      throw canweave::InvalidArgument(std::string("unknown command '") + command + "'");
    auto spec = std::make_unique<cw_spec>();
    spec->spec.command = command;
    *out = spec.release();
  });
}

void cw_spec_destroy(cw_spec *spec) { delete spec; }

cw_status cw_spec_set(cw_spec *spec, const char *key, const char *value) {
  CW_REQUIRE(spec && key && value, "cw_spec_set: null argument");
  return guarded([&] { spec->spec.set(key, value); });
}

cw_status cw_spec_get(const cw_spec *spec, const char *key, char **value) {
  CW_REQUIRE(spec && key && value, "cw_spec_get: null argument");
  *value = nullptr;
  return guarded([&] {
    std::string wanted = key;
    for (char &c : wanted)
      if (c == '-') c = '_';
    for (const auto &[k, v] : spec->spec.entries()) {
      if (k == wanted) {
        *value = dup_string(v);
        return;
      }
    }
    throw canweave::InvalidArgument("unknown key '" + std::string(key) + "'");
  });
}

cw_status cw_spec_load_config(cw_spec *spec, const char *path) {
  CW_REQUIRE(spec && path, "cw_spec_load_config: null argument");
  return guarded([&] {
    for (const auto &[k, v] : canweave::read_config_file(path)) spec->spec.set(k, v);
  });
}

cw_status cw_spec_apply_env(cw_spec *spec) {
  CW_REQUIRE(spec, "cw_spec_apply_env: null argument");
  return guarded([&] {
    const char *seed = std::getenv(canweave::kSeedEnvVar);
    if (!seed || !*seed) return;
    try {
      spec->spec.set("seed", seed);
    } catch (const canweave::InvalidArgument &e) {
      throw canweave::InvalidArgument(std::string(canweave::kSeedEnvVar) + ": " + e.what());
    }
  });
}

cw_status cw_spec_validate(const cw_spec *spec) {
  CW_REQUIRE(spec, "cw_spec_validate: null argument");
  return guarded([&] { spec->spec.validate(); });
}

cw_status cw_spec_render(const cw_spec *spec, char **text) {
  CW_REQUIRE(spec && text, "cw_spec_render: null argument");
  *text = nullptr;
  return guarded([&] { *text = dup_string(canweave::format_entries(spec->spec.entries())); });
}

cw_status cw_run(const cw_spec *spec, char **summary) {
  CW_REQUIRE(spec, "cw_run: null argument");
  if (summary) *summary = nullptr;
  return guarded([&] {
    const std::string result = canweave::run_command(spec->spec);
    if (summary) *summary = dup_string(result);
  });
}

cw_status cw_model_load(const char *checkpoint, cw_model **out) {
  CW_REQUIRE(checkpoint && out, "cw_model_load: null argument");
  *out = nullptr;
  return guarded([&] {
    auto model = std::make_unique<cw_model>();
    model->checkpoint = canweave::load_checkpoint(checkpoint);
    *out = model.release();
  });
}

void cw_model_free(cw_model *model) { delete model; }

cw_status cw_model_predict(const cw_model *model, const char *text, const char *domain, int *label,
                           double *probabilities) {
  CW_REQUIRE(model && text && domain && label, "cw_model_predict: null argument");
  const std::string d = domain;
  CW_REQUIRE(d == "source" || d == "target", "cw_model_predict: domain must be 'source' or 'target'");
  return guarded([&] {
    using namespace canweave;
    const Model &m = model->checkpoint.model;
    Document doc{std::nullopt, tokenize(text)};
    if (doc.tokens.empty()) throw InvalidArgument("cw_model_predict: empty text");
    const Sample sample =
        encode(doc, m.vocabulary, model->checkpoint.config.max_len, d == "source" ? Domain::kSource : Domain::kTarget);
    NoGradGuard no_grad;
    const SampleForward f = forward(m, sample);
    const auto p = f.classification.probabilities.values();
    *label = p[1] > p[0] ? 1 : 0;
    if (probabilities) {
      probabilities[0] = p[0];
      probabilities[1] = p[1];
    }
  });
}

cw_status cw_model_vocabulary_size(const cw_model *model, size_t *size) {
  CW_REQUIRE(model && size, "cw_model_vocabulary_size: null argument");
  *size = model->checkpoint.model.vocabulary.size();
  return CW_OK;
}

}  // extern "C"
