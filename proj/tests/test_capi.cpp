// SPDX-License-Identifier: Apache-2.0
// Uses nothing but the public C header and the shared library.
#include <doctest.h>

#include <canweave/canweave.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

std::string take(char *s) {
  std::string out = s ? s : "";
  cw_string_free(s);
  return out;
}

std::string get(const cw_spec *spec, const char *key) {
  char *value = nullptr;
  REQUIRE(cw_spec_get(spec, key, &value) == CW_OK);
  return take(value);
}

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::strlen(cw_version()) > 0);
  CHECK(std::string(cw_status_name(CW_OK)) == "ok");
  CHECK(std::string(cw_status_name(CW_ERR_IO)) != std::string(cw_status_name(CW_ERR_PARSE)));
}

TEST_CASE("spec handles: set, get, errors") {
  cw_spec *spec = nullptr;
  REQUIRE(cw_spec_create("train", &spec) == CW_OK);
  CHECK(cw_spec_set(spec, "alpha", "0.5") == CW_OK);
  CHECK(get(spec, "alpha") == "0.5");
  CHECK(cw_spec_set(spec, "alpha", "x") == CW_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cw_last_error()).find("alpha") != std::string::npos);
  CHECK(cw_spec_set(spec, "bogus", "1") == CW_ERR_INVALID_ARGUMENT);
  CHECK(cw_spec_validate(spec) == CW_ERR_INVALID_ARGUMENT);  // no inputs yet
  CHECK(cw_spec_set(nullptr, "alpha", "1") == CW_ERR_INVALID_ARGUMENT);
  char *text = nullptr;
  REQUIRE(cw_spec_render(spec, &text) == CW_OK);
  CHECK(take(text).find("alpha = 0.5") != std::string::npos);
  cw_spec_destroy(spec);
  cw_spec *unknown = nullptr;
  CHECK(cw_spec_create("fly", &unknown) == CW_ERR_INVALID_ARGUMENT);
  CHECK(unknown == nullptr);
}

TEST_CASE("seed precedence: environment, then config file, then explicit set") {
  const auto dir = std::filesystem::temp_directory_path() / "canweave_test_capi";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "run.toml") << "seed = 11\nalpha = 0.2\n";
    std::ofstream(dir / "noseed.toml") << "alpha = 0.2\n";
  }
  ::setenv("CANWEAVE_SEED", "5", 1);
  cw_spec *spec = nullptr;
  REQUIRE(cw_spec_create("train", &spec) == CW_OK);
  REQUIRE(cw_spec_apply_env(spec) == CW_OK);
  CHECK(get(spec, "seed") == "5");
  REQUIRE(cw_spec_load_config(spec, (dir / "noseed.toml").c_str()) == CW_OK);
  CHECK(get(spec, "seed") == "5");
  REQUIRE(cw_spec_load_config(spec, (dir / "run.toml").c_str()) == CW_OK);
  CHECK(get(spec, "seed") == "11");
  REQUIRE(cw_spec_set(spec, "seed", "12") == CW_OK);
  CHECK(get(spec, "seed") == "12");
  CHECK(cw_spec_load_config(spec, (dir / "missing.toml").c_str()) == CW_ERR_IO);
  cw_spec_destroy(spec);
  ::setenv("CANWEAVE_SEED", "abc", 1);
  REQUIRE(cw_spec_create("train", &spec) == CW_OK);
  CHECK(cw_spec_apply_env(spec) == CW_ERR_INVALID_ARGUMENT);
  cw_spec_destroy(spec);
  ::unsetenv("CANWEAVE_SEED");
}

TEST_CASE("synthesize, train and predict through the C API") {
  const auto dir = std::filesystem::temp_directory_path() / "canweave_test_capi_run";
  std::filesystem::remove_all(dir);
  cw_spec *synth = nullptr;
  REQUIRE(cw_spec_create("synth-data", &synth) == CW_OK);
  REQUIRE(cw_spec_set(synth, "out_dir", (dir / "data").c_str()) == CW_OK);
  REQUIRE(cw_spec_set(synth, "synth_docs", "40") == CW_OK);
  char *summary = nullptr;
  REQUIRE(cw_run(synth, &summary) == CW_OK);
  CHECK(!take(summary).empty());
  cw_spec_destroy(synth);

  cw_spec *train = nullptr;
  REQUIRE(cw_spec_create("train", &train) == CW_OK);
  const std::pair<const char *, std::string> settings[] = {
      {"source", (dir / "data" / "source.tsv").string()},
      {"target", (dir / "data" / "target.tsv").string()},
      {"out_dir", (dir / "model").string()},
      {"dim", "8"},
      {"memory_size", "4"},
      {"top_k", "2"},
      {"filters", "4"},
      {"widths", "2,3"},
      {"epochs", "2"},
      {"batch_size", "16"},
      {"max_len", "32"}};
  for (const auto &[k, v] : settings) REQUIRE(cw_spec_set(train, k, v.c_str()) == CW_OK);
  REQUIRE(cw_spec_validate(train) == CW_OK);
  REQUIRE(cw_run(train, &summary) == CW_OK);
  cw_string_free(summary);
  cw_spec_destroy(train);

  cw_model *model = nullptr;
  REQUIRE(cw_model_load((dir / "model" / "model.ckpt").c_str(), &model) == CW_OK);
  std::size_t vocab = 0;
  REQUIRE(cw_model_vocabulary_size(model, &vocab) == CW_OK);
  CHECK(vocab > 2);
  int label = -1;
  double probs[2] = {0, 0};
  REQUIRE(cw_model_predict(model, "some words here", "target", &label, probs) == CW_OK);
  CHECK((label == 0 || label == 1));
  CHECK(probs[0] + probs[1] == doctest::Approx(1.0));
  CHECK(label == (probs[1] > probs[0] ? 1 : 0));
  CHECK(cw_model_predict(model, "words", "sideways", &label, probs) == CW_ERR_INVALID_ARGUMENT);
  cw_model_free(model);

  CHECK(cw_model_load((dir / "nothing.ckpt").c_str(), &model) == CW_ERR_IO);
  CHECK(model == nullptr);
}
