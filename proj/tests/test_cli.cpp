// SPDX-License-Identifier: Apache-2.0
// Drives the installed command-line binary as a subprocess.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "test_util.hpp"

using canweave::testing::read_file;
using canweave::testing::temp_dir;
using canweave::testing::write_file;

namespace {

int run(const std::string &args, const std::filesystem::path &log) {
  const std::string cmd = std::string(CANWEAVE_CLI) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

const std::string kSmall =
    " --dim 8 --memory-size 4 --top-k 2 --filters 4 --widths 2,3 --batch-size 16 --max-len 32";

}  // namespace

TEST_CASE("exit codes") {
  const auto dir = temp_dir("cli_codes");
  const auto log = dir / "log.txt";
  CHECK(run("", log) == 2);
  CHECK(run("train --no-such-flag 1", log) == 2);
  CHECK(run("train --source a --target b --alpha -1 --out-dir " + dir.string(), log) == 2);
  CHECK(read_file(log).find("alpha") != std::string::npos);
  CHECK(run("train --source a --target b --top-k 9 --memory-size 3 --out-dir " + dir.string(), log) == 2);
  CHECK(read_file(log).find("top_k") != std::string::npos);
  CHECK(run("train --source " + (dir / "missing.tsv").string() + " --target x --out-dir " + (dir / "o").string(),
            log) == 1);
  CHECK(run("eval --checkpoint c", log) == 2);
  CHECK(run("--help", log) == 0);
}

TEST_CASE("end-to-end commands and the echoed run spec") {
  const auto dir = temp_dir("cli_e2e");
  const auto log = dir / "log.txt";
  const std::string data = (dir / "data").string();
  REQUIRE(run("synth-data --synth-docs 60 --synth-embed-dim 8 --seed 3 --out-dir " + data, log) == 0);
  for (const char *f : {"source.tsv", "target.tsv", "lexicon.tsv", "embeddings.txt"})
    CHECK(std::filesystem::exists(dir / "data" / f));

  const std::string inputs = " --source " + data + "/source.tsv --target " + data + "/target.tsv";
  REQUIRE(run("train" + inputs + kSmall + " --epochs 2 --embeddings " + data + "/embeddings.txt --out-dir " +
                  (dir / "train").string(),
              log) == 0);
  for (const char *f : {"model.ckpt", "training_log.jsonl", "run_spec.toml"})
    CHECK(std::filesystem::exists(dir / "train" / f));
  const std::string ckpt = (dir / "train" / "model.ckpt").string();

  REQUIRE(run("eval --checkpoint " + ckpt + " --test " + data + "/target.tsv --out-dir " + (dir / "eval").string(),
              log) == 0);
  CHECK(read_file(dir / "eval" / "results.json").find("\"accuracy\"") != std::string::npos);

  REQUIRE(run("heatmap --checkpoint " + ckpt + " --test " + data + "/target.tsv --heatmap-samples 3 --out-dir " +
                  (dir / "heat").string(),
              log) == 0);
  CHECK(std::filesystem::exists(dir / "heat" / "heatmap.html"));
  CHECK(std::filesystem::exists(dir / "heat" / "heatmap.json"));

  REQUIRE(run("export-cmm --checkpoint " + ckpt + " --neighbors 3 --out-dir " + (dir / "cmm").string(), log) == 0);
  CHECK(std::filesystem::exists(dir / "cmm" / "cmm_neighbors.tsv"));

  REQUIRE(run("extract-cmm --source " + data + "/source.tsv --memory-size 5 --out-dir " + (dir / "src").string(),
              log) == 0);
  CHECK(std::filesystem::exists(dir / "src" / "cmm_source.tsv"));

  // Re-running from the echoed spec reproduces the checkpoint byte for byte.
  std::string echoed = read_file(dir / "train" / "run_spec.toml");
  const auto pos = echoed.find("out_dir = ");
  REQUIRE(pos != std::string::npos);
  echoed.replace(pos, echoed.find('\n', pos) - pos, "out_dir = \"" + (dir / "again").string() + "\"");
  write_file(dir / "again.toml", echoed);
  REQUIRE(run("train --config " + (dir / "again.toml").string(), log) == 0);
  CHECK(read_file(dir / "again" / "model.ckpt") == read_file(dir / "train" / "model.ckpt"));
  CHECK(read_file(dir / "again" / "training_log.jsonl") == read_file(dir / "train" / "training_log.jsonl"));
}

TEST_CASE("flags override the config file, which overrides the environment") {
  const auto dir = temp_dir("cli_precedence");
  const auto log = dir / "log.txt";
  const std::string data = (dir / "data").string();
  REQUIRE(run("synth-data --synth-docs 30 --out-dir " + data, log) == 0);
  write_file(dir / "run.toml", "alpha = 0.2\nseed = 8\n");
  const std::string inputs = " --source " + data + "/source.tsv --target " + data + "/target.tsv";
  REQUIRE(run("train --config " + (dir / "run.toml").string() + inputs + kSmall + " --epochs 1 --alpha 0 --out-dir " +
                  (dir / "a").string(),
              log) == 0);
  const std::string spec = read_file(dir / "a" / "run_spec.toml");
  CHECK(spec.find("\nalpha = 0\n") != std::string::npos);
  CHECK(spec.find("\nseed = 8\n") != std::string::npos);

  REQUIRE(run("train" + inputs + kSmall + " --epochs 1 --out-dir " + (dir / "b").string(), log) == 0);
  CHECK(read_file(dir / "b" / "run_spec.toml").find("\nseed = 1\n") != std::string::npos);
  ::setenv("CANWEAVE_SEED", "6", 1);
  REQUIRE(run("train" + inputs + kSmall + " --epochs 1 --out-dir " + (dir / "c").string(), log) == 0);
  REQUIRE(run("train --config " + (dir / "run.toml").string() + inputs + kSmall + " --epochs 1 --out-dir " +
                  (dir / "d").string(),
              log) == 0);
  ::unsetenv("CANWEAVE_SEED");
  CHECK(read_file(dir / "c" / "run_spec.toml").find("\nseed = 6\n") != std::string::npos);
  CHECK(read_file(dir / "d" / "run_spec.toml").find("\nseed = 8\n") != std::string::npos);
}
