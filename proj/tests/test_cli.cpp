/* Copyright 2026 The mddkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// CLI surface tests: exit codes, diagnostics and output formats. The binary
// path arrives through the MDD_CLI environment variable (set by CTest).

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mdd/checkpoint.hpp"
#include "mdd/corpus.hpp"
#include "mdd/train.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

const char* cli_path() { return std::getenv("MDD_CLI"); }

CliResult run_cli(const std::string& args) {
  CliResult result;
  const std::string command = std::string(cli_path()) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buffer[4096];
  while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) result.output += buffer;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "mddkit_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: rejects out-of-range rates naming the field") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const CliResult res = run_cli("synth --out /tmp/mddkit_cli_unused --p-sub 1.5");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("p_substitution") != std::string::npos);
}

TEST_CASE("cli: synth writes three split files and is seed-deterministic") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const fs::path a = work_dir() / "synth_a";
  const fs::path b = work_dir() / "synth_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const CliResult ra = run_cli("synth --out " + a.string() + " --seed 9 --utterances 20");
  REQUIRE(ra.exit_code == 0);
  CHECK(ra.output.find("train=14") != std::string::npos);
  for (const char* name : {"manifest.json", "train.jsonl", "dev.jsonl", "test.jsonl"}) {
    CHECK(fs::exists(a / name));
  }
  const CliResult rb = run_cli("synth --out " + b.string() + " --seed 9 --utterances 20");
  REQUIRE(rb.exit_code == 0);
  for (const char* name : {"train.jsonl", "dev.jsonl", "test.jsonl"}) {
    CHECK(read_file(a / name) == read_file(b / name));
  }
}

TEST_CASE("cli: score counts mode reproduces a published row") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const CliResult res = run_cli("score --json --counts 23825 1889 1883 1805 603");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.output);
  CHECK(100.0 * j.at("rates").at("f1").get<double>() == Catch::Approx(56.08).margin(0.02));
}

TEST_CASE("cli: score demands exactly one input mode") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const CliResult res = run_cli("score");
  CHECK(res.exit_code == 1);
  const CliResult both =
      run_cli("score --counts 1 1 1 1 1 --triples /nonexistent.jsonl");
  CHECK(both.exit_code == 1);
  const CliResult negative = run_cli("score --counts 1 -2 1 1 1");
  CHECK(negative.exit_code == 1);
}

TEST_CASE("cli: empty triples file gives a degenerate zero report") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const fs::path triples = work_dir() / "empty_triples.jsonl";
  { std::ofstream out(triples); }
  const CliResult res = run_cli("score --json --triples " + triples.string());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.output);
  CHECK(j.at("rates").at("degenerate").get<bool>());
  CHECK(j.at("rates").at("f1").get<double>() == 0.0);
  CHECK(j.at("counts").at("true_accept").get<long long>() == 0);
}

TEST_CASE("cli: score triples aggregates counts and per") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const fs::path triples = work_dir() / "triples.jsonl";
  {
    std::ofstream out(triples);
    out << R"({"id":"u0","canonical":[1,2,3],"annotation":[1,4,3],"hypothesis":[1,4,3]})" << '\n';
    out << R"({"id":"u1","canonical":[1,2],"annotation":[1,2],"hypothesis":[1,3]})" << '\n';
  }
  const CliResult res = run_cli("score --json --triples " + triples.string());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.output);
  CHECK(j.at("counts").at("true_accept").get<long long>() == 3);
  CHECK(j.at("counts").at("false_rejection").get<long long>() == 1);
  CHECK(j.at("counts").at("tr_correct_diag").get<long long>() == 1);
  CHECK(j.at("num_utterances").get<int>() == 2);
}

TEST_CASE("cli: malformed triples name the record") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const fs::path triples = work_dir() / "bad_triples.jsonl";
  {
    std::ofstream out(triples);
    out << R"({"id":"u0","canonical":[1],"annotation":[1],"hypothesis":[1]})" << '\n';
    out << R"(not json)" << '\n';
  }
  const CliResult res = run_cli("score --triples " + triples.string());
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("record 2") != std::string::npos);
}

TEST_CASE("cli: eval oracle hypothesis sources and dimension checks") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const fs::path dir = work_dir() / "eval_corpus";
  fs::remove_all(dir);

  mdd::CorpusConfig cfg;
  cfg.seed = 21;
  cfg.utterance_count = 30;
  cfg.inventory_size = 5;
  cfg.feature_dim = 6;
  cfg.min_length = 3;
  cfg.max_length = 5;
  const mdd::SynthCorpus corpus = mdd::generate_corpus(cfg);
  mdd::write_corpus_dir(corpus, dir.string());

  mdd::TrainConfig tc;
  tc.epochs = 1;
  tc.model_dim = 8;
  mdd::TrainOutput out = mdd::train_model(corpus, tc);
  const fs::path ckpt = work_dir() / "eval_ckpt.json";
  mdd::save_checkpoint(ckpt.string(), out.model, tc.seed);

  const fs::path report = work_dir() / "eval_report.json";
  const CliResult perfect =
      run_cli("eval --checkpoint " + ckpt.string() + " --corpus " + (dir / "test.jsonl").string() +
              " --hypothesis annotation --report " + report.string());
  REQUIRE(perfect.exit_code == 0);
  const json j = json::parse(read_file(report));
  CHECK(j.at("eval").at("counts").at("false_rejection").get<long long>() == 0);
  CHECK(j.at("eval").at("counts").at("false_accept").get<long long>() == 0);
  CHECK(j.at("eval").at("counts").at("tr_diag_error").get<long long>() == 0);
  CHECK(j.at("eval").at("per").get<double>() == 0.0);

  const CliResult accept_all =
      run_cli("eval --checkpoint " + ckpt.string() + " --corpus " + (dir / "test.jsonl").string() +
              " --hypothesis canonical --report " + report.string());
  REQUIRE(accept_all.exit_code == 0);
  const json k = json::parse(read_file(report));
  CHECK(k.at("eval").at("counts").at("true_rejection").get<long long>() == 0);
  CHECK(k.at("eval").at("rates").at("f1").get<double>() == 0.0);

  // Mismatched feature dimension is a typed configuration error.
  const fs::path wide_dir = work_dir() / "wide_corpus";
  fs::remove_all(wide_dir);
  mdd::CorpusConfig wide = cfg;
  wide.feature_dim = 9;
  mdd::write_corpus_dir(mdd::generate_corpus(wide), wide_dir.string());
  const CliResult mismatch = run_cli("eval --checkpoint " + ckpt.string() + " --corpus " +
                                     (wide_dir / "test.jsonl").string());
  CHECK(mismatch.exit_code == 1);
  CHECK(mismatch.output.find("feature dim") != std::string::npos);
}

TEST_CASE("cli: unknown variant fails with a usage error") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const CliResult res = run_cli("train --corpus /nonexistent_corpus --out /tmp/x.json "
                                "--variant NoSuchGate");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("variant") != std::string::npos);
}

TEST_CASE("cli: oracle passes on a fresh build") {
  if (cli_path() == nullptr) SKIP("MDD_CLI not set");
  const CliResult res = run_cli("oracle --seed 4");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("all checks passed") != std::string::npos);
}
