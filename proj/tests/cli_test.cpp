// Copyright 2026 The a2w Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Drives the a2w executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "a2w_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Outcome {
  int code;
  std::string output;
};

Outcome run(const std::string& args) {
  const fs::path log = work() / "last.log";
  const std::string cmd = std::string("cd ") + work().string() + " && " +
                          A2W_CLI_PATH + " " + args + " > " + log.string() +
                          " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyModel =
    " --encoder-layers 2 --encoder-hidden 6 --subsample 2 --char-tap 2"
    " --decoder-hidden 6 --attention-dim 6 --word-embed 4 --char-embed 4"
    " --batch 8 --max-epochs 1";

// Synthesizes data and trains tiny acoustic and language models once.
void prepare() {
  static bool done = false;
  if (done) return;
  std::ofstream(work() / "spec.json")
      << R"({"train_utts": 30, "valid_utts": 5, "test_utts": 5,)"
      << R"( "oov_test_utts": 5, "lm_sentences": 30, "lexicon_size": 20,)"
      << R"( "oov_words": 3, "duplicate_cap": 30})";
  ASSERT_EQ(run("synth --spec spec.json --out data").code, 0);
  ASSERT_EQ(run(std::string("train-am --train data/train --valid data/valid"
                            " --out am --vocab-min-count 1") + kTinyModel).code,
            0);
  ASSERT_EQ(run("train-lm --text data/lm_text.txt --am am --out lm --hidden 4"
                " --epochs 1 --bptt 16").code, 0);
  done = true;
}

nlohmann::json header(const fs::path& hyps) {
  std::ifstream in(hyps);
  std::string line;
  std::getline(in, line);
  return nlohmann::json::parse(line).at("config");
}

TEST(Cli, DocumentedDefaults) {
  const Outcome r = run("decode --help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("--beam UINT [5]"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("--beta FLOAT [0.2]"), std::string::npos);
}

TEST(Cli, BetaRequiresLanguageModel) {
  prepare();
  const Outcome r = run("decode --am am --corpus data/test --out h.jsonl --beta 0.3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("--lm"), std::string::npos);
}

TEST(Cli, CoverageWeightDefaultDependsOnLanguageModel) {
  prepare();
  ASSERT_EQ(run("decode --am am --corpus data/test --out plain.jsonl").code, 0);
  ASSERT_EQ(run("decode --am am --lm lm --corpus data/test --out fused.jsonl")
                .code,
            0);
  const auto plain = header(work() / "plain.jsonl");
  const auto fused = header(work() / "fused.jsonl");
  EXPECT_EQ(plain.at("gamma").get<double>(), 0.4);
  EXPECT_EQ(plain.at("beta").get<double>(), 0.0);
  EXPECT_EQ(plain.at("beam").get<int>(), 5);
  EXPECT_EQ(fused.at("gamma").get<double>(), 0.6);
  EXPECT_EQ(fused.at("beta").get<double>(), 0.2);
}

TEST(Cli, MismatchedVocabulariesAreRefused) {
  prepare();
  ASSERT_EQ(run(std::string("train-am --train data/train --valid data/valid"
                            " --out am_other") + kTinyModel +
                " --vocab-min-count 3").code,
            0);
  const Outcome r =
      run("decode --am am_other --lm lm --corpus data/test --out x.jsonl");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("fingerprint"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  prepare();
  EXPECT_EQ(run("decode --am am --corpus nowhere --out x.jsonl").code, 3);
  EXPECT_EQ(run("decode --am no_such_ckpt --corpus data/test --out x.jsonl").code,
            3);
  EXPECT_EQ(run("decode --am am --corpus data/test --out x.jsonl --beam 0").code,
            2);
  EXPECT_EQ(run("train-am --bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, EvalReportsAndEchoesConfig) {
  prepare();
  ASSERT_EQ(run("decode --am am --corpus data/test_oov --out r.jsonl --resolve")
                .code,
            0);
  const Outcome r = run("eval --refs data/test_oov --hyps r.jsonl --system mtl"
                    " --split testoov --json report.json --csv report.csv");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto report = nlohmann::json::parse(slurp(work() / "report.json"));
  EXPECT_EQ(report.at("system"), "mtl");
  EXPECT_TRUE(report.at("config").at("decode").at("resolve").get<bool>());
  const std::string csv = slurp(work() / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "system,split,wer,n_oov_detected,n_oov_resolved,n_fallback,rtf");
  const auto ckpt = nlohmann::json::parse(slurp(work() / "am/checkpoint.json"));
  EXPECT_TRUE(ckpt.dump().find("train_corpus") != std::string::npos);
}

TEST(Cli, SeededRunsAreReproducible) {
  prepare();
  ASSERT_EQ(run("synth --spec spec.json --out data2").code, 0);
  EXPECT_EQ(slurp(work() / "data/train/manifest.jsonl"),
            slurp(work() / "data2/train/manifest.jsonl"));
  EXPECT_EQ(slurp(work() / "data/lm_text.txt"),
            slurp(work() / "data2/lm_text.txt"));
  ASSERT_EQ(run(std::string("train-am --train data/train --valid data/valid"
                            " --out am_again --vocab-min-count 1") + kTinyModel)
                .code,
            0);
  EXPECT_EQ(slurp(work() / "am/params.bin"), slurp(work() / "am_again/params.bin"));
  ASSERT_EQ(run(std::string("--seed 9 train-am --train data/train"
                            " --valid data/valid --out am_seed9"
                            " --vocab-min-count 1") + kTinyModel)
                .code,
            0);
  EXPECT_NE(slurp(work() / "am/params.bin"), slurp(work() / "am_seed9/params.bin"));
}

TEST(Cli, ConfigFileSectionsSetSubcommandOptions) {
  prepare();
  std::ofstream(work() / "run.toml") << "seed = 3\n[decode]\nbeam = 2\ngamma = 0.1\n";
  ASSERT_EQ(run("--config run.toml decode --am am --corpus data/test"
                " --out cfg.jsonl").code,
            0);
  const auto cfg = header(work() / "cfg.jsonl");
  EXPECT_EQ(cfg.at("beam").get<int>(), 2);
  EXPECT_EQ(cfg.at("gamma").get<double>(), 0.1);
  EXPECT_EQ(cfg.at("seed").get<int>(), 3);
  ASSERT_EQ(run("--config run.toml decode --am am --corpus data/test"
                " --out cfg2.jsonl --beam 4").code,
            0);
  EXPECT_EQ(header(work() / "cfg2.jsonl").at("beam").get<int>(), 4);
}

TEST(Cli, SweepWritesOneRowPerSystemSeedAndCut) {
  prepare();
  const Outcome r = run(std::string("sweep-vocab --data data --out sweep.csv"
                                " --min-counts 1,3 --seeds 1 --split test") +
                    " --encoder-layers 2 --encoder-hidden 6 --subsample 2"
                    " --char-tap 2 --decoder-hidden 6 --attention-dim 6"
                    " --word-embed 4 --char-embed 4 --batch 8 --max-epochs 1");
  ASSERT_EQ(r.code, 0) << r.output;
  std::ifstream in(work() / "sweep.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_EQ(run("sweep-vocab --data data --out s.csv --sizes 1k --min-counts 2")
                .code,
            2);
}

TEST(Cli, GradcheckPasses) {
  const Outcome r = run("gradcheck --seed 2");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("PASS"), std::string::npos);
}

}  // namespace
