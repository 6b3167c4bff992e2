// Copyright 2026 The Citesum Authors.
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

#include <gtest/gtest.h>

#include <json.hpp>

#include "citesum/cli.hpp"
#include "citesum/error.hpp"
#include "test_support.hpp"

namespace citesum::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::read_lines;
using testing::read_text;
using testing::run_cli;
using testing::TempDir;

std::string mini_papers() { return (testing::data_dir() / "mini_corpus" / "papers").string(); }

json manifest(const fs::path& dir, const std::string& command) {
  return json::parse(read_text(dir / (command + ".manifest.json")));
}

TEST(Pipeline, MiniCorpusEndToEnd) {
  TempDir dir;
  const auto r = testing::run_mini_pipeline(dir.path());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ws = dir.path();

  EXPECT_EQ(read_lines(ws / "papers.jsonl").size(), 3u);
  EXPECT_EQ(read_lines(ws / "citances.jsonl").size(), 5u);
  const auto retrievals = read_lines(ws / "retrievals.jsonl");
  const auto summaries = read_lines(ws / "summaries.jsonl");
  ASSERT_EQ(retrievals.size(), 24u);
  ASSERT_EQ(summaries.size(), 24u);
  for (const auto& line : retrievals) {
    const auto j = json::parse(line);
    const auto limit = j.at("granularity") == "sentence" ? 5u : 2u;
    EXPECT_LE(j.at("hits").size(), limit);
    EXPECT_FALSE(j.at("hits").empty());
  }

  for (const char* cmd : {"ingest", "index", "extract", "retrieve", "summarize"}) {
    const auto m = manifest(ws, cmd);
    EXPECT_EQ(m["command"], cmd);
    EXPECT_EQ(m["exit_code"], 0);
    EXPECT_EQ(m["versions"]["tokenizer"], "citesum-tok-1");
  }
  const auto retrieve = manifest(ws, "retrieve");
  EXPECT_EQ(retrieve["details"]["citance_target_pairs"], 6);
  EXPECT_EQ(retrieve["details"]["setups"].size(), 4u);
  EXPECT_TRUE(retrieve["details"]["skipped_targets"].empty());
  EXPECT_EQ(manifest(ws, "summarize")["details"]["over_length"], 0);
}

TEST(Pipeline, RerunsAreByteIdentical) {
  TempDir a, b;
  ASSERT_EQ(testing::run_mini_pipeline(a.path(), 1).code, 0);
  ASSERT_EQ(testing::run_mini_pipeline(b.path(), 3).code, 0);
  for (const char* f : {"papers.jsonl", "citances.jsonl", "retrievals.jsonl", "summaries.jsonl"}) {
    EXPECT_EQ(read_text(a.path() / f), read_text(b.path() / f)) << f;
  }
}

TEST(Stats, MatchesExpectedFile) {
  const auto r = run_cli({"stats", "--input", mini_papers()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto got = json::parse(r.out);
  const auto want =
      json::parse(read_text(testing::data_dir() / "mini_corpus" / "expected_stats.json"));
  for (const char* key : {"paper_count", "citance_count"}) EXPECT_EQ(got[key], want[key]) << key;
  for (const char* key : {"mean_citances_per_paper", "mean_citance_tokens", "median_citance_tokens"}) {
    EXPECT_NEAR(got[key].get<double>(), want[key].get<double>(), 1e-12) << key;
  }
}

TEST(ExitCodes, UsageAndFailures) {
  auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);

  r = run_cli({});
  EXPECT_EQ(r.code, kExitValidation);

  r = run_cli({"ingest"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("--input"), std::string::npos);

  TempDir dir;
  r = run_cli({"stats", "--input", (dir.path() / "missing").string()});
  EXPECT_EQ(r.code, kExitProvider);

  r = run_cli({"retrieve", "--input", dir.path().string(), "--setup", "sideways-bm25"});
  EXPECT_EQ(r.code, kExitValidation);

  r = run_cli({"index", "--input", mini_papers(), "--output", dir.path().string(),
               "--granularity", "chapters"});
  EXPECT_EQ(r.code, kExitValidation);

  r = run_cli({"summarize", "--input", dir.path().string(), "--provider", "carrier-pigeon"});
  EXPECT_EQ(r.code, kExitValidation);

  r = run_cli({"ingest", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--input"), std::string::npos);
}

TEST(Ingest, MalformedDocumentIsValidationError) {
  TempDir dir;
  testing::write_text(dir.path() / "bad.json", R"({"paper_id": "x"})");
  const auto r = run_cli({"ingest", "--input", (dir.path() / "bad.json").string(), "--output",
                          (dir.path() / "out").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("missing_field"), std::string::npos) << r.err;
  EXPECT_EQ(manifest(dir.path() / "out", "ingest")["exit_code"], kExitValidation);
}

TEST(Index, GranularitySelection) {
  TempDir dir;
  const auto ws = dir.path().string();
  ASSERT_EQ(run_cli({"ingest", "--input", mini_papers(), "--output", ws}).code, 0);
  ASSERT_EQ(run_cli({"index", "--input", ws, "--granularity", "sentences"}).code, 0);
  std::size_t sentence = 0, paragraph = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "indexes")) {
    const auto name = e.path().filename().string();
    sentence += name.ends_with(".sentence.json");
    paragraph += name.ends_with(".paragraph.json");
  }
  EXPECT_EQ(sentence, 3u);
  EXPECT_EQ(paragraph, 0u);
}

TEST(Retrieve, SetupSelection) {
  TempDir dir;
  ASSERT_EQ(testing::run_mini_pipeline(dir.path()).code, 0);
  const auto ws = dir.path().string();

  auto r = run_cli({"retrieve", "--input", ws, "--provider", "mock", "--setup",
                    "citance-bm25-sentences", "--setup", "neighbors-keywords-dense"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto setups = manifest(dir.path(), "retrieve")["details"]["setups"];
  EXPECT_EQ(setups, json({"citance-bm25-sentence", "neighbors-keywords-dense-sentence",
                          "neighbors-keywords-dense-paragraph"}));
  EXPECT_EQ(read_lines(dir.path() / "retrievals.jsonl").size(), 18u);

  r = run_cli({"retrieve", "--input", ws, "--provider", "mock", "--granularity", "paragraphs",
               "--keywords", "on"});
  ASSERT_EQ(r.code, 0) << r.err;
  setups = manifest(dir.path(), "retrieve")["details"]["setups"];
  ASSERT_EQ(setups.size(), 2u);
  for (const auto& s : setups) {
    EXPECT_NE(s.get<std::string>().find("-keywords-"), std::string::npos);
    EXPECT_TRUE(s.get<std::string>().ends_with("-paragraph"));
  }

  r = run_cli({"retrieve", "--input", ws, "--setup", "citance-bm25-sentence", "--granularity",
               "paragraphs"});
  EXPECT_EQ(r.code, kExitValidation);
}

TEST(Summarize, TemplateOverride) {
  TempDir dir;
  ASSERT_EQ(testing::run_mini_pipeline(dir.path()).code, 0);
  const auto ws = dir.path().string();
  auto r = run_cli({"summarize", "--input", ws, "--provider", "mock", "--template", "summarize-a2"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& line : read_lines(dir.path() / "summaries.jsonl")) {
    EXPECT_EQ(json::parse(line)["config"]["template"], "summarize-a2");
  }
  r = run_cli({"summarize", "--input", ws, "--provider", "mock", "--template", "haiku"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("unknown_template"), std::string::npos) << r.err;
}

TEST(Summarize, UnreachableRemoteIsProviderFailure) {
  TempDir dir;
  ASSERT_EQ(testing::run_mini_pipeline(dir.path()).code, 0);
  int port = 0;
  {
    testing::StubServer probe([](const testing::StubRequest&) { return testing::StubResponse{}; });
    port = probe.port();
  }
  const auto cfg = dir.path() / "remote.toml";
  testing::write_text(cfg, "[generation]\nendpoint = \"http://127.0.0.1:" + std::to_string(port) +
                               "/gen\"\nmodel = \"m\"\ntimeout_ms = 500\n");
  const auto r = run_cli({"summarize", "--input", dir.path().string(), "--provider", "remote",
                          "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitProvider) << r.err;
}

TEST(Eval, ReportsFromTsvFiles) {
  TempDir dir;
  testing::write_text(dir.path() / "judgments.tsv",
                      "query_id\tunit_id\tgrade\n"
                      "citance-bm25/q1\tu1\t2\n"
                      "citance-bm25/q1\tu2\t0\n");
  testing::write_text(dir.path() / "ratings.tsv",
                      "rater_id\tsummary_id\tcriterion\tscore\n"
                      "h1\ts1\tcoverage\t4\n"
                      "h2\ts1\tcoverage\t4\n"
                      "h1\ts2\tcoverage\t2\n"
                      "h2\ts2\tcoverage\t2\n");
  const auto r = run_cli({"eval", "--input", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(json::parse(r.out).empty());
  EXPECT_FALSE(fs::exists(dir.path() / "report.json"));

  const auto out = dir.path() / "out";
  EXPECT_EQ(run_cli({"eval", "--judgments", (dir.path() / "judgments.tsv").string(), "--output",
                     out.string()})
                .code,
            0);
  EXPECT_TRUE(fs::exists(out / "report.json"));

  EXPECT_EQ(run_cli({"eval"}).code, kExitValidation);
  testing::write_text(dir.path() / "bad.tsv", "q\tu\tnot-a-number\n");
  EXPECT_EQ(run_cli({"eval", "--judgments", (dir.path() / "bad.tsv").string()}).code,
            kExitValidation);
}

TEST(Config, ParsesSectionsAndTypes) {
  const auto cfg = Config::parse(
      "# comment\n"
      "provider = \"mock\"\n"
      "[retrieval]\n"
      "k1 = 1.2   # trailing\n"
      "top_k_sentences = 7\n"
      "[service]\n"
      "verbose = true\n"
      "name = \"a # b\"\n");
  EXPECT_EQ(cfg.get_string("provider", ""), "mock");
  EXPECT_DOUBLE_EQ(cfg.get_double("retrieval.k1", 0), 1.2);
  EXPECT_EQ(cfg.get_int("retrieval.top_k_sentences", 0), 7);
  EXPECT_TRUE(cfg.get_bool("service.verbose", false));
  EXPECT_EQ(cfg.get_string("service.name", ""), "a # b");
  EXPECT_EQ(cfg.get_int("missing.key", 42), 42);
  EXPECT_DOUBLE_EQ(cfg.get_double("retrieval.top_k_sentences", 0), 7.0);
  EXPECT_THROW(cfg.get_int("provider", 0), Error);
  EXPECT_THROW(cfg.get_bool("retrieval.k1", false), Error);
}

TEST(Config, RejectsMalformedLines) {
  EXPECT_THROW(Config::parse("just words\n"), Error);
  EXPECT_THROW(Config::parse("[unterminated\n"), Error);
  EXPECT_THROW(Config::parse("key = \"open\n"), Error);
  EXPECT_THROW(Config::load("/nonexistent/citesum.toml"), Error);
}

TEST(WriteFileAtomic, ReplacesContentsWithoutLeftovers) {
  TempDir dir;
  const auto path = dir.path() / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_text(path), "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
  write_file_atomic(dir.path() / "nested" / "f", "x");
  EXPECT_EQ(read_text(dir.path() / "nested" / "f"), "x");
  EXPECT_THROW(write_file_atomic(path / "under-a-file", "x"), Error);
}

}  // namespace
}  // namespace citesum::cli
