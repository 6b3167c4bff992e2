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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "citesum/paper_model.hpp"

namespace citesum::testing {

std::filesystem::path data_dir();
std::filesystem::path golden_dir();
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& contents);

/// The bundled papers, ordered by paper id.
std::vector<PaperDocument> mini_corpus();
Corpus mini_corpus_index();

struct ExpectedCitance {
  std::string citance_id;
  std::vector<std::string> target_papers;
  std::string text;
};
std::vector<ExpectedCitance> expected_citances();

/// A fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// A one-paragraph S2ORC-style document; `spans` are (start, end, ref_id).
struct SpanSpec {
  std::size_t start;
  std::size_t end;
  std::string ref_id;
};
std::string make_document_json(const std::string& paper_id,
                               const std::vector<std::string>& paragraphs,
                               const std::vector<std::vector<SpanSpec>>& spans,
                               const std::vector<std::string>& ref_ids,
                               const std::vector<std::string>& abstract = {});

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
/// Runs the command line in-process; "citesum" is prepended as argv[0].
CliResult run_cli(std::vector<std::string> args);

/// ingest, index, extract, retrieve and summarize over the bundled mini
/// corpus into `workspace`, offline (fallback embedder, mock generator).
/// Returns the first failing step, or the last result.
CliResult run_mini_pipeline(const std::filesystem::path& workspace, int jobs = 1);

/// Non-empty lines of a text file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// A local HTTP server answering every POST with `handler`. Listens on a
/// free port of 127.0.0.1 until destroyed.
struct StubRequest {
  std::string path;
  std::string body;
  std::string authorization;
};
struct StubResponse {
  int status = 200;
  std::string body;
  int delay_ms = 0;
};
class StubServer {
 public:
  explicit StubServer(std::function<StubResponse(const StubRequest&)> handler);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string url(const std::string& path = "/") const;
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace citesum::testing
