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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "citesum/citance.hpp"
#include "citesum/embedding.hpp"
#include "citesum/error.hpp"
#include "citesum/paper_model.hpp"
#include "citesum/retrieval.hpp"
#include "citesum/summarization.hpp"

namespace citesum::service {

/// Read-only view of an ingested corpus with lazily derived citance data.
/// Safe for concurrent use.
class CorpusStore {
 public:
  CorpusStore(Corpus corpus, std::shared_ptr<const embedding::Embedder> embed,
              int keyword_count = kDefaultKeywordCount);

  /// Throws Error(kNotFound).
  DocumentPtr paper(std::string_view paper_id) const;
  const std::vector<Citance>& citances_of(std::string_view paper_id) const;
  const Citance& citance(std::string_view citance_id) const;

  const CitanceContext& context(const Citance& c, ContextKind kind) const;
  const std::vector<KeywordQuery>& keywords(const Citance& c, ContextKind kind) const;

  /// The cited paper of `c`: `target` may be a ref_key of the citance, a
  /// linked paper id, or empty for the first target. Returns null when the
  /// reference is not linked to a paper of the corpus. Throws
  /// Error(kNotFound) when `target` is not a target of the citance.
  DocumentPtr target_of(const Citance& c, std::string_view target = {}) const;

  std::shared_ptr<const retrieval::InvertedIndex> index(const PaperDocument& doc,
                                                        retrieval::Granularity g) const;

  const embedding::Embedder& embedder() const { return *embed_; }
  const Corpus& corpus() const { return corpus_; }

 private:
  Corpus corpus_;
  std::shared_ptr<const embedding::Embedder> embed_;
  int keyword_count_;
  std::map<std::string, std::vector<Citance>, std::less<>> by_paper_;
  std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> by_id_;

  mutable std::mutex derived_mu_;
  mutable std::map<std::pair<std::string, ContextKind>, std::shared_ptr<CitanceContext>>
      contexts_;
  mutable std::map<std::pair<std::string, ContextKind>,
                   std::shared_ptr<std::vector<KeywordQuery>>>
      keywords_;
  mutable retrieval::IndexCache indexes_;
};

struct SummaryCacheKey {
  std::string citance_id;
  std::string target_paper_id;
  ContextKind context_kind = ContextKind::kCitance;
  retrieval::Model model = retrieval::Model::kBm25;
  retrieval::Granularity granularity = retrieval::Granularity::kSentence;
  bool use_keywords = false;
  std::string template_name;
  std::string generator_model;
  double temperature = 0.0;

  /// Stable string form used for lookups and persistence.
  std::string canonical() const;
  bool operator==(const SummaryCacheKey&) const = default;
};

SummaryCacheKey key_of(const summarization::Summary& s);

struct CacheEntry {
  SummaryCacheKey key;
  summarization::Summary summary;
  retrieval::RetrievalResult retrieved;
};

std::string entry_to_json(const CacheEntry& e);
CacheEntry entry_from_json(std::string_view line);

enum class CacheWrite { kStored, kAlreadyPresent };

/// Write-once summary store. With a path, entries are appended to a JSON
/// Lines file and reloaded on construction; a torn final line is ignored.
/// Writers are serialized; lookups run concurrently with them.
class SummaryCache {
 public:
  SummaryCache() = default;
  /// Throws Error(kStorageFailure) when the file cannot be read, or
  /// Error(kMalformedInput) for a corrupt line other than the last.
  explicit SummaryCache(std::filesystem::path path);

  /// Throws Error(kConflict) when the key holds a different entry and
  /// Error(kStorageFailure) when the append fails.
  CacheWrite put(const CacheEntry& entry);
  std::optional<CacheEntry> get(const SummaryCacheKey& key) const;
  /// The stored JSON line of the entry, byte for byte.
  std::optional<std::string> get_raw(const SummaryCacheKey& key) const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::mutex write_mu_;
  std::map<std::string, std::string> lines_;  // canonical key -> JSON line
};

/// A retrieval + summary request for one citance.
struct PanelRequest {
  std::string citance_id;
  std::string target;  // ref_key or paper id; empty for the first target
  ContextKind context_kind = ContextKind::kSimilar;
  retrieval::Model model = retrieval::Model::kBm25;
  retrieval::Granularity granularity = retrieval::Granularity::kParagraph;
  bool use_keywords = false;
  std::string template_name;  // empty: chosen by granularity

  /// "<context>[-keywords]-<model>-<granularity>".
  std::string descriptor() const;
  /// Parses a descriptor produced by descriptor(); plural granularities are
  /// accepted. Throws Error(kInvalidArgument).
  static PanelRequest from_descriptor(std::string_view citance_id,
                                      std::string_view descriptor);
};

/// (similar, bm25, paragraph) and (citance, dense, sentence).
std::vector<PanelRequest> default_panel_setups(std::string_view citance_id);

struct Panel {
  Citance citance;
  std::vector<CitanceContext> contexts;  // citance, neighbors, similar
  std::string target_paper_id;
  std::string target_title;
  std::vector<std::string> target_abstract;
  PanelRequest request;
  std::optional<retrieval::RetrievalResult> retrieved;
  std::optional<summarization::Summary> summary;
  bool cache_hit = false;
  /// Set when the cited paper has no full text; the abstract is still
  /// filled in when the paper is known.
  std::optional<Error> unavailable;
};

std::string panel_to_json(const Panel& p);

struct ServiceOptions {
  summarization::GenerationRequest generation;  // model, endpoint, sampling
  retrieval::RetrievalConfig retrieval;         // k1, b, top-k
};

class PanelService {
 public:
  PanelService(std::shared_ptr<const CorpusStore> store,
               std::shared_ptr<SummaryCache> cache,
               std::shared_ptr<const summarization::Generator> generator,
               ServiceOptions options = {},
               summarization::Clock clock = summarization::system_timestamp);

  /// Retrieval only. Throws Error(kNotFound) or Error(kTargetUnavailable).
  retrieval::RetrievalResult retrieve(const PanelRequest& req) const;

  /// Citance, contexts, abstract, hits and the cached or freshly generated
  /// summary. Concurrent identical requests share one generation. Throws
  /// Error(kNotFound) and provider errors.
  Panel resolve_citance_panel(const PanelRequest& req);

  SummaryCacheKey cache_key(const PanelRequest& req, const PaperDocument& target) const;

  long long generations() const { return generations_.load(); }
  long long cache_hits() const { return cache_hits_.load(); }
  /// Requests that waited on another caller's in-flight generation. Their
  /// panels are identical to the generating caller's (cache_hit false).
  long long coalesced() const { return coalesced_.load(); }
  const CorpusStore& store() const { return *store_; }
  const ServiceOptions& options() const { return options_; }

 private:
  CacheEntry generate(const PanelRequest& req, const Citance& c,
                      const PaperDocument& target, const SummaryCacheKey& key);
  retrieval::RetrievalResult retrieve_from(const PanelRequest& req, const Citance& c,
                                           const PaperDocument& target) const;
  retrieval::RetrievalConfig config_for(const PanelRequest& req) const;

  std::shared_ptr<const CorpusStore> store_;
  std::shared_ptr<SummaryCache> cache_;
  std::shared_ptr<const summarization::Generator> generator_;
  ServiceOptions options_;
  summarization::Clock clock_;

  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<CacheEntry>> inflight_;
  std::atomic<long long> generations_{0};
  std::atomic<long long> cache_hits_{0};
  std::atomic<long long> coalesced_{0};
};

/// HTTP status used for an error code in JSON error bodies.
int http_status(ErrorCode code);
/// {"code", "message", "retriable"}.
std::string error_body(const Error& e);

/// JSON endpoints:
///   GET  /health
///   GET  /papers/{id}
///   GET  /papers/{id}/citances
///   GET  /citances/{id}/contexts
///   POST /retrieve   {citance_id, context_kind, model, granularity, use_keywords[, target]}
///   POST /summarize  {the same fields, template}
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<PanelService> service);
  ~HttpServer();

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port. Throws Error(kStorageFailure) when binding fails.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace citesum::service
