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

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citesum/citance.hpp"
#include "citesum/embedding.hpp"
#include "citesum/paper_model.hpp"

namespace citesum::retrieval {

enum class Granularity { kSentence, kParagraph };
enum class Model { kBm25, kDense };

std::string_view to_string(Granularity g);  // "sentence" / "paragraph"
std::string_view to_string(Model m);        // "bm25" / "dense"
/// Accepts singular or plural ("sentence", "sentences", ...).
Granularity parse_granularity(std::string_view name);
Model parse_model(std::string_view name);

/// A retrievable piece of a cited paper: one sentence or one paragraph.
struct IndexUnit {
  std::string unit_id;
  std::string paper_id;
  Granularity granularity = Granularity::kSentence;
  std::string text;
  int token_count = 0;

  bool operator==(const IndexUnit&) const = default;
};

/// Units of the abstract and body of `doc`; the title is not indexed.
/// Unit ids are "<paper_id>/<para_id>" for paragraphs and
/// "<paper_id>/<para_id>/s<NNN>" for sentences.
std::vector<IndexUnit> units_from_document(const PaperDocument& doc,
                                           Granularity granularity);

struct Posting {
  std::uint32_t unit = 0;  // position in InvertedIndex::units()
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Immutable after construction; safe for concurrent readers.
class InvertedIndex {
 public:
  Granularity granularity() const { return granularity_; }
  std::size_t doc_count() const { return units_.size(); }
  double avg_unit_length() const { return avg_unit_length_; }
  const std::vector<IndexUnit>& units() const { return units_; }
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const {
    return postings_;
  }

  /// Number of units containing `term`.
  std::size_t document_frequency(std::string_view term) const;
  /// Occurrences of `term` in the unit at `unit_pos`.
  std::uint32_t term_frequency(std::string_view term, std::size_t unit_pos) const;
  std::optional<std::size_t> position_of(std::string_view unit_id) const;

 private:
  friend InvertedIndex build_index(std::vector<IndexUnit> units,
                                   Granularity granularity);
  friend InvertedIndex index_from_json(std::string_view json_text);

  void finalize();

  Granularity granularity_ = Granularity::kSentence;
  std::vector<IndexUnit> units_;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::map<std::string, std::size_t, std::less<>> positions_;
  double avg_unit_length_ = 0.0;
};

/// Throws Error(kDuplicateUnitId). token_count is recomputed from text.
InvertedIndex build_index(std::vector<IndexUnit> units, Granularity granularity);

/// Versioned JSON persistence. The header records format version,
/// tokenizer version, granularity, N and avgdl; loading rejects mismatches.
inline constexpr int kIndexFormatVersion = 1;
std::string index_to_json(const InvertedIndex& index);
InvertedIndex index_from_json(std::string_view json_text);

struct Bm25Params {
  double k1 = 1.0;
  double b = 0.75;
};

/// ln(1 + (N - n + 0.5) / (n + 0.5)); never negative.
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

/// Okapi BM25 of the unit for a multiset of query terms. Throws
/// Error(kUnknownUnit).
double bm25_score(std::span<const std::string> query_terms,
                  std::string_view unit_id, const InvertedIndex& index,
                  double k1, double b);

struct Hit {
  std::string unit_id;
  double score = 0.0;

  bool operator==(const Hit&) const = default;
};

/// Hits ordered by score descending, then unit_id ascending.
struct RankedList {
  std::vector<Hit> hits;
  std::string query_descriptor;
};

/// The ranking order used everywhere: score descending, unit_id ascending.
bool ranks_before(const Hit& a, const Hit& b);

/// BM25 scores units sharing at least one query term; dense scores every
/// unit by embedding similarity to the query. Returns at most k hits.
/// `embed` may be null for BM25.
RankedList search(const InvertedIndex& index, std::string_view query_text,
                  Model model, const embedding::Embedder* embed, std::size_t k,
                  Bm25Params params = {});

/// Weighted sum of per-ranking min-max normalized scores (a constant ranking
/// normalizes to 1). Negative weights count as 0. Throws
/// Error(kLengthMismatch) when sizes differ or no ranking is given.
RankedList fuse_keyword_rankings(std::span<const RankedList> rankings,
                                 std::span<const double> weights);

struct RetrievalConfig {
  double k1 = 1.0;
  double b = 0.75;
  int top_k_sentences = 5;
  int top_k_paragraphs = 2;
  Model model = Model::kBm25;
  ContextKind context_kind = ContextKind::kCitance;
  bool use_keywords = false;

  void validate() const;
  std::size_t top_k(Granularity g) const;
  /// "<context>[-keywords]-<model>", e.g. "similar-keywords-bm25".
  std::string descriptor() const;

  bool operator==(const RetrievalConfig&) const = default;
};

/// All 12 setups: context kind x keywords on/off x model.
std::vector<RetrievalConfig> setup_grid();

/// (similar, bm25) and (citance, dense), the presets carried into
/// summarization.
std::vector<RetrievalConfig> distinguished_setups();

struct RetrievalResult {
  std::string citance_id;
  std::string target_paper_id;
  RetrievalConfig config;
  Granularity granularity = Granularity::kSentence;
  RankedList hits;
  std::vector<std::string> retrieved_texts;
};

/// Retrieves the top-k units of `target` for the context (or, with
/// cfg.use_keywords, for each keyword query fused by keyword weight).
/// `index` may be a prebuilt index of `target` at `granularity`.
/// Throws Error(kTargetUnavailable) when the target has no full text.
RetrievalResult retrieve_for_citance(
    const Citance& c, const CitanceContext& ctx,
    std::span<const KeywordQuery> keywords, const PaperDocument& target,
    const RetrievalConfig& cfg, Granularity granularity,
    const embedding::Embedder* embed, const InvertedIndex* index = nullptr);

/// One JSON object per result; used for the retrieval export and the cache.
std::string result_to_json(const RetrievalResult& r);
RetrievalResult result_from_json(std::string_view json_text);

/// Lazily built per-paper indexes, shared between concurrent callers.
class IndexCache {
 public:
  std::shared_ptr<const InvertedIndex> get(const PaperDocument& doc,
                                           Granularity granularity);
  void put(const std::string& paper_id, Granularity granularity,
           std::shared_ptr<const InvertedIndex> index);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, Granularity>, std::shared_ptr<const InvertedIndex>>
      indexes_;
};

}  // namespace citesum::retrieval
