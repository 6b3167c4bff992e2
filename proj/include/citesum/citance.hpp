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

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citesum/embedding.hpp"
#include "citesum/paper_model.hpp"
#include "citesum/text.hpp"

namespace citesum {

enum class ContextKind { kCitance, kNeighbors, kSimilar };

inline constexpr std::array<ContextKind, 3> kAllContextKinds = {
    ContextKind::kCitance, ContextKind::kNeighbors, ContextKind::kSimilar};

std::string_view to_string(ContextKind kind);
/// Accepts "citance", "neighbors", "similar". Throws Error(kInvalidArgument).
ContextKind parse_context_kind(std::string_view name);

/// A sentence containing at least one citation. A sentence citing several
/// references is one citance with several targets.
struct Citance {
  std::string citance_id;
  std::string paper_id;
  std::string para_id;
  int sent_index = 0;
  std::string text;
  std::vector<std::string> targets;  // ref_keys, in order of first mention

  bool operator==(const Citance&) const = default;
};

std::string make_citance_id(std::string_view paper_id, std::string_view para_id,
                            int sent_index);

struct SentenceRef {
  std::string para_id;
  int sent_index = 0;
  std::string text;
  bool is_citance = false;

  bool operator==(const SentenceRef&) const = default;
};

struct CitanceContext {
  std::string citance_id;
  ContextKind kind = ContextKind::kCitance;
  std::vector<SentenceRef> sentences;  // document order
  bool degenerate = false;             // fewer members than the kind allows

  /// Member texts joined by single spaces.
  std::string text() const;
  const SentenceRef& citance_sentence() const;

  bool operator==(const CitanceContext&) const = default;
};

struct KeywordQuery {
  std::string citance_id;
  ContextKind context_kind = ContextKind::kCitance;
  std::string phrase;
  double weight = 0.0;  // cosine of the phrase to the citance

  bool operator==(const KeywordQuery&) const = default;
};

inline constexpr int kDefaultKeywordCount = 5;

std::vector<Citance> extract_citances(const PaperDocument& doc);

/// Looks up a citance of `doc` by id; nullopt when it is not a citance.
std::optional<Citance> find_citance(const PaperDocument& doc,
                                    std::string_view citance_id);

CitanceContext citance_only_context(const PaperDocument& doc, const Citance& c);

/// The citance with its immediate predecessor and successor in the same
/// paragraph.
CitanceContext neighbors_context(const PaperDocument& doc, const Citance& c);

/// The citance with its two paragraph-mates most similar under `embed`.
/// Ties go to the earlier sentence; sentences identical to the citance are
/// never selected.
CitanceContext similar_context(const PaperDocument& doc, const Citance& c,
                               const embedding::Embedder& embed);

CitanceContext build_context(const PaperDocument& doc, const Citance& c,
                             ContextKind kind, const embedding::Embedder& embed);

/// Stopword-filtered 1- and 2-gram candidates of `text`, deduplicated in
/// order of first occurrence. Bigrams join tokens adjacent after filtering.
std::vector<std::string> keyword_candidates(
    std::string_view text,
    const text::WordList& stopwords = text::default_stopwords());

/// Embedding-ranked keyphrases of the context. Candidates are ranked by
/// similarity to the whole context; each result is weighted by its
/// similarity to the citance sentence.
std::vector<KeywordQuery> extract_keywords(
    const CitanceContext& ctx, const embedding::Embedder& embed,
    int n = kDefaultKeywordCount,
    const text::WordList& stopwords = text::default_stopwords());

/// One line of the citance export (JSON Lines).
struct CitanceRecord {
  Citance citance;
  std::vector<CitanceContext> contexts;  // citance, neighbors, similar
  std::vector<KeywordQuery> keywords;
};

std::string to_json_line(const CitanceRecord& record);
CitanceRecord parse_citance_record(std::string_view line);

}  // namespace citesum
