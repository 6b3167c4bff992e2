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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citesum/text.hpp"

namespace citesum {

/// A sentence of a paragraph. Offsets count Unicode scalar values into the
/// owning Paragraph::text and are end-exclusive.
struct Sentence {
  int sent_index = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string text;

  bool operator==(const Sentence&) const = default;
};

struct CitationSpan {
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::string ref_key;

  bool operator==(const CitationSpan&) const = default;
};

struct Paragraph {
  std::string para_id;
  std::string text;
  std::vector<Sentence> sentences;
  std::vector<CitationSpan> cite_spans;

  /// Index into `sentences` of the sentence containing `span`, or nullopt.
  std::optional<std::size_t> sentence_of(const CitationSpan& span) const;

  bool operator==(const Paragraph&) const = default;
};

struct Section {
  std::string title;
  std::vector<Paragraph> paragraphs;

  bool operator==(const Section&) const = default;
};

struct BibEntry {
  std::string ref_key;
  std::string title;
  std::optional<std::string> linked_paper_id;

  bool operator==(const BibEntry&) const = default;
};

struct PaperDocument {
  std::string paper_id;
  std::string title;
  std::vector<Paragraph> abstract_paragraphs;
  std::vector<Section> body_sections;
  std::map<std::string, BibEntry> bib_entries;

  /// Body paragraphs in document order.
  std::vector<const Paragraph*> body_paragraphs() const;

  /// Abstract paragraphs followed by body paragraphs.
  std::vector<const Paragraph*> all_paragraphs() const;

  const Paragraph* find_paragraph(std::string_view para_id) const;

  /// True when the body holds at least one paragraph.
  bool has_full_text() const;

  /// Documents without any citation span are kept as retrieval targets but
  /// contribute no citances.
  bool citance_free() const;

  bool operator==(const PaperDocument&) const = default;
};

using DocumentPtr = std::shared_ptr<const PaperDocument>;

struct CorpusStats {
  long long paper_count = 0;
  long long citance_count = 0;
  double mean_citances_per_paper = 0.0;
  double mean_citance_tokens = 0.0;
  double median_citance_tokens = 0.0;

  bool operator==(const CorpusStats&) const = default;
};

enum class InputFormat {
  kS2orcJson,
};

/// Parses one document in the S2ORC-like JSON schema. Throws Error with
/// kMalformedInput, kMissingField or kDanglingRef.
PaperDocument parse_document(std::string_view raw,
                             InputFormat format = InputFormat::kS2orcJson);

/// Serializes back to the input schema. parse_document(serialize_document(d))
/// reproduces `d`.
std::string serialize_document(const PaperDocument& doc);

/// A half-open scalar range the segmenter must not split.
struct ProtectedRange {
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Rule-based sentence splitter using the bundled abbreviation list.
std::vector<Sentence> segment_paragraph(std::string_view text);

std::vector<Sentence> segment_paragraph(
    std::string_view text, const text::WordList& abbreviations,
    std::span<const ProtectedRange> protected_ranges = {});

/// The text around the sentences of `p`: sentences.size() + 1 pieces (text
/// before the first sentence, between consecutive sentences, after the
/// last). Interleaving them with the sentence texts reproduces p.text.
std::vector<std::string> sentence_separators(const Paragraph& p);

/// Number of sentences of `doc` containing at least one citation span.
std::size_t count_citing_sentences(const PaperDocument& doc);

CorpusStats compute_corpus_stats(std::span<const PaperDocument> corpus);

/// Documents keyed by paper_id.
class Corpus {
 public:
  /// Throws Error(kDuplicatePaper) when the id is already present.
  void add(PaperDocument doc);

  DocumentPtr find(std::string_view paper_id) const;
  const std::map<std::string, DocumentPtr, std::less<>>& documents() const {
    return docs_;
  }
  std::size_t size() const { return docs_.size(); }

 private:
  std::map<std::string, DocumentPtr, std::less<>> docs_;
};

}  // namespace citesum
