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

#include "citesum/paper_model.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cstdio>
#include <json.hpp>

#include "citesum/error.hpp"

namespace citesum {

namespace {

using nlohmann::json;

// An opening bracket further back than this is assumed to be unbalanced and
// stops suppressing sentence boundaries.
constexpr std::size_t kMaxBracketReach = 400;

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closing_quote(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'”' || c == U'’' ||
         c == U'»';
}

char32_t ascii_fold(char32_t c) {
  return (c >= U'A' && c <= U'Z') ? c - U'A' + U'a' : c;
}

class AbbreviationMatcher {
 public:
  explicit AbbreviationMatcher(const text::WordList& list) {
    for (const auto& entry : list.entries()) {
      auto decoded = text::decode_utf8(entry);
      for (auto& c : decoded) c = ascii_fold(c);
      if (!decoded.empty() && decoded.back() == U'.') {
        entries_.push_back(std::move(decoded));
      }
    }
  }

  // True when the period at `pos` closes an abbreviation.
  bool ends_abbreviation(const std::u32string& s, std::size_t pos) const {
    // Single capital initial such as "J." in "J. Smith".
    if (pos >= 1 && u_isupper(static_cast<UChar32>(s[pos - 1])) &&
        (pos == 1 || !u_isalnum(static_cast<UChar32>(s[pos - 2])))) {
      return true;
    }
    for (const auto& entry : entries_) {
      const std::size_t len = entry.size();
      if (pos + 1 < len) continue;
      const std::size_t begin = pos + 1 - len;
      bool match = true;
      for (std::size_t k = 0; k < len && match; ++k) {
        match = ascii_fold(s[begin + k]) == entry[k];
      }
      if (!match) continue;
      if (begin == 0 || !u_isalnum(static_cast<UChar32>(s[begin - 1]))) {
        return true;
      }
    }
    return false;
  }

 private:
  std::vector<std::u32string> entries_;
};

std::vector<Sentence> segment_scalars(
    std::string_view utf8, const std::u32string& s,
    const AbbreviationMatcher& abbreviations,
    std::span<const ProtectedRange> protected_ranges) {
  const auto offsets = text::scalar_byte_offsets(utf8);
  const std::size_t n = s.size();
  std::vector<Sentence> out;

  auto emit = [&](std::size_t start, std::size_t end) {
    Sentence sentence;
    sentence.sent_index = static_cast<int>(out.size());
    sentence.char_start = start;
    sentence.char_end = end;
    sentence.text =
        std::string(utf8.substr(offsets[start], offsets[end] - offsets[start]));
    out.push_back(std::move(sentence));
  };

  auto boundary_allowed = [&](std::size_t end, std::size_t next) {
    return std::all_of(protected_ranges.begin(), protected_ranges.end(),
                       [&](const ProtectedRange& r) {
                         return r.end <= end || r.start >= next;
                       });
  };

  std::size_t start = 0;
  while (start < n && is_space(s[start])) ++start;

  std::vector<std::size_t> open_brackets;
  for (std::size_t i = start; i < n; ++i) {
    const char32_t c = s[i];
    if (c == U'(' || c == U'[' || c == U'{') {
      open_brackets.push_back(i);
      continue;
    }
    if (c == U')' || c == U']' || c == U'}') {
      if (!open_brackets.empty()) open_brackets.pop_back();
      continue;
    }
    if (!is_terminator(c)) continue;
    if (!open_brackets.empty()) {
      if (i - open_brackets.front() <= kMaxBracketReach) continue;
      open_brackets.clear();
    }

    std::size_t last = i;
    while (last + 1 < n && is_terminator(s[last + 1])) ++last;
    while (last + 1 < n && is_closing_quote(s[last + 1])) ++last;
    const std::size_t end = last + 1;
    if (end < n && !is_space(s[end])) {
      i = last;
      continue;
    }
    std::size_t next = end;
    while (next < n && is_space(s[next])) ++next;
    if (next == n) break;
    if (u_islower(static_cast<UChar32>(s[next])) ||
        (c == U'.' && last == i && abbreviations.ends_abbreviation(s, i)) ||
        !boundary_allowed(end, next)) {
      i = last;
      continue;
    }
    emit(start, end);
    start = next;
    i = next - 1;
  }

  std::size_t end = n;
  while (end > start && is_space(s[end - 1])) --end;
  if (end > start) emit(start, end);
  return out;
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedInput, what);
}

const json& require(const json& obj, const char* key, ErrorCode code,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(code, where + ": missing field '" + key + "'");
  }
  return *it;
}

std::string string_field(const json& obj, const char* key,
                         const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) malformed(where + ": '" + key + "' must be a string");
  return it->get<std::string>();
}

std::size_t offset_field(const json& span, const char* key,
                         const std::string& where) {
  const auto& v = require(span, key, ErrorCode::kMalformedInput, where);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    malformed(where + ": '" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string make_para_id(char prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%04zu", prefix, index);
  return buf;
}

Paragraph build_paragraph(std::string para_id, std::string text,
                          std::vector<CitationSpan> spans) {
  Paragraph p;
  p.para_id = std::move(para_id);
  p.text = std::move(text);
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return std::tie(a.char_start, a.char_end, a.ref_key) <
           std::tie(b.char_start, b.char_end, b.ref_key);
  });
  p.cite_spans = std::move(spans);

  std::vector<ProtectedRange> ranges;
  ranges.reserve(p.cite_spans.size());
  for (const auto& span : p.cite_spans) {
    ranges.push_back({span.char_start, span.char_end});
  }
  const auto scalars = text::decode_utf8(p.text);
  p.sentences = segment_scalars(
      p.text, scalars, AbbreviationMatcher(text::default_abbreviations()),
      ranges);
  for (const auto& span : p.cite_spans) {
    if (!p.sentence_of(span)) {
      malformed(p.para_id + ": citation span [" +
                std::to_string(span.char_start) + ", " +
                std::to_string(span.char_end) + ") lies outside every sentence");
    }
  }
  return p;
}

Paragraph parse_body_paragraph(const json& jp, std::size_t index,
                               const std::map<std::string, BibEntry>& bib) {
  const std::string where = "body paragraph " + std::to_string(index);
  if (!jp.is_object()) malformed(where + ": expected an object");
  const auto& jtext = require(jp, "text", ErrorCode::kMissingField, where);
  if (!jtext.is_string()) malformed(where + ": 'text' must be a string");
  auto paragraph_text = jtext.get<std::string>();
  const std::size_t length = text::scalar_length(paragraph_text);

  std::vector<CitationSpan> spans;
  if (auto it = jp.find("cite_spans"); it != jp.end() && !it->is_null()) {
    if (!it->is_array()) malformed(where + ": 'cite_spans' must be an array");
    for (const auto& js : *it) {
      if (!js.is_object()) malformed(where + ": citation span must be an object");
      auto ref = js.find("ref_id");
      // S2ORC leaves unresolvable in-text markers with a null ref_id; they
      // cannot be linked to a bibliography entry and are dropped.
      if (ref == js.end() || ref->is_null()) continue;
      if (!ref->is_string()) malformed(where + ": 'ref_id' must be a string");
      CitationSpan span;
      span.char_start = offset_field(js, "start", where);
      span.char_end = offset_field(js, "end", where);
      span.ref_key = ref->get<std::string>();
      if (span.char_start >= span.char_end || span.char_end > length) {
        malformed(where + ": citation span [" + std::to_string(span.char_start) +
                  ", " + std::to_string(span.char_end) +
                  ") is empty or exceeds the paragraph");
      }
      if (!bib.contains(span.ref_key)) {
        throw Error(ErrorCode::kDanglingRef,
                    where + ": ref_id '" + span.ref_key +
                        "' has no bibliography entry");
      }
      spans.push_back(std::move(span));
    }
  }
  return build_paragraph(make_para_id('p', index), std::move(paragraph_text),
                         std::move(spans));
}

PaperDocument parse_s2orc_json(std::string_view raw) {
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) malformed("document root must be an object");

  PaperDocument doc;
  const auto& id = require(root, "paper_id", ErrorCode::kMissingField, "document");
  if (!id.is_string()) malformed("'paper_id' must be a string");
  doc.paper_id = id.get<std::string>();
  if (doc.paper_id.empty()) {
    throw Error(ErrorCode::kMissingField, "document: empty 'paper_id'");
  }
  const std::string where = "paper " + doc.paper_id;
  doc.title = string_field(root, "title", where);

  if (auto it = root.find("bib_entries"); it != root.end() && !it->is_null()) {
    if (!it->is_object()) malformed(where + ": 'bib_entries' must be an object");
    for (const auto& [key, jb] : it->items()) {
      if (!jb.is_object()) malformed(where + ": bib entry '" + key + "' must be an object");
      BibEntry entry;
      entry.ref_key = key;
      entry.title = string_field(jb, "title", where);
      if (auto link = jb.find("linked_paper_id");
          link != jb.end() && !link->is_null()) {
        if (!link->is_string()) malformed(where + ": 'linked_paper_id' must be a string or null");
        entry.linked_paper_id = link->get<std::string>();
      }
      doc.bib_entries.emplace(key, std::move(entry));
    }
  }

  if (auto it = root.find("abstract"); it != root.end() && !it->is_null()) {
    if (!it->is_array()) malformed(where + ": 'abstract' must be an array of strings");
    std::size_t index = 0;
    for (const auto& ja : *it) {
      if (!ja.is_string()) malformed(where + ": abstract entries must be strings");
      doc.abstract_paragraphs.push_back(
          build_paragraph(make_para_id('a', index++), ja.get<std::string>(), {}));
    }
  }

  const auto& body = require(root, "body", ErrorCode::kMissingField, where);
  if (!body.is_array()) malformed(where + ": 'body' must be an array");
  std::size_t para_index = 0;
  for (const auto& js : body) {
    if (!js.is_object()) malformed(where + ": body sections must be objects");
    Section section;
    section.title = string_field(js, "section", where);
    const auto& paras = require(js, "paragraphs", ErrorCode::kMissingField, where);
    if (!paras.is_array()) malformed(where + ": 'paragraphs' must be an array");
    for (const auto& jp : paras) {
      section.paragraphs.push_back(
          parse_body_paragraph(jp, para_index++, doc.bib_entries));
    }
    doc.body_sections.push_back(std::move(section));
  }
  return doc;
}

}  // namespace

std::optional<std::size_t> Paragraph::sentence_of(
    const CitationSpan& span) const {
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].char_start <= span.char_start &&
        span.char_end <= sentences[i].char_end) {
      return i;
    }
  }
  return std::nullopt;
}

std::vector<const Paragraph*> PaperDocument::body_paragraphs() const {
  std::vector<const Paragraph*> out;
  for (const auto& section : body_sections) {
    for (const auto& p : section.paragraphs) out.push_back(&p);
  }
  return out;
}

std::vector<const Paragraph*> PaperDocument::all_paragraphs() const {
  std::vector<const Paragraph*> out;
  for (const auto& p : abstract_paragraphs) out.push_back(&p);
  for (const auto* p : body_paragraphs()) out.push_back(p);
  return out;
}

const Paragraph* PaperDocument::find_paragraph(std::string_view para_id) const {
  for (const auto* p : all_paragraphs()) {
    if (p->para_id == para_id) return p;
  }
  return nullptr;
}

bool PaperDocument::has_full_text() const {
  return std::any_of(body_sections.begin(), body_sections.end(),
                     [](const Section& s) { return !s.paragraphs.empty(); });
}

bool PaperDocument::citance_free() const {
  for (const auto* p : all_paragraphs()) {
    if (!p->cite_spans.empty()) return false;
  }
  return true;
}

PaperDocument parse_document(std::string_view raw, InputFormat format) {
  switch (format) {
    case InputFormat::kS2orcJson:
      return parse_s2orc_json(raw);
  }
  throw Error(ErrorCode::kInvalidArgument, "unsupported input format");
}

std::string serialize_document(const PaperDocument& doc) {
  json root;
  root["paper_id"] = doc.paper_id;
  root["title"] = doc.title;
  root["abstract"] = json::array();
  for (const auto& p : doc.abstract_paragraphs) root["abstract"].push_back(p.text);
  root["body"] = json::array();
  for (const auto& section : doc.body_sections) {
    json js;
    js["section"] = section.title;
    js["paragraphs"] = json::array();
    for (const auto& p : section.paragraphs) {
      json jp;
      jp["text"] = p.text;
      jp["cite_spans"] = json::array();
      for (const auto& span : p.cite_spans) {
        jp["cite_spans"].push_back({{"start", span.char_start},
                                    {"end", span.char_end},
                                    {"ref_id", span.ref_key}});
      }
      js["paragraphs"].push_back(std::move(jp));
    }
    root["body"].push_back(std::move(js));
  }
  root["bib_entries"] = json::object();
  for (const auto& [key, entry] : doc.bib_entries) {
    json jb;
    jb["title"] = entry.title;
    jb["linked_paper_id"] =
        entry.linked_paper_id ? json(*entry.linked_paper_id) : json(nullptr);
    root["bib_entries"][key] = std::move(jb);
  }
  return root.dump();
}

std::vector<Sentence> segment_paragraph(std::string_view text) {
  return segment_paragraph(text, text::default_abbreviations());
}

std::vector<Sentence> segment_paragraph(
    std::string_view text, const text::WordList& abbreviations,
    std::span<const ProtectedRange> protected_ranges) {
  const auto scalars = text::decode_utf8(text);
  return segment_scalars(text, scalars, AbbreviationMatcher(abbreviations),
                         protected_ranges);
}

std::vector<std::string> sentence_separators(const Paragraph& p) {
  const auto offsets = text::scalar_byte_offsets(p.text);
  auto piece = [&](std::size_t from, std::size_t to) {
    return p.text.substr(offsets[from], offsets[to] - offsets[from]);
  };
  std::vector<std::string> out;
  std::size_t cursor = 0;
  for (const auto& s : p.sentences) {
    out.push_back(piece(cursor, s.char_start));
    cursor = s.char_end;
  }
  out.push_back(piece(cursor, offsets.size() - 1));
  return out;
}

std::size_t count_citing_sentences(const PaperDocument& doc) {
  std::size_t count = 0;
  for (const auto* p : doc.all_paragraphs()) {
    std::vector<bool> cites(p->sentences.size(), false);
    for (const auto& span : p->cite_spans) {
      if (auto idx = p->sentence_of(span)) cites[*idx] = true;
    }
    count += static_cast<std::size_t>(std::count(cites.begin(), cites.end(), true));
  }
  return count;
}

CorpusStats compute_corpus_stats(std::span<const PaperDocument> corpus) {
  CorpusStats stats;
  std::vector<std::size_t> lengths;
  for (const auto& doc : corpus) {
    std::size_t citances = 0;
    for (const auto* p : doc.all_paragraphs()) {
      std::vector<bool> cites(p->sentences.size(), false);
      for (const auto& span : p->cite_spans) {
        if (auto idx = p->sentence_of(span)) cites[*idx] = true;
      }
      for (std::size_t i = 0; i < cites.size(); ++i) {
        if (!cites[i]) continue;
        ++citances;
        lengths.push_back(text::tokenize(p->sentences[i].text).size());
      }
    }
    if (citances > 0) ++stats.paper_count;
  }
  stats.citance_count = static_cast<long long>(lengths.size());
  if (lengths.empty()) return stats;

  stats.mean_citances_per_paper =
      static_cast<double>(stats.citance_count) / static_cast<double>(stats.paper_count);
  double total = 0.0;
  for (auto len : lengths) total += static_cast<double>(len);
  stats.mean_citance_tokens = total / static_cast<double>(lengths.size());
  std::sort(lengths.begin(), lengths.end());
  const std::size_t mid = lengths.size() / 2;
  stats.median_citance_tokens =
      lengths.size() % 2 == 1
          ? static_cast<double>(lengths[mid])
          : (static_cast<double>(lengths[mid - 1]) + static_cast<double>(lengths[mid])) / 2.0;
  return stats;
}

void Corpus::add(PaperDocument doc) {
  auto id = doc.paper_id;
  if (docs_.contains(id)) {
    throw Error(ErrorCode::kDuplicatePaper, "duplicate paper_id '" + id + "'");
  }
  docs_.emplace(std::move(id), std::make_shared<const PaperDocument>(std::move(doc)));
}

DocumentPtr Corpus::find(std::string_view paper_id) const {
  auto it = docs_.find(paper_id);
  return it == docs_.end() ? nullptr : it->second;
}

}  // namespace citesum
