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

#include "citesum/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "citesum/error.hpp"
#include "citesum/text.hpp"

namespace citesum::retrieval {

namespace {

std::string sentence_unit_id(const std::string& paper_id, const Paragraph& p,
                             int sent_index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "/s%03d", sent_index);
  return paper_id + "/" + p.para_id + buf;
}

// Score of one unit for pre-tokenized query terms. Shared by bm25_score and
// search so both paths evaluate the identical expression.
double score_unit(std::span<const std::string> query_terms, std::size_t pos,
                  const InvertedIndex& index, double k1, double b) {
  const double n_units = static_cast<double>(index.doc_count());
  const double len = static_cast<double>(index.units()[pos].token_count);
  const double avgdl = index.avg_unit_length();
  double score = 0.0;
  for (const auto& term : query_terms) {
    const double tf = index.term_frequency(term, pos);
    if (tf == 0.0) continue;
    const double idf = bm25_idf(static_cast<std::size_t>(n_units),
                                index.document_frequency(term));
    score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len / avgdl));
  }
  return score;
}

void sort_and_truncate(std::vector<Hit>& hits, std::size_t k) {
  std::sort(hits.begin(), hits.end(), ranks_before);
  if (hits.size() > k) hits.resize(k);
}

}  // namespace

std::string_view to_string(Granularity g) {
  return g == Granularity::kSentence ? "sentence" : "paragraph";
}

std::string_view to_string(Model m) { return m == Model::kBm25 ? "bm25" : "dense"; }

Granularity parse_granularity(std::string_view name) {
  if (name == "sentence" || name == "sentences") return Granularity::kSentence;
  if (name == "paragraph" || name == "paragraphs") return Granularity::kParagraph;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown granularity '" + std::string(name) + "'");
}

Model parse_model(std::string_view name) {
  if (name == "bm25") return Model::kBm25;
  if (name == "dense") return Model::kDense;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown retrieval model '" + std::string(name) + "'");
}

std::vector<IndexUnit> units_from_document(const PaperDocument& doc,
                                           Granularity granularity) {
  std::vector<IndexUnit> units;
  for (const auto* p : doc.all_paragraphs()) {
    if (granularity == Granularity::kParagraph) {
      if (p->sentences.empty()) continue;
      units.push_back({doc.paper_id + "/" + p->para_id, doc.paper_id,
                       granularity, p->text, 0});
      continue;
    }
    for (const auto& s : p->sentences) {
      units.push_back({sentence_unit_id(doc.paper_id, *p, s.sent_index),
                       doc.paper_id, granularity, s.text, 0});
    }
  }
  return units;
}

std::size_t InvertedIndex::document_frequency(std::string_view term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

std::uint32_t InvertedIndex::term_frequency(std::string_view term,
                                            std::size_t unit_pos) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return 0;
  const auto& list = it->second;
  auto p = std::lower_bound(list.begin(), list.end(), unit_pos,
                            [](const Posting& x, std::size_t u) { return x.unit < u; });
  return (p != list.end() && p->unit == unit_pos) ? p->tf : 0;
}

std::optional<std::size_t> InvertedIndex::position_of(std::string_view unit_id) const {
  auto it = positions_.find(unit_id);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

void InvertedIndex::finalize() {
  positions_.clear();
  double total = 0.0;
  for (std::size_t i = 0; i < units_.size(); ++i) {
    positions_.emplace(units_[i].unit_id, i);
    total += units_[i].token_count;
  }
  avg_unit_length_ = units_.empty() ? 0.0 : total / static_cast<double>(units_.size());
}

InvertedIndex build_index(std::vector<IndexUnit> units, Granularity granularity) {
  if (units.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "too many units for one index");
  }
  InvertedIndex index;
  index.granularity_ = granularity;
  std::map<std::string, std::size_t, std::less<>> seen;
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& unit = units[i];
    if (!seen.emplace(unit.unit_id, i).second) {
      throw Error(ErrorCode::kDuplicateUnitId, "duplicate unit id '" + unit.unit_id + "'");
    }
    unit.granularity = granularity;
    const auto tokens = text::tokenize(unit.text);
    unit.token_count = static_cast<int>(tokens.size());
    std::map<std::string_view, std::uint32_t> counts;
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [term, tf] : counts) {
      auto it = index.postings_.find(term);
      if (it == index.postings_.end()) {
        it = index.postings_.emplace(std::string(term), std::vector<Posting>{}).first;
      }
      it->second.push_back({static_cast<std::uint32_t>(i), tf});
    }
  }
  index.units_ = std::move(units);
  index.finalize();
  return index;
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
  const double n = static_cast<double>(doc_freq);
  return std::log(1.0 + (static_cast<double>(doc_count) - n + 0.5) / (n + 0.5));
}

double bm25_score(std::span<const std::string> query_terms,
                  std::string_view unit_id, const InvertedIndex& index,
                  double k1, double b) {
  const auto pos = index.position_of(unit_id);
  if (!pos) {
    throw Error(ErrorCode::kUnknownUnit, "unit '" + std::string(unit_id) + "' not in index");
  }
  return score_unit(query_terms, *pos, index, k1, b);
}

bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.unit_id < b.unit_id;
}

RankedList search(const InvertedIndex& index, std::string_view query_text,
                  Model model, const embedding::Embedder* embed, std::size_t k,
                  Bm25Params params) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "search needs k >= 1");
  RankedList result;
  result.query_descriptor = std::string(to_string(model)) + ":" + std::string(query_text);
  if (index.doc_count() == 0) return result;

  if (model == Model::kBm25) {
    const auto terms = text::tokenize(query_text);
    std::vector<bool> candidate(index.doc_count(), false);
    for (const auto& term : terms) {
      auto it = index.postings().find(term);
      if (it == index.postings().end()) continue;
      for (const auto& p : it->second) candidate[p.unit] = true;
    }
    for (std::size_t pos = 0; pos < candidate.size(); ++pos) {
      if (!candidate[pos]) continue;
      result.hits.push_back({index.units()[pos].unit_id,
                             score_unit(terms, pos, index, params.k1, params.b)});
    }
  } else {
    if (embed == nullptr) {
      throw Error(ErrorCode::kEmbeddingUnavailable, "dense search without an embedder");
    }
    std::vector<std::string> texts{std::string(query_text)};
    for (const auto& unit : index.units()) texts.push_back(unit.text);
    const auto vectors = embed->embed(texts);
    for (std::size_t pos = 0; pos < index.doc_count(); ++pos) {
      result.hits.push_back({index.units()[pos].unit_id,
                             embedding::similarity(vectors[0], vectors[pos + 1])});
    }
  }
  sort_and_truncate(result.hits, k);
  return result;
}

RankedList fuse_keyword_rankings(std::span<const RankedList> rankings,
                                 std::span<const double> weights) {
  if (rankings.empty() || rankings.size() != weights.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "fusion needs one weight per ranking (got " +
                    std::to_string(rankings.size()) + " rankings, " +
                    std::to_string(weights.size()) + " weights)");
  }
  std::map<std::string, double> fused;
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    const auto& hits = rankings[r].hits;
    if (hits.empty()) continue;
    const double w = std::max(0.0, weights[r]);
    double lo = hits.front().score;
    double hi = hits.front().score;
    for (const auto& h : hits) {
      lo = std::min(lo, h.score);
      hi = std::max(hi, h.score);
    }
    const double range = hi - lo;
    for (const auto& h : hits) {
      const double normalized = range > 0.0 ? (h.score - lo) / range : 1.0;
      fused[h.unit_id] += w * normalized;
    }
  }
  RankedList out;
  out.query_descriptor = "fused:" + std::to_string(rankings.size());
  out.hits.reserve(fused.size());
  for (auto& [unit_id, score] : fused) out.hits.push_back({unit_id, score});
  std::sort(out.hits.begin(), out.hits.end(), ranks_before);
  return out;
}

void RetrievalConfig::validate() const {
  if (!(k1 >= 0.0) || !std::isfinite(k1)) {
    throw Error(ErrorCode::kInvalidArgument, "BM25 k1 must be >= 0");
  }
  if (!(b >= 0.0 && b <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "BM25 b must lie in [0, 1]");
  }
  if (top_k_sentences < 1 || top_k_paragraphs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "top-k values must be >= 1");
  }
}

std::size_t RetrievalConfig::top_k(Granularity g) const {
  return static_cast<std::size_t>(g == Granularity::kSentence ? top_k_sentences
                                                              : top_k_paragraphs);
}

std::string RetrievalConfig::descriptor() const {
  std::string out(citesum::to_string(context_kind));
  if (use_keywords) out += "-keywords";
  out += "-";
  out += to_string(model);
  return out;
}

std::vector<RetrievalConfig> setup_grid() {
  std::vector<RetrievalConfig> grid;
  for (auto model : {Model::kBm25, Model::kDense}) {
    for (bool keywords : {false, true}) {
      for (auto kind : kAllContextKinds) {
        RetrievalConfig cfg;
        cfg.model = model;
        cfg.use_keywords = keywords;
        cfg.context_kind = kind;
        grid.push_back(cfg);
      }
    }
  }
  return grid;
}

std::vector<RetrievalConfig> distinguished_setups() {
  RetrievalConfig shallow;
  shallow.context_kind = ContextKind::kSimilar;
  shallow.model = Model::kBm25;
  RetrievalConfig dense;
  dense.context_kind = ContextKind::kCitance;
  dense.model = Model::kDense;
  return {shallow, dense};
}

RetrievalResult retrieve_for_citance(const Citance& c, const CitanceContext& ctx,
                                     std::span<const KeywordQuery> keywords,
                                     const PaperDocument& target,
                                     const RetrievalConfig& cfg,
                                     Granularity granularity,
                                     const embedding::Embedder* embed,
                                     const InvertedIndex* index) {
  cfg.validate();
  if (ctx.kind != cfg.context_kind || ctx.citance_id != c.citance_id) {
    throw Error(ErrorCode::kInvalidArgument,
                "context " + std::string(citesum::to_string(ctx.kind)) + " of " +
                    ctx.citance_id + " does not match setup " + cfg.descriptor());
  }
  if (!target.has_full_text()) {
    throw Error(ErrorCode::kTargetUnavailable,
                "cited paper " + target.paper_id + " has no full text");
  }
  std::optional<InvertedIndex> local;
  if (index == nullptr || index->granularity() != granularity) {
    local = build_index(units_from_document(target, granularity), granularity);
    index = &*local;
  }

  const Bm25Params params{cfg.k1, cfg.b};
  const std::size_t k = cfg.top_k(granularity);
  RetrievalResult result;
  result.citance_id = c.citance_id;
  result.target_paper_id = target.paper_id;
  result.config = cfg;
  result.granularity = granularity;

  std::vector<const KeywordQuery*> queries;
  for (const auto& kw : keywords) {
    if (kw.context_kind == ctx.kind) queries.push_back(&kw);
  }
  if (cfg.use_keywords && !queries.empty()) {
    std::vector<RankedList> rankings;
    std::vector<double> weights;
    const std::size_t all = std::max<std::size_t>(1, index->doc_count());
    for (const auto* kw : queries) {
      rankings.push_back(search(*index, kw->phrase, cfg.model, embed, all, params));
      weights.push_back(kw->weight);
    }
    result.hits = fuse_keyword_rankings(rankings, weights);
    if (result.hits.hits.size() > k) result.hits.hits.resize(k);
  } else {
    result.hits = search(*index, ctx.text(), cfg.model, embed, k, params);
  }
  result.hits.query_descriptor = cfg.descriptor() + "@" + std::string(to_string(granularity));
  for (const auto& hit : result.hits.hits) {
    result.retrieved_texts.push_back(index->units()[*index->position_of(hit.unit_id)].text);
  }
  return result;
}

std::shared_ptr<const InvertedIndex> IndexCache::get(const PaperDocument& doc,
                                                     Granularity granularity) {
  const auto key = std::make_pair(doc.paper_id, granularity);
  {
    std::lock_guard lock(mu_);
    if (auto it = indexes_.find(key); it != indexes_.end()) return it->second;
  }
  auto built = std::make_shared<const InvertedIndex>(
      build_index(units_from_document(doc, granularity), granularity));
  std::lock_guard lock(mu_);
  return indexes_.try_emplace(key, std::move(built)).first->second;
}

void IndexCache::put(const std::string& paper_id, Granularity granularity,
                     std::shared_ptr<const InvertedIndex> index) {
  std::lock_guard lock(mu_);
  indexes_[std::make_pair(paper_id, granularity)] = std::move(index);
}

std::size_t IndexCache::size() const {
  std::lock_guard lock(mu_);
  return indexes_.size();
}

}  // namespace citesum::retrieval
