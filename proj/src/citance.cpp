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

#include "citesum/citance.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <unordered_set>

#include "citesum/error.hpp"

namespace citesum {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxContextSize = 3;

SentenceRef ref_of(const Paragraph& p, std::size_t index, bool is_citance) {
  const auto& s = p.sentences[index];
  return {p.para_id, s.sent_index, s.text, is_citance};
}

const Paragraph& paragraph_of(const PaperDocument& doc, const Citance& c) {
  const auto* p = doc.find_paragraph(c.para_id);
  if (p == nullptr || c.sent_index < 0 ||
      static_cast<std::size_t>(c.sent_index) >= p->sentences.size()) {
    throw Error(ErrorCode::kNotFound, "citance " + c.citance_id +
                                          " does not belong to paper " +
                                          doc.paper_id);
  }
  return *p;
}

void extract_from(const PaperDocument& doc, const Paragraph& p,
                  std::vector<Citance>& out) {
  std::vector<std::vector<std::string>> targets(p.sentences.size());
  for (const auto& span : p.cite_spans) {
    auto idx = p.sentence_of(span);
    if (!idx) continue;
    auto& t = targets[*idx];
    if (std::find(t.begin(), t.end(), span.ref_key) == t.end()) {
      t.push_back(span.ref_key);
    }
  }
  for (std::size_t i = 0; i < p.sentences.size(); ++i) {
    if (targets[i].empty()) continue;
    Citance c;
    c.paper_id = doc.paper_id;
    c.para_id = p.para_id;
    c.sent_index = p.sentences[i].sent_index;
    c.citance_id = make_citance_id(doc.paper_id, p.para_id, c.sent_index);
    c.text = p.sentences[i].text;
    c.targets = std::move(targets[i]);
    out.push_back(std::move(c));
  }
}

json context_to_json(const CitanceContext& ctx) {
  json members = json::array();
  for (const auto& s : ctx.sentences) {
    members.push_back({{"para_id", s.para_id},
                       {"sent_index", s.sent_index},
                       {"text", s.text},
                       {"is_citance", s.is_citance}});
  }
  return {{"kind", to_string(ctx.kind)},
          {"sentences", std::move(members)},
          {"degenerate", ctx.degenerate}};
}

CitanceContext context_from_json(const json& j, const std::string& citance_id) {
  CitanceContext ctx;
  ctx.citance_id = citance_id;
  ctx.kind = parse_context_kind(j.at("kind").get<std::string>());
  ctx.degenerate = j.at("degenerate").get<bool>();
  for (const auto& s : j.at("sentences")) {
    ctx.sentences.push_back({s.at("para_id").get<std::string>(),
                             s.at("sent_index").get<int>(),
                             s.at("text").get<std::string>(),
                             s.at("is_citance").get<bool>()});
  }
  return ctx;
}

}  // namespace

std::string_view to_string(ContextKind kind) {
  switch (kind) {
    case ContextKind::kCitance: return "citance";
    case ContextKind::kNeighbors: return "neighbors";
    case ContextKind::kSimilar: return "similar";
  }
  return "citance";
}

ContextKind parse_context_kind(std::string_view name) {
  for (auto kind : kAllContextKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown context kind '" + std::string(name) + "'");
}

std::string make_citance_id(std::string_view paper_id, std::string_view para_id,
                            int sent_index) {
  return std::string(paper_id) + ":" + std::string(para_id) + ":s" +
         std::to_string(sent_index);
}

std::string CitanceContext::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

const SentenceRef& CitanceContext::citance_sentence() const {
  for (const auto& s : sentences) {
    if (s.is_citance) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "context of " + citance_id + " lacks its citance sentence");
}

std::vector<Citance> extract_citances(const PaperDocument& doc) {
  std::vector<Citance> out;
  for (const auto* p : doc.all_paragraphs()) extract_from(doc, *p, out);
  return out;
}

std::optional<Citance> find_citance(const PaperDocument& doc,
                                    std::string_view citance_id) {
  for (const auto* p : doc.all_paragraphs()) {
    std::vector<Citance> found;
    extract_from(doc, *p, found);
    for (auto& c : found) {
      if (c.citance_id == citance_id) return std::move(c);
    }
  }
  return std::nullopt;
}

CitanceContext citance_only_context(const PaperDocument& doc, const Citance& c) {
  const auto& p = paragraph_of(doc, c);
  CitanceContext ctx;
  ctx.citance_id = c.citance_id;
  ctx.kind = ContextKind::kCitance;
  ctx.sentences.push_back(ref_of(p, static_cast<std::size_t>(c.sent_index), true));
  return ctx;
}

CitanceContext neighbors_context(const PaperDocument& doc, const Citance& c) {
  const auto& p = paragraph_of(doc, c);
  const auto idx = static_cast<std::size_t>(c.sent_index);
  CitanceContext ctx;
  ctx.citance_id = c.citance_id;
  ctx.kind = ContextKind::kNeighbors;
  if (idx > 0) ctx.sentences.push_back(ref_of(p, idx - 1, false));
  ctx.sentences.push_back(ref_of(p, idx, true));
  if (idx + 1 < p.sentences.size()) ctx.sentences.push_back(ref_of(p, idx + 1, false));
  ctx.degenerate = ctx.sentences.size() < kMaxContextSize;
  return ctx;
}

CitanceContext similar_context(const PaperDocument& doc, const Citance& c,
                               const embedding::Embedder& embed) {
  const auto& p = paragraph_of(doc, c);
  const auto idx = static_cast<std::size_t>(c.sent_index);
  const auto& citance_text = p.sentences[idx].text;

  std::vector<std::size_t> candidates;
  std::vector<std::string> texts{citance_text};
  for (std::size_t i = 0; i < p.sentences.size(); ++i) {
    if (i == idx || p.sentences[i].text == citance_text) continue;
    candidates.push_back(i);
    texts.push_back(p.sentences[i].text);
  }

  std::vector<std::size_t> chosen;
  if (!candidates.empty()) {
    const auto vectors = embed.embed(texts);
    std::vector<double> scores(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      scores[k] = embedding::similarity(vectors[0], vectors[k + 1]);
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });
    for (std::size_t k = 0; k < order.size() && chosen.size() < kMaxContextSize - 1; ++k) {
      chosen.push_back(candidates[order[k]]);
    }
  }
  chosen.push_back(idx);
  std::sort(chosen.begin(), chosen.end());

  CitanceContext ctx;
  ctx.citance_id = c.citance_id;
  ctx.kind = ContextKind::kSimilar;
  for (auto i : chosen) ctx.sentences.push_back(ref_of(p, i, i == idx));
  ctx.degenerate = ctx.sentences.size() < kMaxContextSize;
  return ctx;
}

CitanceContext build_context(const PaperDocument& doc, const Citance& c,
                             ContextKind kind, const embedding::Embedder& embed) {
  switch (kind) {
    case ContextKind::kCitance: return citance_only_context(doc, c);
    case ContextKind::kNeighbors: return neighbors_context(doc, c);
    case ContextKind::kSimilar: return similar_context(doc, c, embed);
  }
  return citance_only_context(doc, c);
}

std::vector<std::string> keyword_candidates(std::string_view text,
                                            const text::WordList& stopwords) {
  std::vector<std::string> kept;
  for (auto& token : text::tokenize(text)) {
    if (!stopwords.contains(token)) kept.push_back(std::move(token));
  }
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string phrase) {
    if (seen.insert(phrase).second) out.push_back(std::move(phrase));
  };
  for (std::size_t i = 0; i < kept.size(); ++i) {
    add(kept[i]);
    if (i + 1 < kept.size()) add(kept[i] + " " + kept[i + 1]);
  }
  return out;
}

std::vector<KeywordQuery> extract_keywords(const CitanceContext& ctx,
                                           const embedding::Embedder& embed,
                                           int n,
                                           const text::WordList& stopwords) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "keyword count must be >= 0");
  if (n == 0) return {};
  const auto context_text = ctx.text();
  auto candidates = keyword_candidates(context_text, stopwords);
  if (candidates.empty()) return {};

  std::vector<std::string> texts{context_text, ctx.citance_sentence().text};
  texts.insert(texts.end(), candidates.begin(), candidates.end());
  const auto vectors = embed.embed(texts);

  std::vector<double> relevance(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    relevance[k] = embedding::similarity(vectors[0], vectors[k + 2]);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return relevance[a] > relevance[b];
  });

  std::vector<KeywordQuery> out;
  const auto limit = std::min(order.size(), static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < limit; ++r) {
    const auto k = order[r];
    out.push_back({ctx.citance_id, ctx.kind, candidates[k],
                   embedding::similarity(vectors[1], vectors[k + 2])});
  }
  return out;
}

std::string to_json_line(const CitanceRecord& record) {
  const auto& c = record.citance;
  json contexts = json::object();
  for (const auto& ctx : record.contexts) {
    contexts[std::string(to_string(ctx.kind))] = context_to_json(ctx);
  }
  json keywords = json::array();
  for (const auto& k : record.keywords) {
    keywords.push_back({{"context_kind", to_string(k.context_kind)},
                        {"phrase", k.phrase},
                        {"weight", k.weight}});
  }
  json j{{"citance_id", c.citance_id}, {"paper_id", c.paper_id},
         {"para_id", c.para_id},       {"sent_index", c.sent_index},
         {"text", c.text},             {"targets", c.targets},
         {"contexts", std::move(contexts)},
         {"keywords", std::move(keywords)}};
  return j.dump();
}

CitanceRecord parse_citance_record(std::string_view line) {
  try {
    const auto j = json::parse(line);
    CitanceRecord r;
    auto& c = r.citance;
    c.citance_id = j.at("citance_id").get<std::string>();
    c.paper_id = j.at("paper_id").get<std::string>();
    c.para_id = j.at("para_id").get<std::string>();
    c.sent_index = j.at("sent_index").get<int>();
    c.text = j.at("text").get<std::string>();
    c.targets = j.at("targets").get<std::vector<std::string>>();
    for (auto kind : kAllContextKinds) {
      auto it = j.at("contexts").find(std::string(to_string(kind)));
      if (it != j.at("contexts").end()) {
        r.contexts.push_back(context_from_json(*it, c.citance_id));
      }
    }
    if (auto it = j.find("keywords"); it != j.end()) {
      for (const auto& k : *it) {
        r.keywords.push_back({c.citance_id,
                              parse_context_kind(k.at("context_kind").get<std::string>()),
                              k.at("phrase").get<std::string>(),
                              k.at("weight").get<double>()});
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput,
                std::string("bad citance record: ") + e.what());
  }
}

}  // namespace citesum
