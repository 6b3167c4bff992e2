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

#include <cmath>
#include <json.hpp>

#include "citesum/error.hpp"
#include "citesum/retrieval.hpp"
#include "citesum/text.hpp"

namespace citesum::retrieval {

namespace {
constexpr std::string_view kFormatName = "citesum-index";
}

std::string index_to_json(const InvertedIndex& index) {
  using nlohmann::json;
  json header{{"format", kFormatName},
              {"version", kIndexFormatVersion},
              {"tokenizer", text::kTokenizerVersion},
              {"granularity", to_string(index.granularity())},
              {"N", index.doc_count()},
              {"avgdl", index.avg_unit_length()}};
  json units = json::array();
  for (const auto& u : index.units()) {
    units.push_back({{"unit_id", u.unit_id},
                     {"paper_id", u.paper_id},
                     {"text", u.text},
                     {"token_count", u.token_count}});
  }
  json postings = json::object();
  for (const auto& [term, list] : index.postings()) {
    json rows = json::array();
    for (const auto& p : list) rows.push_back({p.unit, p.tf});
    postings[term] = std::move(rows);
  }
  return json{{"header", std::move(header)},
              {"units", std::move(units)},
              {"postings", std::move(postings)}}
      .dump();
}

InvertedIndex index_from_json(std::string_view json_text) {
  using nlohmann::json;
  auto fail = [](const std::string& why) -> InvertedIndex {
    throw Error(ErrorCode::kMalformedInput, "index file: " + why);
  };
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    return fail(e.what());
  }
  try {
    const auto& header = root.at("header");
    if (header.at("format").get<std::string>() != kFormatName) return fail("not a citesum index");
    if (header.at("version").get<int>() != kIndexFormatVersion) {
      return fail("unsupported version " + header.at("version").dump());
    }
    if (header.at("tokenizer").get<std::string>() != text::kTokenizerVersion) {
      return fail("built with tokenizer " + header.at("tokenizer").get<std::string>());
    }
    InvertedIndex index;
    index.granularity_ = parse_granularity(header.at("granularity").get<std::string>());
    for (const auto& ju : root.at("units")) {
      index.units_.push_back({ju.at("unit_id").get<std::string>(),
                              ju.at("paper_id").get<std::string>(), index.granularity_,
                              ju.at("text").get<std::string>(),
                              ju.at("token_count").get<int>()});
    }
    for (const auto& [term, rows] : root.at("postings").items()) {
      std::vector<Posting> list;
      for (const auto& row : rows) {
        Posting p{row.at(0).get<std::uint32_t>(), row.at(1).get<std::uint32_t>()};
        if (p.unit >= index.units_.size() || p.tf == 0) return fail("bad posting for '" + term + "'");
        list.push_back(p);
      }
      index.postings_.emplace(term, std::move(list));
    }
    index.finalize();
    if (index.positions_.size() != index.units_.size()) return fail("duplicate unit ids");
    if (header.at("N").get<std::size_t>() != index.doc_count() ||
        std::abs(header.at("avgdl").get<double>() - index.avg_unit_length()) > 1e-9) {
      return fail("header statistics disagree with the stored units");
    }
    return index;
  } catch (const json::exception& e) {
    return fail(e.what());
  }
}

std::string result_to_json(const RetrievalResult& r) {
  using nlohmann::json;
  json hits = json::array();
  for (std::size_t i = 0; i < r.hits.hits.size(); ++i) {
    const auto& h = r.hits.hits[i];
    json row{{"unit_id", h.unit_id}, {"score", h.score}};
    if (i < r.retrieved_texts.size()) row["text"] = r.retrieved_texts[i];
    hits.push_back(std::move(row));
  }
  const auto& c = r.config;
  return json{{"citance_id", r.citance_id},
              {"target_paper_id", r.target_paper_id},
              {"setup",
               {{"context_kind", citesum::to_string(c.context_kind)},
                {"model", to_string(c.model)},
                {"use_keywords", c.use_keywords},
                {"k1", c.k1},
                {"b", c.b},
                {"top_k_sentences", c.top_k_sentences},
                {"top_k_paragraphs", c.top_k_paragraphs}}},
              {"granularity", to_string(r.granularity)},
              {"query", r.hits.query_descriptor},
              {"hits", std::move(hits)}}
      .dump();
}

RetrievalResult result_from_json(std::string_view json_text) {
  using nlohmann::json;
  try {
    const auto j = json::parse(json_text);
    RetrievalResult r;
    r.citance_id = j.at("citance_id").get<std::string>();
    r.target_paper_id = j.at("target_paper_id").get<std::string>();
    const auto& s = j.at("setup");
    r.config.context_kind = parse_context_kind(s.at("context_kind").get<std::string>());
    r.config.model = parse_model(s.at("model").get<std::string>());
    r.config.use_keywords = s.at("use_keywords").get<bool>();
    r.config.k1 = s.at("k1").get<double>();
    r.config.b = s.at("b").get<double>();
    r.config.top_k_sentences = s.at("top_k_sentences").get<int>();
    r.config.top_k_paragraphs = s.at("top_k_paragraphs").get<int>();
    r.granularity = parse_granularity(j.at("granularity").get<std::string>());
    r.hits.query_descriptor = j.at("query").get<std::string>();
    for (const auto& h : j.at("hits")) {
      r.hits.hits.push_back({h.at("unit_id").get<std::string>(), h.at("score").get<double>()});
      r.retrieved_texts.push_back(h.at("text").get<std::string>());
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad retrieval record: ") + e.what());
  }
}

}  // namespace citesum::retrieval
