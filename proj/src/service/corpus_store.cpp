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

#include <algorithm>

#include "citesum/service.hpp"

namespace citesum::service {

CorpusStore::CorpusStore(Corpus corpus, std::shared_ptr<const embedding::Embedder> embed,
                         int keyword_count)
    : corpus_(std::move(corpus)), embed_(std::move(embed)), keyword_count_(keyword_count) {
  if (!embed_) throw Error(ErrorCode::kInvalidArgument, "corpus store needs an embedder");
  for (const auto& [id, doc] : corpus_.documents()) {
    auto& list = by_paper_[id];
    list = extract_citances(*doc);
    for (std::size_t i = 0; i < list.size(); ++i) {
      by_id_.emplace(list[i].citance_id, std::make_pair(id, i));
    }
  }
}

DocumentPtr CorpusStore::paper(std::string_view paper_id) const {
  auto doc = corpus_.find(paper_id);
  if (!doc) throw Error(ErrorCode::kNotFound, "unknown paper '" + std::string(paper_id) + "'");
  return doc;
}

const std::vector<Citance>& CorpusStore::citances_of(std::string_view paper_id) const {
  auto it = by_paper_.find(paper_id);
  if (it == by_paper_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown paper '" + std::string(paper_id) + "'");
  }
  return it->second;
}

const Citance& CorpusStore::citance(std::string_view citance_id) const {
  auto it = by_id_.find(citance_id);
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown citance '" + std::string(citance_id) + "'");
  }
  return by_paper_.find(it->second.first)->second[it->second.second];
}

const CitanceContext& CorpusStore::context(const Citance& c, ContextKind kind) const {
  const auto key = std::make_pair(c.citance_id, kind);
  {
    std::lock_guard lock(derived_mu_);
    if (auto it = contexts_.find(key); it != contexts_.end()) return *it->second;
  }
  auto ctx = std::make_shared<CitanceContext>(build_context(*paper(c.paper_id), c, kind, *embed_));
  std::lock_guard lock(derived_mu_);
  return *contexts_.emplace(key, std::move(ctx)).first->second;
}

const std::vector<KeywordQuery>& CorpusStore::keywords(const Citance& c,
                                                       ContextKind kind) const {
  const auto key = std::make_pair(c.citance_id, kind);
  {
    std::lock_guard lock(derived_mu_);
    if (auto it = keywords_.find(key); it != keywords_.end()) return *it->second;
  }
  auto kws = std::make_shared<std::vector<KeywordQuery>>(
      extract_keywords(context(c, kind), *embed_, keyword_count_));
  std::lock_guard lock(derived_mu_);
  return *keywords_.emplace(key, std::move(kws)).first->second;
}

DocumentPtr CorpusStore::target_of(const Citance& c, std::string_view target) const {
  const auto doc = paper(c.paper_id);
  for (const auto& ref_key : c.targets) {
    const auto& bib = doc->bib_entries.at(ref_key);
    const bool match = target.empty() || target == ref_key ||
                       (bib.linked_paper_id && *bib.linked_paper_id == target);
    if (!match) continue;
    if (!bib.linked_paper_id) return nullptr;
    return corpus_.find(*bib.linked_paper_id);
  }
  throw Error(ErrorCode::kNotFound, "'" + std::string(target) + "' is not cited by " +
                                        c.citance_id);
}

std::shared_ptr<const retrieval::InvertedIndex> CorpusStore::index(
    const PaperDocument& doc, retrieval::Granularity g) const {
  return indexes_.get(doc, g);
}

}  // namespace citesum::service
