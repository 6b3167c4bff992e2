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

#include <fstream>
#include <json.hpp>

#include "citesum/service.hpp"

namespace citesum::service {

using nlohmann::json;

namespace {

json key_to_json(const SummaryCacheKey& k) {
  return {{"citance_id", k.citance_id},
          {"target_paper_id", k.target_paper_id},
          {"context_kind", to_string(k.context_kind)},
          {"model", retrieval::to_string(k.model)},
          {"granularity", retrieval::to_string(k.granularity)},
          {"use_keywords", k.use_keywords},
          {"template", k.template_name},
          {"generator", k.generator_model},
          {"temperature", k.temperature}};
}

SummaryCacheKey key_from_json(const json& j) {
  SummaryCacheKey k;
  k.citance_id = j.at("citance_id").get<std::string>();
  k.target_paper_id = j.at("target_paper_id").get<std::string>();
  k.context_kind = parse_context_kind(j.at("context_kind").get<std::string>());
  k.model = retrieval::parse_model(j.at("model").get<std::string>());
  k.granularity = retrieval::parse_granularity(j.at("granularity").get<std::string>());
  k.use_keywords = j.at("use_keywords").get<bool>();
  k.template_name = j.at("template").get<std::string>();
  k.generator_model = j.at("generator").get<std::string>();
  k.temperature = j.at("temperature").get<double>();
  return k;
}

}  // namespace

std::string SummaryCacheKey::canonical() const { return key_to_json(*this).dump(); }

SummaryCacheKey key_of(const summarization::Summary& s) {
  return {s.citance_id,         s.target_paper_id,   s.config.context_kind,
          s.config.model,       s.config.granularity, s.config.use_keywords,
          s.config.template_name, s.generator,       s.temperature};
}

std::string entry_to_json(const CacheEntry& e) {
  return json{{"key", key_to_json(e.key)},
              {"summary", json::parse(summarization::summary_to_json(e.summary))},
              {"retrieved", json::parse(retrieval::result_to_json(e.retrieved))}}
      .dump();
}

CacheEntry entry_from_json(std::string_view line) {
  try {
    const auto j = json::parse(line);
    CacheEntry e;
    e.key = key_from_json(j.at("key"));
    e.summary = summarization::summary_from_json(j.at("summary").dump());
    e.retrieved = retrieval::result_from_json(j.at("retrieved").dump());
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad cache entry: ") + ex.what());
  }
}

SummaryCache::SummaryCache(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot read cache " + path_.string());
  std::vector<std::string> raw;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) raw.push_back(std::move(line));
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      auto entry = entry_from_json(raw[i]);
      lines_.emplace(entry.key.canonical(), raw[i]);
    } catch (const Error&) {
      if (i + 1 < raw.size()) throw;
      // A torn final append: drop it so later appends start on a fresh line.
      const auto tmp = path_.string() + ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        for (std::size_t k = 0; k < i; ++k) out << raw[k] << '\n';
        if (!out) throw Error(ErrorCode::kStorageFailure, "cannot repair " + path_.string());
      }
      std::filesystem::rename(tmp, path_, ec);
      if (ec) throw Error(ErrorCode::kStorageFailure, "cannot repair " + path_.string());
    }
  }
}

CacheWrite SummaryCache::put(const CacheEntry& entry) {
  if (entry.key.citance_id.empty() || entry.key.target_paper_id.empty() ||
      entry.key.generator_model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete cache key");
  }
  const auto canonical = entry.key.canonical();
  auto line = entry_to_json(entry);
  std::lock_guard writer(write_mu_);
  {
    std::shared_lock read(mu_);
    if (auto it = lines_.find(canonical); it != lines_.end()) {
      if (it->second == line) return CacheWrite::kAlreadyPresent;
      throw Error(ErrorCode::kConflict, "a different summary is cached for " + canonical);
    }
  }
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kStorageFailure, "cannot append to " + path_.string());
  }
  std::unique_lock write(mu_);
  lines_.emplace(canonical, std::move(line));
  return CacheWrite::kStored;
}

std::optional<std::string> SummaryCache::get_raw(const SummaryCacheKey& key) const {
  std::shared_lock read(mu_);
  auto it = lines_.find(key.canonical());
  if (it == lines_.end()) return std::nullopt;
  return it->second;
}

std::optional<CacheEntry> SummaryCache::get(const SummaryCacheKey& key) const {
  auto raw = get_raw(key);
  if (!raw) return std::nullopt;
  return entry_from_json(*raw);
}

std::size_t SummaryCache::size() const {
  std::shared_lock read(mu_);
  return lines_.size();
}

}  // namespace citesum::service
