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

#include <json.hpp>

#include "citesum/service.hpp"

namespace citesum::service {

using nlohmann::json;

namespace {

std::vector<std::string> split_dash(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dash = s.find('-', start);
    parts.emplace_back(s.substr(start, dash - start));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return parts;
}

json context_json(const CitanceContext& ctx) {
  json members = json::array();
  for (const auto& s : ctx.sentences) {
    members.push_back({{"para_id", s.para_id},
                       {"sent_index", s.sent_index},
                       {"text", s.text},
                       {"is_citance", s.is_citance}});
  }
  return {{"kind", to_string(ctx.kind)},
          {"text", ctx.text()},
          {"sentences", std::move(members)},
          {"degenerate", ctx.degenerate}};
}

}  // namespace

std::string PanelRequest::descriptor() const {
  std::string out(to_string(context_kind));
  if (use_keywords) out += "-keywords";
  out += "-";
  out += retrieval::to_string(model);
  out += "-";
  out += retrieval::to_string(granularity);
  return out;
}

PanelRequest PanelRequest::from_descriptor(std::string_view citance_id,
                                           std::string_view descriptor) {
  auto parts = split_dash(descriptor);
  PanelRequest req;
  req.citance_id = std::string(citance_id);
  if (parts.size() == 4 && parts[1] == "keywords") {
    req.use_keywords = true;
    parts.erase(parts.begin() + 1);
  }
  if (parts.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "setup '" + std::string(descriptor) +
                    "' is not <context>[-keywords]-<model>-<granularity>");
  }
  try {
    req.context_kind = parse_context_kind(parts[0]);
    req.model = retrieval::parse_model(parts[1]);
    req.granularity = retrieval::parse_granularity(parts[2]);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "setup '" + std::string(descriptor) + "': " + e.what());
  }
  return req;
}

std::vector<PanelRequest> default_panel_setups(std::string_view citance_id) {
  return {PanelRequest::from_descriptor(citance_id, "similar-bm25-paragraph"),
          PanelRequest::from_descriptor(citance_id, "citance-dense-sentence")};
}

std::string panel_to_json(const Panel& p) {
  json contexts = json::object();
  for (const auto& ctx : p.contexts) contexts[std::string(to_string(ctx.kind))] = context_json(ctx);
  json j{{"citance",
          {{"citance_id", p.citance.citance_id},
           {"paper_id", p.citance.paper_id},
           {"para_id", p.citance.para_id},
           {"sent_index", p.citance.sent_index},
           {"text", p.citance.text},
           {"targets", p.citance.targets}}},
         {"contexts", std::move(contexts)},
         {"target",
          {{"paper_id", p.target_paper_id},
           {"title", p.target_title},
           {"abstract", p.target_abstract}}},
         {"setup", p.request.descriptor()},
         {"cache_hit", p.cache_hit}};
  j["hits"] = p.retrieved ? json::parse(retrieval::result_to_json(*p.retrieved)).at("hits")
                          : json::array();
  j["summary"] = p.summary ? json::parse(summarization::summary_to_json(*p.summary)) : json();
  if (p.summary) {
    const auto v = summarization::validate_summary(p.summary->text);
    j["validation"] = {{"sentence_count", v.sentence_count},
                       {"max_sentences", v.max_sentences},
                       {"over_length", v.over_length},
                       {"list_format", v.list_format}};
  }
  if (p.unavailable) {
    j["error"] = {{"code", error_code_name(p.unavailable->code())},
                  {"message", p.unavailable->what()},
                  {"retriable", p.unavailable->retriable()}};
  }
  return j.dump();
}

PanelService::PanelService(std::shared_ptr<const CorpusStore> store,
                           std::shared_ptr<SummaryCache> cache,
                           std::shared_ptr<const summarization::Generator> generator,
                           ServiceOptions options, summarization::Clock clock)
    : store_(std::move(store)),
      cache_(std::move(cache)),
      generator_(std::move(generator)),
      options_(std::move(options)),
      clock_(std::move(clock)) {
  if (!store_ || !cache_ || !generator_) {
    throw Error(ErrorCode::kInvalidArgument, "panel service needs a store, cache and generator");
  }
  options_.retrieval.validate();
  auto probe = options_.generation;
  probe.prompt = "-";  // the prompt is filled in per request
  probe.validate();
}

retrieval::RetrievalConfig PanelService::config_for(const PanelRequest& req) const {
  auto cfg = options_.retrieval;
  cfg.context_kind = req.context_kind;
  cfg.model = req.model;
  cfg.use_keywords = req.use_keywords;
  return cfg;
}

retrieval::RetrievalResult PanelService::retrieve_from(const PanelRequest& req,
                                                       const Citance& c,
                                                       const PaperDocument& target) const {
  const auto& ctx = store_->context(c, req.context_kind);
  std::span<const KeywordQuery> keywords;
  if (req.use_keywords) keywords = store_->keywords(c, req.context_kind);
  const auto index = target.has_full_text() ? store_->index(target, req.granularity) : nullptr;
  return retrieval::retrieve_for_citance(c, ctx, keywords, target, config_for(req),
                                         req.granularity, &store_->embedder(), index.get());
}

retrieval::RetrievalResult PanelService::retrieve(const PanelRequest& req) const {
  const auto& c = store_->citance(req.citance_id);
  const auto target = store_->target_of(c, req.target);
  if (!target) {
    throw Error(ErrorCode::kTargetUnavailable,
                "the cited paper of " + c.citance_id + " is not in the corpus");
  }
  return retrieve_from(req, c, *target);
}

SummaryCacheKey PanelService::cache_key(const PanelRequest& req,
                                        const PaperDocument& target) const {
  const auto& tmpl =
      req.template_name.empty()
          ? summarization::default_template(summarization::task_for(req.granularity))
          : summarization::find_template(req.template_name);
  return {req.citance_id,      target.paper_id,
          req.context_kind,    req.model,
          req.granularity,     req.use_keywords,
          tmpl.name,           options_.generation.model_name,
          options_.generation.temperature};
}

CacheEntry PanelService::generate(const PanelRequest& req, const Citance& c,
                                  const PaperDocument& target, const SummaryCacheKey& key) {
  CacheEntry entry;
  entry.key = key;
  entry.retrieved = retrieve_from(req, c, target);
  generations_.fetch_add(1);
  entry.summary = summarization::summarize_retrieval(entry.retrieved, options_.generation,
                                                     *generator_, key.template_name, clock_);
  cache_->put(entry);
  return entry;
}

Panel PanelService::resolve_citance_panel(const PanelRequest& req) {
  const auto& c = store_->citance(req.citance_id);
  Panel panel;
  panel.citance = c;
  panel.request = req;
  for (auto kind : kAllContextKinds) panel.contexts.push_back(store_->context(c, kind));

  const auto target = store_->target_of(c, req.target);
  if (!target) {
    panel.unavailable = Error(ErrorCode::kTargetUnavailable,
                              "the cited paper of " + c.citance_id + " is not in the corpus");
    return panel;
  }
  panel.target_paper_id = target->paper_id;
  panel.target_title = target->title;
  for (const auto& p : target->abstract_paragraphs) panel.target_abstract.push_back(p.text);
  if (!target->has_full_text()) {
    panel.unavailable = Error(ErrorCode::kTargetUnavailable,
                              "cited paper " + target->paper_id + " has no full text");
    return panel;
  }

  const auto key = cache_key(req, *target);
  if (auto cached = cache_->get(key)) {
    cache_hits_.fetch_add(1);
    panel.cache_hit = true;
    panel.retrieved = std::move(cached->retrieved);
    panel.summary = std::move(cached->summary);
    return panel;
  }

  const auto canonical = key.canonical();
  std::shared_future<CacheEntry> pending;
  std::optional<std::promise<CacheEntry>> owner;
  {
    std::lock_guard lock(inflight_mu_);
    if (auto it = inflight_.find(canonical); it != inflight_.end()) {
      pending = it->second;
    } else if (auto cached = cache_->get(key)) {
      // Finished between the first lookup and taking the lock.
      cache_hits_.fetch_add(1);
      panel.cache_hit = true;
      panel.retrieved = std::move(cached->retrieved);
      panel.summary = std::move(cached->summary);
      return panel;
    } else {
      owner.emplace();
      pending = owner->get_future().share();
      inflight_.emplace(canonical, pending);
    }
  }

  if (owner) {
    try {
      owner->set_value(generate(req, c, *target, key));
    } catch (...) {
      owner->set_exception(std::current_exception());
    }
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(canonical);
  } else {
    coalesced_.fetch_add(1);
  }
  const auto& entry = pending.get();
  panel.retrieved = entry.retrieved;
  panel.summary = entry.summary;
  return panel;
}

}  // namespace citesum::service
