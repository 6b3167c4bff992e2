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

#include <httplib.h>

#include <json.hpp>

#include "citesum/service.hpp"

namespace citesum::service {

using nlohmann::json;

namespace {

json paragraph_json(const Paragraph& p) {
  json sentences = json::array();
  for (const auto& s : p.sentences) {
    sentences.push_back({{"sent_index", s.sent_index},
                         {"char_start", s.char_start},
                         {"char_end", s.char_end},
                         {"text", s.text}});
  }
  json spans = json::array();
  for (const auto& c : p.cite_spans) {
    spans.push_back({{"char_start", c.char_start}, {"char_end", c.char_end}, {"ref_key", c.ref_key}});
  }
  return {{"para_id", p.para_id},
          {"text", p.text},
          {"sentences", std::move(sentences)},
          {"cite_spans", std::move(spans)}};
}

json paper_json(const PaperDocument& doc) {
  json abstract = json::array();
  for (const auto& p : doc.abstract_paragraphs) abstract.push_back(paragraph_json(p));
  json sections = json::array();
  for (const auto& s : doc.body_sections) {
    json paras = json::array();
    for (const auto& p : s.paragraphs) paras.push_back(paragraph_json(p));
    sections.push_back({{"title", s.title}, {"paragraphs", std::move(paras)}});
  }
  json bib = json::object();
  for (const auto& [key, entry] : doc.bib_entries) {
    bib[key] = {{"title", entry.title},
                {"linked_paper_id", entry.linked_paper_id ? json(*entry.linked_paper_id) : json()}};
  }
  return {{"paper_id", doc.paper_id},
          {"title", doc.title},
          {"abstract", std::move(abstract)},
          {"sections", std::move(sections)},
          {"bib_entries", std::move(bib)},
          {"has_full_text", doc.has_full_text()}};
}

json citance_json(const CorpusStore& store, const Citance& c) {
  const auto doc = store.paper(c.paper_id);
  const auto* para = doc->find_paragraph(c.para_id);
  const auto& sentence = para->sentences[static_cast<std::size_t>(c.sent_index)];
  json targets = json::array();
  for (const auto& ref_key : c.targets) {
    const auto& bib = doc->bib_entries.at(ref_key);
    const auto linked = bib.linked_paper_id ? store.corpus().find(*bib.linked_paper_id) : nullptr;
    targets.push_back({{"ref_key", ref_key},
                       {"title", bib.title},
                       {"paper_id", bib.linked_paper_id ? json(*bib.linked_paper_id) : json()},
                       {"available", linked != nullptr && linked->has_full_text()}});
  }
  return {{"citance_id", c.citance_id},
          {"paper_id", c.paper_id},
          {"para_id", c.para_id},
          {"sent_index", c.sent_index},
          {"char_start", sentence.char_start},
          {"char_end", sentence.char_end},
          {"text", c.text},
          {"targets", std::move(targets)}};
}

template <typename T>
T field_or(const json& body, const char* name, T fallback) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) return fallback;
  return it->get<T>();
}

PanelRequest request_from_body(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("request body: ") + e.what());
  }
  if (!body.is_object()) throw Error(ErrorCode::kMalformedInput, "request body must be an object");
  try {
    PanelRequest req;
    req.citance_id = body.at("citance_id").get<std::string>();
    req.target = field_or<std::string>(body, "target", "");
    if (auto setup = field_or<std::string>(body, "setup", ""); !setup.empty()) {
      auto parsed = PanelRequest::from_descriptor(req.citance_id, setup);
      parsed.target = req.target;
      req = std::move(parsed);
    }
    if (body.contains("context_kind")) {
      req.context_kind = parse_context_kind(body.at("context_kind").get<std::string>());
    }
    if (body.contains("model")) req.model = retrieval::parse_model(body.at("model").get<std::string>());
    if (body.contains("granularity")) {
      req.granularity = retrieval::parse_granularity(body.at("granularity").get<std::string>());
    }
    req.use_keywords = field_or<bool>(body, "use_keywords", req.use_keywords);
    req.template_name = field_or<std::string>(body, "template", "");
    return req;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("request body: ") + e.what());
  }
}

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.code()), error_body(e));
}

template <typename F>
auto guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, Error(ErrorCode::kStorageFailure, e.what()));
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kTargetUnavailable: return 422;
    case ErrorCode::kProviderTimeout: return 504;
    case ErrorCode::kProviderRejected: return 502;
    case ErrorCode::kEmbeddingUnavailable: return 503;
    case ErrorCode::kStorageFailure: return 500;
    default: return 400;
  }
}

std::string error_body(const Error& e) {
  return json{{"code", error_code_name(e.code())},
              {"message", e.what()},
              {"retriable", e.retriable()}}
      .dump();
}

struct HttpServer::Impl {
  std::shared_ptr<PanelService> service;
  httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<PanelService> service) : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& srv = impl_->server;
  auto* svc = impl_->service.get();

  srv.Get("/health", guarded([svc](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200,
                      json{{"status", "ok"},
                           {"papers", svc->store().corpus().size()},
                           {"generations", svc->generations()},
                           {"cache_hits", svc->cache_hits()},
                           {"coalesced", svc->coalesced()}}
                          .dump());
          }));
  srv.Get(R"(/papers/([^/]+))", guarded([svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, paper_json(*svc->store().paper(req.matches[1].str())).dump());
          }));
  srv.Get(R"(/papers/([^/]+)/citances)",
          guarded([svc](const httplib::Request& req, httplib::Response& res) {
            const auto& store = svc->store();
            json list = json::array();
            for (const auto& c : store.citances_of(req.matches[1].str())) {
              list.push_back(citance_json(store, c));
            }
            send_json(res, 200, json{{"paper_id", req.matches[1].str()}, {"citances", list}}.dump());
          }));
  srv.Get(R"(/citances/([^/]+)/contexts)",
          guarded([svc](const httplib::Request& req, httplib::Response& res) {
            const auto& store = svc->store();
            const auto& c = store.citance(req.matches[1].str());
            json contexts = json::object();
            for (auto kind : kAllContextKinds) {
              const auto& ctx = store.context(c, kind);
              json members = json::array();
              for (const auto& s : ctx.sentences) {
                members.push_back({{"para_id", s.para_id},
                                   {"sent_index", s.sent_index},
                                   {"text", s.text},
                                   {"is_citance", s.is_citance}});
              }
              contexts[std::string(to_string(kind))] = {{"text", ctx.text()},
                                                        {"sentences", std::move(members)},
                                                        {"degenerate", ctx.degenerate}};
            }
            send_json(res, 200,
                      json{{"citance", citance_json(store, c)}, {"contexts", contexts}}.dump());
          }));
  srv.Post("/retrieve", guarded([svc](const httplib::Request& req, httplib::Response& res) {
             const auto result = svc->retrieve(request_from_body(req.body));
             send_json(res, 200, retrieval::result_to_json(result));
           }));
  srv.Post("/summarize", guarded([svc](const httplib::Request& req, httplib::Response& res) {
             const auto panel = svc->resolve_citance_panel(request_from_body(req.body));
             if (panel.unavailable) {
               auto body = json::parse(error_body(*panel.unavailable));
               body["panel"] = json::parse(panel_to_json(panel));
               send_json(res, http_status(panel.unavailable->code()), body.dump());
               return;
             }
             send_json(res, 200, panel_to_json(panel));
           }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kStorageFailure,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kStorageFailure,
                "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace citesum::service
