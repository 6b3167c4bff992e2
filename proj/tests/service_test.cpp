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

#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <thread>

#include "citesum/error.hpp"
#include "citesum/service.hpp"
#include "test_support.hpp"

namespace citesum::service {
namespace {

using nlohmann::json;
using summarization::MockGenerator;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

// Mock completions after a pause, so concurrent callers overlap.
class SlowMock final : public summarization::Generator {
 public:
  std::string complete(const summarization::GenerationRequest& req) const override {
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    return inner.complete(req);
  }
  MockGenerator inner;
};

class FailingGenerator final : public summarization::Generator {
 public:
  std::string complete(const summarization::GenerationRequest&) const override {
    throw Error(ErrorCode::kProviderTimeout, "stub timeout");
  }
};

// The mini corpus plus a paper citing one abstract-only paper and one
// unlinked reference.
Corpus extended_corpus() {
  auto corpus = testing::mini_corpus_index();
  const std::string text =
      "Earlier work (Ames, 2001) framed the task. Others (Unlinked, 1999) disagree.";
  json doc = {{"paper_id", "mini-d"},
              {"title", "Paper d"},
              {"abstract", json::array()},
              {"body", {{{"section", "Intro"},
                         {"paragraphs", {{{"text", text},
                                          {"cite_spans", {{{"start", 13}, {"end", 24}, {"ref_id", "r0"}},
                                                          {{"start", 50}, {"end", 65}, {"ref_id", "r1"}}}}}}}}}},
              {"bib_entries", {{"r0", {{"title", "Ames"}, {"linked_paper_id", "abs-only"}}},
                               {"r1", {{"title", "Unlinked"}, {"linked_paper_id", nullptr}}}}}};
  corpus.add(parse_document(doc.dump()));
  corpus.add(parse_document(
      R"({"paper_id": "abs-only", "title": "Ames", "abstract": ["The abstract only."], "body": []})"));
  return corpus;
}

std::shared_ptr<const CorpusStore> make_store() {
  return std::make_shared<CorpusStore>(extended_corpus(),
                                       std::make_shared<embedding::FallbackEmbedder>());
}

summarization::Summary sample_summary(const std::string& text = "Summary text.") {
  summarization::Summary s;
  s.citance_id = "c1";
  s.target_paper_id = "t1";
  s.config.granularity = retrieval::Granularity::kParagraph;
  s.config.template_name = "summarize";
  s.text = text;
  s.generator = "mock-echo";
  s.created_at = "1970-01-01T00:00:00Z";
  return s;
}

CacheEntry sample_entry(const std::string& text = "Summary text.") {
  CacheEntry e;
  e.summary = sample_summary(text);
  e.key = key_of(e.summary);
  e.retrieved.citance_id = "c1";
  e.retrieved.target_paper_id = "t1";
  e.retrieved.granularity = retrieval::Granularity::kParagraph;
  return e;
}

TEST(Store, LookupsAndTargets) {
  const auto store = make_store();
  EXPECT_EQ(store->paper("mini-a")->paper_id, "mini-a");
  EXPECT_EQ(code_of([&] { store->paper("zzz"); }), ErrorCode::kNotFound);
  EXPECT_EQ(store->citances_of("mini-a").size(), 4u);
  EXPECT_TRUE(store->citances_of("mini-c").empty());
  EXPECT_EQ(code_of([&] { store->citance("mini-a:p0000:s9"); }), ErrorCode::kNotFound);

  const auto& multi = store->citance("mini-a:p0002:s1");
  EXPECT_EQ(store->target_of(multi)->paper_id, "mini-b");
  EXPECT_EQ(store->target_of(multi, "mini-c")->paper_id, "mini-c");
  EXPECT_EQ(store->target_of(multi, multi.targets[1])->paper_id, "mini-c");
  EXPECT_EQ(code_of([&] { store->target_of(multi, "mini-a"); }), ErrorCode::kNotFound);

  const auto& d = store->citances_of("mini-d");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(store->target_of(d[0])->paper_id, "abs-only");
  EXPECT_EQ(store->target_of(d[1]), nullptr);
}

TEST(Store, DerivedDataIsMemoized) {
  const auto store = make_store();
  const auto& c = store->citance("mini-a:p0001:s1");
  const auto* first = &store->context(c, ContextKind::kSimilar);
  EXPECT_EQ(&store->context(c, ContextKind::kSimilar), first);
  EXPECT_EQ(first->sentences.size(), 3u);
  EXPECT_EQ(&store->keywords(c, ContextKind::kSimilar), &store->keywords(c, ContextKind::kSimilar));
  EXPECT_LE(store->keywords(c, ContextKind::kSimilar).size(), 5u);
}

TEST(CacheKey, CanonicalFormDistinguishesFields) {
  const auto base = key_of(sample_summary());
  auto other = base;
  other.temperature = 0.5;
  EXPECT_NE(base.canonical(), other.canonical());
  other = base;
  other.use_keywords = true;
  EXPECT_NE(base.canonical(), other.canonical());
  other = base;
  other.template_name = "summarize-a1";
  EXPECT_NE(base.canonical(), other.canonical());
  EXPECT_EQ(base.canonical(), key_of(sample_summary()).canonical());
}

TEST(Cache, WriteOnceSemantics) {
  SummaryCache cache;
  const auto e = sample_entry();
  EXPECT_EQ(cache.put(e), CacheWrite::kStored);
  EXPECT_EQ(cache.put(e), CacheWrite::kAlreadyPresent);
  EXPECT_EQ(code_of([&] { cache.put(sample_entry("Different text.")); }), ErrorCode::kConflict);
  EXPECT_EQ(cache.size(), 1u);
  const auto got = cache.get(e.key);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->summary, e.summary);
  EXPECT_EQ(*cache.get_raw(e.key), entry_to_json(e));
  auto missing = e.key;
  missing.citance_id = "c2";
  EXPECT_FALSE(cache.get(missing).has_value());
  auto incomplete = e;
  incomplete.key.citance_id.clear();
  EXPECT_EQ(code_of([&] { cache.put(incomplete); }), ErrorCode::kInvalidArgument);
}

TEST(Cache, PersistsAndRepairsTornTail) {
  testing::TempDir dir;
  const auto path = dir.path() / "cache.jsonl";
  const auto e = sample_entry();
  {
    SummaryCache cache(path);
    cache.put(e);
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"key": {"citance_id": "c)";  // torn write
  }
  SummaryCache reloaded(path);
  EXPECT_EQ(reloaded.size(), 1u);
  EXPECT_EQ(*reloaded.get_raw(e.key), entry_to_json(e));
  EXPECT_EQ(testing::read_text(path), entry_to_json(e) + "\n");
  auto second = sample_entry();
  second.summary.citance_id = "c2";
  second.key = key_of(second.summary);
  EXPECT_EQ(reloaded.put(second), CacheWrite::kStored);
  EXPECT_EQ(SummaryCache(path).size(), 2u);
}

TEST(Cache, CorruptMiddleLineIsRejected) {
  testing::TempDir dir;
  const auto path = dir.path() / "cache.jsonl";
  {
    std::ofstream out(path);
    out << "garbage\n" << entry_to_json(sample_entry()) << "\n";
  }
  EXPECT_EQ(code_of([&] { SummaryCache c(path); }), ErrorCode::kMalformedInput);
}

TEST(Cache, ConcurrentWritersOfOneKey) {
  testing::TempDir dir;
  SummaryCache cache(dir.path() / "c.jsonl");
  const auto e = sample_entry();
  std::atomic<int> stored{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (cache.put(e) == CacheWrite::kStored) ++stored;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(stored.load(), 1);
  EXPECT_EQ(testing::read_text(dir.path() / "c.jsonl"), entry_to_json(e) + "\n");
}

TEST(PanelRequestTest, DescriptorRoundTrip) {
  const auto r = PanelRequest::from_descriptor("c", "similar-keywords-dense-sentences");
  EXPECT_TRUE(r.use_keywords);
  EXPECT_EQ(r.context_kind, ContextKind::kSimilar);
  EXPECT_EQ(r.model, retrieval::Model::kDense);
  EXPECT_EQ(r.descriptor(), "similar-keywords-dense-sentence");
  EXPECT_EQ(code_of([] { PanelRequest::from_descriptor("c", "similar-bm25"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { PanelRequest::from_descriptor("c", "window-bm25-sentence"); }),
            ErrorCode::kInvalidArgument);
  const auto defaults = default_panel_setups("c");
  ASSERT_EQ(defaults.size(), 2u);
  EXPECT_EQ(defaults[0].descriptor(), "similar-bm25-paragraph");
  EXPECT_EQ(defaults[1].descriptor(), "citance-dense-sentence");
}

class PanelFixture : public ::testing::Test {
 protected:
  std::shared_ptr<const CorpusStore> store_ = make_store();
  std::shared_ptr<SummaryCache> cache_ = std::make_shared<SummaryCache>();
};

TEST_F(PanelFixture, GeneratesOnceThenServesFromCache) {
  auto gen = std::make_shared<MockGenerator>();
  PanelService svc(store_, cache_, gen, {}, summarization::clock_for("mock"));
  for (const auto& req : default_panel_setups("mini-a:p0001:s1")) {
    const auto first = svc.resolve_citance_panel(req);
    EXPECT_FALSE(first.cache_hit);
    ASSERT_TRUE(first.summary.has_value());
    ASSERT_TRUE(first.retrieved.has_value());
    EXPECT_LE(first.retrieved->hits.hits.size(),
              req.granularity == retrieval::Granularity::kSentence ? 5u : 2u);
    EXPECT_TRUE(summarization::validate_summary(first.summary->text).passes());
    EXPECT_EQ(first.target_paper_id, "mini-c");
    EXPECT_FALSE(first.target_abstract.empty());
    EXPECT_EQ(first.contexts.size(), 3u);
    const auto second = svc.resolve_citance_panel(req);
    EXPECT_TRUE(second.cache_hit);
    EXPECT_EQ(second.summary, first.summary);
  }
  EXPECT_EQ(svc.generations(), 2);
  EXPECT_EQ(svc.cache_hits(), 2);
  EXPECT_EQ(gen->calls(), 2);
}

TEST_F(PanelFixture, ConcurrentIdenticalRequestsShareOneGeneration) {
  auto gen = std::make_shared<SlowMock>();
  PanelService svc(store_, cache_, gen, {}, summarization::clock_for("mock"));
  const auto req = PanelRequest::from_descriptor("mini-a:p0000:s1", "similar-bm25-paragraph");
  constexpr int kCallers = 8;
  std::vector<Panel> panels(kCallers);
  std::vector<std::thread> threads;
  for (int i = 0; i < kCallers; ++i) {
    threads.emplace_back([&, i] { panels[static_cast<std::size_t>(i)] = svc.resolve_citance_panel(req); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(gen->inner.calls(), 1);
  EXPECT_EQ(svc.generations(), 1);
  for (const auto& p : panels) {
    ASSERT_TRUE(p.summary.has_value());
    EXPECT_EQ(p.summary, panels[0].summary);
    EXPECT_EQ(p.retrieved->hits.hits, panels[0].retrieved->hits.hits);
  }
  EXPECT_EQ(svc.coalesced() + svc.cache_hits(), kCallers - 1);
  if (svc.cache_hits() == 0) {
    for (const auto& p : panels) EXPECT_EQ(panel_to_json(p), panel_to_json(panels[0]));
  }
  EXPECT_EQ(cache_->size(), 1u);
}

TEST_F(PanelFixture, ProviderFailurePropagatesAndIsNotCached) {
  PanelService svc(store_, cache_, std::make_shared<FailingGenerator>());
  const auto req = PanelRequest::from_descriptor("mini-a:p0000:s1", "citance-bm25-sentence");
  EXPECT_EQ(code_of([&] { svc.resolve_citance_panel(req); }), ErrorCode::kProviderTimeout);
  EXPECT_EQ(cache_->size(), 0u);
}

TEST_F(PanelFixture, UnavailableTargetsKeepAbstract) {
  auto gen = std::make_shared<MockGenerator>();
  PanelService svc(store_, cache_, gen);
  const auto& cs = store_->citances_of("mini-d");
  PanelRequest req;
  req.citance_id = cs[0].citance_id;
  const auto abs = svc.resolve_citance_panel(req);
  ASSERT_TRUE(abs.unavailable.has_value());
  EXPECT_EQ(abs.unavailable->code(), ErrorCode::kTargetUnavailable);
  EXPECT_EQ(abs.target_abstract, (std::vector<std::string>{"The abstract only."}));
  EXPECT_FALSE(abs.summary.has_value());
  req.citance_id = cs[1].citance_id;
  const auto unlinked = svc.resolve_citance_panel(req);
  ASSERT_TRUE(unlinked.unavailable.has_value());
  EXPECT_TRUE(unlinked.target_abstract.empty());
  EXPECT_EQ(gen->calls(), 0);
  EXPECT_EQ(code_of([&] { svc.retrieve(req); }), ErrorCode::kTargetUnavailable);
}

TEST_F(PanelFixture, PanelJsonShape) {
  PanelService svc(store_, cache_, std::make_shared<MockGenerator>());
  const auto panel = svc.resolve_citance_panel(
      PanelRequest::from_descriptor("mini-b:p0002:s0", "citance-dense-sentence"));
  const auto j = json::parse(panel_to_json(panel));
  EXPECT_EQ(j["citance"]["citance_id"], "mini-b:p0002:s0");
  EXPECT_TRUE(j["contexts"].contains("neighbors"));
  EXPECT_EQ(j["target"]["paper_id"], "mini-c");
  EXPECT_EQ(j["setup"], "citance-dense-sentence");
  EXPECT_LE(j["hits"].size(), 5u);
  EXPECT_TRUE(j["summary"].is_object());
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(ErrorCode::kNotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::kTargetUnavailable), 422);
  EXPECT_EQ(http_status(ErrorCode::kProviderTimeout), 504);
  EXPECT_EQ(http_status(ErrorCode::kMalformedInput), 400);
  const auto body = json::parse(error_body(Error(ErrorCode::kProviderTimeout, "slow")));
  EXPECT_EQ(body["code"], "provider_timeout");
  EXPECT_EQ(body["retriable"], true);
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_shared<PanelService>(make_store(), std::make_shared<SummaryCache>(),
                                              std::make_shared<MockGenerator>(), ServiceOptions{},
                                              summarization::clock_for("mock"));
    server_ = std::make_unique<HttpServer>(service_);
    port_ = server_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->stop(); }

  std::shared_ptr<PanelService> service_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpFixture, ReadEndpoints) {
  auto health = client_->Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["papers"], 5);

  auto paper = client_->Get("/papers/mini-a");
  ASSERT_TRUE(paper);
  EXPECT_EQ(paper->status, 200);
  const auto pj = json::parse(paper->body);
  EXPECT_EQ(pj["paper_id"], "mini-a");
  EXPECT_TRUE(pj["has_full_text"].get<bool>());

  auto citances = client_->Get("/papers/mini-a/citances");
  ASSERT_TRUE(citances);
  const auto cj = json::parse(citances->body);
  ASSERT_EQ(cj["citances"].size(), 4u);
  // Offsets let a reader highlight each citance inside its paragraph.
  const auto doc = parse_document(
      testing::read_text(testing::data_dir() / "mini_corpus" / "papers" / "mini-a.json"));
  for (const auto& c : cj["citances"]) {
    const auto* para = doc.find_paragraph(c["para_id"].get<std::string>());
    ASSERT_NE(para, nullptr);
    EXPECT_EQ(text::slice_scalars(para->text, c["char_start"], c["char_end"]), c["text"]);
    EXPECT_TRUE(c["targets"][0]["available"].get<bool>());
  }

  auto contexts = client_->Get("/citances/mini-a:p0001:s1/contexts");
  ASSERT_TRUE(contexts);
  EXPECT_EQ(contexts->status, 200);
  EXPECT_EQ(json::parse(contexts->body)["contexts"]["citance"]["sentences"].size(), 1u);

  auto missing = client_->Get("/papers/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["code"], "not_found");
}

TEST_F(HttpFixture, RetrieveAndSummarize) {
  auto r = client_->Post("/retrieve",
                         R"({"citance_id": "mini-a:p0001:s1", "setup": "citance-dense-sentence"})",
                         "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_LE(json::parse(r->body)["hits"].size(), 5u);

  const std::string body =
      R"({"citance_id": "mini-a:p0001:s1", "context_kind": "similar", "model": "bm25", "granularity": "paragraph"})";
  auto s1 = client_->Post("/summarize", body, "application/json");
  ASSERT_TRUE(s1);
  ASSERT_EQ(s1->status, 200) << s1->body;
  const auto j1 = json::parse(s1->body);
  EXPECT_FALSE(j1["cache_hit"].get<bool>());
  EXPECT_LE(j1["hits"].size(), 2u);
  auto s2 = client_->Post("/summarize", body, "application/json");
  ASSERT_TRUE(s2);
  const auto j2 = json::parse(s2->body);
  EXPECT_TRUE(j2["cache_hit"].get<bool>());
  EXPECT_EQ(j2["summary"], j1["summary"]);
  EXPECT_EQ(service_->generations(), 1);
}

TEST_F(HttpFixture, ErrorBodies) {
  auto bad = client_->Post("/summarize", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto unknown = client_->Post("/summarize", R"({"citance_id": "x:y:z"})", "application/json");
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 404);
  auto setup = client_->Post("/retrieve", R"({"citance_id": "mini-a:p0001:s1", "setup": "bogus"})",
                             "application/json");
  ASSERT_TRUE(setup);
  EXPECT_EQ(setup->status, 400);

  const auto d = service_->store().citances_of("mini-d");
  auto unavailable = client_->Post("/summarize", json{{"citance_id", d[0].citance_id}}.dump(),
                                   "application/json");
  ASSERT_TRUE(unavailable);
  EXPECT_EQ(unavailable->status, 422);
  const auto uj = json::parse(unavailable->body);
  EXPECT_EQ(uj["code"], "target_unavailable");
  EXPECT_EQ(uj["panel"]["target"]["abstract"][0], "The abstract only.");
}

}  // namespace
}  // namespace citesum::service
