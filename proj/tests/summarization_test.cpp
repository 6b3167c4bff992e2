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

#include <json.hpp>
#include <regex>

#include "citesum/error.hpp"
#include "citesum/summarization.hpp"
#include "test_support.hpp"

namespace citesum::summarization {
namespace {

using retrieval::Granularity;
using testing::StubRequest;
using testing::StubResponse;
using testing::StubServer;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

std::string golden(const std::string& name) {
  return testing::read_text(testing::golden_dir() / name);
}

TEST(Prompts, DefaultTemplatesMatchGoldens) {
  EXPECT_EQ(build_prompt(Task::kParaphrase, "X"), golden("paraphrase_X.txt"));
  EXPECT_EQ(build_prompt(Task::kSummarize, "X"), golden("summarize_X.txt"));
  EXPECT_EQ(find_template("summarize-quoted").render("X"), golden("summarize_quoted_X.txt"));
}

TEST(Prompts, ThreeBlockFrame) {
  const auto p = build_prompt(Task::kSummarize, "Some text.");
  EXPECT_TRUE(p.starts_with("### Instruction:\n"));
  EXPECT_NE(p.find("\n\n### Input:\n"), std::string::npos);
  EXPECT_TRUE(p.ends_with("\n\n### Output:\n"));
  EXPECT_NE(p.find("Some text."), std::string::npos);
}

TEST(Prompts, RegistryHasDefaultsAndVariants) {
  for (const char* name : {"paraphrase", "summarize", "summarize-a1", "summarize-a2", "summarize-a3",
                           "paraphrase-a1", "paraphrase-a2", "paraphrase-a3", "paraphrase-a4",
                           "summarize-quoted"}) {
    const auto& t = find_template(name);
    EXPECT_EQ(t.name, name);
    const auto first = t.input_frame.find("{input}");
    ASSERT_NE(first, std::string::npos) << name;
    EXPECT_EQ(t.input_frame.find("{input}", first + 1), std::string::npos) << name;
    EXPECT_EQ(t.task, std::string(name).starts_with("paraphrase") ? Task::kParaphrase : Task::kSummarize);
  }
  EXPECT_EQ(find_template("summarize-a3").input_frame,
            "Summarize the following scientific text in not more than 5 sentences: {input}.");
  EXPECT_EQ(code_of([] { find_template("nope"); }), ErrorCode::kUnknownTemplate);
  EXPECT_EQ(code_of([] { build_prompt(Task::kSummarize, ""); }), ErrorCode::kEmptyInput);
}

TEST(Prompts, TaskFollowsGranularity) {
  EXPECT_EQ(task_for(Granularity::kSentence), Task::kParaphrase);
  EXPECT_EQ(task_for(Granularity::kParagraph), Task::kSummarize);
  EXPECT_EQ(parse_task("summarize"), Task::kSummarize);
  EXPECT_THROW(parse_task("translate"), Error);
}

TEST(AssembleInput, JoinsByGranularity) {
  const std::vector<std::string> parts = {"One.", "Two."};
  EXPECT_EQ(assemble_input(parts, Granularity::kSentence), "One. Two.");
  EXPECT_EQ(assemble_input(parts, Granularity::kParagraph), "One.\n\nTwo.");
  EXPECT_EQ(assemble_input({}, Granularity::kSentence), "");
}

TEST(Mock, EchoesFramedTextCappedAtFiveSentences) {
  const MockGenerator mock;
  GenerationRequest req;
  req.prompt = build_prompt(Task::kSummarize, "A one. B two. C three. D four. E five. F six. G seven.");
  EXPECT_EQ(mock.complete(req), "A one. B two. C three. D four. E five.");
  req.prompt = build_prompt(Task::kParaphrase, "Short text here.");
  EXPECT_EQ(mock.complete(req), "Short text here.");
  req.prompt = find_template("summarize-quoted").render("Quoted text.");
  EXPECT_EQ(mock.complete(req), "Quoted text.");
  req.prompt = build_prompt(Task::kSummarize, "First para.\n\nSecond para.");
  EXPECT_EQ(mock.complete(req), "First para. Second para.");
  EXPECT_EQ(mock.calls(), 4);
}

TEST(Generate, ProvenanceAndEmptyCompletion) {
  GenerationRequest req;
  req.prompt = build_prompt(Task::kSummarize, "Alpha beta.");
  const MockGenerator mock;
  const auto g = generate_summary(req, mock, clock_for("mock"));
  EXPECT_EQ(g.text, "Alpha beta.");
  EXPECT_EQ(g.generator, "mock-echo");
  EXPECT_EQ(g.created_at, kMockTimestamp);

  class Empty final : public Generator {
   public:
    std::string complete(const GenerationRequest&) const override { return ""; }
  };
  EXPECT_EQ(code_of([&] { generate_summary(req, Empty{}); }), ErrorCode::kProviderRejected);
  req.temperature = -1;
  EXPECT_EQ(code_of([&] { generate_summary(req, mock); }), ErrorCode::kInvalidArgument);
}

TEST(Clock, SystemTimestampIsIso8601Utc) {
  EXPECT_TRUE(std::regex_match(system_timestamp(),
                               std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
  EXPECT_EQ(fixed_clock("t0")(), "t0");
}

TEST(Remote, SendsWireContractAndReturnsText) {
  nlohmann::json seen;
  StubServer server([&](const StubRequest& req) {
    seen = nlohmann::json::parse(req.body);
    return StubResponse{200, R"({"text": "Generated."})"};
  });
  GenerationRequest req;
  req.endpoint = server.url("/v1/generate");
  req.model_name = "stub-llm";
  req.temperature = 0.3;
  req.max_output_tokens = 77;
  req.prompt = "P";
  EXPECT_EQ(make_generator(req.endpoint)->complete(req), "Generated.");
  EXPECT_EQ(seen["model"], "stub-llm");
  EXPECT_EQ(seen["prompt"], "P");
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.3);
  EXPECT_EQ(seen["max_tokens"], 77);
}

TEST(Remote, RejectionsAndTimeouts) {
  {
    StubServer server([](const StubRequest&) { return StubResponse{400, R"({"error": "bad"})"}; });
    GenerationRequest req;
    req.endpoint = server.url();
    req.prompt = "P";
    EXPECT_EQ(code_of([&] { RemoteGenerator().complete(req); }), ErrorCode::kProviderRejected);
  }
  {
    StubServer server([](const StubRequest&) { return StubResponse{200, R"({"txt": 1})"}; });
    GenerationRequest req;
    req.endpoint = server.url();
    req.prompt = "P";
    EXPECT_EQ(code_of([&] { RemoteGenerator().complete(req); }), ErrorCode::kProviderRejected);
  }
  {
    StubServer server([](const StubRequest&) { return StubResponse{200, R"({"text": "late"})", 1500}; });
    GenerationRequest req;
    req.endpoint = server.url();
    req.prompt = "P";
    req.timeout = std::chrono::milliseconds(200);
    EXPECT_EQ(code_of([&] { RemoteGenerator().complete(req); }), ErrorCode::kProviderTimeout);
  }
  int port = 0;
  {
    StubServer probe([](const StubRequest&) { return StubResponse{}; });
    port = probe.port();
  }
  GenerationRequest req;
  req.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/gen";
  req.prompt = "P";
  req.timeout = std::chrono::milliseconds(500);
  EXPECT_EQ(code_of([&] { RemoteGenerator().complete(req); }), ErrorCode::kProviderTimeout);
}

retrieval::RetrievalResult sample_result(Granularity g) {
  retrieval::RetrievalResult r;
  r.citance_id = "c1";
  r.target_paper_id = "t1";
  r.config.context_kind = ContextKind::kSimilar;
  r.granularity = g;
  r.retrieved_texts = {"First unit sentence.", "Second unit sentence."};
  return r;
}

TEST(SummarizeRetrieval, ChoosesTemplateAndRecordsProvenance) {
  const MockGenerator mock;
  const auto s = summarize_retrieval(sample_result(Granularity::kParagraph), {}, mock, {},
                                     fixed_clock("T"));
  EXPECT_EQ(s.config.template_name, "summarize");
  EXPECT_EQ(s.config.descriptor(), "similar-bm25-paragraph");
  EXPECT_EQ(s.text, "First unit sentence. Second unit sentence.");
  EXPECT_EQ(s.source_texts.size(), 2u);
  EXPECT_EQ(s.created_at, "T");
  const auto p = summarize_retrieval(sample_result(Granularity::kSentence), {}, mock, {});
  EXPECT_EQ(p.config.template_name, "paraphrase");
  const auto q = summarize_retrieval(sample_result(Granularity::kSentence), {}, mock, "summarize-a2");
  EXPECT_EQ(q.config.template_name, "summarize-a2");
  EXPECT_EQ(summary_from_json(summary_to_json(s)), s);
  EXPECT_EQ(code_of([] { summary_from_json("{}"); }), ErrorCode::kMalformedInput);
}

TEST(SummarizeRetrieval, EmptyRetrievalIsEmptyInput) {
  auto r = sample_result(Granularity::kSentence);
  r.retrieved_texts.clear();
  EXPECT_EQ(code_of([&] { summarize_retrieval(r, {}, MockGenerator{}); }), ErrorCode::kEmptyInput);
}

TEST(Validate, CountsSentencesAndFlagsLists) {
  EXPECT_FALSE(validate_summary("One. Two. Three. Four. Five.").over_length);
  const auto six = validate_summary("One. Two. Three. Four. Five. Six.");
  EXPECT_TRUE(six.over_length);
  EXPECT_EQ(six.sentence_count, 6);
  EXPECT_FALSE(six.passes());
  EXPECT_TRUE(validate_summary("Points:\n- first\n- second").list_format);
  EXPECT_TRUE(validate_summary("1. first\n2. second").list_format);
  EXPECT_FALSE(validate_summary("Plain prose. Nothing else.").list_format);
  EXPECT_EQ(validate_summary("").sentence_count, 0);
}

}  // namespace
}  // namespace citesum::summarization
