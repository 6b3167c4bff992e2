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

#include "citesum/summarization.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>
#include <json.hpp>
#include <sstream>

#include "citesum/error.hpp"
#include "http_client.hpp"

namespace citesum::summarization {

namespace {

using nlohmann::json;

constexpr std::string_view kPlaceholder = "{input}";
constexpr std::string_view kInputHeading = "### Input:\n";

constexpr std::string_view kParaphraseInstruction =
    "A chat between a curious human and an artificial intelligence assistant. "
    "The assistant knows how to paraphrase scientific text and the user will "
    "provide the scientific text for the assistant to paraphrase.";

constexpr std::string_view kSummarizeInstruction =
    "A chat between a curious human and an artificial intelligence assistant. "
    "The assistant knows how to summarize scientific text and the user will "
    "provide the scientific text for the assistant to summarize.";

// "Do X for the following scientific text." -> "Do X ... text: {input}."
std::string frame_from_instruction(std::string_view sentence) {
  std::string frame(sentence);
  if (!frame.empty() && frame.back() == '.') frame.pop_back();
  frame += ": {input}.";
  return frame;
}

PromptTemplate make(std::string name, Task task, std::string input_frame) {
  PromptTemplate t;
  t.name = std::move(name);
  t.task = task;
  t.instruction = std::string(task == Task::kParaphrase ? kParaphraseInstruction
                                                        : kSummarizeInstruction);
  t.input_frame = std::move(input_frame);
  return t;
}

std::vector<PromptTemplate> build_registry() {
  std::vector<PromptTemplate> r;
  r.push_back(make("paraphrase", Task::kParaphrase,
                   "Generate a coherent paraphrased text for the following "
                   "scientific text: {input}."));
  r.push_back(make("summarize", Task::kSummarize,
                   "Generate a coherent summary for the following scientific "
                   "text in not more than 5 sentences: {input}."));

  const std::string_view summarize_variants[] = {
      "Generate a coherent summary for the following scientific text in not "
      "more than 5 sentences.",
      "Generate a short summary of the following scientific text. The summary "
      "should not be more than 5 sentences long.",
      "Summarize the following scientific text in not more than 5 sentences.",
  };
  for (std::size_t i = 0; i < std::size(summarize_variants); ++i) {
    r.push_back(make("summarize-a" + std::to_string(i + 1), Task::kSummarize,
                     frame_from_instruction(summarize_variants[i])));
  }
  const std::string_view paraphrase_variants[] = {
      "Generate a coherent paraphrased text for the following scientific text.",
      "Generate a paraphrased text for the following scientific text.",
      "Paraphrase the following scientific text.",
      "Combine the following scientific text into a coherent and concise text.",
  };
  for (std::size_t i = 0; i < std::size(paraphrase_variants); ++i) {
    r.push_back(make("paraphrase-a" + std::to_string(i + 1), Task::kParaphrase,
                     frame_from_instruction(paraphrase_variants[i])));
  }
  r.push_back(make("summarize-quoted", Task::kSummarize,
                   "Generate a coherent summary for the following scientific "
                   "text in not more than 5 sentences: \"{input}\""));
  return r;
}

std::string ltrim(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return std::string(s.substr(i));
}

bool is_list_line(std::string_view line) {
  const auto s = ltrim(line);
  if (s.empty()) return false;
  for (std::string_view bullet : {"- ", "* ", "+ ", "\xE2\x80\xA2", "\xE2\x80\x93 "}) {
    if (s.starts_with(bullet)) return true;
  }
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  return digits > 0 && digits + 1 < s.size() && (s[digits] == '.' || s[digits] == ')') &&
         s[digits + 1] == ' ';
}

}  // namespace

std::string_view to_string(Task task) {
  return task == Task::kParaphrase ? "paraphrase" : "summarize";
}

Task parse_task(std::string_view name) {
  if (name == "paraphrase") return Task::kParaphrase;
  if (name == "summarize") return Task::kSummarize;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

Task task_for(retrieval::Granularity granularity) {
  return granularity == retrieval::Granularity::kSentence ? Task::kParaphrase
                                                          : Task::kSummarize;
}

std::string PromptTemplate::render(std::string_view input) const {
  if (input.empty()) {
    throw Error(ErrorCode::kEmptyInput, "prompt input is empty");
  }
  const auto at = input_frame.find(kPlaceholder);
  std::string framed = input_frame.substr(0, at);
  framed += input;
  framed += input_frame.substr(at + kPlaceholder.size());

  std::string out = "### Instruction:\n";
  out += instruction;
  out += "\n\n";
  out += kInputHeading;
  out += framed;
  out += "\n\n";
  out += output_marker;
  out += "\n";
  return out;
}

const std::vector<PromptTemplate>& template_registry() {
  static const std::vector<PromptTemplate> registry = build_registry();
  return registry;
}

const PromptTemplate& find_template(std::string_view name) {
  for (const auto& t : template_registry()) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::kUnknownTemplate, "unknown prompt template '" + std::string(name) + "'");
}

const PromptTemplate& default_template(Task task) {
  return find_template(to_string(task));
}

std::string build_prompt(Task task, std::string_view input_text) {
  return default_template(task).render(input_text);
}

std::string assemble_input(std::span<const std::string> retrieved,
                           retrieval::Granularity granularity) {
  const std::string_view sep =
      granularity == retrieval::Granularity::kSentence ? " " : "\n\n";
  std::string out;
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    if (i > 0) out += sep;
    out += retrieved[i];
  }
  return out;
}

void GenerationRequest::validate() const {
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
  if (max_output_tokens <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be > 0");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "generation timeout must be > 0");
  }
  if (prompt.empty()) throw Error(ErrorCode::kEmptyInput, "empty prompt");
}

std::string MockGenerator::complete(const GenerationRequest& req) const {
  ++calls_;
  std::string_view block = req.prompt;
  if (const auto start = block.find(kInputHeading); start != std::string_view::npos) {
    block.remove_prefix(start + kInputHeading.size());
    block = block.substr(0, block.find("\n\n### "));
  }
  // Drop the frame's lead-in ("... scientific text: ") and its closing
  // punctuation so only the retrieved text is echoed.
  if (const auto colon = block.find(": "); colon != std::string_view::npos) {
    block.remove_prefix(colon + 2);
  }
  if (block.starts_with('"')) {
    block.remove_prefix(1);
    if (block.ends_with('.')) block.remove_suffix(1);
    if (block.ends_with('"')) block.remove_suffix(1);
  } else if (block.ends_with("..")) {
    block.remove_suffix(1);
  }
  const auto sentences = segment_paragraph(block);
  std::string out;
  for (std::size_t i = 0; i < sentences.size() && i < kMockSentences; ++i) {
    if (!out.empty()) out += ' ';
    out += sentences[i].text;
  }
  return out.empty() ? std::string(block) : out;
}

std::string RemoteGenerator::complete(const GenerationRequest& req) const {
  const json body{{"model", req.model_name},
                  {"prompt", req.prompt},
                  {"temperature", req.temperature},
                  {"max_tokens", req.max_output_tokens}};
  detail::HttpResponse response;
  try {
    response = detail::post_json(req.endpoint, body.dump(), req.timeout, req.api_key_env);
  } catch (const detail::TransportError& e) {
    throw Error(ErrorCode::kProviderTimeout, e.what());
  }
  if (response.status != 200) {
    std::string message = response.body.substr(0, 500);
    try {
      const auto j = json::parse(response.body);
      if (j.contains("message") && j["message"].is_string()) message = j["message"];
      if (j.contains("error") && j["error"].is_string()) message = j["error"];
    } catch (const json::exception&) {
    }
    throw Error(ErrorCode::kProviderRejected,
                "provider answered HTTP " + std::to_string(response.status) + ": " + message);
  }
  try {
    return json::parse(response.body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProviderRejected,
                std::string("malformed provider response: ") + e.what());
  }
}

std::shared_ptr<const Generator> make_generator(std::string_view endpoint) {
  if (endpoint == "mock") return std::make_shared<MockGenerator>();
  return std::make_shared<RemoteGenerator>();
}

std::string system_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Clock fixed_clock(std::string timestamp) {
  return [ts = std::move(timestamp)] { return ts; };
}

Clock clock_for(std::string_view endpoint) {
  if (endpoint == "mock") return fixed_clock(std::string(kMockTimestamp));
  return system_timestamp;
}

Generation generate_summary(const GenerationRequest& req, const Generator& gen,
                            const Clock& clock) {
  req.validate();
  Generation g;
  g.text = gen.complete(req);
  if (g.text.empty()) {
    throw Error(ErrorCode::kProviderRejected, "provider returned an empty completion");
  }
  g.generator = req.model_name;
  g.temperature = req.temperature;
  g.created_at = clock();
  return g;
}

std::string SummaryConfig::descriptor() const {
  std::string out(citesum::to_string(context_kind));
  if (use_keywords) out += "-keywords";
  out += "-";
  out += retrieval::to_string(model);
  out += "-";
  out += retrieval::to_string(granularity);
  return out;
}

Summary summarize_retrieval(const retrieval::RetrievalResult& retrieved,
                            const GenerationRequest& base, const Generator& gen,
                            std::string_view template_name, const Clock& clock) {
  const auto& tmpl = template_name.empty()
                         ? default_template(task_for(retrieved.granularity))
                         : find_template(template_name);
  GenerationRequest req = base;
  req.prompt = tmpl.render(assemble_input(retrieved.retrieved_texts, retrieved.granularity));
  auto generation = generate_summary(req, gen, clock);

  Summary s;
  s.citance_id = retrieved.citance_id;
  s.target_paper_id = retrieved.target_paper_id;
  s.config = {retrieved.config.context_kind, retrieved.config.model,
              retrieved.granularity, retrieved.config.use_keywords, tmpl.name};
  s.text = std::move(generation.text);
  s.source_texts = retrieved.retrieved_texts;
  s.generator = std::move(generation.generator);
  s.temperature = generation.temperature;
  s.created_at = std::move(generation.created_at);
  return s;
}

ValidationReport validate_summary(std::string_view text, int max_sentences) {
  ValidationReport report;
  report.max_sentences = max_sentences;
  report.sentence_count = static_cast<int>(segment_paragraph(text).size());
  report.over_length = report.sentence_count > max_sentences;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (is_list_line(line)) {
      report.list_format = true;
      break;
    }
  }
  return report;
}

std::string summary_to_json(const Summary& s) {
  const json j{{"citance_id", s.citance_id},
               {"target_paper_id", s.target_paper_id},
               {"config",
                {{"context_kind", citesum::to_string(s.config.context_kind)},
                 {"model", retrieval::to_string(s.config.model)},
                 {"granularity", retrieval::to_string(s.config.granularity)},
                 {"use_keywords", s.config.use_keywords},
                 {"template", s.config.template_name}}},
               {"text", s.text},
               {"source_texts", s.source_texts},
               {"generator", s.generator},
               {"temperature", s.temperature},
               {"created_at", s.created_at}};
  return j.dump();
}

Summary summary_from_json(std::string_view json_text) {
  try {
    const auto j = json::parse(json_text);
    Summary s;
    s.citance_id = j.at("citance_id").get<std::string>();
    s.target_paper_id = j.at("target_paper_id").get<std::string>();
    const auto& c = j.at("config");
    s.config.context_kind = parse_context_kind(c.at("context_kind").get<std::string>());
    s.config.model = retrieval::parse_model(c.at("model").get<std::string>());
    s.config.granularity = retrieval::parse_granularity(c.at("granularity").get<std::string>());
    s.config.use_keywords = c.at("use_keywords").get<bool>();
    s.config.template_name = c.at("template").get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.source_texts = j.at("source_texts").get<std::vector<std::string>>();
    s.generator = j.at("generator").get<std::string>();
    s.temperature = j.at("temperature").get<double>();
    s.created_at = j.at("created_at").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad summary record: ") + e.what());
  }
}

}  // namespace citesum::summarization
