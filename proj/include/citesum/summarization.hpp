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

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citesum/citance.hpp"
#include "citesum/retrieval.hpp"

namespace citesum::summarization {

/// Paraphrasing is used for the top sentences, summarization for the top
/// paragraphs.
enum class Task { kParaphrase, kSummarize };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);
Task task_for(retrieval::Granularity granularity);

/// A three-block prompt:
///
///   ### Instruction:
///   <instruction>
///
///   ### Input:
///   <input_frame with {input} replaced>
///
///   ### Output:
struct PromptTemplate {
  std::string name;
  Task task = Task::kSummarize;
  std::string instruction;
  std::string input_frame;  // contains exactly one "{input}"
  std::string output_marker = "### Output:";

  /// Throws Error(kEmptyInput) for an empty input.
  std::string render(std::string_view input) const;
};

/// Registry: "paraphrase" and "summarize" (the defaults), the instruction
/// variants "summarize-a1".."summarize-a3" and "paraphrase-a1".."paraphrase-a4",
/// and "summarize-quoted" (input wrapped in double quotes).
const std::vector<PromptTemplate>& template_registry();
/// Throws Error(kUnknownTemplate).
const PromptTemplate& find_template(std::string_view name);
const PromptTemplate& default_template(Task task);

std::string build_prompt(Task task, std::string_view input_text);

/// Sentences are joined by single spaces, paragraphs by a blank line, in
/// rank order.
std::string assemble_input(std::span<const std::string> retrieved,
                           retrieval::Granularity granularity);

struct GenerationRequest {
  std::string prompt;
  std::string model_name = "mock-echo";
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::string endpoint = "mock";  // URL, or "mock"
  std::chrono::milliseconds timeout{60000};
  std::string api_key_env = "CITESUM_GENERATION_API_KEY";

  /// Throws Error(kInvalidArgument).
  void validate() const;
};

class Generator {
 public:
  virtual ~Generator() = default;
  /// Returns the completion verbatim. Throws Error(kProviderTimeout) or
  /// Error(kProviderRejected).
  virtual std::string complete(const GenerationRequest& req) const = 0;
};

/// Deterministic offline generator: echoes the first kMockSentences
/// sentences of the text placed in the prompt's input frame. Counts calls.
class MockGenerator final : public Generator {
 public:
  static constexpr std::size_t kMockSentences = 5;

  std::string complete(const GenerationRequest& req) const override;
  long long calls() const { return calls_.load(); }

 private:
  mutable std::atomic<long long> calls_{0};
};

/// Client for POST {"model", "prompt", "temperature", "max_tokens"} ->
/// {"text"} at req.endpoint.
class RemoteGenerator final : public Generator {
 public:
  std::string complete(const GenerationRequest& req) const override;
};

/// Returns a MockGenerator for endpoint "mock", a RemoteGenerator otherwise.
std::shared_ptr<const Generator> make_generator(std::string_view endpoint);

/// Produces ISO-8601 UTC timestamps for provenance.
using Clock = std::function<std::string()>;
std::string system_timestamp();
Clock fixed_clock(std::string timestamp);
/// Timestamp recorded for mock generations so their output is reproducible.
inline constexpr std::string_view kMockTimestamp = "1970-01-01T00:00:00Z";
/// fixed_clock(kMockTimestamp) for the "mock" endpoint, the system clock
/// otherwise.
Clock clock_for(std::string_view endpoint);

struct Generation {
  std::string text;
  std::string generator;  // model name
  double temperature = 0.0;
  std::string created_at;
};

Generation generate_summary(const GenerationRequest& req, const Generator& gen,
                            const Clock& clock = system_timestamp);

struct SummaryConfig {
  ContextKind context_kind = ContextKind::kCitance;
  retrieval::Model model = retrieval::Model::kBm25;
  retrieval::Granularity granularity = retrieval::Granularity::kSentence;
  bool use_keywords = false;
  std::string template_name;

  /// e.g. "similar-bm25-paragraph".
  std::string descriptor() const;
  bool operator==(const SummaryConfig&) const = default;
};

struct Summary {
  std::string citance_id;
  std::string target_paper_id;
  SummaryConfig config;
  std::string text;
  std::vector<std::string> source_texts;
  std::string generator;
  double temperature = 0.0;
  std::string created_at;

  bool operator==(const Summary&) const = default;
};

/// Builds the prompt from the retrieved units (template chosen by
/// granularity unless `template_name` is non-empty), generates, and records
/// provenance. `base` supplies model, endpoint and sampling settings.
Summary summarize_retrieval(const retrieval::RetrievalResult& retrieved,
                            const GenerationRequest& base, const Generator& gen,
                            std::string_view template_name = {},
                            const Clock& clock = system_timestamp);

struct ValidationReport {
  int sentence_count = 0;
  int max_sentences = 5;
  bool over_length = false;
  bool list_format = false;  // bulleted or enumerated lines

  bool passes() const { return !over_length; }
};

ValidationReport validate_summary(std::string_view text, int max_sentences = 5);

std::string summary_to_json(const Summary& s);
Summary summary_from_json(std::string_view json_text);

}  // namespace citesum::summarization
