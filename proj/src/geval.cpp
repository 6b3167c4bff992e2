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
#include <cctype>
#include <sstream>

#include "citesum/error.hpp"
#include "citesum/evaluation.hpp"

namespace citesum::evaluation {

namespace {

constexpr std::string_view kPreamble =
    "You are a scientist who is currently reading a paper. While reading the "
    "paper, you see a citation to another paper that you want to follow. You "
    "are also given a summary of the corresponding cited paper. Your task is "
    "to assess is to rate this summary on ";

constexpr std::string_view kReadCarefully =
    "Please make sure you read and understand these instructions carefully. "
    "Please keep this document open while reviewing, and refer to it as "
    "needed.";

struct CriterionText {
  std::string_view definition;  // follows "<Name> (1-5) - "
  std::vector<std::string_view> steps;
};

CriterionText criterion_text(Criterion c) {
  switch (c) {
    case Criterion::kCoverage:
      return {"the amount of key information covered by the summary that is "
              "relevant to this citation. The summary should contain "
              "information from the cited paper that fits the context of the "
              "given citation text and helps you to better understand why this "
              "paper was cited here.",
              {"Check if the summary contains only information that is relevant "
               "to the citation text.",
               "Assign a score for coverage on a scale of 1 to 5, where 1 is the "
               "lowest and 5 is the highest based on the Evaluation Criteria."}};
    case Criterion::kFocus:
      return {"the collective quality of all sentences. The summary should be "
              "well-structured and well-organized. The summary should build "
              "from sentence to sentence to a coherent body of information that "
              "is relevant to the given citation text.",
              {"Check if the summary is coherent and contains well-organized "
               "information that is relevant to the citation text.",
               "Assign a score for focus on a scale of 1 to 5, where 1 is the "
               "lowest and 5 is the highest based on the Evaluation Criteria."}};
    case Criterion::kRelevance:
      return {"the relevance of the summary to the citation text. The summary "
              "should contain only information from the cited paper that fits "
              "the current reading context. It should be sufficiently "
              "informative so that you do not need to actually read the cited "
              "paper to understand why it was cited here.",
              {"Compare the content of the summary with the citation text. "
               "Assess whether the summary includes relevant information from "
               "the cited paper that directly relates to the context and "
               "purpose of the citation.",
               "Determine if the summary provides enough information for you to "
               "understand why the cited paper was referenced without needing "
               "to read the entire paper.",
               "Rate the relevance of the summary based on the above assessment "
               "using a scale of 1 to 5, where 1 indicates low relevance and 5 "
               "indicates high relevance."}};
  }
  return {};
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kCoverage: return "coverage";
    case Criterion::kFocus: return "focus";
    case Criterion::kRelevance: return "relevance";
  }
  return "coverage";
}

std::string_view display_name(Criterion c) {
  switch (c) {
    case Criterion::kCoverage: return "Coverage";
    case Criterion::kFocus: return "Focus";
    case Criterion::kRelevance: return "Relevance";
  }
  return "Coverage";
}

Criterion parse_criterion(std::string_view name) {
  const auto key = lower(trim(name));
  for (auto c : {Criterion::kCoverage, Criterion::kFocus, Criterion::kRelevance}) {
    if (to_string(c) == key) return c;
  }
  throw Error(ErrorCode::kUnknownCriterion, "unknown criterion '" + std::string(name) + "'");
}

std::string build_geval_prompt(Criterion criterion, std::string_view citance_text,
                               std::string_view summary_text) {
  const auto text = criterion_text(criterion);
  const auto name = display_name(criterion);
  std::string out;
  out += kPreamble;
  out += to_string(criterion);
  out += ".\n";
  out += kReadCarefully;
  out += "\n\nEvaluation Criteria:\n\n";
  out += name;
  out += " (1-5) - ";
  out += text.definition;
  out += "\n\nEvaluation Steps (Corrected Chain of Thought):\n\n";
  out += "1. Read the given citation text that references another paper and make note of its content.\n";
  out += "2. Read the summary provided of the cited paper.\n";
  out += "3. ";
  out += name;
  out += ":\n";
  char letter = 'a';
  for (auto step : text.steps) {
    out += "   ";
    out += letter++;
    out += ". ";
    out += step;
    out += "\n";
  }
  out += "\nExample:\n\nSource Text:\n";
  out += citance_text;
  out += "\n\nSummary:\n";
  out += summary_text;
  out += "\n\nEvaluation Form (scores ONLY):\n\n- ";
  out += name;
  out += ":\n";
  return out;
}

std::string build_geval_prompt(std::string_view criterion, std::string_view citance_text,
                               std::string_view summary_text) {
  return build_geval_prompt(parse_criterion(criterion), citance_text, summary_text);
}

std::map<Criterion, int> parse_geval_scores(std::string_view response,
                                            std::span<const Criterion> expected) {
  if (trim(response).empty()) {
    throw Error(ErrorCode::kMalformedResponse, "empty evaluation response");
  }
  std::map<Criterion, int> scores;
  std::istringstream in{std::string(response)};
  std::string line;
  while (std::getline(in, line)) {
    auto s = trim(line);
    if (!s.starts_with("-")) continue;
    s = trim(std::string_view(s).substr(1));
    const auto colon = s.find(':');
    if (colon == std::string::npos) continue;
    Criterion criterion;
    try {
      criterion = parse_criterion(s.substr(0, colon));
    } catch (const Error&) {
      continue;  // not one of our criteria
    }
    const auto value = trim(std::string_view(s).substr(colon + 1));
    const bool negative = value.starts_with('-');
    const auto digits = negative ? value.substr(1) : value;
    if (digits.empty() || digits.size() > 9 ||
        !std::all_of(digits.begin(), digits.end(),
                     [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw Error(ErrorCode::kMalformedResponse,
                  "score for " + std::string(display_name(criterion)) + " is not an integer: '" +
                      value + "'");
    }
    const int score = std::stoi(value);
    if (score < 1 || score > 5) {
      throw Error(ErrorCode::kScoreOutOfRange, std::string(display_name(criterion)) +
                                                   " score " + std::to_string(score) +
                                                   " outside 1-5");
    }
    auto [it, inserted] = scores.emplace(criterion, score);
    if (!inserted && it->second != score) {
      throw Error(ErrorCode::kMalformedResponse,
                  "conflicting scores for " + std::string(display_name(criterion)));
    }
  }
  for (auto c : expected) {
    if (!scores.contains(c)) {
      throw Error(ErrorCode::kMissingCriterion,
                  "response lacks a score for " + std::string(display_name(c)));
    }
  }
  return scores;
}

std::string render_geval_form(const std::map<Criterion, int>& scores) {
  std::string out;
  for (const auto& [criterion, score] : scores) {
    out += "- ";
    out += display_name(criterion);
    out += ": ";
    out += std::to_string(score);
    out += "\n";
  }
  return out;
}

}  // namespace citesum::evaluation
