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

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citesum::evaluation {

// Graded relevance: relevant=2, somewhat relevant=1, non-relevant=0.
inline constexpr int kGradeRelevant = 2;
inline constexpr int kGradeSomewhat = 1;
inline constexpr int kGradeNonRelevant = 0;

struct RelevanceJudgment {
  std::string query_id;
  std::string unit_id;
  int grade = 0;

  bool operator==(const RelevanceJudgment&) const = default;
};

enum class Criterion { kCoverage, kFocus, kRelevance };

std::string_view to_string(Criterion c);     // "coverage"
std::string_view display_name(Criterion c);  // "Coverage"
/// Case-insensitive. Throws Error(kUnknownCriterion).
Criterion parse_criterion(std::string_view name);

struct QualityRating {
  std::string rater_id;
  std::string summary_id;
  Criterion criterion = Criterion::kCoverage;
  int score = 1;  // 1..5

  bool operator==(const QualityRating&) const = default;
};

/// nDCG@k with linear gains and log2(rank + 1) discounts. The ideal DCG
/// sorts the given grades descending; returns 0 when it is 0.
double ndcg_at_k(std::span<const int> ranked_grades, int k = 5);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// ROUGE-N over the shared tokenizer with clipped n-gram counts.
PrfScore rouge_n(std::string_view candidate, std::string_view reference, int n);
/// ROUGE-L from the longest common token subsequence.
PrfScore rouge_l(std::string_view candidate, std::string_view reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// Single-criterion G-Eval instruction with the citance and summary filled in.
std::string build_geval_prompt(Criterion criterion, std::string_view citance_text,
                               std::string_view summary_text);
std::string build_geval_prompt(std::string_view criterion, std::string_view citance_text,
                               std::string_view summary_text);

/// Parses "- <Criterion>: <int>" lines. Throws Error with
/// kMalformedResponse, kScoreOutOfRange or kMissingCriterion.
std::map<Criterion, int> parse_geval_scores(std::string_view response,
                                            std::span<const Criterion> expected);

/// The filled-in evaluation form for `scores`; parse_geval_scores inverts it.
std::string render_geval_form(const std::map<Criterion, int>& scores);

enum class KappaWeighting { kLinear, kQuadratic };

/// Cohen's weighted kappa over categories [lo, hi]. Identical vectors give
/// exactly 1. Throws Error with kLengthMismatch, kInvalidArgument (empty or
/// out-of-scale ratings) or kDegenerateMarginals.
double weighted_kappa(std::span<const int> ratings_a, std::span<const int> ratings_b,
                      int lo = 1, int hi = 5,
                      KappaWeighting weighting = KappaWeighting::kLinear);

struct RougeInput {
  std::string model;
  std::string summary_id;
  std::string candidate;
  std::string reference;
};

struct SetupNdcg {
  std::string setup;
  std::size_t queries = 0;
  std::size_t judgments = 0;
  double mean_ndcg = 0.0;
};

struct ModelRouge {
  std::string model;
  std::size_t count = 0;
  PrfScore rouge1;
  PrfScore rouge2;
  PrfScore rougeL;
};

struct CriterionMean {
  Criterion criterion = Criterion::kCoverage;
  std::size_t count = 0;
  double mean = 0.0;
};

struct KappaResult {
  Criterion criterion = Criterion::kCoverage;
  std::string rater_a;
  std::string rater_b;
  std::size_t pairs = 0;
  std::optional<double> kappa;
};

struct ReportOptions {
  int ndcg_k = 5;
  KappaWeighting weighting = KappaWeighting::kLinear;
  /// Setups that must appear among the judgments; missing ones are
  /// reported as empty groups.
  std::vector<std::string> expected_setups;
  /// Raters whose id starts with this prefix are LLM judges (G-Eval).
  std::string llm_rater_prefix = "geval";
};

struct EvalReport {
  std::vector<SetupNdcg> retrieval;
  std::vector<ModelRouge> rouge;
  std::vector<CriterionMean> human;
  std::vector<CriterionMean> geval;
  std::vector<KappaResult> agreement;
  std::size_t judgment_rows = 0;
  std::size_t rating_rows = 0;
  std::size_t rouge_rows = 0;
  std::vector<std::string> empty_groups;
};

/// Judgment query ids have the form "<setup>/<query>"; rows of one query id
/// are taken in file order as ranks 1, 2, ... An id without '/' belongs to
/// setup "all".
EvalReport aggregate_report(std::span<const RelevanceJudgment> judgments,
                            std::span<const QualityRating> ratings,
                            std::span<const RougeInput> rouge_inputs,
                            const ReportOptions& options = {});

std::string report_to_json(const EvalReport& report);

/// citances x retrieval setups x granularities.
std::size_t expected_reference_count(std::size_t citances, std::size_t setups,
                                     std::size_t granularities);

/// TSV readers: "query_id unit_id grade" and
/// "rater_id summary_id criterion score". Blank lines and '#' comments are
/// skipped; a header row starting with the first column name is skipped.
std::vector<RelevanceJudgment> read_judgments_tsv(std::istream& in);
std::vector<QualityRating> read_ratings_tsv(std::istream& in);

}  // namespace citesum::evaluation
