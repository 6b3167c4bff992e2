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

#include "citesum/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <set>
#include <sstream>

#include "citesum/error.hpp"
#include "citesum/text.hpp"

namespace citesum::evaluation {

namespace {

std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

PrfScore prf(std::size_t overlap, std::size_t candidate_total, std::size_t reference_total) {
  PrfScore s;
  if (candidate_total == 0 || reference_total == 0) return s;
  const double o = static_cast<double>(overlap);
  s.precision = o / static_cast<double>(candidate_total);
  s.recall = o / static_cast<double>(reference_total);
  // Equal to 2PR/(P+R), written so that swapping the sides is exact.
  s.f1 = 2.0 * o / static_cast<double>(candidate_total + reference_total);
  return s;
}

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!cols.empty() && !cols.back().empty() && cols.back().back() == '\r') cols.back().pop_back();
  return cols;
}

int parse_int(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw Error(ErrorCode::kMalformedInput, where + ": '" + s + "' is not an integer");
  }
  return v;
}

template <typename Fn>
void for_each_tsv_row(std::istream& in, std::string_view header, std::size_t columns, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    auto cols = split_tsv(line);
    const bool header_row = first_row && cols.front() == header;
    first_row = false;
    if (header_row) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (cols.size() != columns) {
      throw Error(ErrorCode::kMalformedInput,
                  where + ": expected " + std::to_string(columns) + " tab-separated columns");
    }
    fn(cols, where);
  }
}

PrfScore mean_of(const std::vector<PrfScore>& v) {
  PrfScore m;
  if (v.empty()) return m;
  for (const auto& s : v) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(v.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

nlohmann::json prf_json(const PrfScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

double ndcg_at_k(std::span<const int> ranked_grades, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "nDCG cutoff must be >= 1");
  auto dcg = [k](std::span<const int> grades) {
    double sum = 0.0;
    const auto limit = std::min(grades.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
      sum += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
  };
  std::vector<int> ideal(ranked_grades.begin(), ranked_grades.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  if (idcg == 0.0) return 0.0;
  std::vector<int> head(ranked_grades.begin(),
                        ranked_grades.begin() +
                            static_cast<std::ptrdiff_t>(std::min(ranked_grades.size(),
                                                                 static_cast<std::size_t>(k))));
  // An ideal prefix scores exactly 1 regardless of rounding.
  if (std::equal(head.begin(), head.end(), ideal.begin())) return 1.0;
  return std::min(1.0, dcg(ranked_grades) / idcg);
}

PrfScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "ROUGE-N needs n >= 1");
  const auto c = ngram_counts(text::tokenize(candidate), static_cast<std::size_t>(n));
  const auto r = ngram_counts(text::tokenize(reference), static_cast<std::size_t>(n));
  std::size_t overlap = 0, total_c = 0, total_r = 0;
  for (const auto& [gram, count] : c) {
    total_c += count;
    if (auto it = r.find(gram); it != r.end()) overlap += std::min(count, it->second);
  }
  for (const auto& [gram, count] : r) total_r += count;
  return prf(overlap, total_c, total_r);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrfScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = text::tokenize(candidate);
  const auto r = text::tokenize(reference);
  return prf(lcs_length(c, r), c.size(), r.size());
}

double weighted_kappa(std::span<const int> ratings_a, std::span<const int> ratings_b,
                      int lo, int hi, KappaWeighting weighting) {
  if (ratings_a.size() != ratings_b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "kappa needs equally long rating vectors");
  }
  if (ratings_a.empty()) throw Error(ErrorCode::kInvalidArgument, "kappa of no ratings");
  if (lo > hi) throw Error(ErrorCode::kInvalidArgument, "empty rating scale");
  for (std::size_t i = 0; i < ratings_a.size(); ++i) {
    for (int v : {ratings_a[i], ratings_b[i]}) {
      if (v < lo || v > hi) {
        throw Error(ErrorCode::kInvalidArgument,
                    "rating " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
      }
    }
  }
  if (std::equal(ratings_a.begin(), ratings_a.end(), ratings_b.begin())) return 1.0;

  const auto k = static_cast<std::size_t>(hi - lo + 1);
  const double n = static_cast<double>(ratings_a.size());
  std::vector<double> observed(k * k, 0.0), row(k, 0.0), col(k, 0.0);
  for (std::size_t i = 0; i < ratings_a.size(); ++i) {
    const auto a = static_cast<std::size_t>(ratings_a[i] - lo);
    const auto b = static_cast<std::size_t>(ratings_b[i] - lo);
    observed[a * k + b] += 1.0 / n;
    row[a] += 1.0 / n;
    col[b] += 1.0 / n;
  }
  const double span = k > 1 ? static_cast<double>(k - 1) : 1.0;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) / span;
      const double w = weighting == KappaWeighting::kLinear ? d : d * d;
      num += w * observed[i * k + j];
      den += w * row[i] * col[j];
    }
  }
  if (num == 0.0) return 1.0;
  if (den == 0.0) {
    throw Error(ErrorCode::kDegenerateMarginals,
                "expected disagreement is zero but observed disagreement is not");
  }
  return 1.0 - num / den;
}

std::size_t expected_reference_count(std::size_t citances, std::size_t setups,
                                     std::size_t granularities) {
  return citances * setups * granularities;
}

EvalReport aggregate_report(std::span<const RelevanceJudgment> judgments,
                            std::span<const QualityRating> ratings,
                            std::span<const RougeInput> rouge_inputs,
                            const ReportOptions& options) {
  EvalReport report;
  report.judgment_rows = judgments.size();
  report.rating_rows = ratings.size();
  report.rouge_rows = rouge_inputs.size();

  // Retrieval: setup -> query -> grades in rank order.
  std::map<std::string, std::map<std::string, std::vector<int>>> by_setup;
  for (const auto& j : judgments) {
    const auto slash = j.query_id.find('/');
    const std::string setup = slash == std::string::npos ? "all" : j.query_id.substr(0, slash);
    by_setup[setup][j.query_id].push_back(j.grade);
  }
  for (const auto& setup : options.expected_setups) {
    if (!by_setup.contains(setup)) report.empty_groups.push_back("retrieval:" + setup);
  }
  for (const auto& [setup, queries] : by_setup) {
    SetupNdcg s;
    s.setup = setup;
    s.queries = queries.size();
    double total = 0.0;
    for (const auto& [query, grades] : queries) {
      s.judgments += grades.size();
      total += ndcg_at_k(grades, options.ndcg_k);
    }
    s.mean_ndcg = total / static_cast<double>(s.queries);
    report.retrieval.push_back(std::move(s));
  }

  // ROUGE per model.
  std::map<std::string, std::array<std::vector<PrfScore>, 3>> by_model;
  for (const auto& r : rouge_inputs) {
    auto& scores = by_model[r.model];
    scores[0].push_back(rouge_n(r.candidate, r.reference, 1));
    scores[1].push_back(rouge_n(r.candidate, r.reference, 2));
    scores[2].push_back(rouge_l(r.candidate, r.reference));
  }
  for (const auto& [model, scores] : by_model) {
    report.rouge.push_back(
        {model, scores[0].size(), mean_of(scores[0]), mean_of(scores[1]), mean_of(scores[2])});
  }

  // Quality ratings.
  const auto is_llm = [&](const QualityRating& r) {
    return !options.llm_rater_prefix.empty() && r.rater_id.starts_with(options.llm_rater_prefix);
  };
  std::set<std::string> human_raters;
  for (const auto& r : ratings) {
    if (!is_llm(r)) human_raters.insert(r.rater_id);
  }
  for (auto criterion : {Criterion::kCoverage, Criterion::kFocus, Criterion::kRelevance}) {
    for (bool llm : {false, true}) {
      CriterionMean m{criterion, 0, 0.0};
      for (const auto& r : ratings) {
        if (r.criterion != criterion || is_llm(r) != llm) continue;
        ++m.count;
        m.mean += r.score;
      }
      if (m.count == 0) continue;
      m.mean /= static_cast<double>(m.count);
      (llm ? report.geval : report.human).push_back(m);
    }

    bool any = std::any_of(ratings.begin(), ratings.end(), [&](const QualityRating& r) {
      return r.criterion == criterion && !is_llm(r);
    });
    if (!any) continue;
    KappaResult k;
    k.criterion = criterion;
    if (human_raters.size() >= 2) {
      k.rater_a = *human_raters.begin();
      k.rater_b = *std::next(human_raters.begin());
      std::map<std::string, int> first, second;
      for (const auto& r : ratings) {
        if (r.criterion != criterion) continue;
        if (r.rater_id == k.rater_a) first[r.summary_id] = r.score;
        if (r.rater_id == k.rater_b) second[r.summary_id] = r.score;
      }
      std::vector<int> a, b;
      for (const auto& [summary, score] : first) {
        if (auto it = second.find(summary); it != second.end()) {
          a.push_back(score);
          b.push_back(it->second);
        }
      }
      k.pairs = a.size();
      if (!a.empty()) {
        try {
          k.kappa = weighted_kappa(a, b, 1, 5, options.weighting);
        } catch (const Error&) {
          k.kappa.reset();
        }
      }
    }
    if (!k.kappa) report.empty_groups.push_back("agreement:" + std::string(to_string(criterion)));
    report.agreement.push_back(std::move(k));
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::json;
  json retrieval = json::array();
  for (const auto& s : report.retrieval) {
    retrieval.push_back({{"setup", s.setup},
                         {"queries", s.queries},
                         {"judgments", s.judgments},
                         {"mean_ndcg_at_5", s.mean_ndcg}});
  }
  json rouge = json::array();
  for (const auto& m : report.rouge) {
    rouge.push_back({{"model", m.model},
                     {"count", m.count},
                     {"rouge1", prf_json(m.rouge1)},
                     {"rouge2", prf_json(m.rouge2)},
                     {"rougeL", prf_json(m.rougeL)}});
  }
  auto means = [](const std::vector<CriterionMean>& v) {
    json out = json::array();
    for (const auto& m : v) {
      out.push_back({{"criterion", to_string(m.criterion)}, {"count", m.count}, {"mean", m.mean}});
    }
    return out;
  };
  json agreement = json::array();
  for (const auto& k : report.agreement) {
    agreement.push_back({{"criterion", to_string(k.criterion)},
                         {"rater_a", k.rater_a},
                         {"rater_b", k.rater_b},
                         {"pairs", k.pairs},
                         {"weighted_kappa", k.kappa ? json(*k.kappa) : json(nullptr)}});
  }
  return json{{"retrieval", std::move(retrieval)},
              {"summarization", {{"rouge", std::move(rouge)}}},
              {"quality", {{"human", means(report.human)}, {"geval", means(report.geval)}}},
              {"agreement", std::move(agreement)},
              {"rows",
               {{"judgments", report.judgment_rows},
                {"ratings", report.rating_rows},
                {"rouge", report.rouge_rows}}},
              {"empty_groups", report.empty_groups}}
      .dump(2);
}

std::vector<RelevanceJudgment> read_judgments_tsv(std::istream& in) {
  std::vector<RelevanceJudgment> out;
  for_each_tsv_row(in, "query_id", 3, [&](const std::vector<std::string>& c, const std::string& where) {
    const int grade = parse_int(c[2], where);
    if (grade < kGradeNonRelevant || grade > kGradeRelevant) {
      throw Error(ErrorCode::kMalformedInput, where + ": grade must be 0, 1 or 2");
    }
    out.push_back({c[0], c[1], grade});
  });
  return out;
}

std::vector<QualityRating> read_ratings_tsv(std::istream& in) {
  std::vector<QualityRating> out;
  for_each_tsv_row(in, "rater_id", 4, [&](const std::vector<std::string>& c, const std::string& where) {
    const int score = parse_int(c[3], where);
    if (score < 1 || score > 5) {
      throw Error(ErrorCode::kMalformedInput, where + ": score must be in 1..5");
    }
    out.push_back({c[0], c[1], parse_criterion(c[2]), score});
  });
  return out;
}

}  // namespace citesum::evaluation
