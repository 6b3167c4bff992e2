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
#include <random>

#include "citesum/error.hpp"
#include "citesum/paper_model.hpp"
#include "test_support.hpp"

namespace citesum {
namespace {

using testing::make_document_json;
using testing::SpanSpec;

std::vector<std::string> texts_of(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

TEST(Segment, TwoPlainSentences) {
  EXPECT_EQ(texts_of(segment_paragraph("First sentence. Second sentence.")),
            (std::vector<std::string>{"First sentence.", "Second sentence."}));
}

TEST(Segment, SplitsOnlyAfterCitationParenthesis) {
  const std::string text =
      "The planner reuses the graphs proposed in (Moreno et al., 2018). Next point.";
  EXPECT_EQ(texts_of(segment_paragraph(text)),
            (std::vector<std::string>{
                "The planner reuses the graphs proposed in (Moreno et al., 2018).",
                "Next point."}));
}

TEST(Segment, EmptyText) {
  EXPECT_TRUE(segment_paragraph("").empty());
  EXPECT_TRUE(segment_paragraph("   \n ").empty());
}

TEST(Segment, AbbreviationsDoNotSplit) {
  const std::string text =
      "Results improve, e.g. on long inputs. See Fig. 3 and Eq. 2 for details. "
      "As shown by Smith et al. (2020), it works. Cf. Table 2 of J. Smith. Done.";
  EXPECT_EQ(texts_of(segment_paragraph(text)),
            (std::vector<std::string>{"Results improve, e.g. on long inputs.",
                                      "See Fig. 3 and Eq. 2 for details.",
                                      "As shown by Smith et al. (2020), it works.",
                                      "Cf. Table 2 of J. Smith.", "Done."}));
}

TEST(Segment, OtherTerminatorsAndQuotes) {
  EXPECT_EQ(texts_of(segment_paragraph("Is it? Yes! He said \"stop.\" Then left.")),
            (std::vector<std::string>{"Is it?", "Yes!", "He said \"stop.\"", "Then left."}));
}

TEST(Segment, NoSplitBeforeLowercaseOrInsideDecimal) {
  EXPECT_EQ(segment_paragraph("Accuracy was 3.5 points higher. ok then.").size(), 1u);
}

TEST(Segment, OffsetsCountScalars) {
  const std::string text = "Über naïve. Zweiter Satz.";
  const auto s = segment_paragraph(text);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].char_start, 0u);
  EXPECT_EQ(s[0].char_end, 11u);
  EXPECT_EQ(s[1].char_start, 12u);
  EXPECT_EQ(s[1].char_end, 25u);
}

TEST(Segment, ProtectedRangeBlocksBoundary) {
  const std::string text = "See Smith. Jones (2019) agrees.";
  EXPECT_EQ(segment_paragraph(text).size(), 2u);
  const ProtectedRange spans[] = {{4, 16}};
  EXPECT_EQ(segment_paragraph(text, text::default_abbreviations(), spans).size(), 1u);
}

TEST(ParseDocument, MinimalDocument) {
  const auto doc = parse_document(
      make_document_json("p1", {"A claim (Doe, 2020)."}, {{{8, 19, "r1"}}}, {"r1"}));
  EXPECT_EQ(doc.paper_id, "p1");
  ASSERT_EQ(doc.body_paragraphs().size(), 1u);
  const auto& p = *doc.body_paragraphs()[0];
  ASSERT_EQ(p.cite_spans.size(), 1u);
  EXPECT_EQ(p.cite_spans[0].ref_key, "r1");
  EXPECT_TRUE(doc.bib_entries.contains("r1"));
  EXPECT_FALSE(doc.citance_free());
  EXPECT_TRUE(doc.has_full_text());
}

TEST(ParseDocument, CitationSentenceFixture) {
  const std::string text =
      "The planner adopts Gated Memory Graphs (GMGs) proposed in (Moreno et al., 2018).";
  const std::size_t start = text.find("(Moreno");
  const auto doc = parse_document(
      make_document_json("p1", {text}, {{{start, text.size() - 1, "m18"}}}, {"m18"}));
  const auto& p = *doc.body_paragraphs()[0];
  ASSERT_EQ(p.sentences.size(), 1u);
  EXPECT_EQ(p.sentences[0].text, text);
  ASSERT_EQ(p.cite_spans.size(), 1u);
  EXPECT_EQ(p.sentence_of(p.cite_spans[0]), 0u);
}

TEST(ParseDocument, MissingBodyOrId) {
  EXPECT_EQ(code_of([] { parse_document(R"({"paper_id": "x", "title": "t"})"); }),
            ErrorCode::kMissingField);
  EXPECT_EQ(code_of([] { parse_document(R"({"title": "t", "body": []})"); }),
            ErrorCode::kMissingField);
  EXPECT_EQ(code_of([] { parse_document(R"({"paper_id": "", "body": []})"); }),
            ErrorCode::kMissingField);
}

TEST(ParseDocument, MalformedInputs) {
  EXPECT_EQ(code_of([] { parse_document("{not json"); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] { parse_document("[]"); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] { parse_document(R"({"paper_id": 3, "body": []})"); }),
            ErrorCode::kMalformedInput);
  // Span beyond the paragraph.
  EXPECT_EQ(code_of([] {
              parse_document(make_document_json("p", {"Short."}, {{{2, 40, "r"}}}, {"r"}));
            }),
            ErrorCode::kMalformedInput);
  // Empty span.
  EXPECT_EQ(code_of([] {
              parse_document(make_document_json("p", {"Short."}, {{{2, 2, "r"}}}, {"r"}));
            }),
            ErrorCode::kMalformedInput);
}

TEST(ParseDocument, DanglingRef) {
  EXPECT_EQ(code_of([] {
              parse_document(make_document_json("p", {"A (B, 2000)."}, {{{2, 11, "zz"}}}, {"r"}));
            }),
            ErrorCode::kDanglingRef);
}

TEST(ParseDocument, NullRefIdSpansAreDropped) {
  const auto raw = R"({"paper_id": "p", "body": [{"section": "s", "paragraphs": [
      {"text": "A claim [3].", "cite_spans": [{"start": 8, "end": 11, "ref_id": null}]}]}]})";
  const auto doc = parse_document(raw);
  EXPECT_TRUE(doc.body_paragraphs()[0]->cite_spans.empty());
  EXPECT_TRUE(doc.citance_free());
}

TEST(ParseDocument, AbstractOnlyDocumentHasNoFullText) {
  const auto doc =
      parse_document(R"({"paper_id": "p", "abstract": ["Only an abstract."], "body": []})");
  EXPECT_FALSE(doc.has_full_text());
  EXPECT_EQ(doc.abstract_paragraphs.size(), 1u);
  EXPECT_EQ(doc.abstract_paragraphs[0].para_id, "a0000");
}

TEST(ParseDocument, SerializeRoundTrip) {
  for (const auto& doc : testing::mini_corpus()) {
    EXPECT_EQ(parse_document(serialize_document(doc)), doc) << doc.paper_id;
  }
}

TEST(CorpusStats, Arithmetic) {
  auto doc_with = [](const std::string& id, int citances) {
    std::vector<std::string> paras;
    std::vector<std::vector<SpanSpec>> spans;
    for (int i = 0; i < citances; ++i) {
      paras.push_back("Claim number one holds (X, 2000).");
      spans.push_back({{23, 32, "r"}});
    }
    return parse_document(make_document_json(id, paras, spans, {"r"}));
  };
  const std::vector<PaperDocument> docs = {doc_with("a", 3), doc_with("b", 5)};
  const auto stats = compute_corpus_stats(docs);
  EXPECT_EQ(stats.paper_count, 2);
  EXPECT_EQ(stats.citance_count, 8);
  EXPECT_DOUBLE_EQ(stats.mean_citances_per_paper, 4.0);
  // "Claim number one holds (X, 2000)." has 6 tokens.
  EXPECT_DOUBLE_EQ(stats.mean_citance_tokens, 6.0);
  EXPECT_DOUBLE_EQ(stats.median_citance_tokens, 6.0);
}

TEST(CorpusStats, EmptyCorpus) {
  EXPECT_EQ(compute_corpus_stats({}), CorpusStats{});
}

TEST(CorpusStats, MiniCorpusMatchesHandCounts) {
  const auto expected = nlohmann::json::parse(
      testing::read_text(testing::data_dir() / "mini_corpus" / "expected_stats.json"));
  const auto docs = testing::mini_corpus();
  const auto stats = compute_corpus_stats(docs);
  EXPECT_EQ(stats.paper_count, expected["paper_count"].get<long long>());
  EXPECT_EQ(stats.citance_count, expected["citance_count"].get<long long>());
  EXPECT_DOUBLE_EQ(stats.mean_citances_per_paper, expected["mean_citances_per_paper"].get<double>());
  EXPECT_DOUBLE_EQ(stats.mean_citance_tokens, expected["mean_citance_tokens"].get<double>());
  EXPECT_DOUBLE_EQ(stats.median_citance_tokens, expected["median_citance_tokens"].get<double>());
}

TEST(Corpus, RejectsDuplicateIds) {
  Corpus corpus;
  corpus.add(parse_document(make_document_json("x", {"A."}, {}, {})));
  EXPECT_EQ(code_of([&] { corpus.add(parse_document(make_document_json("x", {"B."}, {}, {}))); }),
            ErrorCode::kDuplicatePaper);
  EXPECT_EQ(corpus.find("missing"), nullptr);
  EXPECT_NE(corpus.find("x"), nullptr);
}

// Randomized paragraphs built from sentences with unambiguous boundaries,
// mixing abbreviations, citation groups, non-ASCII words and odd spacing.
struct GeneratedParagraph {
  std::string text;
  std::vector<std::string> sentences;
  std::vector<SpanSpec> spans;
};

GeneratedParagraph generate_paragraph(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {
      "model", "data", "naïve", "retrieval", "über", "東京", "scores", "the", "of",
      "improves", "baseline", "zürich", "τ", "results", "we", "evaluate", "text"};
  static const std::vector<std::string> capitals = {"We", "Our", "This", "Über", "Results",
                                                    "Prior", "Ñandú"};
  static const std::vector<std::string> inserts = {
      "e.g. the", "i.e. our", "see Fig. 2 and", "cf. the", "as in Eq. 4"};
  static const std::vector<std::string> seps = {" ", "  ", "\n", " \t "};
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::uniform_int_distribution<int> coin(0, 3);
  GeneratedParagraph g;
  std::size_t pos = 0;  // scalar offset
  auto append = [&](const std::string& s) {
    g.text += s;
    pos += text::scalar_length(s);
  };
  if (coin(rng) == 0) append(" ");
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) append(pick(seps));
    const std::size_t sentence_start = g.text.size();
    append(pick(capitals));
    const int len = std::uniform_int_distribution<int>(2, 8)(rng);
    for (int w = 0; w < len; ++w) {
      append(" ");
      append(coin(rng) == 0 ? pick(inserts) : pick(words));
    }
    if (coin(rng) < 2) {
      append(" ");
      const std::size_t start = pos;
      append(coin(rng) == 0 ? "(Smith et al., 2019; Doe, 2020)" : "(Lee et al., 2017)");
      g.spans.push_back({start, pos, coin(rng) % 2 ? "b1" : "b2"});
    }
    append(coin(rng) == 0 ? "?" : ".");
    g.sentences.push_back(g.text.substr(sentence_start));
  }
  if (coin(rng) == 0) append("  ");
  return g;
}

TEST(ParagraphProperties, RoundTripOffsetsContainmentDeterminism) {
  std::mt19937_64 rng(20240607);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = generate_paragraph(rng);
    const auto raw = make_document_json("p", {g.text}, {g.spans}, {"b1", "b2"});
    const auto doc = parse_document(raw);
    const auto& p = *doc.body_paragraphs()[0];
    ASSERT_EQ(texts_of(p.sentences), g.sentences) << g.text;

    // Round trip through the recorded separators.
    const auto seps = sentence_separators(p);
    ASSERT_EQ(seps.size(), p.sentences.size() + 1);
    std::string rebuilt = seps[0];
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
      rebuilt += p.sentences[i].text;
      rebuilt += seps[i + 1];
    }
    EXPECT_EQ(rebuilt, p.text);

    // Offset soundness and ordering.
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
      const auto& s = p.sentences[i];
      EXPECT_LT(s.char_start, s.char_end);
      EXPECT_EQ(text::slice_scalars(p.text, s.char_start, s.char_end), s.text);
      EXPECT_EQ(s.sent_index, static_cast<int>(i));
      if (i > 0) {
        EXPECT_LE(p.sentences[i - 1].char_end, s.char_start);
      }
    }

    // Every span in exactly one sentence.
    for (const auto& span : p.cite_spans) {
      int containing = 0;
      for (const auto& s : p.sentences) {
        if (s.char_start <= span.char_start && span.char_end <= s.char_end) ++containing;
      }
      EXPECT_EQ(containing, 1);
    }

    EXPECT_EQ(parse_document(raw), doc);
  }
}

}  // namespace
}  // namespace citesum
