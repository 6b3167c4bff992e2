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

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "citesum/citance.hpp"
#include "citesum/cli.hpp"
#include "citesum/embedding.hpp"
#include "citesum/error.hpp"
#include "citesum/evaluation.hpp"
#include "citesum/paper_model.hpp"
#include "citesum/retrieval.hpp"
#include "citesum/service.hpp"
#include "citesum/summarization.hpp"

namespace citesum::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPapersFile = "papers.jsonl";
constexpr const char* kCitancesFile = "citances.jsonl";
constexpr const char* kRetrievalsFile = "retrievals.jsonl";
constexpr const char* kSummariesFile = "summaries.jsonl";
constexpr const char* kIndexDir = "indexes";

struct Options {
  std::string command;
  std::string input;
  std::string output;
  std::string config_path;
  int jobs = 0;
  std::string provider;
  std::vector<std::string> setups;
  std::string granularity;
  std::string keywords;
  std::string template_name;
  std::string judgments;
  std::string ratings;
  std::string rouge;
  std::string host;
  int port = -1;
};

// Thrown for usage problems; mapped to exit code 1 with the usage text.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

// Runs fn(0..n-1) on up to `jobs` threads; results keep index order and the
// first failure (by index) is rethrown.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F fn) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto extra = static_cast<std::size_t>(std::max(1, jobs)) - 1;
  std::vector<std::jthread> threads;
  for (std::size_t t = 0; t < std::min(extra, n); ++t) threads.emplace_back(worker);
  worker();
  threads.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string escape_file_name(std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : id) {
    if (std::isalnum(ch) || ch == '.' || ch == '_' || ch == '-') {
      out += static_cast<char>(ch);
    } else {
      out += '%';
      out += kHex[ch >> 4];
      out += kHex[ch & 15];
    }
  }
  return out;
}

fs::path index_path(const fs::path& dir, std::string_view paper_id, retrieval::Granularity g) {
  return dir / kIndexDir /
         (escape_file_name(paper_id) + "." + std::string(retrieval::to_string(g)) + ".json");
}

PaperDocument parse_named(std::string_view raw, const std::string& where) {
  try {
    return parse_document(raw);
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

// A workspace (papers.jsonl), a directory of *.json papers, a .jsonl file
// or a single paper file. Documents come back ordered by paper_id.
std::vector<PaperDocument> load_documents(const fs::path& input, int jobs) {
  std::vector<std::pair<std::string, std::string>> sources;  // (where, raw)
  auto add_lines = [&](const fs::path& file) {
    const auto lines = read_lines(file);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      sources.emplace_back(file.string() + ":" + std::to_string(i + 1), lines[i]);
    }
  };
  if (fs::is_directory(input)) {
    if (fs::exists(input / kPapersFile)) {
      add_lines(input / kPapersFile);
    } else {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) sources.emplace_back(f.string(), read_file(f));
    }
  } else if (fs::is_regular_file(input)) {
    if (input.extension() == ".jsonl") {
      add_lines(input);
    } else {
      sources.emplace_back(input.string(), read_file(input));
    }
  } else {
    throw Error(ErrorCode::kStorageFailure, "input " + input.string() + " does not exist");
  }
  auto docs = parallel_map<PaperDocument>(sources.size(), jobs, [&](std::size_t i) {
    return parse_named(sources[i].second, sources[i].first);
  });
  std::sort(docs.begin(), docs.end(),
            [](const auto& a, const auto& b) { return a.paper_id < b.paper_id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].paper_id == docs[i - 1].paper_id) {
      throw Error(ErrorCode::kDuplicatePaper, "paper '" + docs[i].paper_id + "' appears twice");
    }
  }
  return docs;
}

Corpus make_corpus(std::vector<PaperDocument> docs) {
  Corpus corpus;
  for (auto& d : docs) corpus.add(std::move(d));
  return corpus;
}

struct Providers {
  std::string kind;
  std::shared_ptr<const embedding::Embedder> embed;
  std::shared_ptr<const summarization::Generator> generator;
  summarization::GenerationRequest generation;
};

Providers make_providers(const Options& opts, const Config& cfg) {
  Providers p;
  p.kind = opts.provider.empty() ? cfg.get_string("provider", "mock") : opts.provider;
  if (p.kind != "mock" && p.kind != "fallback" && p.kind != "remote") {
    throw UsageError("--provider must be remote, mock or fallback");
  }
  embedding::ProviderConfig emb;
  auto& gen = p.generation;
  if (p.kind == "remote") {
    emb.endpoint = cfg.get_string("embedding.endpoint", "fallback");
    emb.model_name = cfg.get_string("embedding.model", emb.model_name);
    gen.endpoint = cfg.get_string("generation.endpoint", "");
    gen.model_name = cfg.get_string("generation.model", "");
    if (gen.endpoint.empty() || gen.endpoint == "mock" || gen.model_name.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--provider remote needs generation.endpoint and generation.model");
    }
  }
  emb.batch_size = static_cast<int>(cfg.get_int("embedding.batch_size", emb.batch_size));
  emb.timeout = std::chrono::milliseconds(cfg.get_int("embedding.timeout_ms", emb.timeout.count()));
  emb.api_key_env = cfg.get_string("embedding.api_key_env", emb.api_key_env);
  emb.max_in_flight = static_cast<int>(cfg.get_int("embedding.max_in_flight", emb.max_in_flight));
  emb.validate();
  gen.temperature = cfg.get_double("generation.temperature", gen.temperature);
  gen.max_output_tokens =
      static_cast<int>(cfg.get_int("generation.max_output_tokens", gen.max_output_tokens));
  gen.timeout = std::chrono::milliseconds(cfg.get_int("generation.timeout_ms", gen.timeout.count()));
  gen.api_key_env = cfg.get_string("generation.api_key_env", gen.api_key_env);
  gen.prompt = "-";  // validated per request
  gen.validate();
  gen.prompt.clear();
  p.embed = std::make_shared<embedding::CachingEmbedder>(embedding::make_embedder(emb));
  p.generator = summarization::make_generator(gen.endpoint);
  return p;
}

retrieval::RetrievalConfig base_retrieval_config(const Config& cfg) {
  retrieval::RetrievalConfig rc;
  rc.k1 = cfg.get_double("retrieval.k1", rc.k1);
  rc.b = cfg.get_double("retrieval.b", rc.b);
  rc.top_k_sentences = static_cast<int>(cfg.get_int("retrieval.top_k_sentences", rc.top_k_sentences));
  rc.top_k_paragraphs =
      static_cast<int>(cfg.get_int("retrieval.top_k_paragraphs", rc.top_k_paragraphs));
  rc.validate();
  return rc;
}

std::vector<retrieval::Granularity> selected_granularities(const Options& opts) {
  if (opts.granularity.empty()) {
    return {retrieval::Granularity::kSentence, retrieval::Granularity::kParagraph};
  }
  try {
    return {retrieval::parse_granularity(opts.granularity)};
  } catch (const Error&) {
    throw UsageError("--granularity must be sentences or paragraphs");
  }
}

std::optional<bool> keywords_flag(const Options& opts) {
  if (opts.keywords.empty()) return std::nullopt;
  if (opts.keywords == "on") return true;
  if (opts.keywords == "off") return false;
  throw UsageError("--keywords must be on or off");
}

// Setups as (retrieval config, granularity). A descriptor without a
// granularity expands over the selected granularities.
std::vector<std::pair<retrieval::RetrievalConfig, retrieval::Granularity>> selected_setups(
    const Options& opts, const Config& cfg) {
  const auto base = base_retrieval_config(cfg);
  const auto grans = selected_granularities(opts);
  const auto keywords = keywords_flag(opts);
  std::vector<std::pair<retrieval::RetrievalConfig, retrieval::Granularity>> out;
  auto add = [&](retrieval::RetrievalConfig rc, retrieval::Granularity g) {
    if (keywords) rc.use_keywords = *keywords;
    const auto dup = std::find_if(out.begin(), out.end(), [&](const auto& s) {
      return s.first == rc && s.second == g;
    });
    if (dup == out.end()) out.emplace_back(rc, g);
  };
  if (opts.setups.empty()) {
    for (auto rc : retrieval::distinguished_setups()) {
      rc.k1 = base.k1;
      rc.b = base.b;
      rc.top_k_sentences = base.top_k_sentences;
      rc.top_k_paragraphs = base.top_k_paragraphs;
      for (auto g : grans) add(rc, g);
    }
    return out;
  }
  for (const auto& d : opts.setups) {
    auto parts = std::count(d.begin(), d.end(), '-') + 1;
    if (d.find("-keywords-") != std::string::npos) --parts;
    const bool has_granularity = parts >= 3;
    std::vector<retrieval::Granularity> gs = grans;
    service::PanelRequest req;
    try {
      req = service::PanelRequest::from_descriptor("", has_granularity ? d : d + "-sentence");
    } catch (const Error& e) {
      throw UsageError(std::string("--setup: ") + e.what());
    }
    if (has_granularity) {
      if (!opts.granularity.empty() && req.granularity != grans.front()) {
        throw UsageError("--setup " + d + " conflicts with --granularity " + opts.granularity);
      }
      gs = {req.granularity};
    }
    auto rc = base;
    rc.context_kind = req.context_kind;
    rc.model = req.model;
    rc.use_keywords = req.use_keywords;
    for (auto g : gs) add(rc, g);
  }
  return out;
}

json config_snapshot(const Options& opts, const Config& cfg) {
  json values = json::object();
  for (const auto& [k, v] : cfg.values()) values[k] = v;
  return {{"file", opts.config_path},
          {"values", std::move(values)},
          {"flags",
           {{"jobs", opts.jobs},
            {"provider", opts.provider},
            {"setup", opts.setups},
            {"granularity", opts.granularity},
            {"keywords", opts.keywords},
            {"template", opts.template_name}}}};
}

struct RunContext {
  Options opts;
  Config cfg;
  fs::path output;
  std::string started_at;
  json outputs = json::object();
  json details = json::object();
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

void write_output(RunContext& run, const std::string& name, const std::string& contents,
                  std::size_t records) {
  write_file_atomic(run.output / name, contents);
  run.outputs[name] = records;
}

void write_manifest(const RunContext& run, int exit_code) {
  if (run.output.empty()) return;
  json manifest{{"command", run.opts.command},
                {"config", config_snapshot(run.opts, run.cfg)},
                {"input", run.opts.input},
                {"output", run.output.string()},
                {"started_at", run.started_at},
                {"finished_at", summarization::system_timestamp()},
                {"exit_code", exit_code},
                {"seeds", {{"fallback_embedding", embedding::kFallbackSeed}}},
                {"versions",
                 {{"tokenizer", text::kTokenizerVersion},
                  {"fallback_embedding", embedding::kFallbackVersion},
                  {"index_format", retrieval::kIndexFormatVersion}}},
                {"outputs", run.outputs},
                {"details", run.details}};
  std::error_code ec;
  fs::create_directories(run.output, ec);
  write_file_atomic(run.output / (run.opts.command + ".manifest.json"), manifest.dump(2) + "\n");
}

fs::path require_input(const Options& opts) {
  if (opts.input.empty()) throw UsageError(opts.command + " needs --input");
  return opts.input;
}

int jobs_of(const RunContext& run) {
  const int jobs = run.opts.jobs > 0 ? run.opts.jobs
                                     : static_cast<int>(run.cfg.get_int("run.jobs", 1));
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  return jobs;
}

void cmd_ingest(RunContext& run) {
  const auto docs = load_documents(require_input(run.opts), jobs_of(run));
  std::vector<std::string> lines;
  std::size_t citance_free = 0;
  for (const auto& d : docs) {
    lines.push_back(serialize_document(d));
    if (d.citance_free()) ++citance_free;
  }
  write_output(run, kPapersFile, join_lines(lines), lines.size());
  run.details["citance_free"] = citance_free;
  *run.out << "ingested " << docs.size() << " papers\n";
}

void cmd_index(RunContext& run) {
  const auto docs = load_documents(require_input(run.opts), jobs_of(run));
  const auto grans = selected_granularities(run.opts);
  std::vector<std::pair<const PaperDocument*, retrieval::Granularity>> tasks;
  for (const auto& d : docs) {
    if (!d.has_full_text()) continue;
    for (auto g : grans) tasks.emplace_back(&d, g);
  }
  fs::create_directories(run.output / kIndexDir);
  const auto written = parallel_map<std::string>(tasks.size(), jobs_of(run), [&](std::size_t i) {
    const auto& [doc, g] = tasks[i];
    const auto path = index_path(run.output, doc->paper_id, g);
    write_file_atomic(path, retrieval::index_to_json(retrieval::build_index(
                                retrieval::units_from_document(*doc, g), g)));
    return path.filename().string();
  });
  for (const auto& name : written) run.outputs[std::string(kIndexDir) + "/" + name] = 1;
  *run.out << "indexed " << tasks.size() << " (paper, granularity) pairs\n";
}

void cmd_extract(RunContext& run) {
  const auto docs = load_documents(require_input(run.opts), jobs_of(run));
  const auto providers = make_providers(run.opts, run.cfg);
  const int n = static_cast<int>(run.cfg.get_int("keywords.count", kDefaultKeywordCount));
  const auto per_doc =
      parallel_map<std::vector<std::string>>(docs.size(), jobs_of(run), [&](std::size_t i) {
        std::vector<std::string> lines;
        for (const auto& c : extract_citances(docs[i])) {
          CitanceRecord record;
          record.citance = c;
          for (auto kind : kAllContextKinds) {
            record.contexts.push_back(build_context(docs[i], c, kind, *providers.embed));
            auto kws = extract_keywords(record.contexts.back(), *providers.embed, n);
            record.keywords.insert(record.keywords.end(), kws.begin(), kws.end());
          }
          lines.push_back(to_json_line(record));
        }
        return lines;
      });
  std::vector<std::string> lines;
  for (const auto& l : per_doc) lines.insert(lines.end(), l.begin(), l.end());
  write_output(run, kCitancesFile, join_lines(lines), lines.size());
  run.details["provider"] = providers.kind;
  run.details["embedder"] = providers.embed->name();
  *run.out << "extracted " << lines.size() << " citances\n";
}

void cmd_retrieve(RunContext& run) {
  const fs::path input = require_input(run.opts);
  const int jobs = jobs_of(run);
  const auto corpus = make_corpus(load_documents(input, jobs));
  const auto setups = selected_setups(run.opts, run.cfg);
  const auto providers = make_providers(run.opts, run.cfg);
  std::vector<CitanceRecord> records;
  for (const auto& line : read_lines(input / kCitancesFile)) {
    records.push_back(parse_citance_record(line));
  }

  struct Task {
    const CitanceRecord* record;
    DocumentPtr target;
    const retrieval::RetrievalConfig* cfg;
    retrieval::Granularity granularity;
  };
  std::vector<Task> tasks;
  json skipped = json::array();
  std::size_t pairs = 0;
  for (const auto& r : records) {
    const auto citing = corpus.find(r.citance.paper_id);
    if (!citing) {
      throw Error(ErrorCode::kNotFound, "citance " + r.citance.citance_id +
                                            " refers to an unknown paper");
    }
    for (const auto& ref_key : r.citance.targets) {
      const auto& bib = citing->bib_entries.at(ref_key);
      const auto target = bib.linked_paper_id ? corpus.find(*bib.linked_paper_id) : nullptr;
      if (!target || !target->has_full_text()) {
        skipped.push_back({{"citance_id", r.citance.citance_id},
                           {"ref_key", ref_key},
                           {"reason", target ? "no full text" : "not in corpus"}});
        continue;
      }
      ++pairs;
      for (const auto& [cfg, g] : setups) tasks.push_back({&r, target, &cfg, g});
    }
  }

  retrieval::IndexCache indexes;
  for (const auto& [id, doc] : corpus.documents()) {
    for (auto g : {retrieval::Granularity::kSentence, retrieval::Granularity::kParagraph}) {
      const auto path = index_path(input, id, g);
      if (fs::exists(path)) {
        indexes.put(id, g, std::make_shared<const retrieval::InvertedIndex>(
                               retrieval::index_from_json(read_file(path))));
      }
    }
  }
  auto lines = parallel_map<std::string>(tasks.size(), jobs, [&](std::size_t i) {
    const auto& t = tasks[i];
    const auto& rec = *t.record;
    const auto ctx = std::find_if(rec.contexts.begin(), rec.contexts.end(),
                                  [&](const auto& c) { return c.kind == t.cfg->context_kind; });
    if (ctx == rec.contexts.end()) {
      throw Error(ErrorCode::kMalformedInput, "citance " + rec.citance.citance_id +
                                                  " has no " +
                                                  std::string(to_string(t.cfg->context_kind)) +
                                                  " context");
    }
    const auto index = indexes.get(*t.target, t.granularity);
    return retrieval::result_to_json(retrieval::retrieve_for_citance(
        rec.citance, *ctx, rec.keywords, *t.target, *t.cfg, t.granularity,
        providers.embed.get(), index.get()));
  });
  write_output(run, kRetrievalsFile, join_lines(lines), lines.size());
  json setup_names = json::array();
  for (const auto& [cfg, g] : setups) {
    setup_names.push_back(cfg.descriptor() + "-" + std::string(retrieval::to_string(g)));
  }
  run.details["setups"] = setup_names;
  run.details["citance_target_pairs"] = pairs;
  run.details["skipped_targets"] = skipped;
  run.details["provider"] = providers.kind;
  *run.out << "retrieved " << lines.size() << " results for " << pairs
           << " citance-target pairs\n";
}

void cmd_summarize(RunContext& run) {
  const fs::path input = require_input(run.opts);
  const auto providers = make_providers(run.opts, run.cfg);
  const auto tmpl = run.opts.template_name.empty()
                        ? run.cfg.get_string("generation.template", "")
                        : run.opts.template_name;
  if (!tmpl.empty()) summarization::find_template(tmpl);
  std::vector<retrieval::RetrievalResult> results;
  for (const auto& line : read_lines(input / kRetrievalsFile)) {
    results.push_back(retrieval::result_from_json(line));
  }
  const auto clock = summarization::clock_for(providers.generation.endpoint);
  std::atomic<std::size_t> over_length{0};
  const auto lines = parallel_map<std::string>(results.size(), jobs_of(run), [&](std::size_t i) {
    const auto s = summarization::summarize_retrieval(results[i], providers.generation,
                                                      *providers.generator, tmpl, clock);
    if (!summarization::validate_summary(s.text).passes()) over_length.fetch_add(1);
    return summarization::summary_to_json(s);
  });
  write_output(run, kSummariesFile, join_lines(lines), lines.size());
  run.details["provider"] = providers.kind;
  run.details["generator"] = providers.generation.model_name;
  run.details["over_length"] = over_length.load();
  *run.out << "summarized " << lines.size() << " retrievals\n";
}

void cmd_eval(RunContext& run) {
  const fs::path input = run.opts.input;
  auto pick = [&](const std::string& flag, const char* default_name) -> fs::path {
    if (!flag.empty()) return flag;
    if (!input.empty() && fs::exists(input / default_name)) return input / default_name;
    return {};
  };
  const auto judgments_path = pick(run.opts.judgments, "judgments.tsv");
  const auto ratings_path = pick(run.opts.ratings, "ratings.tsv");
  const auto rouge_path = pick(run.opts.rouge, "rouge.jsonl");
  if (judgments_path.empty() && ratings_path.empty() && rouge_path.empty()) {
    throw UsageError("eval needs --judgments, --ratings or --rouge (or an --input holding them)");
  }
  std::vector<evaluation::RelevanceJudgment> judgments;
  std::vector<evaluation::QualityRating> ratings;
  std::vector<evaluation::RougeInput> rouge;
  if (!judgments_path.empty()) {
    std::istringstream in(read_file(judgments_path));
    judgments = evaluation::read_judgments_tsv(in);
  }
  if (!ratings_path.empty()) {
    std::istringstream in(read_file(ratings_path));
    ratings = evaluation::read_ratings_tsv(in);
  }
  if (!rouge_path.empty()) {
    for (const auto& line : read_lines(rouge_path)) {
      try {
        const auto j = json::parse(line);
        rouge.push_back({j.at("model").get<std::string>(), j.value("summary_id", ""),
                         j.at("candidate").get<std::string>(),
                         j.at("reference").get<std::string>()});
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedInput, rouge_path.string() + ": " + e.what());
      }
    }
  }
  evaluation::ReportOptions ro;
  ro.ndcg_k = static_cast<int>(run.cfg.get_int("eval.ndcg_k", ro.ndcg_k));
  const auto weighting = run.cfg.get_string("eval.kappa_weighting", "linear");
  if (weighting == "quadratic") {
    ro.weighting = evaluation::KappaWeighting::kQuadratic;
  } else if (weighting != "linear") {
    throw Error(ErrorCode::kInvalidArgument, "eval.kappa_weighting must be linear or quadratic");
  }
  ro.llm_rater_prefix = run.cfg.get_string("eval.llm_rater_prefix", ro.llm_rater_prefix);
  std::stringstream setups(run.cfg.get_string("eval.expected_setups", ""));
  for (std::string s; std::getline(setups, s, ',');) {
    if (!s.empty()) ro.expected_setups.push_back(s);
  }
  const auto report = evaluation::aggregate_report(judgments, ratings, rouge, ro);
  const auto text = evaluation::report_to_json(report) + "\n";
  if (!run.output.empty()) write_output(run, "report.json", text, 1);
  *run.out << text;
}

void cmd_stats(RunContext& run) {
  const auto docs = load_documents(require_input(run.opts), jobs_of(run));
  const auto stats = compute_corpus_stats(docs);
  const auto text = json{{"paper_count", stats.paper_count},
                         {"citance_count", stats.citance_count},
                         {"mean_citances_per_paper", stats.mean_citances_per_paper},
                         {"mean_citance_tokens", stats.mean_citance_tokens},
                         {"median_citance_tokens", stats.median_citance_tokens}}
                        .dump(2) +
                    "\n";
  if (!run.output.empty()) write_output(run, "stats.json", text, 1);
  *run.out << text;
}

void cmd_serve(RunContext& run) {
  const auto providers = make_providers(run.opts, run.cfg);
  auto corpus = make_corpus(load_documents(require_input(run.opts), jobs_of(run)));
  auto store = std::make_shared<service::CorpusStore>(
      std::move(corpus), providers.embed,
      static_cast<int>(run.cfg.get_int("keywords.count", kDefaultKeywordCount)));
  auto cache_path = run.cfg.get_string("service.cache", "");
  if (cache_path.empty() && !run.output.empty()) {
    cache_path = (run.output / "summary_cache.jsonl").string();
  }
  auto cache = cache_path.empty() ? std::make_shared<service::SummaryCache>()
                                  : std::make_shared<service::SummaryCache>(cache_path);
  service::ServiceOptions so;
  so.generation = providers.generation;
  so.retrieval = base_retrieval_config(run.cfg);
  auto svc = std::make_shared<service::PanelService>(
      store, cache, providers.generator, so, summarization::clock_for(so.generation.endpoint));
  const auto host = run.opts.host.empty() ? run.cfg.get_string("service.host", "127.0.0.1")
                                          : run.opts.host;
  const int port = run.opts.port >= 0 ? run.opts.port
                                      : static_cast<int>(run.cfg.get_int("service.port", 8080));
  service::HttpServer server(svc);
  *run.err << "serving " << store->corpus().size() << " papers on http://" << host << ":" << port
           << "\n";
  server.run(host, port);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kProviderTimeout:
    case ErrorCode::kProviderRejected:
    case ErrorCode::kEmbeddingUnavailable:
    case ErrorCode::kStorageFailure:
      return kExitProvider;
    default:
      return kExitValidation;
  }
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "Input path");
  sub->add_option("--output", o.output, "Output directory (defaults to --input)");
  sub->add_option("--config", o.config_path, "TOML-style configuration file");
  sub->add_option("--jobs", o.jobs, "Worker threads");
  sub->add_option("--provider", o.provider, "remote, mock or fallback");
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kStorageFailure, "cannot write " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kStorageFailure, "cannot move " + tmp.string() + " into place");
  }
}

int run_command(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Citance-contextualized summarization pipeline", "citesum"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Parse raw papers into papers.jsonl");
  auto* index = app.add_subcommand("index", "Build per-paper BM25 indexes");
  auto* extract = app.add_subcommand("extract", "Extract citances, contexts and keywords");
  auto* retrieve = app.add_subcommand("retrieve", "Retrieve cited-paper units per setup");
  auto* summarize = app.add_subcommand("summarize", "Generate contextualized summaries");
  auto* eval = app.add_subcommand("eval", "Aggregate nDCG, ROUGE, ratings and agreement");
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  auto* serve = app.add_subcommand("serve", "Serve the JSON API");
  for (auto* sub : {ingest, index, extract, retrieve, summarize, eval, stats, serve}) {
    add_common(sub, o);
  }
  for (auto* sub : {index, retrieve}) {
    sub->add_option("--granularity", o.granularity, "sentences or paragraphs");
  }
  retrieve->add_option("--setup", o.setups,
                       "<citance|neighbors|similar>[-keywords]-<bm25|dense>[-<sentences|paragraphs>]");
  retrieve->add_option("--keywords", o.keywords, "on or off");
  summarize->add_option("--template", o.template_name, "Prompt template name");
  eval->add_option("--judgments", o.judgments, "query_id unit_id grade TSV");
  eval->add_option("--ratings", o.ratings, "rater_id summary_id criterion score TSV");
  eval->add_option("--rouge", o.rouge, "JSON Lines of model, summary_id, candidate, reference");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "citesum: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  RunContext run;
  o.command = app.get_subcommands().front()->get_name();
  run.opts = o;
  run.out = &out;
  run.err = &err;
  run.started_at = summarization::system_timestamp();
  run.output = o.output.empty() ? fs::path(o.input) : fs::path(o.output);
  if (o.command == "stats" || o.command == "eval" || o.command == "serve") {
    run.output = o.output;
  }
  if (!run.output.empty() && fs::is_regular_file(run.output)) {
    err << "citesum: --output must be a directory\n";
    return kExitValidation;
  }

  int code = kExitOk;
  try {
    if (!o.config_path.empty()) run.cfg = Config::load(o.config_path);
    if (o.command == "ingest") {
      cmd_ingest(run);
    } else if (o.command == "index") {
      cmd_index(run);
    } else if (o.command == "extract") {
      cmd_extract(run);
    } else if (o.command == "retrieve") {
      cmd_retrieve(run);
    } else if (o.command == "summarize") {
      cmd_summarize(run);
    } else if (o.command == "eval") {
      cmd_eval(run);
    } else if (o.command == "stats") {
      cmd_stats(run);
    } else {
      cmd_serve(run);
    }
  } catch (const UsageError& e) {
    err << "citesum " << o.command << ": " << e.what() << "\n\n"
        << app.get_subcommands().front()->help();
    code = kExitValidation;
  } catch (const Error& e) {
    err << "citesum " << o.command << ": [" << error_code_name(e.code()) << "] " << e.what()
        << "\n";
    code = exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "citesum " << o.command << ": " << e.what() << "\n";
    code = kExitProvider;
  }
  try {
    write_manifest(run, code);
  } catch (const Error& e) {
    err << "citesum " << o.command << ": cannot write manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitProvider;
  }
  return code;
}

}  // namespace citesum::cli
