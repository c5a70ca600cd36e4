#pragma once

// File-level pipeline stages and the orchestrated run. Every stage reads and
// writes plain JSON/CSV so each one can be invoked on its own with the same
// results as inside `run`.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reviewlens/corpus_model.hpp"
#include "reviewlens/csv.hpp"
#include "reviewlens/grounding.hpp"
#include "reviewlens/hash.hpp"
#include "reviewlens/http_transport.hpp"
#include "reviewlens/ingest.hpp"
#include "reviewlens/kgraph.hpp"
#include "reviewlens/report.hpp"
#include "reviewlens/similarity.hpp"
#include "reviewlens/stratify.hpp"

namespace reviewlens::pipeline {

namespace fs = std::filesystem;

inline constexpr std::string_view kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

// Writes via a temporary sibling and rename so readers never see a partial file.
inline void write_file(const fs::path& p, std::string_view bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, p.string(), "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::Io, p.string(), "write failed");
  }
  fs::rename(tmp, p);
}

using ingest::read_file;

inline json read_json_file(const fs::path& p) { return parse_json_text(read_file(p)); }

inline ValidatedCorpus read_corpus(const fs::path& p) { return parse_corpus(read_file(p)); }

inline std::vector<EmbeddingRecord> read_embeddings(const fs::path& p) {
  auto recs = records_from_json<EmbeddingRecord>(read_json_file(p), embedding_from_json);
  validate_embeddings(recs);
  return recs;
}

inline std::vector<ExtractionRecord> read_extractions(const fs::path& p) {
  return records_from_json<ExtractionRecord>(read_json_file(p), extraction_from_json);
}

inline std::vector<QualityTier> read_tiers(const fs::path& p) {
  json j = read_json_file(p);
  if (!j.is_object() || !j.contains("tiers")) throw Error(Errc::SchemaError, "/tiers", p.string());
  return records_from_json<QualityTier>(j.at("tiers"), tier_from_json);
}

inline std::vector<kgraph::KnowledgeGraph> read_graphs(const fs::path& p) {
  return records_from_json<kgraph::KnowledgeGraph>(read_json_file(p), kgraph::graph_from_json);
}

inline std::vector<grounding::GroundingResult> read_grounding(const fs::path& p) {
  return records_from_json<grounding::GroundingResult>(read_json_file(p), grounding::grounding_from_json);
}

// Paths a stage consumed and produced, for the run manifest.
struct StageIO {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

struct IngestOptions {
  std::string venue;
  int year = 0;
  std::optional<fs::path> from_dir;  // local mode when set
  std::string base_url = "https://api2.openreview.net";
  int page_size = 1000;
  int retry_limit = 3;
  std::optional<fs::path> papers_dir;  // markdown for remote mode
  std::optional<std::string> auth_token;
  ingest::SegmenterConfig segmenter = ingest::SegmenterConfig::defaults();

  friend bool operator==(const IngestOptions&, const IngestOptions&) = default;
};

inline StageIO stage_ingest(const IngestOptions& opt, const fs::path& out_corpus) {
  StageIO io;
  ValidatedCorpus corpus;
  if (opt.from_dir) {
    corpus = ingest::load_local(*opt.from_dir, opt.venue, opt.year, opt.segmenter);
    for (const char* sub : {"papers", "reviews"}) {
      if (!fs::is_directory(*opt.from_dir / sub)) continue;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(*opt.from_dir / sub))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      io.inputs.insert(io.inputs.end(), files.begin(), files.end());
    }
  } else {
    ingest::FetchConfig fc{opt.base_url, opt.venue, opt.year, opt.page_size, opt.auth_token, opt.retry_limit};
    auto notes = ingest::fetch_submissions(fc, ingest::http_transport(fc));
    corpus = ingest::corpus_from_notes(notes, opt.venue, opt.year, opt.papers_dir, opt.segmenter);
  }
  write_file(out_corpus, serialize_corpus(corpus));
  io.outputs.push_back(out_corpus);
  return io;
}

inline StageIO stage_stratify(const fs::path& corpus_path, const stratify::KdeConfig& kde, double tail_fraction,
                              const fs::path& out_tiers, const fs::path& out_density) {
  ValidatedCorpus corpus = read_corpus(corpus_path);
  auto result = stratify::stratify_corpus(corpus, kde, tail_fraction);

  json papers = json::array();
  for (const auto& p : result.scores)
    papers.push_back({{"paper_id", p.paper_id}, {"aggregated_score", p.aggregated_score}, {"score_std", p.score_std}});
  json doc = {{"threshold", result.threshold},
              {"bandwidth", result.curve.bandwidth},
              {"tail_fraction", tail_fraction},
              {"papers", std::move(papers)},
              {"tiers", records_to_json<QualityTier>(result.tiers)}};
  write_file(out_tiers, canonical_dump(doc));

  std::vector<csv::Row> rows;
  for (std::size_t i = 0; i < result.curve.xs.size(); ++i)
    rows.push_back({csv::format_double(result.curve.xs[i]), csv::format_double(result.curve.ys[i])});
  write_file(out_density, csv::format_table({"x", "y"}, rows));
  return {{corpus_path}, {out_tiers, out_density}};
}

inline StageIO stage_similarity(const fs::path& corpus_path, const fs::path& embeddings_path,
                                const fs::path& tiers_path, const fs::path& out_alignment,
                                const fs::path& out_heatmap) {
  ValidatedCorpus corpus = read_corpus(corpus_path);
  auto embeddings = read_embeddings(embeddings_path);
  auto tiers = read_tiers(tiers_path);
  auto matrices = similarity::corpus_alignment(corpus, tiers, embeddings);
  auto aggregates = similarity::aggregate_alignment(matrices, corpus, tiers);

  json mats = json::array(), aggs = json::array();
  for (const auto& m : matrices) mats.push_back(similarity::to_json(m));
  for (const auto& g : aggregates) aggs.push_back(similarity::to_json(g));
  write_file(out_alignment, canonical_dump({{"matrices", std::move(mats)}, {"aggregates", std::move(aggs)}}));

  std::vector<csv::Row> rows;
  for (const auto& g : aggregates)
    rows.push_back({g.source, std::string(to_string(g.tier)), std::string(to_string(g.aspect)),
                    std::string(to_string(g.section)), csv::format_double(g.mean), std::to_string(g.count)});
  write_file(out_heatmap, csv::format_table({"source", "tier", "aspect", "section", "mean", "count"}, rows));
  return {{corpus_path, embeddings_path, tiers_path}, {out_alignment, out_heatmap}};
}

struct KgOptions {
  bool merge_mentions = true;
  double log_base = std::numbers::e;
};

// When a corpus is supplied, mention spans are also checked against the
// review's aspect text.
inline StageIO stage_kg(const fs::path& extractions_path, const std::optional<fs::path>& corpus_path,
                        const KgOptions& opt, const fs::path& out_graphs, const fs::path& out_metrics) {
  auto records = read_extractions(extractions_path);
  std::optional<ValidatedCorpus> corpus;
  if (corpus_path) corpus = read_corpus(*corpus_path);
  std::sort(records.begin(), records.end(), [](const ExtractionRecord& a, const ExtractionRecord& b) {
    return std::tie(a.review_id, a.aspect) < std::tie(b.review_id, b.aspect);
  });

  json graphs = json::array();
  std::vector<report::MetricRow> rows;
  for (const ExtractionRecord& rec : records) {
    std::optional<std::string_view> text;
    if (corpus) {
      const ReviewRecord* r = corpus->find_review(rec.review_id);
      if (!r) throw Error(Errc::DanglingReference, rec.review_id, "extraction for unknown review");
      text = r->aspect(rec.aspect);
    }
    validate_extraction(rec, text);
    auto g = kgraph::build_graph(rec, opt.merge_mentions);
    rows.push_back({rec.review_id, rec.aspect, kgraph::graph_metrics(g, opt.log_base)});
    graphs.push_back(kgraph::to_json(g));
  }
  write_file(out_graphs, canonical_dump(graphs));
  write_file(out_metrics, report::metrics_csv(rows));
  StageIO io{{extractions_path}, {out_graphs, out_metrics}};
  if (corpus_path) io.inputs.push_back(*corpus_path);
  return io;
}

inline StageIO stage_ground(const fs::path& graphs_path, const fs::path& corpus_path, bool fuzzy,
                            const fs::path& out_grounding, const fs::path& out_csv) {
  auto graphs = read_graphs(graphs_path);
  ValidatedCorpus corpus = read_corpus(corpus_path);
  std::map<std::string, std::unique_ptr<grounding::NormalizedPaper>> prepared;

  json results = json::array();
  std::vector<csv::Row> rows;
  for (const auto& g : graphs) {
    const ReviewRecord* r = corpus.find_review(g.review_id);
    if (!r) throw Error(Errc::DanglingReference, g.review_id, "graph for unknown review");
    auto& np = prepared[r->paper_id];
    if (!np) np = std::make_unique<grounding::NormalizedPaper>(corpus.find_paper(r->paper_id)->full_markdown);
    auto res = grounding::classify_entities(g, *np, fuzzy);
    results.push_back(grounding::to_json(res));
    rows.push_back({res.review_id, std::string(to_string(res.aspect)), std::to_string(res.in_context.size()),
                    std::to_string(res.out_of_context.size()), res.ratio ? csv::format_double(*res.ratio) : ""});
  }
  write_file(out_grounding, canonical_dump(results));
  write_file(out_csv, csv::format_table({"review_id", "aspect", "in_count", "out_count", "ratio"}, rows));
  return {{graphs_path, corpus_path}, {out_grounding, out_csv}};
}

struct ReportInputs {
  fs::path metrics;
  fs::path grounding;
  std::optional<fs::path> alignment;
  fs::path tiers;
  fs::path corpus;
};

inline StageIO stage_report(const ReportInputs& in, const fs::path& out_dir) {
  ValidatedCorpus corpus = read_corpus(in.corpus);
  auto tiers = read_tiers(in.tiers);
  std::unordered_map<std::string, Tier> tier_of;
  for (const auto& t : tiers) tier_of.emplace(t.paper_id, t.tier);
  auto tiered = [&](const std::string& review_id) {
    const ReviewRecord* r = corpus.find_review(review_id);
    if (!r) throw Error(Errc::DanglingReference, review_id, "row for unknown review");
    return tier_of.contains(r->paper_id);
  };

  std::vector<report::MetricRow> metrics;
  for (auto& m : report::parse_metrics_csv(read_file(in.metrics)))
    if (tiered(m.review_id)) metrics.push_back(std::move(m));
  std::vector<grounding::GroundingResult> ground;
  for (auto& g : read_grounding(in.grounding))
    if (tiered(g.review_id)) ground.push_back(std::move(g));

  auto aggregates = report::aggregate_metrics(metrics, ground, corpus, tiers);
  auto rows = report::render_comparison(aggregates);
  auto ratings = report::rating_distribution(corpus, tiers);

  json doc = {{"rows", report::comparison_json(rows)}};
  StageIO io{{in.metrics, in.grounding, in.tiers, in.corpus}, {}};
  if (in.alignment) {
    json a = read_json_file(*in.alignment);
    if (!a.is_object() || !a.contains("aggregates")) throw Error(Errc::SchemaError, "/aggregates", in.alignment->string());
    json aggs = json::array();
    for (const auto& g : records_from_json<similarity::AlignmentAggregate>(a.at("aggregates"),
                                                                          similarity::aggregate_from_json))
      aggs.push_back(similarity::to_json(g));
    doc["alignment"] = std::move(aggs);
    io.inputs.push_back(*in.alignment);
  }

  const fs::path comparison_csv = out_dir / "comparison.csv", comparison_json = out_dir / "comparison.json",
                 ratings_csv = out_dir / "ratings.csv", nodes_csv = out_dir / "nodes_by_quality.csv";
  write_file(comparison_csv, report::comparison_csv(rows));
  write_file(comparison_json, canonical_dump(doc));
  write_file(ratings_csv, report::ratings_csv(ratings));
  write_file(nodes_csv, report::nodes_by_quality_csv(rows));
  io.outputs = {comparison_csv, comparison_json, ratings_csv, nodes_csv};
  return io;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class Stage { Ingest, Stratify, Similarity, Kg, Ground, Report };
inline constexpr std::array<Stage, 6> kAllStages = {Stage::Ingest, Stage::Stratify, Stage::Similarity,
                                                    Stage::Kg,     Stage::Ground,   Stage::Report};

constexpr std::string_view to_string(Stage s) {
  constexpr std::array<std::string_view, 6> names = {"ingest", "stratify", "similarity", "kg", "ground", "report"};
  return names[static_cast<std::size_t>(s)];
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : kAllStages)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

struct RunConfig {
  // Directory relative paths resolve against (the config file's directory).
  fs::path base_dir = ".";

  std::vector<Stage> stages;  // dependency order
  std::optional<std::string> corpus;
  std::optional<IngestOptions> ingest;
  std::string out_dir = "out";
  std::optional<std::string> embeddings;
  std::optional<std::string> extractions;
  stratify::KdeConfig kde;
  double tail_fraction = 0.025;
  ingest::SegmenterConfig segmenter = ingest::SegmenterConfig::defaults();
  bool merge_mentions = true;
  bool fuzzy_grounding = false;
  long long seed = 0;

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  fs::path out() const { return resolve(out_dir); }
  fs::path corpus_path() const { return ingest ? out() / "corpus.json" : resolve(*corpus); }
};

namespace detail {

// Rejects repeated keys anywhere in the document.
inline json parse_config_json(std::string_view bytes) {
  std::vector<std::pair<std::string, std::set<std::string>>> stack;
  std::string duplicate;
  auto cb = [&](int, json::parse_event_t ev, json& parsed) {
    switch (ev) {
      case json::parse_event_t::object_start: stack.push_back({}); break;
      case json::parse_event_t::object_end:
        if (!stack.empty()) stack.pop_back();
        break;
      case json::parse_event_t::key:
        if (!stack.empty() && !stack.back().second.insert(parsed.get<std::string>()).second && duplicate.empty())
          duplicate = parsed.get<std::string>();
        break;
      default: break;
    }
    return true;
  };
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end(), cb);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, "/", e.what());
  }
  if (!duplicate.empty()) throw Error(Errc::ConfigError, duplicate, "duplicate key");
  return j;
}

// Config-flavoured reader: key paths use dots, failures are ConfigError.
class ConfigObject {
 public:
  ConfigObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(Errc::ConfigError, path_.empty() ? "." : path_, "expected object");
  }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json* get(const std::string& k) {
    auto it = j_.find(k);
    if (it == j_.end()) return nullptr;
    seen_.insert(k);
    return &*it;
  }
  std::optional<std::string> str(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw Error(Errc::ConfigError, key(k), "expected string");
    return v->get<std::string>();
  }
  std::optional<long long> integer(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw Error(Errc::ConfigError, key(k), "expected integer");
    return v->get<long long>();
  }
  std::optional<double> number(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw Error(Errc::ConfigError, key(k), "expected number");
    return v->get<double>();
  }
  std::optional<bool> boolean(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw Error(Errc::ConfigError, key(k), "expected boolean");
    return v->get<bool>();
  }
  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.contains(k)) throw Error(Errc::ConfigError, key(k), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline RunConfig validate_config(std::string_view bytes, const fs::path& base_dir = ".") {
  json j = detail::parse_config_json(bytes);
  detail::ConfigObject o(j, "");
  RunConfig c;
  c.base_dir = base_dir;

  c.corpus = o.str("corpus");
  if (auto v = o.str("out_dir")) c.out_dir = *v;
  c.embeddings = o.str("embeddings");
  c.extractions = o.str("extractions");
  if (auto v = o.number("tail_fraction")) c.tail_fraction = *v;
  if (!(c.tail_fraction > 0 && c.tail_fraction < 0.5))
    throw Error(Errc::ConfigError, "tail_fraction", "must lie in (0, 0.5)");
  if (auto v = o.boolean("merge_mentions")) c.merge_mentions = *v;
  if (auto v = o.boolean("fuzzy_grounding")) c.fuzzy_grounding = *v;
  if (auto v = o.integer("seed")) c.seed = *v;

  if (const json* k = o.get("kde")) {
    detail::ConfigObject ko(*k, "kde");
    if (const json* bw = ko.get("bandwidth")) {
      if (bw->is_string() && bw->get<std::string>() == "silverman")
        c.kde.bandwidth = stratify::SilvermanBandwidth{};
      else if (bw->is_number())
        c.kde.bandwidth = stratify::FixedBandwidth{bw->get<double>()};
      else
        throw Error(Errc::ConfigError, "kde.bandwidth", "expected \"silverman\" or a number");
    }
    if (auto v = ko.integer("grid_points")) c.kde.grid_points = static_cast<int>(*v);
    if (auto v = ko.number("grid_padding")) c.kde.grid_padding = *v;
    ko.finish();
  }
  c.kde.validate();

  if (const json* s = o.get("segmenter")) {
    detail::ConfigObject so(*s, "segmenter");
    if (auto v = so.str("unmatched_policy")) {
      if (*v == "attach_to_previous")
        c.segmenter.unmatched_policy = ingest::UnmatchedPolicy::AttachToPrevious;
      else if (*v == "reject")
        c.segmenter.unmatched_policy = ingest::UnmatchedPolicy::Reject;
      else
        throw Error(Errc::ConfigError, "segmenter.unmatched_policy", "expected attach_to_previous or reject");
    }
    if (const json* al = so.get("heading_aliases")) {
      detail::ConfigObject ao(*al, "segmenter.heading_aliases");
      for (SectionName sec : kAllSections) {
        const std::string name(to_string(sec));
        if (const json* list = ao.get(name)) {
          if (!list->is_array()) throw Error(Errc::ConfigError, ao.key(name), "expected array of strings");
          std::vector<std::string> aliases;
          for (const json& a : *list) {
            if (!a.is_string()) throw Error(Errc::ConfigError, ao.key(name), "expected array of strings");
            aliases.push_back(a.get<std::string>());
          }
          c.segmenter.heading_aliases[index_of(sec)] = std::move(aliases);
        }
      }
      ao.finish();
    }
    so.finish();
  }
  c.segmenter.validate();

  if (const json* in = o.get("ingest")) {
    detail::ConfigObject io(*in, "ingest");
    IngestOptions opt;
    auto venue = io.str("venue");
    auto year = io.integer("year");
    if (!venue) throw Error(Errc::ConfigError, "ingest.venue", "required");
    if (!year) throw Error(Errc::ConfigError, "ingest.year", "required");
    opt.venue = *venue;
    opt.year = static_cast<int>(*year);
    if (auto v = io.str("from_dir")) opt.from_dir = *v;
    if (auto v = io.str("base_url")) opt.base_url = *v;
    if (auto v = io.integer("page_size")) opt.page_size = static_cast<int>(*v);
    if (auto v = io.integer("retry_limit")) opt.retry_limit = static_cast<int>(*v);
    if (auto v = io.str("papers_dir")) opt.papers_dir = *v;
    io.finish();
    if (opt.page_size < 1) throw Error(Errc::ConfigError, "ingest.page_size", "must be >= 1");
    if (opt.retry_limit < 0 || opt.retry_limit > 10) throw Error(Errc::ConfigError, "ingest.retry_limit", "must be in 0..10");
    opt.segmenter = c.segmenter;
    c.ingest = std::move(opt);
  }
  if (c.ingest && c.corpus) throw Error(Errc::ConfigError, "corpus", "ingest writes the corpus; drop one of the two");
  if (!c.ingest && !c.corpus) throw Error(Errc::ConfigError, "corpus", "required when there is no ingest section");

  if (const json* st = o.get("stages")) {
    if (!st->is_array()) throw Error(Errc::ConfigError, "stages", "expected array");
    std::set<Stage> chosen;
    for (const json& s : *st) {
      auto stage = s.is_string() ? parse_stage(s.get<std::string>()) : std::nullopt;
      if (!stage) throw Error(Errc::ConfigError, "stages", "unknown stage " + s.dump());
      if (!chosen.insert(*stage).second) throw Error(Errc::ConfigError, "stages", "duplicate stage " + s.dump());
    }
    c.stages.assign(chosen.begin(), chosen.end());
  } else {
    for (Stage s : kAllStages)
      if (s != Stage::Ingest || c.ingest) c.stages.push_back(s);
  }
  if (std::find(c.stages.begin(), c.stages.end(), Stage::Ingest) != c.stages.end() && !c.ingest)
    throw Error(Errc::ConfigError, "ingest", "stage ingest needs an ingest section");
  o.finish();
  return c;
}

// Canonical form with every default spelled out.
inline std::string serialize_config(const RunConfig& c) {
  json j;
  if (c.corpus) j["corpus"] = *c.corpus;
  j["out_dir"] = c.out_dir;
  if (c.embeddings) j["embeddings"] = *c.embeddings;
  if (c.extractions) j["extractions"] = *c.extractions;
  json stages = json::array();
  for (Stage s : c.stages) stages.push_back(to_string(s));
  j["stages"] = std::move(stages);
  j["kde"] = {{"bandwidth", std::holds_alternative<stratify::FixedBandwidth>(c.kde.bandwidth)
                                ? json(std::get<stratify::FixedBandwidth>(c.kde.bandwidth).h)
                                : json("silverman")},
              {"grid_points", c.kde.grid_points},
              {"grid_padding", c.kde.grid_padding}};
  j["tail_fraction"] = c.tail_fraction;
  json aliases = json::object();
  for (SectionName s : kAllSections) aliases[std::string(to_string(s))] = c.segmenter.heading_aliases[index_of(s)];
  j["segmenter"] = {{"unmatched_policy", ingest::to_string(c.segmenter.unmatched_policy)},
                    {"heading_aliases", std::move(aliases)}};
  j["merge_mentions"] = c.merge_mentions;
  j["fuzzy_grounding"] = c.fuzzy_grounding;
  j["seed"] = c.seed;
  if (c.ingest) {
    const IngestOptions& in = *c.ingest;
    json ij = {{"venue", in.venue},
               {"year", in.year},
               {"base_url", in.base_url},
               {"page_size", in.page_size},
               {"retry_limit", in.retry_limit}};
    if (in.from_dir) ij["from_dir"] = in.from_dir->generic_string();
    if (in.papers_dir) ij["papers_dir"] = in.papers_dir->generic_string();
    j["ingest"] = std::move(ij);
  }
  return canonical_dump(j);
}

inline RunConfig load_config(const fs::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, path.string(), e.what());
  }
  return validate_config(bytes, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct FileDigest {
  std::string path;  // relative to the config directory when possible
  std::string sha256;
};

enum class StageStatus { Succeeded, Failed, Skipped };

constexpr std::string_view to_string(StageStatus s) {
  return s == StageStatus::Succeeded ? "succeeded" : s == StageStatus::Failed ? "failed" : "skipped";
}

struct StageRecord {
  Stage stage;
  StageStatus status = StageStatus::Skipped;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  double wall_time_ms = 0;
  std::string error;
};

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_sha256;
  long long seed = 0;
  std::vector<StageRecord> stages;
  std::optional<Stage> failed_stage;
  double wall_time_ms = 0;

  bool succeeded() const { return !failed_stage; }
};

inline json to_json(const RunManifest& m) {
  auto digests = [](const std::vector<FileDigest>& files) {
    json arr = json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  json stages = json::array();
  for (const StageRecord& s : m.stages) {
    json e = {{"name", to_string(s.stage)},
              {"status", to_string(s.status)},
              {"inputs", digests(s.inputs)},
              {"outputs", digests(s.outputs)},
              {"wall_time_ms", s.wall_time_ms}};
    if (!s.error.empty()) e["error"] = s.error;
    stages.push_back(std::move(e));
  }
  return {{"tool", "reviewlens"},
          {"tool_version", m.tool_version},
          {"config_sha256", m.config_sha256},
          {"seed", m.seed},
          {"status", m.succeeded() ? "succeeded" : "failed"},
          {"failed_stage", m.failed_stage ? json(to_string(*m.failed_stage)) : json(nullptr)},
          {"wall_time_ms", m.wall_time_ms},
          {"stages", std::move(stages)}};
}

namespace detail {

inline std::string display_path(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  fs::path rel = fs::relative(p, base, ec);
  return (ec || rel.empty() ? p : rel).generic_string();
}

inline std::vector<FileDigest> digest_all(const std::vector<fs::path>& files, const fs::path& base) {
  std::vector<FileDigest> out;
  for (const fs::path& f : files) out.push_back({display_path(f, base), sha256_file(f)});
  return out;
}

inline void require_inputs(Stage s, std::initializer_list<fs::path> paths) {
  for (const fs::path& p : paths)
    if (!fs::exists(p)) throw Error(Errc::StageFailure, std::string(to_string(s)), "missing input " + p.string());
}

}  // namespace detail

// Runs the configured stages in dependency order. The manifest is written to
// <out_dir>/manifest.json whether or not a stage fails; a failed stage marks
// every later stage skipped.
inline RunManifest run(const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto run_start = clock::now();
  const fs::path out = cfg.out();
  const fs::path corpus = cfg.corpus_path();

  RunManifest manifest;
  manifest.config_sha256 = sha256_hex(serialize_config(cfg));
  manifest.seed = cfg.seed;

  auto opt_path = [&](const std::optional<std::string>& p, Stage s, const char* key) {
    if (!p) throw Error(Errc::StageFailure, std::string(to_string(s)), std::string("config has no ") + key);
    return cfg.resolve(*p);
  };

  for (Stage s : cfg.stages) {
    StageRecord rec;
    rec.stage = s;
    if (manifest.failed_stage) {
      manifest.stages.push_back(std::move(rec));
      continue;
    }
    const auto t0 = clock::now();
    try {
      StageIO io;
      switch (s) {
        case Stage::Ingest: {
          IngestOptions opt = *cfg.ingest;
          if (opt.from_dir) opt.from_dir = cfg.resolve(opt.from_dir->string());
          if (opt.papers_dir) opt.papers_dir = cfg.resolve(opt.papers_dir->string());
          if (opt.from_dir) detail::require_inputs(s, {*opt.from_dir});
          io = stage_ingest(opt, corpus);
          break;
        }
        case Stage::Stratify:
          detail::require_inputs(s, {corpus});
          io = stage_stratify(corpus, cfg.kde, cfg.tail_fraction, out / "tiers.json", out / "density.csv");
          break;
        case Stage::Similarity: {
          fs::path emb = opt_path(cfg.embeddings, s, "embeddings");
          detail::require_inputs(s, {corpus, emb, out / "tiers.json"});
          io = stage_similarity(corpus, emb, out / "tiers.json", out / "alignment.json", out / "alignment_heatmap.csv");
          break;
        }
        case Stage::Kg: {
          fs::path ext = opt_path(cfg.extractions, s, "extractions");
          detail::require_inputs(s, {ext, corpus});
          io = stage_kg(ext, corpus, {cfg.merge_mentions}, out / "graphs.json", out / "metrics.csv");
          break;
        }
        case Stage::Ground:
          detail::require_inputs(s, {out / "graphs.json", corpus});
          io = stage_ground(out / "graphs.json", corpus, cfg.fuzzy_grounding, out / "grounding.json",
                            out / "grounding.csv");
          break;
        case Stage::Report: {
          ReportInputs in{out / "metrics.csv", out / "grounding.json", out / "alignment.json", out / "tiers.json",
                          corpus};
          detail::require_inputs(s, {in.metrics, in.grounding, *in.alignment, in.tiers, in.corpus});
          io = stage_report(in, out / "report");
          break;
        }
      }
      rec.status = StageStatus::Succeeded;
      rec.inputs = detail::digest_all(io.inputs, cfg.base_dir);
      rec.outputs = detail::digest_all(io.outputs, cfg.base_dir);
    } catch (const std::exception& e) {
      rec.status = StageStatus::Failed;
      rec.error = e.what();
      manifest.failed_stage = s;
    }
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    manifest.stages.push_back(std::move(rec));
  }
  manifest.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - run_start).count();
  write_file(out / "manifest.json", canonical_dump(to_json(manifest)));
  return manifest;
}

}  // namespace reviewlens::pipeline
