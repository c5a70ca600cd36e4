// reviewlens: command-line entry point for the review-analysis pipeline.
//
// Exit codes: 0 success, 2 configuration / usage error, 3 stage failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reviewlens/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
namespace pl = reviewlens::pipeline;
using reviewlens::Errc;
using reviewlens::Error;

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

reviewlens::stratify::Bandwidth parse_bandwidth(const std::string& s) {
  if (s == "silverman") return reviewlens::stratify::SilvermanBandwidth{};
  try {
    std::size_t used = 0;
    double h = std::stod(s, &used);
    if (used == s.size() && h > 0) return reviewlens::stratify::FixedBandwidth{h};
  } catch (const std::exception&) {
  }
  throw Error(Errc::ConfigError, "--bandwidth", "expected silverman or a positive number");
}

std::optional<std::string> token_from_env() {
  const char* t = std::getenv("OPENREVIEW_TOKEN");
  return t && *t ? std::optional<std::string>(t) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-review corpus analysis: stratification, alignment, review graphs and comparison reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pl::kToolVersion));

  // ingest
  pl::IngestOptions ing;
  std::string ingest_out = "corpus.json", from_dir, papers_dir;
  auto* ingest = app.add_subcommand("ingest", "Fetch or load papers and reviews into a canonical corpus");
  ingest->add_option("--venue", ing.venue, "Venue id, e.g. ICLR.cc/2025/Conference")->required();
  ingest->add_option("--year", ing.year, "Venue year")->required();
  ingest->add_option("--out", ingest_out, "Output corpus file")->capture_default_str();
  ingest->add_option("--from-dir", from_dir, "Local directory with papers/*.md and reviews/*.json");
  ingest->add_option("--base-url", ing.base_url, "OpenReview API base URL")->capture_default_str();
  ingest->add_option("--page-size", ing.page_size)->capture_default_str()->check(CLI::PositiveNumber);
  ingest->add_option("--retry-limit", ing.retry_limit)->capture_default_str()->check(CLI::Range(0, 10));
  ingest->add_option("--papers-dir", papers_dir, "Markdown for fetched papers, <note id>.md");

  // stratify
  std::string corpus_path, tiers_out = "tiers.json", bandwidth = "silverman", density_out;
  double tail = 0.025;
  int grid = 512;
  double padding = 3.0;
  auto* strat = app.add_subcommand("stratify", "Consistency filtering and quality tiers");
  strat->add_option("--corpus", corpus_path)->required();
  strat->add_option("--tail", tail, "Tail fraction per tier")->capture_default_str();
  strat->add_option("--out", tiers_out)->capture_default_str();
  strat->add_option("--bandwidth", bandwidth, "silverman or a fixed positive bandwidth")->capture_default_str();
  strat->add_option("--grid", grid, "KDE grid points")->capture_default_str();
  strat->add_option("--padding", padding, "Grid padding in bandwidths")->capture_default_str();
  strat->add_option("--density", density_out, "Density curve CSV (default: density.csv next to --out)");

  // similarity
  std::string embeddings_path, tiers_path, alignment_out = "alignment.json", heatmap_out;
  auto* sim = app.add_subcommand("similarity", "Aspect x section cosine alignment");
  sim->add_option("--corpus", corpus_path)->required();
  sim->add_option("--embeddings", embeddings_path)->required();
  sim->add_option("--tiers", tiers_path)->required();
  sim->add_option("--out", alignment_out)->capture_default_str();
  sim->add_option("--heatmap", heatmap_out, "Heatmap CSV (default: alignment_heatmap.csv next to --out)");

  // kg
  std::string extractions_path, graphs_out = "graphs.json", metrics_out = "metrics.csv", kg_corpus;
  bool merge_mentions = true;
  double log_base = std::numbers::e;
  auto* kg = app.add_subcommand("kg", "Review knowledge graphs and structural metrics");
  kg->add_option("--extractions", extractions_path)->required();
  kg->add_option("--out", graphs_out)->capture_default_str();
  kg->add_option("--metrics", metrics_out)->capture_default_str();
  kg->add_option("--merge-mentions", merge_mentions, "Merge mentions with equal normalized text")
      ->capture_default_str();
  kg->add_option("--log-base", log_base, "Entropy logarithm base")->check(CLI::PositiveNumber);
  kg->add_option("--corpus", kg_corpus, "Check mention spans against review text");

  // ground
  std::string graphs_path, grounding_out = "grounding.json", grounding_csv;
  bool fuzzy = false;
  auto* ground = app.add_subcommand("ground", "In-context / out-of-context entity classification");
  ground->add_option("--graphs", graphs_path)->required();
  ground->add_option("--corpus", corpus_path)->required();
  ground->add_option("--out", grounding_out)->capture_default_str();
  ground->add_option("--csv", grounding_csv, "Per-aspect CSV (default: grounding.csv next to --out)");
  ground->add_flag("--fuzzy", fuzzy, "Also accept token-set Jaccard >= 0.8 matches");

  // report
  pl::ReportInputs rin;
  std::string alignment_path, report_out = "report";
  auto* rep = app.add_subcommand("report", "Comparison tables, rating distributions, node counts");
  rep->add_option("--metrics", rin.metrics)->required();
  rep->add_option("--grounding", rin.grounding)->required();
  rep->add_option("--alignment", alignment_path);
  rep->add_option("--tiers", rin.tiers)->required();
  rep->add_option("--corpus", rin.corpus)->required();
  rep->add_option("--out", report_out)->capture_default_str();

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured pipeline and write a manifest");
  run->add_option("--config", config_path, "Pipeline configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  auto beside = [](const std::string& out, const char* name) { return fs::path(out).parent_path() / name; };

  try {
    if (*ingest) {
      if (!from_dir.empty()) ing.from_dir = from_dir;
      if (!papers_dir.empty()) ing.papers_dir = papers_dir;
      ing.auth_token = token_from_env();
      pl::stage_ingest(ing, ingest_out);
    } else if (*strat) {
      reviewlens::stratify::KdeConfig kde{parse_bandwidth(bandwidth), grid, padding};
      kde.validate();
      if (!(tail > 0 && tail < 0.5)) throw Error(Errc::ConfigError, "--tail", "must lie in (0, 0.5)");
      pl::stage_stratify(corpus_path, kde, tail, tiers_out,
                         density_out.empty() ? beside(tiers_out, "density.csv") : fs::path(density_out));
    } else if (*sim) {
      pl::stage_similarity(corpus_path, embeddings_path, tiers_path, alignment_out,
                           heatmap_out.empty() ? beside(alignment_out, "alignment_heatmap.csv") : fs::path(heatmap_out));
    } else if (*kg) {
      std::optional<fs::path> c;
      if (!kg_corpus.empty()) c = kg_corpus;
      pl::stage_kg(extractions_path, c, {merge_mentions, log_base}, graphs_out, metrics_out);
    } else if (*ground) {
      pl::stage_ground(graphs_path, corpus_path, fuzzy, grounding_out,
                       grounding_csv.empty() ? beside(grounding_out, "grounding.csv") : fs::path(grounding_csv));
    } else if (*rep) {
      if (!alignment_path.empty()) rin.alignment = alignment_path;
      pl::stage_report(rin, report_out);
    } else if (*run) {
      pl::RunConfig cfg = pl::load_config(config_path);
      pl::RunManifest m = pl::run(cfg);
      for (const auto& s : m.stages)
        std::cerr << pl::to_string(s.stage) << ": " << pl::to_string(s.status)
                  << (s.error.empty() ? "" : " (" + s.error + ")") << "\n";
      std::cerr << "manifest: " << (cfg.out() / "manifest.json").string() << "\n";
      return m.succeeded() ? 0 : kExitStage;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
