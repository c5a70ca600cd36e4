// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit 1 on any failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "reviewlens/csv.hpp"
#include "reviewlens/grounding.hpp"
#include "reviewlens/kgraph.hpp"
#include "reviewlens/pipeline.hpp"
#include "reviewlens/report.hpp"
#include "reviewlens/similarity.hpp"
#include "reviewlens/stratify.hpp"

using namespace reviewlens;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits.
constexpr double kGraphTol = 1e-9;
constexpr double kCosineTol = 1e-12;
constexpr double kKdeTol = 1e-9;
constexpr double kIntegralTol = 0.01;
constexpr double kThresholdTol = 0.05;
constexpr double kPercentTol = 0.1;  // percentage points
constexpr double kGraphSeconds = 5.0;
constexpr double kPaperValueSeconds = 1.0;
constexpr double kKdeSeconds = 10.0;
constexpr double kEndToEndSeconds = 10.0;

struct Check {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (std::abs(got - want) <= tol) return;
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " +/- " << tol;
    require(false, s.str());
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void criterion(int n, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  if (!c.ok) ++failures;
  std::printf("[%s] %d %s%s%s\n", c.ok ? "PASS" : "FAIL", n, title, c.ok ? "" : " -- ", c.why.str().c_str());
}

void graph_oracle(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20250101);
  for (int i = 0; i < 100; ++i) {
    auto rec = oracle::random_extraction(rng, 15, 20);
    auto m = kgraph::graph_metrics(kgraph::build_graph(rec));
    auto o = oracle::graph_summary(rec);
    const std::string at = " (record " + std::to_string(i) + ")";
    c.require(m.num_nodes == o.num_nodes, "num_nodes" + at);
    c.require(m.num_edges == o.num_edges, "num_edges" + at);
    c.near(m.avg_degree, o.avg_degree, kGraphTol, "avg_degree" + at);
    c.near(m.label_entropy, o.label_entropy, kGraphTol, "label_entropy" + at);
  }
  c.require(seconds_since(t0) < kGraphSeconds, "runtime over limit");
}

void degree_identity(Check& c) {
  std::mt19937_64 rng(77);
  int graphs = 0;
  for (int i = 0; i < 1000; ++i) {
    auto m = kgraph::graph_metrics(kgraph::build_graph(oracle::random_extraction(rng, 15, 20)));
    if (m.num_nodes == 0) continue;
    ++graphs;
    c.require(m.avg_degree * static_cast<double>(m.num_nodes) == 2.0 * static_cast<double>(m.num_edges),
              "identity broken at graph " + std::to_string(i));
  }
  c.require(graphs > 900, "too few non-empty graphs generated");
}

void paper_values(Check& c) {
  using report::Basis;
  using report::GroupAggregate;
  using report::Metric;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<GroupAggregate> agg;
  auto add = [&](const char* src, Tier t, AspectName a, Metric m, double v) {
    agg.push_back({src, t, a, m, v, Basis::PerReviewMean});
  };
  const double real_weak[] = {9.12, 11.20, 13.68}, gpt_weak[] = {3.70, 3.87, 3.91};
  for (int i = 0; i < 3; ++i) {
    add("Human", kAllTiers[i], AspectName::Weaknesses, Metric::NumNodes, real_weak[i]);
    add("GPT-4o", kAllTiers[i], AspectName::Weaknesses, Metric::NumNodes, gpt_weak[i]);
  }
  add("Human", Tier::Good, AspectName::Strengths, Metric::NumNodes, 6.04);
  add("GPT-4o", Tier::Good, AspectName::Strengths, Metric::NumNodes, 6.99);
  add("Human", Tier::Good, AspectName::Strengths, Metric::NumEdges, 2.32);
  // Only the relative value is known for this cell; 2.91 is the
  // two-decimal model mean it implies (2.32 * 1.2547).
  add("GPT-4o", Tier::Good, AspectName::Strengths, Metric::NumEdges, 2.91);

  auto rows = report::render_comparison(agg);
  auto percent = [&](AspectName a, Tier t, Metric m) {
    for (const auto& r : rows)
      if (r.source == "GPT-4o" && r.aspect == a && r.tier == t && r.metric == m && r.deviation)
        return r.deviation->percent;
    throw std::runtime_error("row missing");
  };
  const double reference_weak[] = {-59.42, -65.46, -71.45};
  for (int i = 0; i < 3; ++i)
    c.near(percent(AspectName::Weaknesses, kAllTiers[i], Metric::NumNodes), reference_weak[i], kPercentTol,
           "weakness nodes " + std::string(to_string(kAllTiers[i])));
  c.near(percent(AspectName::Strengths, Tier::Good, Metric::NumNodes), 15.74, kPercentTol, "strengths nodes");
  c.near(percent(AspectName::Strengths, Tier::Good, Metric::NumEdges), 25.47, kPercentTol, "strengths edges");
  auto ratio = grounding::in_to_out_ratio(890, 610);
  c.require(ratio.has_value(), "in_to_out undefined");
  if (ratio) c.near(*ratio, 68.54, kPercentTol, "in_to_out_ratio(890, 610)");
  c.require(seconds_since(t0) < kPaperValueSeconds, "runtime over limit");
}

void quality_gradient(Check& c) {
  c.near(report::relative_ratio(13.68, 9.12), 50.0, kPercentTol, "weakness Good->Weak");
  c.near(report::relative_ratio(3.47, 6.04), -42.5, kPercentTol, "strengths Good->Weak");
}

void cosine_oracle(Check& c) {
  std::mt19937_64 rng(5150);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  auto vec = [&](std::size_t d) {
    std::vector<double> v(d);
    for (double& x : v) x = n01(rng);
    return v;
  };
  std::map<AspectName, EmbeddingRecord> ra;
  std::map<SectionName, EmbeddingRecord> ss;
  for (AspectName a : kAllAspects) ra.emplace(a, EmbeddingRecord{aspect_owner_id("r", a), vec(64), "m", 64});
  for (SectionName s : kAllSections) ss.emplace(s, EmbeddingRecord{section_owner_id("p", s), vec(64), "m", 64});
  auto m = similarity::alignment_matrix("r", ra, ss);
  int cells = 0;
  for (AspectName a : kAllAspects)
    for (SectionName s : kAllSections) {
      c.require(!m.masked(a, s), "unexpected mask");
      c.near(m.cell(a, s), oracle::cosine(ra.at(a).vector, ss.at(s).vector), kCosineTol, "matrix cell");
      ++cells;
    }
  c.require(cells == 24, "cell count");
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = i % 2 ? 768 : 16;
    auto u = vec(d), v = vec(d);
    const double base = similarity::cosine(u, v);
    c.near(similarity::cosine(v, u), base, kCosineTol, "symmetry");
    auto su = u;
    const double k = scale(rng);
    for (double& x : su) x *= k;
    c.near(similarity::cosine(su, v), base, kCosineTol, "scale invariance");
  }
}

void kde_threshold(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3000);
  const std::vector<double> modes = {0.0, 1.0, 2.0};
  auto samples = oracle::mixture(rng, modes, 0.1, 3000);
  auto curve = stratify::kde_density(samples, {});
  for (std::size_t i = 0; i < curve.xs.size(); ++i)
    c.near(curve.ys[i], oracle::kde_at(samples, curve.xs[i], curve.bandwidth), kKdeTol,
           "density at grid point " + std::to_string(i));
  c.near(stratify::trapezoid(curve.xs, curve.ys), 1.0, kIntegralTol, "integral");
  c.near(stratify::find_consistency_threshold(curve), 1.5, kThresholdTol, "threshold");

  const std::vector<double> two = {0.0, 2.0};
  auto bimodal = stratify::kde_density(oracle::mixture(rng, two, 0.1, 3000), {});
  bool raised = false;
  try {
    stratify::find_consistency_threshold(bimodal);
  } catch (const Error& e) {
    raised = e.code() == Errc::NotEnoughMinima;
  }
  c.require(raised, "bimodal sample did not raise NotEnoughMinima");
  c.require(seconds_since(t0) < kKdeSeconds, "runtime over limit");
}

void stratification(Check& c) {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> score(1, 10), sd(0, 1);
  std::vector<stratify::PaperScore> papers;
  for (int i = 0; i < 1000; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "paper%04d", i);
    // Quarter-point scores force ties that the paper_id rule has to settle.
    papers.push_back({id, std::round(score(rng) * 4) / 4, sd(rng)});
  }
  auto tiers = stratify::assign_quality_tiers(papers, 1.0, 0.025);
  std::map<Tier, int> per_tier;
  std::set<std::string> ids;
  for (const auto& t : tiers) {
    ++per_tier[t.tier];
    ids.insert(t.paper_id);
  }
  for (Tier t : kAllTiers) c.require(per_tier[t] == 25, std::string(to_string(t)) + " count != 25");
  c.require(ids.size() == tiers.size(), "tiers overlap");
  for (std::size_t i = 1; i < tiers.size(); ++i) {
    const auto &a = tiers[i - 1], &b = tiers[i];
    bool ordered = a.aggregated_score > b.aggregated_score ||
                   (a.aggregated_score == b.aggregated_score && a.paper_id < b.paper_id);
    c.require(ordered, "not rank-ordered at " + std::to_string(i));
  }
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(papers.begin(), papers.end(), rng);
    c.require(stratify::assign_quality_tiers(papers, 1.0, 0.025) == tiers, "permutation changed tiers");
  }
}

void grounding_fixture(Check& c) {
  const std::string text =
      "We train a Graph Neural Network on the Cora dataset and report node-classification accuracy. "
      "Attention weights are regularised with dropout; the F1 score and the learning rate schedule follow prior work.";
  const std::vector<std::pair<std::string, bool>> truth = {
      {"graph neural network", true}, {"Cora dataset", true},     {"node-classification", true},
      {"accuracy", true},             {"attention weights", true}, {"dropout", true},
      {"F1 score", true},             {"learning rate", true},     {"prior work", true},
      {"GRAPH", true},                {"ImageNet", false},         {"BLEU", false},
      {"transformer", false},         {"ablation study", false},   {"link prediction", false},
      {"node classification", false}, {"F1-score", false},        {"batch norm", false},
      {"weight decay", false},        {"citeseer", false}};
  kgraph::KnowledgeGraph g{"r", AspectName::Weaknesses, {}, {}};
  for (std::size_t i = 0; i < truth.size(); ++i)
    g.nodes.push_back({"n" + std::to_string(i), grounding::normalize_surface(truth[i].first), EntityLabel::Generic, 1});
  auto r = grounding::classify_entities(g, grounding::NormalizedPaper(text));
  std::set<std::string> in(r.in_context.begin(), r.in_context.end());
  for (std::size_t i = 0; i < truth.size(); ++i)
    c.require(in.contains("n" + std::to_string(i)) == truth[i].second, "misclassified '" + truth[i].first + "'");
  c.require(r.in_context.size() + r.out_of_context.size() == truth.size(), "classification not total");

  std::mt19937_64 rng(8);
  const std::vector<std::string> words = {"imagenet", "bleu", "transformer", "ablation", "study", "link",
                                          "prediction", "batch", "norm", "weight", "decay", "citeseer", "F1-score"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(1, 5);
  std::string extended = text;
  std::set<std::string> prev = in;
  for (int i = 0; i < 50; ++i) {
    for (std::size_t k = len(rng); k > 0; --k) extended += " " + words[pick(rng)];
    auto e = grounding::classify_entities(g, grounding::NormalizedPaper(extended));
    std::set<std::string> now(e.in_context.begin(), e.in_context.end());
    c.require(std::includes(now.begin(), now.end(), prev.begin(), prev.end()),
              "node left in-context after extension " + std::to_string(i));
    prev = now;
  }
}

// Column-level checks mirroring the documented CSV layouts.
void check_csv(Check& c, const fs::path& file, const csv::Row& header,
               const std::function<bool(const csv::Row&)>& row_ok) {
  auto rows = csv::parse(ingest::read_file(file));
  c.require(!rows.empty() && rows[0] == header, file.filename().string() + ": bad header");
  c.require(rows.size() > 1, file.filename().string() + ": no data rows");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    bool ok = rows[i].size() == header.size() && row_ok(rows[i]);
    c.require(ok, file.filename().string() + ": invalid row " + std::to_string(i));
  }
}

std::optional<double> as_double(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}
std::optional<long long> as_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}
bool is_number(const std::string& s) { return as_double(s).has_value(); }
bool is_count(const std::string& s) { return as_int(s).value_or(-1) >= 0; }
bool is_tier(const std::string& s) { return parse_tier(s).has_value(); }

void end_to_end(Check& c) {
  const fs::path src = fs::path(REVIEWLENS_FIXTURES) / "e2e";
  const fs::path dir = fs::temp_directory_path() / "reviewlens_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const char* item : {"papers", "reviews", "embeddings.json", "extractions.json", "run.json"})
    fs::copy(src / item, dir / item, fs::copy_options::recursive);

  auto cfg = pipeline::load_config(dir / "run.json");
  auto t0 = std::chrono::steady_clock::now();
  auto first = pipeline::run(cfg);
  const double elapsed = seconds_since(t0);
  c.require(first.succeeded(), "first run failed");
  c.require(elapsed < kEndToEndSeconds, "runtime over limit");
  auto corpus = pipeline::read_corpus(dir / "out" / "corpus.json");
  c.require(corpus.papers().size() == 5 && corpus.reviews().size() == 15, "fixture is not 5 x 3");

  auto bins = std::set<std::string>{"", "Neutral", "IncLow", "IncMid", "IncHigh", "DecLow", "DecMid", "DecHigh"};
  check_csv(c, dir / "out" / "report" / "comparison.csv", report::kComparisonHeader, [&](const csv::Row& r) {
    bool metric = false;
    for (auto m : report::kAllMetrics) metric = metric || r[3] == report::to_string(m);
    bool blank = r[5].empty() && r[6].empty();
    return !r[0].empty() && parse_aspect(r[1]).has_value() && is_tier(r[2]) && metric && is_number(r[4]) &&
           (blank || (is_number(r[5]) && r[6] != "")) && bins.contains(r[6]) && (r[0] != "Human" || blank);
  });
  check_csv(c, dir / "out" / "report" / "ratings.csv", report::kRatingsHeader, [&](const csv::Row& r) {
    long long total = 0;
    for (std::size_t i = 5; i < 15; ++i) total += is_count(r[i]) ? *as_int(r[i]) : -1000;
    return !r[0].empty() && is_tier(r[1]) && is_count(r[2]) && is_number(r[3]) && is_number(r[4]) &&
           total == *as_int(r[2]);
  });
  const csv::Row heat = {"source", "tier", "aspect", "section", "mean", "count"};
  check_csv(c, dir / "out" / "alignment_heatmap.csv", heat, [&](const csv::Row& r) {
    auto v = as_double(r[4]);
    return !r[0].empty() && is_tier(r[1]) && parse_aspect(r[2]).has_value() && parse_section(r[3]).has_value() && v && *v >= -1 && *v <= 1 &&
           is_count(r[5]) && *as_int(r[5]) > 0;
  });

  auto hashes = [](const pipeline::RunManifest& m) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : m.stages)
      for (const auto& f : s.outputs) out.emplace_back(f.path, f.sha256);
    return out;
  };
  auto second = pipeline::run(cfg);
  c.require(second.succeeded(), "second run failed");
  c.require(!hashes(first).empty() && hashes(first) == hashes(second), "output hashes differ between runs");
  c.require(first.config_sha256 == second.config_sha256, "config hash differs");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  criterion(1, "graph metrics match brute-force oracle on 100 random records", graph_oracle);
  criterion(2, "avg_degree * num_nodes == 2 * num_edges on every generated graph", degree_identity);
  criterion(3, "relative ratios reproduce reference values", paper_values);
  criterion(4, "human quality gradient +50.0% / -42.5%", quality_gradient);
  criterion(5, "alignment matrix matches 24 oracle cosines; scale and symmetry invariance", cosine_oracle);
  criterion(6, "KDE matches direct sum, integrates to 1, second valley at 1.5; bimodal rejected", kde_threshold);
  criterion(7, "1000 papers at tail 0.025 give 25 per tier, disjoint, ordered, permutation-stable", stratification);
  criterion(8, "grounding fixture classified exactly; monotone under 50 extensions", grounding_fixture);
  criterion(9, "end-to-end run: under 10 s, valid CSV outputs, identical hashes across runs", end_to_end);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
