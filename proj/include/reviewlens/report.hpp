#pragma once

// Comparative reporting: group aggregates of graph and grounding metrics,
// relative ratios of model reviews against the human baseline with signed
// deviation bins, rating histograms and node-count-by-quality data.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "reviewlens/corpus_model.hpp"
#include "reviewlens/csv.hpp"
#include "reviewlens/grounding.hpp"
#include "reviewlens/kgraph.hpp"

namespace reviewlens::report {

// ---------------------------------------------------------------------------
// Relative ratio and deviation bins
// ---------------------------------------------------------------------------

inline double relative_ratio(double llm_value, double real_value) {
  if (real_value == 0) throw Error(Errc::ZeroBaseline, csv::format_double(llm_value));
  return 100.0 * (llm_value - real_value) / real_value;
}

enum class Bin { Neutral, IncLow, IncMid, IncHigh, DecLow, DecMid, DecHigh };

constexpr std::string_view to_string(Bin b) {
  constexpr std::array<std::string_view, 7> names = {"Neutral", "IncLow", "IncMid", "IncHigh",
                                                     "DecLow",  "DecMid", "DecHigh"};
  return names[static_cast<std::size_t>(b)];
}

struct DeviationCell {
  double percent = 0;
  Bin bin = Bin::Neutral;
};

// |p| <= 20 Neutral, (20, 50] Low, (50, 75] Mid, > 75 High; sign picks Inc/Dec.
inline DeviationCell bin_deviation(double percent) {
  const double a = std::abs(percent);
  if (a <= 20) return {percent, Bin::Neutral};
  const bool inc = percent > 0;
  if (a <= 50) return {percent, inc ? Bin::IncLow : Bin::DecLow};
  if (a <= 75) return {percent, inc ? Bin::IncMid : Bin::DecMid};
  return {percent, inc ? Bin::IncHigh : Bin::DecHigh};
}

// ---------------------------------------------------------------------------
// Group aggregates
// ---------------------------------------------------------------------------

enum class Metric { NumNodes, NumEdges, AvgDegree, LabelEntropy, InCount, OutCount, InToOutRatio };
inline constexpr std::array<Metric, 7> kAllMetrics = {Metric::NumNodes,     Metric::NumEdges, Metric::AvgDegree,
                                                      Metric::LabelEntropy, Metric::InCount,  Metric::OutCount,
                                                      Metric::InToOutRatio};

constexpr std::string_view to_string(Metric m) {
  constexpr std::array<std::string_view, 7> names = {"num_nodes", "num_edges", "avg_degree",     "label_entropy",
                                                     "in_count",  "out_count", "in_to_out_ratio"};
  return names[static_cast<std::size_t>(m)];
}

enum class Basis { PerReviewMean, CorpusTotal };

constexpr std::string_view to_string(Basis b) {
  return b == Basis::PerReviewMean ? "PerReviewMean" : "CorpusTotal";
}

constexpr Basis basis_of(Metric m) {
  switch (m) {
    case Metric::NumNodes:
    case Metric::NumEdges:
    case Metric::AvgDegree:
    case Metric::LabelEntropy: return Basis::PerReviewMean;
    default: return Basis::CorpusTotal;
  }
}

struct GroupAggregate {
  std::string source;
  Tier tier = Tier::Good;
  AspectName aspect = AspectName::Summary;
  Metric metric = Metric::NumNodes;
  double value = 0;
  Basis basis = Basis::PerReviewMean;
};

// One metrics.csv row.
struct MetricRow {
  std::string review_id;
  AspectName aspect = AspectName::Summary;
  kgraph::GraphMetrics metrics;
};

namespace detail {

struct ReviewTier {
  std::string source;
  Tier tier;
};

inline ReviewTier resolve(const ValidatedCorpus& corpus, const std::unordered_map<std::string, Tier>& tier_of,
                          const std::string& review_id) {
  const ReviewRecord* r = corpus.find_review(review_id);
  if (!r) throw Error(Errc::DanglingReference, review_id, "metric row for unknown review");
  auto t = tier_of.find(r->paper_id);
  if (t == tier_of.end()) throw Error(Errc::UnknownTier, r->paper_id, "review " + review_id);
  return {r->source.label(), t->second};
}

}  // namespace detail

// Structural metrics are averaged per review; entity counts are summed over
// the group and the in-to-out ratio is derived from those totals. Output is
// ordered by (source, tier, aspect, metric).
inline std::vector<GroupAggregate> aggregate_metrics(std::span<const MetricRow> metrics,
                                                     std::span<const grounding::GroundingResult> grounding,
                                                     const ValidatedCorpus& corpus,
                                                     std::span<const QualityTier> tiers) {
  std::unordered_map<std::string, Tier> tier_of;
  for (const QualityTier& t : tiers) tier_of.emplace(t.paper_id, t.tier);

  using Key = std::tuple<std::string, Tier, AspectName>;
  struct Acc {
    std::array<double, 4> sums{};
    std::size_t n = 0;
    std::size_t in = 0, out = 0;
    bool grounded = false;
  };
  std::map<Key, Acc> acc;

  std::vector<const MetricRow*> rows;
  for (const MetricRow& m : metrics) rows.push_back(&m);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return std::tie(a->review_id, a->aspect) < std::tie(b->review_id, b->aspect);
  });
  for (const MetricRow* m : rows) {
    auto rt = detail::resolve(corpus, tier_of, m->review_id);
    Acc& a = acc[Key{rt.source, rt.tier, m->aspect}];
    a.sums[0] += static_cast<double>(m->metrics.num_nodes);
    a.sums[1] += static_cast<double>(m->metrics.num_edges);
    a.sums[2] += m->metrics.avg_degree;
    a.sums[3] += m->metrics.label_entropy;
    ++a.n;
  }
  for (const auto& g : grounding) {
    auto rt = detail::resolve(corpus, tier_of, g.review_id);
    Acc& a = acc[Key{rt.source, rt.tier, g.aspect}];
    a.in += g.in_context.size();
    a.out += g.out_of_context.size();
    a.grounded = true;
  }

  std::vector<GroupAggregate> out;
  for (const auto& [k, a] : acc) {
    const auto& [source, tier, aspect] = k;
    auto push = [&](Metric m, double v) { out.push_back({source, tier, aspect, m, v, basis_of(m)}); };
    if (a.n > 0) {
      const double n = static_cast<double>(a.n);
      push(Metric::NumNodes, a.sums[0] / n);
      push(Metric::NumEdges, a.sums[1] / n);
      push(Metric::AvgDegree, a.sums[2] / n);
      push(Metric::LabelEntropy, a.sums[3] / n);
    }
    if (a.grounded) {
      push(Metric::InCount, static_cast<double>(a.in));
      push(Metric::OutCount, static_cast<double>(a.out));
      if (auto r = grounding::in_to_out_ratio(a.in, a.out)) push(Metric::InToOutRatio, *r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rating distribution
// ---------------------------------------------------------------------------

struct RatingHistogram {
  std::string source;
  Tier tier = Tier::Good;
  std::array<std::size_t, 10> bins{};  // bins[i] counts rating i + 1
  std::size_t count = 0;
  double mean = 0;
  double std = 0;  // population
};

// Histograms of overall ratings per (source, tier) for reviews of tiered
// papers. Groups without reviews do not appear.
inline std::vector<RatingHistogram> rating_distribution(const ValidatedCorpus& corpus,
                                                        std::span<const QualityTier> tiers) {
  std::unordered_map<std::string, Tier> tier_of;
  for (const QualityTier& t : tiers) tier_of.emplace(t.paper_id, t.tier);
  std::map<std::pair<std::string, Tier>, std::vector<int>> groups;
  for (const ReviewRecord& r : corpus.reviews()) {
    auto t = tier_of.find(r.paper_id);
    if (t != tier_of.end()) groups[{r.source.label(), t->second}].push_back(r.overall_rating);
  }
  std::vector<RatingHistogram> out;
  for (const auto& [key, ratings] : groups) {
    RatingHistogram h;
    h.source = key.first;
    h.tier = key.second;
    h.count = ratings.size();
    double sum = 0;
    for (int v : ratings) {
      ++h.bins[static_cast<std::size_t>(v - 1)];
      sum += v;
    }
    h.mean = sum / static_cast<double>(h.count);
    double ss = 0;
    for (int v : ratings) ss += (v - h.mean) * (v - h.mean);
    h.std = std::sqrt(ss / static_cast<double>(h.count));
    out.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison table
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string source;
  AspectName aspect = AspectName::Summary;
  Tier tier = Tier::Good;
  Metric metric = Metric::NumNodes;
  double value = 0;
  // Model rows only; empty for human rows, for the in-to-out ratio (reported
  // raw) and when the human baseline is zero.
  std::optional<DeviationCell> deviation;
};

inline bool source_less(const std::string& a, const std::string& b) {
  if (a == b) return false;
  if (a == "Human") return true;
  if (b == "Human") return false;
  return a < b;
}

// One row per (source, aspect, tier, metric). Rows are ordered by aspect,
// then source (Human first, models lexicographic), tier and metric.
inline std::vector<ComparisonRow> render_comparison(std::span<const GroupAggregate> aggregates) {
  std::map<std::tuple<Tier, AspectName, Metric>, double> baseline;
  for (const GroupAggregate& g : aggregates)
    if (g.source == "Human") baseline[{g.tier, g.aspect, g.metric}] = g.value;

  std::vector<ComparisonRow> rows;
  for (const GroupAggregate& g : aggregates) {
    ComparisonRow row{g.source, g.aspect, g.tier, g.metric, g.value, std::nullopt};
    if (g.source != "Human" && g.metric != Metric::InToOutRatio) {
      auto b = baseline.find({g.tier, g.aspect, g.metric});
      if (b == baseline.end())
        throw Error(Errc::MissingBaseline,
                    g.source + "/" + std::string(reviewlens::to_string(g.aspect)) + "/" +
                        std::string(reviewlens::to_string(g.tier)) + "/" + std::string(to_string(g.metric)));
      if (b->second != 0) row.deviation = bin_deviation(relative_ratio(g.value, b->second));
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.aspect != b.aspect) return a.aspect < b.aspect;
    if (a.source != b.source) return source_less(a.source, b.source);
    return std::tie(a.tier, a.metric) < std::tie(b.tier, b.metric);
  });
  return rows;
}

inline const csv::Row kComparisonHeader = {"source", "aspect", "tier", "metric", "value", "percent", "bin"};

inline std::string comparison_csv(std::span<const ComparisonRow> rows) {
  std::vector<csv::Row> out;
  for (const ComparisonRow& r : rows)
    out.push_back({r.source, std::string(reviewlens::to_string(r.aspect)), std::string(reviewlens::to_string(r.tier)),
                   std::string(to_string(r.metric)), csv::format_double(r.value),
                   r.deviation ? csv::format_fixed2(r.deviation->percent) : "",
                   r.deviation ? std::string(to_string(r.deviation->bin)) : ""});
  return csv::format_table(kComparisonHeader, out);
}

inline json comparison_json(std::span<const ComparisonRow> rows) {
  json arr = json::array();
  for (const ComparisonRow& r : rows)
    arr.push_back({{"source", r.source},
                   {"aspect", reviewlens::to_string(r.aspect)},
                   {"tier", reviewlens::to_string(r.tier)},
                   {"metric", to_string(r.metric)},
                   {"basis", to_string(basis_of(r.metric))},
                   {"value", r.value},
                   {"percent", r.deviation ? json(r.deviation->percent) : json(nullptr)},
                   {"bin", r.deviation ? json(to_string(r.deviation->bin)) : json(nullptr)}});
  return arr;
}

inline const csv::Row kRatingsHeader = {"source", "tier", "count", "mean", "std", "r1", "r2", "r3",
                                        "r4",     "r5",   "r6",    "r7",   "r8",  "r9", "r10"};

inline std::string ratings_csv(std::span<const RatingHistogram> hists) {
  std::vector<csv::Row> out;
  for (const RatingHistogram& h : hists) {
    csv::Row row = {h.source, std::string(reviewlens::to_string(h.tier)), std::to_string(h.count),
                    csv::format_double(h.mean), csv::format_double(h.std)};
    for (std::size_t b : h.bins) row.push_back(std::to_string(b));
    out.push_back(std::move(row));
  }
  return csv::format_table(kRatingsHeader, out);
}

inline const csv::Row kNodesHeader = {"source", "aspect", "tier", "mean_nodes"};

// Mean node count per (source, aspect, tier), in comparison-row order.
inline std::string nodes_by_quality_csv(std::span<const ComparisonRow> rows) {
  std::vector<csv::Row> out;
  for (const ComparisonRow& r : rows)
    if (r.metric == Metric::NumNodes)
      out.push_back({r.source, std::string(reviewlens::to_string(r.aspect)),
                     std::string(reviewlens::to_string(r.tier)), csv::format_double(r.value)});
  return csv::format_table(kNodesHeader, out);
}

// ---------------------------------------------------------------------------
// metrics.csv
// ---------------------------------------------------------------------------

inline const csv::Row kMetricsHeader = {"review_id", "aspect", "num_nodes", "num_edges", "avg_degree", "label_entropy"};

inline std::string metrics_csv(std::span<const MetricRow> rows) {
  std::vector<csv::Row> out;
  for (const MetricRow& r : rows)
    out.push_back({r.review_id, std::string(reviewlens::to_string(r.aspect)), std::to_string(r.metrics.num_nodes),
                   std::to_string(r.metrics.num_edges), csv::format_double(r.metrics.avg_degree),
                   csv::format_double(r.metrics.label_entropy)});
  return csv::format_table(kMetricsHeader, out);
}

inline std::vector<MetricRow> parse_metrics_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty() || rows.front() != kMetricsHeader)
    throw Error(Errc::SchemaError, "metrics.csv", "unexpected header");
  std::vector<MetricRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const csv::Row& r = rows[i];
    const std::string where = "metrics.csv:" + std::to_string(i + 1);
    if (r.size() != kMetricsHeader.size()) throw Error(Errc::SchemaError, where, "wrong column count");
    auto aspect = parse_aspect(r[1]);
    if (!aspect) throw Error(Errc::SchemaError, where, "unknown aspect " + r[1]);
    MetricRow m;
    m.review_id = r[0];
    m.aspect = *aspect;
    m.metrics.num_nodes = static_cast<std::size_t>(csv::parse_int(r[2], where));
    m.metrics.num_edges = static_cast<std::size_t>(csv::parse_int(r[3], where));
    m.metrics.avg_degree = csv::parse_double(r[4], where);
    m.metrics.label_entropy = csv::parse_double(r[5], where);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace reviewlens::report
