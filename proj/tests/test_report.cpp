#include <gtest/gtest.h>

#include "reviewlens/report.hpp"
#include "test_util.hpp"

using namespace reviewlens;
using namespace reviewlens::report;
using testutil::code_of;
using testutil::make_paper;
using testutil::make_review;

namespace {

MetricRow metric_row(std::string rid, AspectName a, std::size_t nodes, std::size_t edges = 0) {
  MetricRow r{std::move(rid), a, {}};
  r.metrics.num_nodes = nodes;
  r.metrics.num_edges = edges;
  r.metrics.avg_degree = nodes ? 2.0 * static_cast<double>(edges) / static_cast<double>(nodes) : 0;
  return r;
}

grounding::GroundingResult grounded(std::string rid, AspectName a, std::size_t in, std::size_t out) {
  grounding::GroundingResult g{std::move(rid), a, {}, {}, grounding::in_to_out_ratio(in, out)};
  for (std::size_t i = 0; i < in; ++i) g.in_context.push_back("n" + std::to_string(i));
  for (std::size_t i = 0; i < out; ++i) g.out_of_context.push_back("n" + std::to_string(in + i));
  return g;
}

}  // namespace

TEST(RelativeRatio, Examples) {
  EXPECT_NEAR(relative_ratio(3.70, 9.12), -59.43, 0.005);
  EXPECT_NEAR(relative_ratio(6.99, 6.04), 15.73, 0.005);
  for (double x : {0.1, 3.0, -2.0}) EXPECT_EQ(relative_ratio(x, x), 0.0);
  EXPECT_EQ(code_of([] { relative_ratio(1.0, 0.0); }), Errc::ZeroBaseline);
}

TEST(RelativeRatio, StrictlyMonotone) {
  for (double r : {0.5, 2.32, 13.68})
    for (double x = 0; x < 30; x += 0.25) EXPECT_LT(relative_ratio(x, r), relative_ratio(x + 0.01, r));
}

TEST(Bins, Examples) {
  EXPECT_EQ(bin_deviation(15.74).bin, Bin::Neutral);
  EXPECT_EQ(bin_deviation(-59.42).bin, Bin::DecMid);
  EXPECT_EQ(bin_deviation(136.60).bin, Bin::IncHigh);
  EXPECT_EQ(bin_deviation(20.0).bin, Bin::Neutral);
  EXPECT_EQ(bin_deviation(-20.0).bin, Bin::Neutral);
  EXPECT_EQ(bin_deviation(20.000001).bin, Bin::IncLow);
  EXPECT_EQ(bin_deviation(-20.000001).bin, Bin::DecLow);
  EXPECT_EQ(bin_deviation(50.0).bin, Bin::IncLow);
  EXPECT_EQ(bin_deviation(50.000001).bin, Bin::IncMid);
  EXPECT_EQ(bin_deviation(-75.0).bin, Bin::DecMid);
  EXPECT_EQ(bin_deviation(-75.000001).bin, Bin::DecHigh);
  EXPECT_EQ(bin_deviation(0.0).bin, Bin::Neutral);
}

TEST(Aggregate, MeansAndTotals) {
  auto corpus = validate_corpus({make_paper("P"), make_paper("Q")},
                                {make_review("a", "P"), make_review("b", "Q"), make_review("c", "Q")});
  std::vector<QualityTier> tiers = {{"P", Tier::Good, 6, 0}, {"Q", Tier::Weak, 6, 0}};
  std::vector<MetricRow> rows = {metric_row("a", AspectName::Summary, 7), metric_row("b", AspectName::Summary, 9),
                                 metric_row("c", AspectName::Summary, 11)};
  std::vector<grounding::GroundingResult> g = {grounded("b", AspectName::Summary, 3, 1),
                                               grounded("c", AspectName::Summary, 5, 2)};
  auto agg = aggregate_metrics(rows, g, corpus, tiers);
  auto get = [&](Tier t, Metric m) {
    for (const auto& x : agg)
      if (x.tier == t && x.metric == m) return x;
    ADD_FAILURE() << "missing aggregate";
    return GroupAggregate{};
  };
  EXPECT_DOUBLE_EQ(get(Tier::Good, Metric::NumNodes).value, 7.0);
  EXPECT_DOUBLE_EQ(get(Tier::Weak, Metric::NumNodes).value, 10.0);
  EXPECT_EQ(get(Tier::Weak, Metric::InCount).basis, Basis::CorpusTotal);
  EXPECT_DOUBLE_EQ(get(Tier::Weak, Metric::InCount).value, 8.0);
  EXPECT_DOUBLE_EQ(get(Tier::Weak, Metric::OutCount).value, 3.0);
  EXPECT_DOUBLE_EQ(get(Tier::Weak, Metric::InToOutRatio).value, 37.5);
  EXPECT_EQ(get(Tier::Good, Metric::NumNodes).basis, Basis::PerReviewMean);
}

TEST(Aggregate, Errors) {
  auto corpus = validate_corpus({make_paper("P")}, {make_review("a", "P")});
  std::vector<MetricRow> rows = {metric_row("a", AspectName::Summary, 7)};
  EXPECT_EQ(code_of([&] { aggregate_metrics(rows, {}, corpus, {}); }), Errc::UnknownTier);
  std::vector<MetricRow> stray = {metric_row("zz", AspectName::Summary, 7)};
  std::vector<QualityTier> tiers = {{"P", Tier::Good, 6, 0}};
  EXPECT_EQ(code_of([&] { aggregate_metrics(stray, {}, corpus, tiers); }), Errc::DanglingReference);
}

TEST(Ratings, Distribution) {
  auto corpus = validate_corpus({make_paper("P"), make_paper("Q")},
                                {make_review("a", "P", {}, 5), make_review("b", "P", {}, 5),
                                 make_review("c", "P", {}, 6), make_review("d", "P", "GPT-4o", 8),
                                 make_review("e", "Q", {}, 1)});
  std::vector<QualityTier> tiers = {{"P", Tier::Good, 6, 0}};
  auto h = rating_distribution(corpus, tiers);
  ASSERT_EQ(h.size(), 2u);  // Q has no tier; human and model kept apart
  const auto& human = h[0].source == "Human" ? h[0] : h[1];
  EXPECT_EQ(human.count, 3u);
  EXPECT_EQ(human.bins[4], 2u);
  EXPECT_EQ(human.bins[5], 1u);
  EXPECT_NEAR(human.mean, 16.0 / 3.0, 1e-12);
  EXPECT_TRUE(rating_distribution(corpus, {}).empty());
}

TEST(Render, WeaknessRowPercents) {
  std::vector<GroupAggregate> agg;
  const double real[] = {9.12, 11.20, 13.68}, llm[] = {3.70, 3.87, 3.91}, expect[] = {-59.4, -65.4, -71.4};
  for (int i = 0; i < 3; ++i) {
    agg.push_back({"Human", kAllTiers[i], AspectName::Weaknesses, Metric::NumNodes, real[i], Basis::PerReviewMean});
    agg.push_back({"GPT-4o", kAllTiers[i], AspectName::Weaknesses, Metric::NumNodes, llm[i], Basis::PerReviewMean});
  }
  auto rows = render_comparison(agg);
  ASSERT_EQ(rows.size(), 6u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].source, "Human");
    EXPECT_FALSE(rows[i].deviation);
    const auto& m = rows[3 + i];
    EXPECT_EQ(m.tier, kAllTiers[i]);
    ASSERT_TRUE(m.deviation);
    EXPECT_NEAR(m.deviation->percent, expect[i], 0.1);
    EXPECT_EQ(m.deviation->bin, Bin::DecMid);
  }
}

TEST(Render, MissingBaseline) {
  std::vector<GroupAggregate> agg = {{"GPT-4o", Tier::Good, AspectName::Summary, Metric::NumNodes, 3, Basis::PerReviewMean}};
  EXPECT_EQ(code_of([&] { render_comparison(agg); }), Errc::MissingBaseline);
}

TEST(Render, HumanOnlyAndZeroBaseline) {
  std::vector<GroupAggregate> agg = {{"Human", Tier::Good, AspectName::Summary, Metric::NumNodes, 3, Basis::PerReviewMean},
                                     {"Human", Tier::Weak, AspectName::Summary, Metric::NumEdges, 0, Basis::PerReviewMean}};
  auto rows = render_comparison(agg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_FALSE(r.deviation);
  agg.push_back({"Gemini", Tier::Weak, AspectName::Summary, Metric::NumEdges, 2, Basis::PerReviewMean});
  rows = render_comparison(agg);
  EXPECT_FALSE(rows.back().deviation);  // zero baseline leaves the cell blank
  EXPECT_NE(comparison_csv(rows).find("Gemini,summary,Weak,num_edges,2,,\n"), std::string::npos);
}

TEST(Render, QualityGradient) {
  EXPECT_NEAR(relative_ratio(13.68, 9.12), 50.0, 0.05);
  EXPECT_NEAR(relative_ratio(3.47, 6.04), -42.5, 0.1);
}

TEST(Render, ByteStable) {
  std::vector<GroupAggregate> agg;
  for (Tier t : kAllTiers)
    for (Metric m : kAllMetrics)
      for (const char* s : {"Gemini", "Human", "GPT-4o"})
        agg.push_back({s, t, AspectName::Strengths, m, 1.0 + static_cast<int>(t) + 0.1 * static_cast<int>(m) +
                                                           (s[0] == 'H' ? 0 : 0.37), basis_of(m)});
  const std::string a = comparison_csv(render_comparison(agg));
  std::reverse(agg.begin(), agg.end());
  const std::string b = comparison_csv(render_comparison(agg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(comparison_json(render_comparison(agg)).dump(), comparison_json(render_comparison(agg)).dump());
  EXPECT_EQ(a.substr(0, a.find('\n')), "source,aspect,tier,metric,value,percent,bin");
}

TEST(MetricsCsv, RoundTrip) {
  std::vector<MetricRow> rows = {metric_row("r1", AspectName::Questions, 3, 2), metric_row("r2", AspectName::Summary, 0)};
  rows[0].metrics.label_entropy = std::log(3.0);
  auto back = parse_metrics_csv(metrics_csv(rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].metrics, rows[0].metrics);
  EXPECT_EQ(back[1].review_id, "r2");
}
