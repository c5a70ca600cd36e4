#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "reviewlens/kgraph.hpp"
#include "test_util.hpp"

using namespace reviewlens;
using namespace reviewlens::kgraph;
using testutil::code_of;

namespace {

ExtractionRecord record(std::vector<Mention> mentions, std::vector<Relation> relations = {}) {
  return {"r1", AspectName::Weaknesses, std::move(mentions), std::move(relations)};
}

KnowledgeGraph graph(std::vector<EntityLabel> labels, std::vector<std::pair<int, int>> edges) {
  KnowledgeGraph g;
  for (std::size_t i = 0; i < labels.size(); ++i)
    g.nodes.push_back({"n" + std::to_string(i), "t" + std::to_string(i), labels[i], 1});
  for (auto [h, t] : edges) g.edges.push_back({"n" + std::to_string(h), "n" + std::to_string(t), RelationLabel::UsedFor});
  return g;
}

// A record whose mentions spell out the graph's nodes, each repeated
// mention_count times, in node order.
ExtractionRecord record_of(const KnowledgeGraph& g) {
  ExtractionRecord rec{g.review_id, g.aspect, {}, {}};
  std::map<std::string, std::string> first_mention;
  std::size_t pos = 0;
  for (const Node& n : g.nodes)
    for (std::size_t k = 0; k < n.mention_count; ++k) {
      std::string id = "m" + std::to_string(rec.mentions.size());
      first_mention.emplace(n.node_id, id);
      rec.mentions.push_back({id, n.normalized_text, pos, pos + utf8_length(n.normalized_text), n.entity_label});
      pos += utf8_length(n.normalized_text) + 1;
    }
  for (const Edge& e : g.edges)
    rec.relations.push_back({first_mention.at(e.head_node_id), first_mention.at(e.tail_node_id), e.relation_label});
  return rec;
}

}  // namespace

TEST(BuildGraph, CaseVariantsMerge) {
  auto g = build_graph(record({{"m0", "CNN", 0, 3, EntityLabel::Method}, {"m1", "cnn", 10, 13, EntityLabel::Method}}));
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_EQ(g.nodes[0].mention_count, 2u);
  EXPECT_EQ(g.nodes[0].normalized_text, "cnn");
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, ThreeMentionsOneRelation) {
  auto g = build_graph(record({{"m1", "model", 0, 5, EntityLabel::Method},
                               {"m2", "dataset", 6, 13, EntityLabel::Material},
                               {"m3", "accuracy", 14, 22, EntityLabel::Metric}},
                              {{"m1", "m2", RelationLabel::UsedFor}}));
  EXPECT_EQ(g.nodes.size(), 3u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], (Edge{"n0", "n1", RelationLabel::UsedFor}));
}

TEST(BuildGraph, DanglingMention) {
  auto rec = record({{"m1", "model", 0, 5, EntityLabel::Method}}, {{"m1", "m7", RelationLabel::Compare}});
  EXPECT_EQ(code_of([&] { build_graph(rec); }), Errc::DanglingMention);
}

TEST(BuildGraph, MajorityLabelTiesToEarliestSpan) {
  auto g = build_graph(record({{"a", "bert", 20, 24, EntityLabel::Generic},
                               {"b", "BERT", 0, 4, EntityLabel::Method},
                               {"c", "Bert", 30, 34, EntityLabel::Generic},
                               {"d", "gnn", 40, 43, EntityLabel::Task},
                               {"e", "GNN", 5, 8, EntityLabel::Method}}));
  ASSERT_EQ(g.nodes.size(), 2u);
  EXPECT_EQ(g.nodes[0].normalized_text, "bert");
  EXPECT_EQ(g.nodes[0].entity_label, EntityLabel::Generic);  // 2 votes to 1
  EXPECT_EQ(g.nodes[1].entity_label, EntityLabel::Method);   // 1-1 tie, earliest span wins
}

TEST(BuildGraph, DuplicateEdgesCollapseAndSelfLoopKept) {
  auto g = build_graph(record({{"m0", "CNN", 0, 3, EntityLabel::Method},
                               {"m1", "cnn", 4, 7, EntityLabel::Method},
                               {"m2", "loss", 8, 12, EntityLabel::Metric}},
                              {{"m0", "m1", RelationLabel::Conjunction},
                               {"m0", "m2", RelationLabel::EvaluateFor},
                               {"m1", "m2", RelationLabel::EvaluateFor}}));
  ASSERT_EQ(g.nodes.size(), 2u);
  ASSERT_EQ(g.edges.size(), 2u);
  auto m = graph_metrics(g);
  EXPECT_DOUBLE_EQ(m.avg_degree, 2.0);  // self-loop counts in and out
}

TEST(BuildGraph, WithoutMerging) {
  auto rec = record({{"m0", "CNN", 0, 3, EntityLabel::Method}, {"m1", "cnn", 4, 7, EntityLabel::Method}});
  EXPECT_EQ(build_graph(rec, false).nodes.size(), 2u);
}

TEST(Metrics, Examples) {
  auto m = graph_metrics(graph({EntityLabel::Method, EntityLabel::Method, EntityLabel::Method}, {{0, 1}, {1, 2}}));
  EXPECT_NEAR(m.avg_degree, 4.0 / 3.0, 1e-12);
  EXPECT_EQ(m.label_entropy, 0.0);
  m = graph_metrics(graph({EntityLabel::Method, EntityLabel::Task}, {}));
  EXPECT_NEAR(m.label_entropy, std::log(2.0), 1e-12);
  EXPECT_NEAR(graph_metrics(graph({EntityLabel::Method, EntityLabel::Task}, {}), 2.0).label_entropy, 1.0, 1e-12);
  EXPECT_EQ(graph_metrics(KnowledgeGraph{}), GraphMetrics{});
}

TEST(Metrics, UniformLabelsMaximiseEntropy) {
  std::vector<EntityLabel> all(kAllEntityLabels.begin(), kAllEntityLabels.end());
  EXPECT_NEAR(graph_metrics(graph(all, {})).label_entropy, std::log(6.0), 1e-12);
  all.back() = EntityLabel::Task;
  EXPECT_LT(graph_metrics(graph(all, {})).label_entropy, std::log(6.0));
}

TEST(Metrics, RandomGraphsMatchOracle) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 100; ++i) {
    auto rec = oracle::random_extraction(rng);
    auto g = build_graph(rec);
    auto m = graph_metrics(g);
    auto o = oracle::graph_summary(rec);
    ASSERT_LE(m.num_nodes, 15u);
    EXPECT_EQ(m.num_nodes, o.num_nodes);
    EXPECT_EQ(m.num_edges, o.num_edges);
    EXPECT_NEAR(m.avg_degree, o.avg_degree, 1e-9);
    EXPECT_NEAR(m.label_entropy, o.label_entropy, 1e-9);
    if (m.num_nodes > 0) {
      EXPECT_EQ(m.avg_degree * static_cast<double>(m.num_nodes), 2.0 * static_cast<double>(m.num_edges));
    }
    EXPECT_GE(m.label_entropy, 0.0);
    EXPECT_LE(m.label_entropy, std::log(6.0) + 1e-12);
  }
}

TEST(BuildGraph, Idempotent) {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 100; ++i) {
    auto g = build_graph(oracle::random_extraction(rng));
    EXPECT_EQ(build_graph(record_of(g)), g);
    EXPECT_EQ(graph_from_json(to_json(g)), g);
  }
}

TEST(BuildGraph, NodeTextUnique) {
  std::mt19937_64 rng(303);
  for (int i = 0; i < 100; ++i) {
    auto g = build_graph(oracle::random_extraction(rng));
    std::set<std::string> texts;
    for (const Node& n : g.nodes) EXPECT_TRUE(texts.insert(n.normalized_text).second);
  }
}
