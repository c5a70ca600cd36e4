#pragma once

// Per-(review, aspect) knowledge graphs built from extraction records, and
// their structural metrics: node count, edge count, average total degree and
// node-label entropy.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "reviewlens/corpus_model.hpp"
#include "reviewlens/normalize.hpp"

namespace reviewlens::kgraph {

struct Node {
  std::string node_id;
  std::string normalized_text;
  EntityLabel entity_label = EntityLabel::Generic;
  std::size_t mention_count = 1;

  friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
  std::string head_node_id;
  std::string tail_node_id;
  RelationLabel relation_label = RelationLabel::UsedFor;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct KnowledgeGraph {
  std::string review_id;
  AspectName aspect = AspectName::Summary;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

struct GraphMetrics {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  double avg_degree = 0;
  double label_entropy = 0;

  friend bool operator==(const GraphMetrics&, const GraphMetrics&) = default;
};

// Nodes are ordered by their earliest mention span; ids are "n0", "n1", ...
// With `merge_mentions`, mentions sharing a normalized surface form become one
// node labelled by majority vote (ties: the label of the earliest-span
// mention). Duplicate (head, tail, label) edges collapse. A relation between
// two mentions merged into one node yields a self-loop.
inline KnowledgeGraph build_graph(const ExtractionRecord& rec, bool merge_mentions = true) {
  std::unordered_map<std::string_view, std::size_t> mention_index;
  for (std::size_t i = 0; i < rec.mentions.size(); ++i) mention_index.emplace(rec.mentions[i].mention_id, i);
  for (const Relation& r : rec.relations)
    for (const std::string* end : {&r.head_mention_id, &r.tail_mention_id})
      if (!mention_index.contains(*end)) throw Error(Errc::DanglingMention, *end, "record " + rec.review_id);

  // Mentions in span order; stable so equal spans keep input order.
  std::vector<std::size_t> order(rec.mentions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rec.mentions[a].char_span_start < rec.mentions[b].char_span_start;
  });

  struct Group {
    std::string text;
    std::vector<std::size_t> members;  // span order
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> group_of_text;
  std::vector<std::size_t> node_of_mention(rec.mentions.size());
  for (std::size_t mi : order) {
    std::string key = grounding::normalize_surface(rec.mentions[mi].surface_text);
    std::size_t g;
    if (merge_mentions) {
      auto [it, fresh] = group_of_text.emplace(key, groups.size());
      if (fresh) groups.push_back({std::move(key), {}});
      g = it->second;
    } else {
      g = groups.size();
      groups.push_back({std::move(key), {}});
    }
    groups[g].members.push_back(mi);
    node_of_mention[mi] = g;
  }

  KnowledgeGraph kg;
  kg.review_id = rec.review_id;
  kg.aspect = rec.aspect;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::array<std::size_t, kNumEntityLabels> votes{};
    for (std::size_t mi : groups[g].members) ++votes[index_of(rec.mentions[mi].entity_label)];
    const std::size_t best = *std::max_element(votes.begin(), votes.end());
    EntityLabel label = rec.mentions[groups[g].members.front()].entity_label;
    for (std::size_t mi : groups[g].members)
      if (votes[index_of(rec.mentions[mi].entity_label)] == best) {
        label = rec.mentions[mi].entity_label;
        break;
      }
    kg.nodes.push_back({"n" + std::to_string(g), groups[g].text, label, groups[g].members.size()});
  }

  std::vector<std::tuple<std::size_t, std::size_t, RelationLabel>> edges;
  for (const Relation& r : rec.relations)
    edges.emplace_back(node_of_mention[mention_index.at(r.head_mention_id)],
                       node_of_mention[mention_index.at(r.tail_mention_id)], r.relation_label);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [h, t, l] : edges) kg.edges.push_back({kg.nodes[h].node_id, kg.nodes[t].node_id, l});
  return kg;
}

// avg_degree = sum of (in + out) degree over nodes / |V| = 2|E| / |V|.
// label_entropy = -sum p ln p over node labels, divided by ln(log_base).
inline GraphMetrics graph_metrics(const KnowledgeGraph& g, double log_base = std::numbers::e) {
  GraphMetrics m;
  m.num_nodes = g.nodes.size();
  m.num_edges = g.edges.size();
  if (m.num_nodes == 0) return m;
  m.avg_degree = 2.0 * static_cast<double>(m.num_edges) / static_cast<double>(m.num_nodes);

  std::array<std::size_t, kNumEntityLabels> counts{};
  for (const Node& n : g.nodes) ++counts[index_of(n.entity_label)];
  double h = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(m.num_nodes);
    h -= p * std::log(p);
  }
  // -0.0 for single-label graphs
  m.label_entropy = h == 0 ? 0.0 : h / std::log(log_base);
  return m;
}

inline json to_json(const KnowledgeGraph& g) {
  json nodes = json::array();
  for (const Node& n : g.nodes)
    nodes.push_back({{"node_id", n.node_id},
                     {"normalized_text", n.normalized_text},
                     {"entity_label", to_string(n.entity_label)},
                     {"mention_count", n.mention_count}});
  json edges = json::array();
  for (const Edge& e : g.edges)
    edges.push_back({{"head_node_id", e.head_node_id},
                     {"tail_node_id", e.tail_node_id},
                     {"relation_label", to_string(e.relation_label)}});
  return {{"review_id", g.review_id},
          {"aspect", to_string(g.aspect)},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

inline KnowledgeGraph graph_from_json(const json& j, const std::string& ptr = "") {
  using reviewlens::detail::StrictObject;
  using reviewlens::detail::enum_field;
  StrictObject o(j, ptr);
  KnowledgeGraph g;
  g.review_id = o.str("review_id");
  g.aspect = enum_field<AspectName>(o, "aspect", parse_aspect);
  const json& ns = o.array("nodes");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    StrictObject n(ns[i], o.child("nodes") + "/" + std::to_string(i));
    Node node;
    node.node_id = n.str("node_id");
    node.normalized_text = n.str("normalized_text");
    node.entity_label = enum_field<EntityLabel>(n, "entity_label", parse_entity_label);
    long long c = n.integer("mention_count");
    if (c < 1) throw Error(Errc::SchemaError, n.child("mention_count"), "must be >= 1");
    node.mention_count = static_cast<std::size_t>(c);
    n.finish();
    g.nodes.push_back(std::move(node));
  }
  const json& es = o.array("edges");
  for (std::size_t i = 0; i < es.size(); ++i) {
    StrictObject e(es[i], o.child("edges") + "/" + std::to_string(i));
    Edge edge;
    edge.head_node_id = e.str("head_node_id");
    edge.tail_node_id = e.str("tail_node_id");
    edge.relation_label = enum_field<RelationLabel>(e, "relation_label", parse_relation_label);
    e.finish();
    g.edges.push_back(std::move(edge));
  }
  o.finish();
  return g;
}

}  // namespace reviewlens::kgraph
