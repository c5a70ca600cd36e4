#pragma once

// Contextual grounding: a graph node is in-context when its normalized
// surface text occurs in the normalized source paper.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reviewlens/corpus_model.hpp"
#include "reviewlens/kgraph.hpp"
#include "reviewlens/normalize.hpp"

namespace reviewlens::grounding {

struct GroundingResult {
  std::string review_id;
  AspectName aspect = AspectName::Summary;
  std::vector<std::string> in_context;
  std::vector<std::string> out_of_context;
  // Out-of-context count as a percentage of the in-context count; empty when
  // nothing is in context.
  std::optional<double> ratio;

  friend bool operator==(const GroundingResult&, const GroundingResult&) = default;
};

// The "In-to-Out" ratio: 100 * out / in, undefined for in == 0.
inline std::optional<double> in_to_out_ratio(std::size_t in_count, std::size_t out_count) {
  if (in_count == 0) return std::nullopt;
  return 100.0 * static_cast<double>(out_count) / static_cast<double>(in_count);
}

// A paper's normalized text, prepared once and shared across its reviews.
class NormalizedPaper {
 public:
  explicit NormalizedPaper(std::string_view full_markdown)
      : text_(normalize_surface(full_markdown)), tokens_(split_tokens(text_)) {}

  NormalizedPaper(const NormalizedPaper&) = delete;
  NormalizedPaper& operator=(const NormalizedPaper&) = delete;

  const std::string& text() const noexcept { return text_; }

  bool contains(std::string_view normalized) const { return text_.find(normalized) != std::string::npos; }

  // Token-set Jaccard >= `threshold` against some window of the paper with
  // as many tokens as the query.
  bool fuzzy_contains(std::string_view normalized, double threshold = 0.8) const {
    auto q = split_tokens(normalized);
    if (q.empty() || q.size() > tokens_.size()) return false;
    std::set<std::string_view> qs(q.begin(), q.end());
    for (std::size_t i = 0; i + q.size() <= tokens_.size(); ++i) {
      std::set<std::string_view> ws(tokens_.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens_.begin() + static_cast<std::ptrdiff_t>(i + q.size()));
      std::size_t inter = 0;
      for (std::string_view t : qs) inter += ws.count(t);
      const std::size_t uni = qs.size() + ws.size() - inter;
      if (static_cast<double>(inter) >= threshold * static_cast<double>(uni)) return true;
    }
    return false;
  }

 private:
  std::string text_;
  std::vector<std::string_view> tokens_;
};

inline GroundingResult classify_entities(const kgraph::KnowledgeGraph& g, const NormalizedPaper& paper,
                                         bool fuzzy = false) {
  GroundingResult r;
  r.review_id = g.review_id;
  r.aspect = g.aspect;
  for (const kgraph::Node& n : g.nodes) {
    // Node text is already normalized by build_graph; normalizing again is a
    // no-op for it and covers hand-built graphs.
    const std::string key = normalize_surface(n.normalized_text);
    bool in = !key.empty() && (paper.contains(key) || (fuzzy && paper.fuzzy_contains(key)));
    (in ? r.in_context : r.out_of_context).push_back(n.node_id);
  }
  std::sort(r.in_context.begin(), r.in_context.end());
  std::sort(r.out_of_context.begin(), r.out_of_context.end());
  r.ratio = in_to_out_ratio(r.in_context.size(), r.out_of_context.size());
  return r;
}

inline GroundingResult classify_entities(const kgraph::KnowledgeGraph& g, const SectionedPaper& paper,
                                         bool fuzzy = false) {
  return classify_entities(g, NormalizedPaper(paper.full_markdown), fuzzy);
}

inline json to_json(const GroundingResult& r) {
  return {{"review_id", r.review_id},
          {"aspect", to_string(r.aspect)},
          {"in_context", r.in_context},
          {"out_of_context", r.out_of_context},
          {"in_count", r.in_context.size()},
          {"out_count", r.out_of_context.size()},
          {"ratio", r.ratio ? json(*r.ratio) : json(nullptr)}};
}

inline GroundingResult grounding_from_json(const json& j, const std::string& ptr = "") {
  using reviewlens::detail::StrictObject;
  StrictObject o(j, ptr);
  GroundingResult r;
  r.review_id = o.str("review_id");
  r.aspect = reviewlens::detail::enum_field<AspectName>(o, "aspect", parse_aspect);
  auto ids = [&](const std::string& key) {
    std::vector<std::string> out;
    const json& a = o.array(key);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_string()) throw Error(Errc::SchemaError, o.child(key) + "/" + std::to_string(i), "expected string");
      out.push_back(a[i].get<std::string>());
    }
    return out;
  };
  r.in_context = ids("in_context");
  r.out_of_context = ids("out_of_context");
  if (o.integer("in_count") != static_cast<long long>(r.in_context.size()) ||
      o.integer("out_count") != static_cast<long long>(r.out_of_context.size()))
    throw Error(Errc::SchemaError, ptr.empty() ? "/" : ptr, "counts disagree with id lists");
  const json& ratio = o.at("ratio");
  if (!ratio.is_null()) {
    if (!ratio.is_number()) throw Error(Errc::SchemaError, o.child("ratio"), "expected number or null");
    r.ratio = ratio.get<double>();
  }
  o.finish();
  return r;
}

}  // namespace reviewlens::grounding
