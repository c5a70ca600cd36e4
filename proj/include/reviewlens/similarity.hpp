#pragma once

// Cosine alignment between review aspects and paper sections, and its
// aggregation by (source, tier, aspect, section).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "reviewlens/corpus_model.hpp"

namespace reviewlens::similarity {

inline constexpr std::size_t kCompensatedFrom = 512;

namespace detail {

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0, comp = 0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error(Errc::DimensionMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double dot = 0, uu = 0, vv = 0;
  if (u.size() >= kCompensatedFrom) {
    detail::CompensatedSum d, a, b;
    for (std::size_t i = 0; i < u.size(); ++i) {
      d.add(u[i] * v[i]);
      a.add(u[i] * u[i]);
      b.add(v[i] * v[i]);
    }
    dot = d.value(), uu = a.value(), vv = b.value();
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) {
      dot += u[i] * v[i];
      uu += u[i] * u[i];
      vv += v[i] * v[i];
    }
  }
  if (uu == 0 || vv == 0) throw Error(Errc::ZeroVector, uu == 0 ? "u" : "v");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

struct AlignmentMatrix {
  std::string review_id;
  std::array<std::array<double, kNumSections>, kNumAspects> cells{};
  // true where the aspect or section had no embedding
  std::array<std::array<bool, kNumSections>, kNumAspects> mask{};

  double cell(AspectName a, SectionName s) const { return cells[index_of(a)][index_of(s)]; }
  bool masked(AspectName a, SectionName s) const { return mask[index_of(a)][index_of(s)]; }
};

inline AlignmentMatrix alignment_matrix(std::string review_id,
                                        const std::map<AspectName, EmbeddingRecord>& review_embeddings,
                                        const std::map<SectionName, EmbeddingRecord>& section_embeddings) {
  const std::string* tag = nullptr;
  auto check_tag = [&](const EmbeddingRecord& e) {
    if (!tag)
      tag = &e.model_tag;
    else if (*tag != e.model_tag)
      throw Error(Errc::ModelTagMismatch, e.owner_id, e.model_tag + " vs " + *tag);
  };
  for (const auto& [_, e] : review_embeddings) check_tag(e);
  for (const auto& [_, e] : section_embeddings) check_tag(e);

  AlignmentMatrix m;
  m.review_id = std::move(review_id);
  for (AspectName a : kAllAspects) {
    auto ra = review_embeddings.find(a);
    for (SectionName s : kAllSections) {
      auto ss = section_embeddings.find(s);
      bool absent = ra == review_embeddings.end() || ss == section_embeddings.end();
      m.mask[index_of(a)][index_of(s)] = absent;
      m.cells[index_of(a)][index_of(s)] = absent ? 0.0 : cosine(ra->second.vector, ss->second.vector);
    }
  }
  return m;
}

struct AlignmentAggregate {
  std::string source;
  Tier tier = Tier::Good;
  AspectName aspect = AspectName::Summary;
  SectionName section = SectionName::Abstract;
  double mean = 0;
  std::size_t count = 0;

  auto key() const { return std::make_tuple(source, tier, aspect, section); }
};

inline std::unordered_map<std::string, Tier> tier_lookup(std::span<const QualityTier> tiers) {
  std::unordered_map<std::string, Tier> out;
  for (const QualityTier& t : tiers) out.emplace(t.paper_id, t.tier);
  return out;
}

// Unweighted per-review mean of unmasked cells. Groups with no unmasked
// cell are omitted; output is ordered by key.
inline std::vector<AlignmentAggregate> aggregate_alignment(std::span<const AlignmentMatrix> matrices,
                                                           const ValidatedCorpus& corpus,
                                                           std::span<const QualityTier> tiers) {
  const auto tier_of = tier_lookup(tiers);
  std::vector<const AlignmentMatrix*> ordered;
  for (const AlignmentMatrix& m : matrices) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->review_id < b->review_id; });

  using Key = std::tuple<std::string, Tier, AspectName, SectionName>;
  std::map<Key, std::pair<double, std::size_t>> acc;
  for (const AlignmentMatrix* m : ordered) {
    const ReviewRecord* r = corpus.find_review(m->review_id);
    if (!r) throw Error(Errc::DanglingReference, m->review_id, "alignment matrix for unknown review");
    auto t = tier_of.find(r->paper_id);
    if (t == tier_of.end()) throw Error(Errc::UnknownTier, r->paper_id, "review " + r->review_id);
    for (AspectName a : kAllAspects)
      for (SectionName s : kAllSections) {
        if (m->masked(a, s)) continue;
        auto& [sum, n] = acc[Key{r->source.label(), t->second, a, s}];
        sum += m->cell(a, s);
        ++n;
      }
  }
  std::vector<AlignmentAggregate> out;
  for (const auto& [k, v] : acc)
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), v.first / v.second, v.second});
  return out;
}

// Count-weighted merge of two aggregate lists over disjoint review sets.
inline std::vector<AlignmentAggregate> merge_aggregates(std::span<const AlignmentAggregate> a,
                                                        std::span<const AlignmentAggregate> b) {
  std::map<std::tuple<std::string, Tier, AspectName, SectionName>, AlignmentAggregate> acc;
  for (auto list : {a, b})
    for (const AlignmentAggregate& g : list) {
      auto [it, fresh] = acc.emplace(g.key(), g);
      if (fresh) continue;
      AlignmentAggregate& m = it->second;
      const std::size_t n = m.count + g.count;
      m.mean = (m.mean * static_cast<double>(m.count) + g.mean * static_cast<double>(g.count)) / static_cast<double>(n);
      m.count = n;
    }
  std::vector<AlignmentAggregate> out;
  for (auto& [_, g] : acc) out.push_back(std::move(g));
  return out;
}

// Alignment matrices for every review of a tiered paper, looking embeddings
// up by owner id. Aspects with empty text and sections with empty text are
// treated as absent even when an embedding exists.
inline std::vector<AlignmentMatrix> corpus_alignment(const ValidatedCorpus& corpus,
                                                     std::span<const QualityTier> tiers,
                                                     std::span<const EmbeddingRecord> embeddings) {
  std::unordered_map<std::string, const EmbeddingRecord*> by_owner;
  for (const EmbeddingRecord& e : embeddings) by_owner.emplace(e.owner_id, &e);
  const auto tier_of = tier_lookup(tiers);

  std::vector<AlignmentMatrix> out;
  for (const ReviewRecord& r : corpus.reviews()) {
    if (!tier_of.contains(r.paper_id)) continue;
    const SectionedPaper* p = corpus.find_paper(r.paper_id);
    std::map<AspectName, EmbeddingRecord> aspects;
    std::map<SectionName, EmbeddingRecord> sections;
    for (AspectName a : kAllAspects) {
      auto it = by_owner.find(aspect_owner_id(r.review_id, a));
      if (!r.aspect(a).empty() && it != by_owner.end()) aspects.emplace(a, *it->second);
    }
    for (SectionName s : kAllSections) {
      auto it = by_owner.find(section_owner_id(p->paper_id, s));
      if (!p->section(s).empty() && it != by_owner.end()) sections.emplace(s, *it->second);
    }
    out.push_back(alignment_matrix(r.review_id, aspects, sections));
  }
  return out;
}

inline json to_json(const AlignmentMatrix& m) {
  json cells = json::object();
  for (AspectName a : kAllAspects) {
    json row = json::object();
    for (SectionName s : kAllSections)
      row[std::string(to_string(s))] = m.masked(a, s) ? json(nullptr) : json(m.cell(a, s));
    cells[std::string(to_string(a))] = std::move(row);
  }
  return {{"review_id", m.review_id}, {"cells", std::move(cells)}};
}

inline AlignmentMatrix matrix_from_json(const json& j, const std::string& ptr = "") {
  reviewlens::detail::StrictObject o(j, ptr);
  AlignmentMatrix m;
  m.review_id = o.str("review_id");
  reviewlens::detail::StrictObject cells(o.at("cells"), o.child("cells"));
  for (AspectName a : kAllAspects) {
    const std::string an(to_string(a));
    reviewlens::detail::StrictObject row(cells.at(an), cells.child(an));
    for (SectionName s : kAllSections) {
      const std::string sn(to_string(s));
      const json& v = row.at(sn);
      if (v.is_null()) {
        m.mask[index_of(a)][index_of(s)] = true;
      } else if (v.is_number()) {
        m.cells[index_of(a)][index_of(s)] = v.get<double>();
      } else {
        throw Error(Errc::SchemaError, row.child(sn), "expected number or null");
      }
    }
    row.finish();
  }
  cells.finish();
  o.finish();
  return m;
}

inline json to_json(const AlignmentAggregate& g) {
  return {{"source", g.source},
          {"tier", to_string(g.tier)},
          {"aspect", to_string(g.aspect)},
          {"section", to_string(g.section)},
          {"mean", g.mean},
          {"count", g.count}};
}

inline AlignmentAggregate aggregate_from_json(const json& j, const std::string& ptr = "") {
  reviewlens::detail::StrictObject o(j, ptr);
  AlignmentAggregate g;
  g.source = o.str("source");
  g.tier = reviewlens::detail::enum_field<Tier>(o, "tier", parse_tier);
  g.aspect = reviewlens::detail::enum_field<AspectName>(o, "aspect", parse_aspect);
  g.section = reviewlens::detail::enum_field<SectionName>(o, "section", parse_section);
  g.mean = o.number("mean");
  long long c = o.integer("count");
  if (c < 1) throw Error(Errc::SchemaError, o.child("count"), "count must be >= 1");
  g.count = static_cast<std::size_t>(c);
  o.finish();
  return g;
}

}  // namespace reviewlens::similarity
