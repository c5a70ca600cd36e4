#pragma once

// Shared domain types for papers, reviews, extractions and embeddings, plus
// the canonical JSON form every pipeline stage reads and writes.
//
// The JSON schema is closed: unknown keys are rejected with the JSON pointer
// of the offending object. Serialization is canonical (sorted keys, two-space
// indent, UTF-8 passed through verbatim) so identical values produce
// identical bytes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reviewlens/error.hpp"

namespace reviewlens {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Closed enumerations
// ---------------------------------------------------------------------------

enum class SectionName {
  Abstract,
  Introduction,
  RelatedWork,
  MethodologyAndExperiments,
  ResultsAndDiscussions,
  ConclusionAndFutureWork,
};
inline constexpr std::size_t kNumSections = 6;
inline constexpr std::array<SectionName, kNumSections> kAllSections = {
    SectionName::Abstract,
    SectionName::Introduction,
    SectionName::RelatedWork,
    SectionName::MethodologyAndExperiments,
    SectionName::ResultsAndDiscussions,
    SectionName::ConclusionAndFutureWork,
};

enum class AspectName { Summary, Strengths, Weaknesses, Questions };
inline constexpr std::size_t kNumAspects = 4;
inline constexpr std::array<AspectName, kNumAspects> kAllAspects = {
    AspectName::Summary,
    AspectName::Strengths,
    AspectName::Weaknesses,
    AspectName::Questions,
};

enum class EntityLabel { Task, Method, Metric, Material, Generic, OtherScientificTerm };
inline constexpr std::size_t kNumEntityLabels = 6;
inline constexpr std::array<EntityLabel, kNumEntityLabels> kAllEntityLabels = {
    EntityLabel::Task,     EntityLabel::Method,  EntityLabel::Metric,
    EntityLabel::Material, EntityLabel::Generic, EntityLabel::OtherScientificTerm,
};

enum class RelationLabel { PartOf, UsedFor, FeatureOf, EvaluateFor, HyponymOf, Conjunction, Compare };
inline constexpr std::size_t kNumRelationLabels = 7;
inline constexpr std::array<RelationLabel, kNumRelationLabels> kAllRelationLabels = {
    RelationLabel::PartOf,    RelationLabel::UsedFor,     RelationLabel::FeatureOf,
    RelationLabel::EvaluateFor, RelationLabel::HyponymOf, RelationLabel::Conjunction,
    RelationLabel::Compare,
};

enum class Tier { Good, Borderline, Weak };
inline constexpr std::array<Tier, 3> kAllTiers = {Tier::Good, Tier::Borderline, Tier::Weak};

template <typename E>
constexpr std::size_t index_of(E e) noexcept {
  return static_cast<std::size_t>(e);
}

namespace detail {

inline constexpr std::array<std::string_view, kNumSections> kSectionNames = {
    "abstract",
    "introduction",
    "related_work",
    "methodology_and_experiments",
    "results_and_discussions",
    "conclusion_and_future_work",
};
inline constexpr std::array<std::string_view, kNumAspects> kAspectNames = {
    "summary", "strengths", "weaknesses", "questions"};
inline constexpr std::array<std::string_view, kNumEntityLabels> kEntityNames = {
    "Task", "Method", "Metric", "Material", "Generic", "OtherScientificTerm"};
inline constexpr std::array<std::string_view, kNumRelationLabels> kRelationNames = {
    "PartOf", "UsedFor", "FeatureOf", "EvaluateFor", "HyponymOf", "Conjunction", "Compare"};
inline constexpr std::array<std::string_view, 3> kTierNames = {"Good", "Borderline", "Weak"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

}  // namespace detail

constexpr std::string_view to_string(SectionName s) { return detail::kSectionNames[index_of(s)]; }
constexpr std::string_view to_string(AspectName a) { return detail::kAspectNames[index_of(a)]; }
constexpr std::string_view to_string(EntityLabel l) { return detail::kEntityNames[index_of(l)]; }
constexpr std::string_view to_string(RelationLabel l) { return detail::kRelationNames[index_of(l)]; }
constexpr std::string_view to_string(Tier t) { return detail::kTierNames[index_of(t)]; }

inline std::optional<SectionName> parse_section(std::string_view s) {
  return detail::lookup<SectionName>(detail::kSectionNames, s);
}
inline std::optional<AspectName> parse_aspect(std::string_view s) {
  return detail::lookup<AspectName>(detail::kAspectNames, s);
}
inline std::optional<EntityLabel> parse_entity_label(std::string_view s) {
  return detail::lookup<EntityLabel>(detail::kEntityNames, s);
}
inline std::optional<RelationLabel> parse_relation_label(std::string_view s) {
  return detail::lookup<RelationLabel>(detail::kRelationNames, s);
}
inline std::optional<Tier> parse_tier(std::string_view s) {
  return detail::lookup<Tier>(detail::kTierNames, s);
}

// Number of Unicode code points in a UTF-8 string. Character spans in
// extraction records are code-point offsets.
inline std::size_t utf8_length(std::string_view s) noexcept {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct SectionedPaper {
  std::string paper_id;
  std::string venue;
  int year = 0;
  std::string full_markdown;
  std::array<std::string, kNumSections> sections{};

  const std::string& section(SectionName s) const { return sections[index_of(s)]; }
  std::string& section(SectionName s) { return sections[index_of(s)]; }

  friend bool operator==(const SectionedPaper&, const SectionedPaper&) = default;
};

// Human reviewer, or a named model that generated the review.
struct ReviewSource {
  std::optional<std::string> model;

  static ReviewSource human() { return {}; }
  static ReviewSource from_model(std::string name) { return {std::move(name)}; }

  bool is_human() const noexcept { return !model.has_value(); }
  // Group key used in aggregate outputs.
  std::string label() const { return model ? *model : std::string("Human"); }

  friend bool operator==(const ReviewSource&, const ReviewSource&) = default;
};

struct ReviewRecord {
  std::string review_id;
  std::string paper_id;
  ReviewSource source;
  std::array<std::string, kNumAspects> aspects{};
  int soundness = 0;
  int presentation = 0;
  int contribution = 0;
  int overall_rating = 0;
  // Stored for completeness; no metric consumes it.
  int confidence = 0;

  const std::string& aspect(AspectName a) const { return aspects[index_of(a)]; }
  std::string& aspect(AspectName a) { return aspects[index_of(a)]; }

  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

struct Mention {
  std::string mention_id;
  std::string surface_text;
  std::size_t char_span_start = 0;  // code points, half-open
  std::size_t char_span_end = 0;
  EntityLabel entity_label = EntityLabel::Generic;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct Relation {
  std::string head_mention_id;
  std::string tail_mention_id;
  RelationLabel relation_label = RelationLabel::UsedFor;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct ExtractionRecord {
  std::string review_id;
  AspectName aspect = AspectName::Summary;
  std::vector<Mention> mentions;
  std::vector<Relation> relations;

  friend bool operator==(const ExtractionRecord&, const ExtractionRecord&) = default;
};

struct EmbeddingRecord {
  std::string owner_id;
  std::vector<double> vector;
  std::string model_tag;
  std::size_t dimension = 0;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

struct QualityTier {
  std::string paper_id;
  Tier tier = Tier::Borderline;
  double aggregated_score = 0.0;
  double score_std = 0.0;

  friend bool operator==(const QualityTier&, const QualityTier&) = default;
};

// Owner ids tie embeddings to review aspects and paper sections:
// "<review_id>#<aspect>" and "<paper_id>#<section>".
inline std::string aspect_owner_id(std::string_view review_id, AspectName a) {
  return std::string(review_id) + "#" + std::string(to_string(a));
}
inline std::string section_owner_id(std::string_view paper_id, SectionName s) {
  return std::string(paper_id) + "#" + std::string(to_string(s));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void check_range(int value, int lo, int hi, const char* field, const std::string& record) {
  if (value < lo || value > hi)
    throw Error(Errc::InvariantViolation, field,
                "record " + record + " has " + std::to_string(value) + ", expected " +
                    std::to_string(lo) + ".." + std::to_string(hi));
}

// Every nonempty line of a section must occur in the source markdown.
inline bool section_drawn_from(std::string_view section, std::string_view source) {
  std::size_t pos = 0;
  while (pos <= section.size()) {
    std::size_t nl = section.find('\n', pos);
    if (nl == std::string_view::npos) nl = section.size();
    std::string_view line = section.substr(pos, nl - pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty() && source.find(line) == std::string_view::npos) return false;
    pos = nl + 1;
  }
  return true;
}

}  // namespace detail

inline void validate_paper(const SectionedPaper& p) {
  if (p.paper_id.empty()) throw Error(Errc::InvariantViolation, "paper_id", "empty paper id");
  for (SectionName s : kAllSections) {
    if (!detail::section_drawn_from(p.section(s), p.full_markdown))
      throw Error(Errc::InvariantViolation, "sections." + std::string(to_string(s)),
                  "record " + p.paper_id + " has section text absent from full_markdown");
  }
}

inline void validate_review(const ReviewRecord& r) {
  if (r.review_id.empty()) throw Error(Errc::InvariantViolation, "review_id", "empty review id");
  if (r.source.model && (r.source.model->empty() || *r.source.model == "Human"))
    throw Error(Errc::InvariantViolation, "source", "record " + r.review_id + " has an invalid model name");
  detail::check_range(r.soundness, 1, 4, "soundness", r.review_id);
  detail::check_range(r.presentation, 1, 4, "presentation", r.review_id);
  detail::check_range(r.contribution, 1, 4, "contribution", r.review_id);
  detail::check_range(r.overall_rating, 1, 10, "overall_rating", r.review_id);
  detail::check_range(r.confidence, 1, 5, "confidence", r.review_id);
}

// Checks mention/relation integrity. When `aspect_text` is given, spans must
// also fall inside it.
inline void validate_extraction(const ExtractionRecord& rec,
                                std::optional<std::string_view> aspect_text = std::nullopt) {
  std::set<std::string_view> ids;
  const std::size_t bound = aspect_text ? utf8_length(*aspect_text) : SIZE_MAX;
  for (const Mention& m : rec.mentions) {
    if (!ids.insert(m.mention_id).second)
      throw Error(Errc::InvariantViolation, "mention_id",
                  "record " + rec.review_id + " repeats mention " + m.mention_id);
    if (m.char_span_start > m.char_span_end || m.char_span_end > bound)
      throw Error(Errc::InvariantViolation, "char_span",
                  "record " + rec.review_id + " mention " + m.mention_id + " out of bounds");
  }
  for (const Relation& r : rec.relations) {
    for (const std::string* end : {&r.head_mention_id, &r.tail_mention_id})
      if (!ids.contains(*end))
        throw Error(Errc::DanglingMention, *end, "record " + rec.review_id);
  }
}

// Dimension agreement within each model tag, and nonzero vectors.
inline void validate_embeddings(std::span<const EmbeddingRecord> records) {
  std::map<std::string_view, std::size_t> dims;
  for (const EmbeddingRecord& e : records) {
    if (e.dimension != e.vector.size())
      throw Error(Errc::InvariantViolation, "dimension", "record " + e.owner_id);
    auto [it, fresh] = dims.emplace(e.model_tag, e.dimension);
    if (!fresh && it->second != e.dimension)
      throw Error(Errc::InvariantViolation, "dimension",
                  "record " + e.owner_id + " disagrees with model_tag " + e.model_tag);
    if (std::all_of(e.vector.begin(), e.vector.end(), [](double x) { return x == 0.0; }))
      throw Error(Errc::InvariantViolation, "vector", "record " + e.owner_id + " is all zeros");
  }
}

// A corpus whose references resolve and whose records satisfy every type
// invariant. Papers are ordered by paper_id, reviews by (paper_id, review_id).
class ValidatedCorpus {
 public:
  ValidatedCorpus() = default;

  const std::vector<SectionedPaper>& papers() const noexcept { return papers_; }
  const std::vector<ReviewRecord>& reviews() const noexcept { return reviews_; }

  const SectionedPaper* find_paper(std::string_view id) const {
    auto it = std::lower_bound(papers_.begin(), papers_.end(), id,
                               [](const SectionedPaper& p, std::string_view k) { return p.paper_id < k; });
    return it != papers_.end() && it->paper_id == id ? &*it : nullptr;
  }
  const ReviewRecord* find_review(std::string_view id) const {
    auto it = review_index_.find(std::string(id));
    return it == review_index_.end() ? nullptr : &reviews_[it->second];
  }

  friend bool operator==(const ValidatedCorpus& a, const ValidatedCorpus& b) {
    return a.papers_ == b.papers_ && a.reviews_ == b.reviews_;
  }

 private:
  friend ValidatedCorpus validate_corpus(std::vector<SectionedPaper>, std::vector<ReviewRecord>);

  std::vector<SectionedPaper> papers_;
  std::vector<ReviewRecord> reviews_;
  std::unordered_map<std::string, std::size_t> review_index_;
};

inline ValidatedCorpus validate_corpus(std::vector<SectionedPaper> papers,
                                       std::vector<ReviewRecord> reviews) {
  std::sort(papers.begin(), papers.end(),
            [](const SectionedPaper& a, const SectionedPaper& b) { return a.paper_id < b.paper_id; });
  for (std::size_t i = 0; i < papers.size(); ++i) {
    validate_paper(papers[i]);
    if (i > 0 && papers[i].paper_id == papers[i - 1].paper_id)
      throw Error(Errc::InvariantViolation, "paper_id", "duplicate paper " + papers[i].paper_id);
  }
  std::sort(reviews.begin(), reviews.end(), [](const ReviewRecord& a, const ReviewRecord& b) {
    return std::tie(a.paper_id, a.review_id) < std::tie(b.paper_id, b.review_id);
  });

  ValidatedCorpus c;
  c.papers_ = std::move(papers);
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const ReviewRecord& r = reviews[i];
    validate_review(r);
    if (!c.find_paper(r.paper_id)) throw Error(Errc::DanglingReference, r.paper_id, "review " + r.review_id);
    if (!c.review_index_.emplace(r.review_id, i).second)
      throw Error(Errc::InvariantViolation, "review_id", "duplicate review " + r.review_id);
  }
  c.reviews_ = std::move(reviews);
  return c;
}

// ---------------------------------------------------------------------------
// Strict JSON reading
// ---------------------------------------------------------------------------

namespace detail {

// Reads one JSON object, tracking which keys were consumed so leftovers can
// be reported as schema errors.
class StrictObject {
 public:
  StrictObject(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
    if (!j_.is_object()) throw Error(Errc::SchemaError, ptr_.empty() ? "/" : ptr_, "expected object");
  }

  const json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw Error(Errc::SchemaError, where(), "missing key \"" + key + "\"");
    used_.insert(key);
    return *it;
  }
  const json* maybe(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  std::string child(const std::string& key) const { return ptr_ + "/" + key; }

  std::string str(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw Error(Errc::SchemaError, child(key), "expected string");
    return v.get<std::string>();
  }
  long long integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) throw Error(Errc::SchemaError, child(key), "expected integer");
    return v.get<long long>();
  }
  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw Error(Errc::SchemaError, child(key), "expected number");
    return v.get<double>();
  }
  const json& array(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) throw Error(Errc::SchemaError, child(key), "expected array");
    return v;
  }

  // Rejects unknown keys.
  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!used_.contains(k)) throw Error(Errc::SchemaError, where(), "unknown key \"" + k + "\"");
  }

 private:
  std::string where() const { return ptr_.empty() ? "/" : ptr_; }

  const json& j_;
  std::string ptr_;
  std::set<std::string> used_;
};

template <typename E, typename Parse>
E enum_field(StrictObject& o, const std::string& key, Parse parse) {
  std::string s = o.str(key);
  auto e = parse(s);
  if (!e) throw Error(Errc::SchemaError, o.child(key), "value \"" + s + "\" outside the closed set");
  return *e;
}

inline int int_field(StrictObject& o, const std::string& key) {
  long long v = o.integer(key);
  if (v < INT32_MIN || v > INT32_MAX) throw Error(Errc::SchemaError, o.child(key), "integer out of range");
  return static_cast<int>(v);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON conversion
// ---------------------------------------------------------------------------

inline json to_json(const SectionedPaper& p) {
  json sections = json::object();
  for (SectionName s : kAllSections) sections[std::string(to_string(s))] = p.section(s);
  return {{"paper_id", p.paper_id},
          {"venue", p.venue},
          {"year", p.year},
          {"full_markdown", p.full_markdown},
          {"sections", std::move(sections)}};
}

inline SectionedPaper paper_from_json(const json& j, const std::string& ptr = "") {
  detail::StrictObject o(j, ptr);
  SectionedPaper p;
  p.paper_id = o.str("paper_id");
  p.venue = o.str("venue");
  p.year = detail::int_field(o, "year");
  p.full_markdown = o.str("full_markdown");
  detail::StrictObject sec(o.at("sections"), o.child("sections"));
  for (SectionName s : kAllSections) p.section(s) = sec.str(std::string(to_string(s)));
  sec.finish();
  o.finish();
  return p;
}

inline json to_json(const ReviewSource& s) {
  if (s.is_human()) return {{"type", "human"}};
  return {{"type", "model"}, {"name", *s.model}};
}

inline ReviewSource source_from_json(const json& j, const std::string& ptr) {
  detail::StrictObject o(j, ptr);
  std::string type = o.str("type");
  ReviewSource src;
  if (type == "model") {
    src = ReviewSource::from_model(o.str("name"));
  } else if (type != "human") {
    throw Error(Errc::SchemaError, o.child("type"), "expected \"human\" or \"model\"");
  }
  o.finish();
  return src;
}

inline json to_json(const ReviewRecord& r) {
  json aspects = json::object();
  for (AspectName a : kAllAspects) aspects[std::string(to_string(a))] = r.aspect(a);
  return {{"review_id", r.review_id},
          {"paper_id", r.paper_id},
          {"source", to_json(r.source)},
          {"aspects", std::move(aspects)},
          {"soundness", r.soundness},
          {"presentation", r.presentation},
          {"contribution", r.contribution},
          {"overall_rating", r.overall_rating},
          {"confidence", r.confidence}};
}

inline ReviewRecord review_from_json(const json& j, const std::string& ptr = "") {
  detail::StrictObject o(j, ptr);
  ReviewRecord r;
  r.review_id = o.str("review_id");
  r.paper_id = o.str("paper_id");
  r.source = source_from_json(o.at("source"), o.child("source"));
  detail::StrictObject asp(o.at("aspects"), o.child("aspects"));
  for (AspectName a : kAllAspects) r.aspect(a) = asp.str(std::string(to_string(a)));
  asp.finish();
  r.soundness = detail::int_field(o, "soundness");
  r.presentation = detail::int_field(o, "presentation");
  r.contribution = detail::int_field(o, "contribution");
  r.overall_rating = detail::int_field(o, "overall_rating");
  r.confidence = detail::int_field(o, "confidence");
  o.finish();
  return r;
}

inline json to_json(const ExtractionRecord& rec) {
  json mentions = json::array();
  for (const Mention& m : rec.mentions)
    mentions.push_back({{"mention_id", m.mention_id},
                        {"surface_text", m.surface_text},
                        {"char_span_start", m.char_span_start},
                        {"char_span_end", m.char_span_end},
                        {"entity_label", to_string(m.entity_label)}});
  json relations = json::array();
  for (const Relation& r : rec.relations)
    relations.push_back({{"head_mention_id", r.head_mention_id},
                         {"tail_mention_id", r.tail_mention_id},
                         {"relation_label", to_string(r.relation_label)}});
  return {{"review_id", rec.review_id},
          {"aspect", to_string(rec.aspect)},
          {"mentions", std::move(mentions)},
          {"relations", std::move(relations)}};
}

inline ExtractionRecord extraction_from_json(const json& j, const std::string& ptr = "") {
  detail::StrictObject o(j, ptr);
  ExtractionRecord rec;
  rec.review_id = o.str("review_id");
  rec.aspect = detail::enum_field<AspectName>(o, "aspect", parse_aspect);
  const json& ms = o.array("mentions");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    detail::StrictObject m(ms[i], o.child("mentions") + "/" + std::to_string(i));
    Mention men;
    men.mention_id = m.str("mention_id");
    men.surface_text = m.str("surface_text");
    long long s = m.integer("char_span_start"), e = m.integer("char_span_end");
    if (s < 0 || e < 0) throw Error(Errc::SchemaError, m.child("char_span_start"), "negative span");
    men.char_span_start = static_cast<std::size_t>(s);
    men.char_span_end = static_cast<std::size_t>(e);
    men.entity_label = detail::enum_field<EntityLabel>(m, "entity_label", parse_entity_label);
    m.finish();
    rec.mentions.push_back(std::move(men));
  }
  const json& rs = o.array("relations");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    detail::StrictObject r(rs[i], o.child("relations") + "/" + std::to_string(i));
    Relation rel;
    rel.head_mention_id = r.str("head_mention_id");
    rel.tail_mention_id = r.str("tail_mention_id");
    rel.relation_label = detail::enum_field<RelationLabel>(r, "relation_label", parse_relation_label);
    r.finish();
    rec.relations.push_back(std::move(rel));
  }
  o.finish();
  return rec;
}

inline json to_json(const EmbeddingRecord& e) {
  return {{"owner_id", e.owner_id}, {"vector", e.vector}, {"model_tag", e.model_tag}, {"dimension", e.dimension}};
}

inline EmbeddingRecord embedding_from_json(const json& j, const std::string& ptr = "") {
  detail::StrictObject o(j, ptr);
  EmbeddingRecord e;
  e.owner_id = o.str("owner_id");
  e.model_tag = o.str("model_tag");
  long long d = o.integer("dimension");
  if (d < 1) throw Error(Errc::SchemaError, o.child("dimension"), "dimension must be positive");
  e.dimension = static_cast<std::size_t>(d);
  const json& v = o.array("vector");
  e.vector.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw Error(Errc::SchemaError, o.child("vector") + "/" + std::to_string(i), "expected number");
    e.vector.push_back(v[i].get<double>());
  }
  o.finish();
  return e;
}

inline json to_json(const QualityTier& t) {
  return {{"paper_id", t.paper_id},
          {"tier", to_string(t.tier)},
          {"aggregated_score", t.aggregated_score},
          {"score_std", t.score_std}};
}

inline QualityTier tier_from_json(const json& j, const std::string& ptr = "") {
  detail::StrictObject o(j, ptr);
  QualityTier t;
  t.paper_id = o.str("paper_id");
  t.tier = detail::enum_field<Tier>(o, "tier", parse_tier);
  t.aggregated_score = o.number("aggregated_score");
  t.score_std = o.number("score_std");
  if (t.score_std < 0) throw Error(Errc::SchemaError, o.child("score_std"), "negative");
  o.finish();
  return t;
}

// Canonical textual form of any JSON document the pipeline writes.
inline std::string canonical_dump(const json& j) { return j.dump(2, ' ', false) + "\n"; }

inline json parse_json_text(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaError, "/", e.what());
  }
}

// Generic helper for files holding a top-level array of records.
template <typename T, typename FromJson>
std::vector<T> records_from_json(const json& j, FromJson from) {
  if (!j.is_array()) throw Error(Errc::SchemaError, "/", "expected array");
  std::vector<T> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(from(j[i], "/" + std::to_string(i)));
  return out;
}

template <typename T>
json records_to_json(std::span<const T> records) {
  json arr = json::array();
  for (const T& r : records) arr.push_back(to_json(r));
  return arr;
}

// ---------------------------------------------------------------------------
// Corpus documents
// ---------------------------------------------------------------------------

inline std::string serialize_corpus(const ValidatedCorpus& c) {
  json papers = json::array();
  for (const auto& p : c.papers()) papers.push_back(to_json(p));
  json reviews = json::array();
  for (const auto& r : c.reviews()) reviews.push_back(to_json(r));
  return canonical_dump({{"papers", std::move(papers)}, {"reviews", std::move(reviews)}});
}

inline ValidatedCorpus parse_corpus(std::string_view bytes) {
  json j = parse_json_text(bytes);
  detail::StrictObject o(j, "");
  const json& ps = o.array("papers");
  const json& rs = o.array("reviews");
  o.finish();
  std::vector<SectionedPaper> papers;
  for (std::size_t i = 0; i < ps.size(); ++i) papers.push_back(paper_from_json(ps[i], "/papers/" + std::to_string(i)));
  std::vector<ReviewRecord> reviews;
  for (std::size_t i = 0; i < rs.size(); ++i) reviews.push_back(review_from_json(rs[i], "/reviews/" + std::to_string(i)));
  return validate_corpus(std::move(papers), std::move(reviews));
}

}  // namespace reviewlens
