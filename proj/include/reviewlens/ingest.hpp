#pragma once

// Paper and review acquisition: OpenReview-style note retrieval, mapping of
// review sub-notes to ReviewRecord, local-directory loading, and heading-based
// IMRaD segmentation of paper markdown.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reviewlens/corpus_model.hpp"

namespace reviewlens::ingest {

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

enum class UnmatchedPolicy { AttachToPrevious, Reject };

struct SegmenterConfig {
  // Lower-case heading patterns per section. A heading matches an alias when,
  // after numbering and emphasis are stripped, it equals the alias or starts
  // with the alias followed by a space.
  std::array<std::vector<std::string>, kNumSections> heading_aliases;
  UnmatchedPolicy unmatched_policy = UnmatchedPolicy::AttachToPrevious;

  static SegmenterConfig defaults() {
    SegmenterConfig c;
    c.heading_aliases[index_of(SectionName::Abstract)] = {"abstract"};
    c.heading_aliases[index_of(SectionName::Introduction)] = {"introduction"};
    c.heading_aliases[index_of(SectionName::RelatedWork)] = {"related work", "background"};
    c.heading_aliases[index_of(SectionName::MethodologyAndExperiments)] = {
        "method", "methods", "methodology", "approach", "experiments", "experimental setup"};
    c.heading_aliases[index_of(SectionName::ResultsAndDiscussions)] = {"results", "discussion", "evaluation",
                                                                       "analysis"};
    c.heading_aliases[index_of(SectionName::ConclusionAndFutureWork)] = {"conclusion", "conclusions",
                                                                         "future work", "limitations"};
    return c;
  }

  void validate() const {
    for (SectionName s : kAllSections)
      if (heading_aliases[index_of(s)].empty())
        throw Error(Errc::ConfigError, "segmenter.heading_aliases." + std::string(to_string(s)),
                    "every section needs at least one alias");
  }

  friend bool operator==(const SegmenterConfig&, const SegmenterConfig&) = default;
};

inline std::string_view to_string(UnmatchedPolicy p) {
  return p == UnmatchedPolicy::Reject ? "reject" : "attach_to_previous";
}

// Result of splitting one markdown document. Preamble holds everything before
// the first recognised heading; matched heading lines themselves belong to no
// section, so
//   sum(section sizes) + preamble.size() + heading_chars == markdown.size()
// for the newline-normalised markdown.
struct Segmentation {
  SectionedPaper paper;
  std::string preamble;
  std::size_t heading_chars = 0;
};

inline std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

namespace detail {

// Returns the heading title for an ATX heading line, or nullopt.
inline std::optional<std::string_view> atx_heading(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && i < 3 && line[i] == ' ') ++i;
  std::size_t hashes = 0;
  while (i + hashes < line.size() && line[i + hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return std::nullopt;
  i += hashes;
  if (i < line.size() && line[i] != ' ' && line[i] != '\t') return std::nullopt;
  std::string_view title = line.substr(i);
  while (!title.empty() && std::isspace(static_cast<unsigned char>(title.back()))) title.remove_suffix(1);
  while (!title.empty() && title.back() == '#') title.remove_suffix(1);
  return title;
}

// "3.1 Experimental Setup:" -> "experimental setup"
inline std::string clean_heading(std::string_view title) {
  std::string s;
  for (char c : title)
    if (c != '*' && c != '_') s.push_back(c);

  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  skip_space();
  // Arabic numbering: 1, 1., 2.3, 2.3.
  std::size_t j = i;
  while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
  if (j > i && std::isdigit(static_cast<unsigned char>(s[i])) && (j == s.size() || s[j] == ' ')) {
    i = j;
  } else {
    // Roman or single-letter appendix numbering followed by '.': "IV.", "A."
    j = i;
    while (j < s.size() && std::string_view("IVXLCA").find(s[j]) != std::string_view::npos) ++j;
    if (j > i && j < s.size() && s[j] == '.') i = j + 1;
  }
  skip_space();

  std::string out;
  bool pending_space = false;
  for (; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (out.back() == ':' || out.back() == '.')) out.pop_back();
  return out;
}

inline std::optional<SectionName> match_heading(const std::string& heading, const SegmenterConfig& cfg) {
  std::optional<SectionName> prefix_match;
  for (SectionName s : kAllSections) {
    for (const std::string& alias : cfg.heading_aliases[index_of(s)]) {
      std::string a = clean_heading(alias);
      if (heading == a) return s;
      if (!prefix_match && heading.size() > a.size() && heading.compare(0, a.size(), a) == 0 &&
          heading[a.size()] == ' ')
        prefix_match = s;
    }
  }
  return prefix_match;
}

}  // namespace detail

inline Segmentation segment_markdown(std::string_view markdown, const SegmenterConfig& cfg) {
  cfg.validate();
  Segmentation seg;
  seg.paper.full_markdown = normalize_newlines(markdown);
  const std::string& text = seg.paper.full_markdown;

  std::string* current = &seg.preamble;
  bool matched_any = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
    std::string_view line(text.data() + pos, end - pos);
    std::string_view bare = line;
    if (!bare.empty() && bare.back() == '\n') bare.remove_suffix(1);

    if (auto title = detail::atx_heading(bare)) {
      std::string cleaned = detail::clean_heading(*title);
      if (auto section = detail::match_heading(cleaned, cfg)) {
        current = &seg.paper.section(*section);
        matched_any = true;
        seg.heading_chars += line.size();
        pos = end;
        continue;
      }
      if (matched_any && cfg.unmatched_policy == UnmatchedPolicy::Reject)
        throw Error(Errc::Unsegmentable, std::string(*title), "heading matches no section alias");
    }
    current->append(line);
    pos = end;
  }
  if (!matched_any) throw Error(Errc::Unsegmentable, "markdown", "no heading matched any section alias");
  return seg;
}

inline SectionedPaper segment_paper(std::string_view markdown, const SegmenterConfig& cfg) {
  if (markdown.empty()) throw Error(Errc::Unsegmentable, "markdown", "empty document");
  return segment_markdown(markdown, cfg).paper;
}

// ---------------------------------------------------------------------------
// Note mapping
// ---------------------------------------------------------------------------

constexpr std::string_view display_name(AspectName a) {
  constexpr std::array<std::string_view, kNumAspects> names = {"Summary", "Strengths", "Weaknesses", "Questions"};
  return names[index_of(a)];
}

// OpenReview scores arrive either as bare integers or as "N: label" strings;
// the leading integer is the score.
inline int parse_score(const json& value, std::string_view field) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_string()) {
    const std::string& s = value.get_ref<const std::string&>();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (ec == std::errc() && ptr != s.data() + i) return v;
  }
  throw Error(Errc::ScoreParseError, std::string(field), "cannot read a leading integer from " + value.dump());
}

namespace detail {

// API v2 wraps every content field as {"value": ...}; v1 stores it directly.
inline const json* content_field(const json& content, const std::string& key) {
  auto it = content.find(key);
  if (it == content.end()) return nullptr;
  if (it->is_object()) {
    auto v = it->find("value");
    return v == it->end() ? nullptr : &*v;
  }
  return &*it;
}

inline bool is_review_reply(const json& reply) {
  auto ends_with_review = [](const json& inv) {
    if (!inv.is_string()) return false;
    std::string_view s = inv.get_ref<const std::string&>();
    return s.ends_with("Official_Review");
  };
  bool has_invitation_info = false;
  if (auto it = reply.find("invitations"); it != reply.end() && it->is_array()) {
    has_invitation_info = true;
    for (const json& inv : *it)
      if (ends_with_review(inv)) return true;
  }
  if (auto it = reply.find("invitation"); it != reply.end()) {
    has_invitation_info = true;
    if (ends_with_review(*it)) return true;
  }
  if (has_invitation_info) return false;
  auto c = reply.find("content");
  return c != reply.end() && c->is_object() && content_field(*c, "rating") != nullptr;
}

inline const json* replies_of(const json& note) {
  auto d = note.find("details");
  if (d == note.end() || !d->is_object()) return nullptr;
  for (const char* key : {"replies", "directReplies"}) {
    auto r = d->find(key);
    if (r != d->end() && r->is_array()) return &*r;
  }
  return nullptr;
}

}  // namespace detail

inline std::string note_id(const json& note) {
  auto it = note.find("id");
  if (it == note.end() || !it->is_string()) throw Error(Errc::SchemaError, "/id", "note without id");
  return it->get<std::string>();
}

inline std::string note_title(const json& note) {
  auto c = note.find("content");
  if (c == note.end()) return {};
  const json* t = detail::content_field(*c, "title");
  return t && t->is_string() ? t->get<std::string>() : std::string();
}

// One ReviewRecord per official review reply. Text aspects may be empty but
// must be present; numeric fields are never defaulted.
inline std::vector<ReviewRecord> map_reviews(const json& note) {
  std::vector<ReviewRecord> out;
  const std::string paper_id = note_id(note);
  const json* replies = detail::replies_of(note);
  if (!replies) return out;

  for (const json& reply : *replies) {
    if (!detail::is_review_reply(reply)) continue;
    const json& content = reply.at("content");
    ReviewRecord r;
    r.review_id = note_id(reply);
    r.paper_id = paper_id;
    r.source = ReviewSource::human();
    for (AspectName a : kAllAspects) {
      const json* v = detail::content_field(content, std::string(to_string(a)));
      if (!v || !v->is_string()) throw Error(Errc::MissingAspect, std::string(display_name(a)), "review " + r.review_id);
      r.aspect(a) = v->get<std::string>();
    }
    auto score = [&](const char* key) {
      const json* v = detail::content_field(content, key);
      if (!v) throw Error(Errc::ScoreParseError, key, "review " + r.review_id + " has no such field");
      return parse_score(*v, key);
    };
    r.soundness = score("soundness");
    r.presentation = score("presentation");
    r.contribution = score("contribution");
    r.overall_rating = score("rating");
    r.confidence = score("confidence");
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.review_id < b.review_id; });
  return out;
}

// ---------------------------------------------------------------------------
// Remote retrieval
// ---------------------------------------------------------------------------

struct FetchConfig {
  std::string base_url;
  std::string venue_id;
  int year = 0;
  int page_size = 1000;
  std::optional<std::string> auth_token;
  int retry_limit = 3;

  void validate() const {
    if (page_size < 1) throw Error(Errc::ConfigError, "page_size", "must be >= 1");
    if (retry_limit < 0 || retry_limit > 10) throw Error(Errc::ConfigError, "retry_limit", "must be in 0..10");
  }
};

struct HttpResponse {
  int status = 0;  // 0 means the request never completed
  std::string body;
};

// Performs GET on a path+query relative to the configured base URL.
using Transport = std::function<HttpResponse(const std::string& target)>;

inline std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

inline std::string notes_target(const FetchConfig& cfg, long long offset) {
  return "/notes?content.venueid=" + url_encode(cfg.venue_id) + "&details=replies&offset=" +
         std::to_string(offset) + "&limit=" + std::to_string(cfg.page_size);
}

// Drains every page of submissions. Notes come back sorted by id.
inline std::vector<json> fetch_submissions(const FetchConfig& cfg, const Transport& get) {
  cfg.validate();
  std::vector<json> notes;
  for (long long offset = 0;;) {
    const std::string target = notes_target(cfg, offset);
    HttpResponse resp;
    for (int attempt = 0;; ++attempt) {
      resp = get(target);
      bool transient = resp.status == 0 || resp.status == 429 || resp.status >= 500;
      if (!transient) break;
      if (attempt >= cfg.retry_limit)
        throw Error(Errc::RetryExhausted, target, "last status " + std::to_string(resp.status));
    }
    if (resp.status == 401 || resp.status == 403) throw Error(Errc::AuthError, std::to_string(resp.status));
    if (resp.status != 200) throw Error(Errc::HttpError, std::to_string(resp.status), target);

    json page = parse_json_text(resp.body);
    auto it = page.find("notes");
    if (it == page.end() || !it->is_array()) throw Error(Errc::SchemaError, "/notes", "page without notes array");
    const std::size_t got = it->size();
    for (json& n : *it) notes.push_back(std::move(n));
    offset += static_cast<long long>(got);

    bool short_page = got < static_cast<std::size_t>(cfg.page_size);
    auto count = page.find("count");
    bool counted_out = count != page.end() && count->is_number_integer() && offset >= count->get<long long>();
    if (got == 0 || short_page || counted_out) break;
  }
  std::sort(notes.begin(), notes.end(), [](const json& a, const json& b) { return note_id(a) < note_id(b); });
  return notes;
}

// ---------------------------------------------------------------------------
// Corpus assembly
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::Io, p.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Builds a corpus from fetched notes. Paper markdown is read from
// `papers_dir/<note id>.md` when present; papers without markdown keep empty
// text and empty sections.
inline ValidatedCorpus corpus_from_notes(std::span<const json> notes, const std::string& venue, int year,
                                         const std::optional<std::filesystem::path>& papers_dir,
                                         const SegmenterConfig& seg) {
  std::vector<SectionedPaper> papers;
  std::vector<ReviewRecord> reviews;
  for (const json& note : notes) {
    SectionedPaper p;
    std::string id = note_id(note);
    if (papers_dir && std::filesystem::exists(*papers_dir / (id + ".md")))
      p = segment_paper(read_file(*papers_dir / (id + ".md")), seg);
    p.paper_id = id;
    p.venue = venue;
    p.year = year;
    papers.push_back(std::move(p));
    for (ReviewRecord& r : map_reviews(note)) reviews.push_back(std::move(r));
  }
  return validate_corpus(std::move(papers), std::move(reviews));
}

// Local layout: `dir/papers/<paper_id>.md` and `dir/reviews/*.json`, where each
// review file holds one canonical review object or an array of them.
inline ValidatedCorpus load_local(const std::filesystem::path& dir, const std::string& venue, int year,
                                  const SegmenterConfig& seg) {
  namespace fs = std::filesystem;
  std::vector<fs::path> md_files, review_files;
  if (fs::is_directory(dir / "papers"))
    for (const auto& e : fs::directory_iterator(dir / "papers"))
      if (e.is_regular_file() && e.path().extension() == ".md") md_files.push_back(e.path());
  if (fs::is_directory(dir / "reviews"))
    for (const auto& e : fs::directory_iterator(dir / "reviews"))
      if (e.is_regular_file() && e.path().extension() == ".json") review_files.push_back(e.path());
  std::sort(md_files.begin(), md_files.end());
  std::sort(review_files.begin(), review_files.end());

  std::vector<SectionedPaper> papers;
  for (const fs::path& f : md_files) {
    SectionedPaper p = segment_paper(read_file(f), seg);
    p.paper_id = f.stem().string();
    p.venue = venue;
    p.year = year;
    papers.push_back(std::move(p));
  }
  std::vector<ReviewRecord> reviews;
  for (const fs::path& f : review_files) {
    json j = parse_json_text(read_file(f));
    if (j.is_array()) {
      for (ReviewRecord& r : records_from_json<ReviewRecord>(j, review_from_json)) reviews.push_back(std::move(r));
    } else {
      reviews.push_back(review_from_json(j));
    }
  }
  return validate_corpus(std::move(papers), std::move(reviews));
}

}  // namespace reviewlens::ingest
