#pragma once

#include <string>

#include <gtest/gtest.h>

#include "reviewlens/corpus_model.hpp"

namespace testutil {

using namespace reviewlens;

inline Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

inline SectionedPaper make_paper(std::string id, std::string body = "We study graphs with a transformer.") {
  SectionedPaper p;
  p.paper_id = std::move(id);
  p.venue = "V";
  p.year = 2025;
  p.full_markdown = "## Abstract\n" + body + "\n";
  p.section(SectionName::Abstract) = body + "\n";
  return p;
}

inline ReviewRecord make_review(std::string id, std::string paper_id, std::optional<std::string> model = {},
                                int rating = 6) {
  ReviewRecord r;
  r.review_id = std::move(id);
  r.paper_id = std::move(paper_id);
  r.source = model ? ReviewSource::from_model(*model) : ReviewSource::human();
  for (AspectName a : kAllAspects) r.aspect(a) = std::string(to_string(a)) + " text";
  r.soundness = r.presentation = r.contribution = 3;
  r.overall_rating = rating;
  r.confidence = 4;
  return r;
}

}  // namespace testutil
