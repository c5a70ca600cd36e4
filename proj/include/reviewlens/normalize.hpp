#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "reviewlens/error.hpp"

namespace reviewlens::grounding {

namespace detail {

inline const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  return *n;
}

inline bool is_dash(UChar32 c) { return u_charType(c) == U_DASH_PUNCTUATION; }

}  // namespace detail

// Surface-form key shared by node merging and grounding:
// NFC, case fold, dash runs -> "-", punctuation trimmed from both ends of each
// whitespace token, tokens joined by single spaces.
//   "  Graph--Neural Networks " -> "graph-neural networks"
inline std::string normalize_surface(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u = detail::nfc().normalize(u, status);
  u.foldCase();
  u = detail::nfc().normalize(u, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");

  std::vector<icu::UnicodeString> tokens;
  icu::UnicodeString tok;
  auto flush = [&] {
    std::vector<UChar32> cps;
    for (int32_t i = 0; i < tok.length();) {
      UChar32 c = tok.char32At(i);
      cps.push_back(c);
      i += U16_LENGTH(c);
    }
    std::size_t b = 0, e = cps.size();
    while (b < e && u_ispunct(cps[b])) ++b;
    while (e > b && u_ispunct(cps[e - 1])) --e;
    if (b < e) {
      icu::UnicodeString t;
      for (std::size_t i = b; i < e; ++i) t.append(cps[i]);
      tokens.push_back(std::move(t));
    }
    tok.remove();
  };

  bool in_dash = false;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      in_dash = false;
      flush();
      continue;
    }
    if (detail::is_dash(c)) {
      if (!in_dash) tok.append(static_cast<UChar32>('-'));
      in_dash = true;
      continue;
    }
    in_dash = false;
    tok.append(c);
  }
  flush();

  icu::UnicodeString joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) joined.append(static_cast<UChar32>(' '));
    joined.append(tokens[i]);
  }
  std::string out;
  joined.toUTF8String(out);
  return out;
}

// Whitespace tokens of an already-normalized string.
inline std::vector<std::string_view> split_tokens(std::string_view normalized) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    std::size_t sp = normalized.find(' ', pos);
    if (sp == std::string_view::npos) sp = normalized.size();
    if (sp > pos) out.push_back(normalized.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

}  // namespace reviewlens::grounding
