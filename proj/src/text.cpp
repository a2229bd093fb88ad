#include "asraudit/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace asraudit {
namespace {

icu::UnicodeString nfc_lower(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  out.toLower(icu::Locale::getRoot());
  // Lowercasing can decompose (e.g. U+0130), so compose again.
  out = nfc->normalize(out, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  return out;
}

bool is_word_char(UChar32 c) {
  return u_isalnum(c) || u_hasBinaryProperty(c, UCHAR_ALPHABETIC) ||
         u_getCombiningClass(c) != 0 || u_charType(c) == U_NON_SPACING_MARK ||
         u_charType(c) == U_COMBINING_SPACING_MARK;
}

bool is_joiner(UChar32 c) {
  return c == U'\'' || c == 0x2019 /* right single quote */ || c == U'-' ||
         c == 0x2010 /* hyphen */ || c == 0x2011 /* non-breaking hyphen */;
}

void append_utf8(std::string& out, UChar32 c) {
  icu::UnicodeString(c).toUTF8String(out);
}

}  // namespace

TokenList normalize(std::string_view text) {
  const icu::UnicodeString s = nfc_lower(text);
  std::vector<UChar32> cps;
  cps.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    cps.push_back(c);
    i += U16_LENGTH(c);
  }

  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i];
    if (u_isUWhiteSpace(c) || u_iscntrl(c)) {
      flush();
      continue;
    }
    if (u_ispunct(c)) {
      const bool inner = is_joiner(c) && i > 0 && i + 1 < cps.size() &&
                         is_word_char(cps[i - 1]) && is_word_char(cps[i + 1]);
      if (!inner) continue;
    }
    append_utf8(current, c);
  }
  flush();
  return tokens;
}

std::string fold_case(std::string_view text) {
  std::string out;
  nfc_lower(text).toUTF8String(out);
  return out;
}

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  const auto* p = reinterpret_cast<const uint8_t*>(text.data());
  const auto len = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < len;) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) {
      out.emplace_back("\xEF\xBF\xBD");
    } else {
      out.emplace_back(text.substr(static_cast<std::size_t>(start),
                                   static_cast<std::size_t>(i - start)));
    }
  }
  return out;
}

std::string join(const TokenList& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace asraudit
