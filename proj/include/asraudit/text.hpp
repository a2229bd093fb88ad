#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace asraudit {

using Token = std::string;
using TokenList = std::vector<Token>;

// NFC-compose, lowercase, drop Unicode punctuation (apostrophes and hyphens
// survive when both neighbours are letters or digits), split on whitespace.
// Total over arbitrary bytes: invalid UTF-8 sequences become U+FFFD.
TokenList normalize(std::string_view text);

// Lowercase (root locale) after NFC composition, no tokenization. Used for
// embedding-table keys so lookups agree with normalize().
std::string fold_case(std::string_view text);

// Splits UTF-8 into code points, each returned as its own UTF-8 string.
std::vector<std::string> utf8_chars(std::string_view text);

std::string join(const TokenList& tokens, std::string_view sep = " ");

}  // namespace asraudit
