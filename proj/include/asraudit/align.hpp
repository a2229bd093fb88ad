#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asraudit/text.hpp"

namespace asraudit {

enum class AlignLevel { word, character };

enum class EditOp { hit, sub, del, ins };

struct AlignedPair {
  EditOp op;
  std::optional<std::string> ref;  // absent for insertions
  std::optional<std::string> hyp;  // absent for deletions

  bool operator==(const AlignedPair&) const = default;
};

struct AlignmentResult {
  AlignLevel level = AlignLevel::word;
  std::size_t hits = 0;
  std::size_t subs = 0;
  std::size_t dels = 0;
  std::size_t ins = 0;
  std::vector<AlignedPair> ops;

  std::size_t n_ref() const { return hits + subs + dels; }
  std::size_t n_hyp() const { return hits + subs + ins; }
  std::size_t errors() const { return subs + dels + ins; }
};

// Unit-cost Levenshtein alignment. On backtrace, equal diagonal moves are
// hits; otherwise the first optimal move in the order sub, del, ins wins, so
// the op sequence is a pure function of the inputs.
AlignmentResult align(std::span<const std::string> ref,
                      std::span<const std::string> hyp,
                      AlignLevel level = AlignLevel::word);

// Character alignment over the space-joined normalized tokens; inter-word
// spaces are characters. Accepts raw text and normalizes it first.
AlignmentResult align_chars(std::string_view ref_text,
                            std::string_view hyp_text);
AlignmentResult align_chars(const TokenList& ref_tokens,
                            const TokenList& hyp_tokens);

// Unit-cost edit distance without backtrace; O(min(n,m)) memory.
std::size_t edit_distance(std::span<const std::string> a,
                          std::span<const std::string> b);

std::string_view to_string(EditOp op);

}  // namespace asraudit
