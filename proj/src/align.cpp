#include "asraudit/align.hpp"

#include <algorithm>
#include <cstdint>

namespace asraudit {

AlignmentResult align(std::span<const std::string> ref,
                      std::span<const std::string> hyp, AlignLevel level) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> d((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * w] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag =
          d[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u);
      const std::uint32_t up = d[(i - 1) * w + j] + 1;
      const std::uint32_t left = d[i * w + j - 1] + 1;
      d[i * w + j] = std::min({diag, up, left});
    }
  }

  AlignmentResult r;
  r.level = level;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t cur = d[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      const std::uint32_t diag = d[(i - 1) * w + j - 1];
      if (same && diag == cur) {
        r.ops.push_back({EditOp::hit, ref[i - 1], hyp[j - 1]});
        ++r.hits;
        --i, --j;
        continue;
      }
      if (!same && diag + 1 == cur) {
        r.ops.push_back({EditOp::sub, ref[i - 1], hyp[j - 1]});
        ++r.subs;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && d[(i - 1) * w + j] + 1 == cur) {
      r.ops.push_back({EditOp::del, ref[i - 1], std::nullopt});
      ++r.dels;
      --i;
      continue;
    }
    r.ops.push_back({EditOp::ins, std::nullopt, hyp[j - 1]});
    ++r.ins;
    --j;
  }
  std::reverse(r.ops.begin(), r.ops.end());
  return r;
}

AlignmentResult align_chars(const TokenList& ref_tokens,
                            const TokenList& hyp_tokens) {
  const auto ref = utf8_chars(join(ref_tokens));
  const auto hyp = utf8_chars(join(hyp_tokens));
  return align(ref, hyp, AlignLevel::character);
}

AlignmentResult align_chars(std::string_view ref_text,
                            std::string_view hyp_text) {
  return align_chars(normalize(ref_text), normalize(hyp_text));
}

std::size_t edit_distance(std::span<const std::string> a,
                          std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string_view to_string(EditOp op) {
  switch (op) {
    case EditOp::hit: return "hit";
    case EditOp::sub: return "sub";
    case EditOp::del: return "del";
    case EditOp::ins: return "ins";
  }
  return "?";
}

}  // namespace asraudit
