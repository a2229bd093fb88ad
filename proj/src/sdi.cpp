#include "asraudit/sdi.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"

namespace asraudit {
namespace {

double level_shift(const FitResult& fit, const std::string& factor, std::string_view level,
                   const FeatureVector& f) {
  const auto ref = fit.reference_levels.find(factor);
  if (ref != fit.reference_levels.end() && ref->second == level) return 0.0;
  const std::string term = factor + "[" + std::string(level) + "]";
  if (const auto c = fit.coefficient(term)) return *c;
  throw InputError("sample '" + f.sample_id + "' has " + factor + " level '" +
                   std::string(level) + "' which the fit does not contain (stale fit?)");
}

}  // namespace

double sdi(const FeatureVector& f, const FitResult& fit) {
  double v = 0.0;
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const Term& t = fit.terms[i];
    const double c = fit.coef(static_cast<Eigen::Index>(i));
    if (t.kind == TermKind::continuous) {
      if (t.name == "snr") v += c * f.x_snr;
      else if (t.name == "len") v += c * f.x_len;
      else if (t.name == "age") v += c * f.x_age;
    } else if (t.kind == TermKind::indicator) {
      v += c * f.x_miss;
    }
  }
  v += level_shift(fit, "sex", to_string(f.sex), f);
  v += level_shift(fit, "l1", to_string(f.l1), f);
  v += level_shift(fit, "typ", to_string(f.typicality), f);
  return v;
}

std::vector<SdiScore> compute_sdi(const FeatureTable& features, const FitResult& fit) {
  std::vector<SdiScore> out;
  out.reserve(features.rows.size());
  for (const auto& f : features.rows)
    out.push_back({f.sample_id, f.dataset_id, fit.metric, sdi(f, fit), 0});
  return out;
}

DecileAssignment assign_deciles(std::span<SdiScore> scores) {
  DecileAssignment a;
  const std::size_t n = scores.size();
  if (n == 0) return a;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return scores[x].value < scores[y].value;
  });
  for (std::size_t rank0 = 0; rank0 < n; ++rank0)
    scores[order[rank0]].decile = static_cast<int>(std::min<std::size_t>(10, 10 * rank0 / n + 1));
  a.degenerate = std::all_of(scores.begin(), scores.end(),
                             [&](const SdiScore& s) { return s.value == scores[0].value; });
  return a;
}

std::string_view to_string(DecileScope s) {
  return s == DecileScope::pooled ? "pooled" : "per_dataset";
}

std::optional<DecileScope> parse_decile_scope(std::string_view s) {
  if (s == "pooled") return DecileScope::pooled;
  if (s == "per_dataset" || s == "per-dataset") return DecileScope::per_dataset;
  return std::nullopt;
}

DecileAssignment assign_deciles(std::span<SdiScore> scores, DecileScope scope) {
  if (scope == DecileScope::pooled) return assign_deciles(scores);
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < scores.size(); ++i) groups[scores[i].dataset_id].push_back(i);
  DecileAssignment all;
  for (const auto& [ds, idx] : groups) {
    std::vector<SdiScore> sub;
    for (auto i : idx) sub.push_back(scores[i]);
    all.degenerate |= assign_deciles(sub).degenerate;
    for (std::size_t j = 0; j < idx.size(); ++j) scores[idx[j]].decile = sub[j].decile;
  }
  return all;
}

std::string format_sdi_csv(std::span<const SdiScore> scores) {
  std::string out = "sample_id,metric,sdi,decile\n";
  for (const auto& s : scores)
    out += csv_escape(s.sample_id) + ',' + s.metric + ',' + format_double(s.value) + ',' +
           std::to_string(s.decile) + '\n';
  return out;
}

std::vector<SdiScore> parse_sdi_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows[0].fields != std::vector<std::string>{"sample_id", "metric", "sdi", "decile"})
    throw InputError("SDI table: unexpected header");
  std::vector<SdiScore> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    double v, d;
    if (f.size() != 4 || !parse_double(f[2], v) || !parse_double(f[3], d))
      throw InputError("SDI table line " + std::to_string(rows[i].line) + ": malformed row");
    out.push_back({f[0], "", f[1], v, static_cast<int>(d)});
  }
  return out;
}

}  // namespace asraudit
