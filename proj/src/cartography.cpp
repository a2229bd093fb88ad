#include "asraudit/cartography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/stats.hpp"
#include "asraudit/svg.hpp"

namespace asraudit {

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::easy: return "easy";
    case Quadrant::ambiguous: return "ambiguous";
    case Quadrant::hard: return "hard";
    case Quadrant::hard_consensus: return "hard_consensus";
  }
  return "?";
}

std::optional<Quadrant> parse_quadrant(std::string_view s) {
  for (Quadrant q : {Quadrant::easy, Quadrant::ambiguous, Quadrant::hard, Quadrant::hard_consensus})
    if (to_string(q) == s) return q;
  return std::nullopt;
}

MuSigma mu_sigma(std::span<const double> per_model) {
  if (per_model.empty()) throw InputError("mu/sigma of an empty score set");
  std::vector<double> v(per_model.begin(), per_model.end());
  std::sort(v.begin(), v.end());
  if (v.front() == v.back()) return {v.front(), 0.0};
  const double m = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mu = std::clamp(sum / m, v.front(), v.back());
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return {mu, std::sqrt(ss / m)};
}

std::vector<CartographyPoint> cartography(const ScoreTable& scores, Metric metric) {
  const auto models = model_ids(scores);
  if (models.size() < 2)
    throw InputError("cartography needs at least two models, found " +
                     std::to_string(models.size()));
  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<std::string, double>> by_sample;
  for (const auto& s : scores) {
    auto [it, fresh] = by_sample.try_emplace(s.sample_id);
    if (fresh) order.push_back(s.sample_id);
    it->second[s.model_id] = s.metrics.get(metric);
  }
  std::vector<CartographyPoint> out;
  out.reserve(order.size());
  std::vector<double> vals;
  for (const auto& id : order) {
    const auto& per_model = by_sample[id];
    vals.clear();
    for (const auto& m : models) {
      const auto it = per_model.find(m);
      if (it == per_model.end())
        throw InputError("cartography: missing " + std::string(metric_name(metric)) +
                         " score for (" + id + ", " + m + ")");
      vals.push_back(it->second);
    }
    const auto ms = mu_sigma(vals);
    CartographyPoint p;
    p.sample_id = id;
    p.metric = std::string(metric_name(metric));
    p.mu = ms.mu;
    p.sigma = ms.sigma;
    out.push_back(std::move(p));
  }
  return out;
}

Quadrant quadrant_for(double mu, double sigma, const QuadrantThresholds& t) {
  const bool high_mu = mu > t.mu_median;
  const bool high_sigma = sigma > t.sigma_median;
  if (high_mu) return high_sigma ? Quadrant::hard : Quadrant::hard_consensus;
  return high_sigma ? Quadrant::ambiguous : Quadrant::easy;
}

QuadrantThresholds classify_quadrants(std::span<CartographyPoint> points) {
  QuadrantThresholds t;
  if (points.empty()) {
    t.reliable = false;
    return t;
  }
  std::vector<double> mus, sigmas;
  for (const auto& p : points) {
    mus.push_back(p.mu);
    sigmas.push_back(p.sigma);
  }
  t.mu_median = median(mus);
  t.sigma_median = median(sigmas);
  const auto [mu_lo, mu_hi] = std::minmax_element(mus.begin(), mus.end());
  const auto [s_lo, s_hi] = std::minmax_element(sigmas.begin(), sigmas.end());
  t.reliable = *mu_lo != *mu_hi && *s_lo != *s_hi;
  for (auto& p : points) p.quadrant = quadrant_for(p.mu, p.sigma, t);
  return t;
}

void attach_sdi(std::span<CartographyPoint> points, std::span<const SdiScore> sdi) {
  std::unordered_map<std::string, int> decile;
  for (const auto& s : sdi) decile[s.sample_id] = s.decile;
  for (auto& p : points) {
    const auto it = decile.find(p.sample_id);
    if (it == decile.end())
      throw InputError("no SDI score for sample '" + p.sample_id + "'");
    p.sdi_decile = it->second;
  }
}

void attach_tags(std::span<CartographyPoint> points, const FeatureTable& features) {
  std::unordered_map<std::string, const FeatureVector*> idx;
  for (const auto& f : features.rows) idx[f.sample_id] = &f;
  for (auto& p : points) {
    const auto it = idx.find(p.sample_id);
    if (it == idx.end()) throw InputError("no features for sample '" + p.sample_id + "'");
    p.sex = it->second->sex;
    p.l1 = it->second->l1;
    p.typicality = it->second->typicality;
  }
}

SdiCorrelation correlate_sdi(std::span<const CartographyPoint> points,
                             std::span<const SdiScore> sdi, std::size_t permutations,
                             std::uint64_t seed) {
  std::unordered_map<std::string, const SdiScore*> idx;
  for (const auto& s : sdi) idx[s.sample_id] = &s;
  std::vector<double> sdi_v, mu_v, sigma_v;
  std::vector<int> deciles;
  SdiCorrelation out;
  for (const auto& p : points) {
    const auto it = idx.find(p.sample_id);
    if (it == idx.end()) throw InputError("no SDI score for sample '" + p.sample_id + "'");
    sdi_v.push_back(it->second->value);
    mu_v.push_back(p.mu);
    sigma_v.push_back(p.sigma);
    deciles.push_back(it->second->decile);
    if (out.metric.empty()) out.metric = p.metric;
  }
  out.sdi_mu = spearman_permutation_test(sdi_v, mu_v, permutations, seed);
  out.sdi_sigma = spearman_permutation_test(sdi_v, sigma_v, permutations, seed + 1);
  for (int d = 1; d <= 10; ++d) {
    DecileSummary s;
    s.decile = d;
    for (std::size_t i = 0; i < deciles.size(); ++i) {
      if (deciles[i] != d) continue;
      ++s.count;
      s.mean_sdi += sdi_v[i];
      s.mean_mu += mu_v[i];
      s.mean_sigma += sigma_v[i];
    }
    if (s.count == 0) continue;
    const double c = static_cast<double>(s.count);
    s.mean_sdi /= c;
    s.mean_mu /= c;
    s.mean_sigma /= c;
    out.deciles.push_back(s);
  }
  return out;
}

namespace {

std::string_view tag_level(const CartographyPoint& p, std::string_view attr) {
  if (attr == "sex") return to_string(p.sex);
  if (attr == "l1") return to_string(p.l1);
  return to_string(p.typicality);
}

std::vector<std::string> attribute_levels(std::string_view attr) {
  if (attr == "sex") return {"female", "male", "unknown"};
  if (attr == "l1") return {"native", "nonnative", "unknown"};
  if (attr == "typicality") return {"typical", "atypical", "unknown"};
  throw InputError("unknown group attribute '" + std::string(attr) +
                   "' (expected sex, l1 or typicality)");
}

}  // namespace

std::string render_cartography_svg(std::span<const CartographyPoint> points,
                                   const CartographyFigure& fig) {
  if (points.empty()) throw InputError("cannot draw a cartography map without points");
  constexpr double W = 640, H = 480, left = 70, right = 150, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;

  double mu_lo = points[0].mu, mu_hi = points[0].mu;
  double s_lo = points[0].sigma, s_hi = points[0].sigma;
  for (const auto& p : points) {
    mu_lo = std::min(mu_lo, p.mu);
    mu_hi = std::max(mu_hi, p.mu);
    s_lo = std::min(s_lo, p.sigma);
    s_hi = std::max(s_hi, p.sigma);
  }
  // Both axes start at zero: errors and disagreement are non-negative.
  const Ticks xt = nice_ticks(std::min(0.0, s_lo), s_hi);
  const Ticks yt = nice_ticks(std::min(0.0, mu_lo), mu_hi);
  const double x0 = xt.start, x1 = xt.start + xt.step * (xt.count - 1);
  const double y0 = yt.start, y1 = yt.start + yt.step * (yt.count - 1);
  auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

  SvgWriter svg(W, H);
  svg.rect(0, 0, W, H, "#ffffff");
  svg.text(W / 2 - right / 2 + left / 2, 22, fig.title, 15, "middle");
  svg.rect(left, top, pw, ph, "none", "#333333");
  for (int i = 0; i < xt.count; ++i) {
    const double v = xt.start + i * xt.step;
    svg.line(sx(v), top + ph, sx(v), top + ph + 5, "#333333");
    svg.text(sx(v), top + ph + 18, format_fixed(v, 3), 10, "middle");
  }
  for (int i = 0; i < yt.count; ++i) {
    const double v = yt.start + i * yt.step;
    svg.line(left - 5, sy(v), left, sy(v), "#333333");
    svg.text(left - 8, sy(v) + 3, format_fixed(v, 3), 10, "end");
  }
  svg.text(left + pw / 2, H - 18, "inter-model disagreement (sigma)", 12, "middle");
  svg.text(20, top + ph / 2, "mean error (mu)", 12, "middle", -90);

  const double lx = W - right + 20;
  if (fig.color_by == ColorBy::sdi_decile) {
    for (const auto& p : points)
      svg.circle(sx(p.sigma), sy(p.mu), 2.5, decile_color(p.sdi_decile), 0.75);
    svg.text(lx, top + 4, "SDI decile", 12);
    for (int d = 1; d <= 10; ++d) {
      const double y = top + 12 + (d - 1) * 18;
      svg.rect(lx, y, 14, 14, decile_color(d), "#555555");
      std::string label = std::to_string(d);
      if (d == 1) label += " (easiest)";
      if (d == 10) label += " (hardest)";
      svg.text(lx + 20, y + 11, label, 11);
    }
  } else {
    const auto levels = attribute_levels(fig.group_attribute);
    auto color_of = [&](std::string_view level) {
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] == level) return category_color(i);
      return category_color(levels.size());
    };
    for (const auto& p : points)
      svg.circle(sx(p.sigma), sy(p.mu), 2.5, color_of(tag_level(p, fig.group_attribute)), 0.75);
    svg.text(lx, top + 4, fig.group_attribute, 12);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const double y = top + 12 + static_cast<double>(i) * 18;
      svg.rect(lx, y, 14, 14, category_color(i), "#555555");
      svg.text(lx + 20, y + 11, levels[i], 11);
    }
  }
  return svg.str();
}

void emit_cartography_svg(std::span<const CartographyPoint> points,
                          const CartographyFigure& fig, const std::filesystem::path& path) {
  write_file(path.string(), render_cartography_svg(points, fig));
}

std::string format_cartography_csv(std::span<const CartographyPoint> points) {
  std::string out = "sample_id,metric,mu,sigma,quadrant,sdi_decile\n";
  for (const auto& p : points)
    out += csv_escape(p.sample_id) + ',' + p.metric + ',' + format_double(p.mu) + ',' +
           format_double(p.sigma) + ',' + std::string(to_string(p.quadrant)) + ',' +
           std::to_string(p.sdi_decile) + '\n';
  return out;
}

}  // namespace asraudit
