#include "asraudit/meaf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"

namespace asraudit {
namespace {

constexpr double kRankThreshold = 1e-9;

std::string row_key(std::string_view sample, std::string_view model) {
  std::string k(sample);
  k += '\x1f';
  k += model;
  return k;
}

struct Factor {
  std::string name;
  TermKind kind;
  std::vector<std::string> levels;       // observed, in coding order
  std::vector<std::string> row_levels;   // per utterance row
};

template <typename Enum>
std::vector<std::string> enum_levels_present(const std::vector<Enum>& values,
                                             std::initializer_list<Enum> order) {
  std::vector<std::string> out;
  for (Enum e : order)
    if (std::find(values.begin(), values.end(), e) != values.end())
      out.emplace_back(to_string(e));
  return out;
}

std::string_view kind_name(TermKind k) {
  switch (k) {
    case TermKind::intercept: return "intercept";
    case TermKind::continuous: return "continuous";
    case TermKind::indicator: return "indicator";
    case TermKind::demographic: return "demographic";
    case TermKind::dataset: return "dataset";
    case TermKind::model: return "model";
  }
  return "?";
}

TermKind parse_kind(std::string_view s) {
  for (TermKind k : {TermKind::intercept, TermKind::continuous, TermKind::indicator,
                     TermKind::demographic, TermKind::dataset, TermKind::model})
    if (kind_name(k) == s) return k;
  throw InputError("fit JSON: unknown term kind '" + std::string(s) + "'");
}

void check_rank(const Eigen::MatrixXd& x, const std::vector<Term>& terms) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankThreshold);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank == terms.size()) return;
  std::string names;
  const auto& perm = qr.colsPermutation().indices();
  for (std::size_t i = rank; i < terms.size(); ++i) {
    if (!names.empty()) names += ", ";
    names += terms[static_cast<std::size_t>(perm[static_cast<Eigen::Index>(i)])].name;
  }
  throw NumericalError("design matrix is rank deficient (rank " + std::to_string(rank) +
                       " of " + std::to_string(terms.size()) +
                       "); linearly dependent columns: " + names);
}

}  // namespace

std::optional<std::size_t> DesignMatrix::column(std::string_view name) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].name == name) return i;
  return std::nullopt;
}

DesignMatrix build_regressors(const FeatureTable& features, const ScoreTable& scores,
                              const DesignOptions& opts) {
  std::unordered_map<std::string, std::size_t> by_sample;
  for (std::size_t i = 0; i < features.rows.size(); ++i)
    if (!by_sample.emplace(features.rows[i].sample_id, i).second)
      throw InputError("features: duplicate sample_id '" + features.rows[i].sample_id + "'");

  const auto models = model_ids(scores);
  if (models.empty()) throw InputError("score table is empty");

  DesignMatrix d;
  std::vector<std::size_t> feat_row;
  feat_row.reserve(scores.size());
  std::vector<std::size_t> per_sample(features.rows.size(), 0);
  std::set<std::string> seen_pairs;
  for (const auto& s : scores) {
    const auto it = by_sample.find(s.sample_id);
    if (it == by_sample.end())
      throw InputError("score row for sample '" + s.sample_id + "' has no feature row");
    if (!seen_pairs.insert(row_key(s.sample_id, s.model_id)).second)
      throw InputError("duplicate score row for (" + s.sample_id + ", " + s.model_id + ")");
    feat_row.push_back(it->second);
    ++per_sample[it->second];
    d.row_sample_ids.push_back(s.sample_id);
    d.row_model_ids.push_back(s.model_id);
  }
  for (std::size_t i = 0; i < per_sample.size(); ++i)
    if (per_sample[i] != models.size())
      throw InputError("sample '" + features.rows[i].sample_id + "' has " +
                       std::to_string(per_sample[i]) + " score rows, expected one per model (" +
                       std::to_string(models.size()) + ")");

  const std::size_t n = scores.size();

  // Speaker clusters, dense in order of first appearance.
  std::unordered_map<std::string, std::size_t> speaker_index;
  d.clusters.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& spk = features.rows[feat_row[r]].speaker_id;
    const auto [it, fresh] = speaker_index.emplace(spk, speaker_index.size());
    d.clusters[r] = it->second;
  }
  d.n_clusters = speaker_index.size();

  // Factors.
  std::vector<Sex> sexes;
  std::vector<L1Status> l1s;
  std::vector<Typicality> typs;
  for (const auto& f : features.rows) {
    sexes.push_back(f.sex);
    l1s.push_back(f.l1);
    typs.push_back(f.typicality);
  }
  std::vector<Factor> factors;
  {
    Factor sex{"sex", TermKind::demographic,
               enum_levels_present(sexes, {Sex::female, Sex::male, Sex::unknown}), {}};
    Factor l1{"l1", TermKind::demographic,
              enum_levels_present(l1s, {L1Status::native, L1Status::nonnative,
                                        L1Status::unknown}),
              {}};
    Factor typ{"typ", TermKind::demographic,
               enum_levels_present(typs, {Typicality::typical, Typicality::atypical,
                                          Typicality::unknown}),
               {}};
    for (const auto& f : features.rows) {
      sex.row_levels.emplace_back(to_string(f.sex));
      l1.row_levels.emplace_back(to_string(f.l1));
      typ.row_levels.emplace_back(to_string(f.typicality));
    }
    factors.push_back(std::move(sex));
    factors.push_back(std::move(l1));
    factors.push_back(std::move(typ));
  }
  if (opts.dataset_effects) {
    std::set<std::string> ds;
    Factor f{"dataset", TermKind::dataset, {}, {}};
    for (const auto& row : features.rows) {
      ds.insert(row.dataset_id);
      f.row_levels.push_back(row.dataset_id);
    }
    f.levels.assign(ds.begin(), ds.end());
    factors.push_back(std::move(f));
  }

  // Terms.
  d.terms.push_back({"intercept", TermKind::intercept, "", ""});
  d.terms.push_back({"snr", TermKind::continuous, "", ""});
  d.terms.push_back({"len", TermKind::continuous, "", ""});
  d.terms.push_back({"age", TermKind::continuous, "", ""});
  bool any_miss = false, any_present = false;
  for (const auto& f : features.rows) (f.x_miss ? any_miss : any_present) = true;
  const bool use_miss = any_miss && any_present;
  if (use_miss)
    d.terms.push_back({"miss", TermKind::indicator, "", ""});
  else
    d.warnings.push_back(std::string("missing-age indicator is constant (") +
                         (any_miss ? "all ages missing" : "no ages missing") + "); dropped");

  for (const auto& f : factors) {
    d.reference_levels[f.name] = f.levels.empty() ? "" : f.levels.front();
    if (f.levels.size() < 2) {
      d.warnings.push_back("factor '" + f.name + "' has a single level (" +
                           (f.levels.empty() ? "none" : f.levels.front()) + "); dropped");
      continue;
    }
    for (std::size_t l = 1; l < f.levels.size(); ++l)
      d.terms.push_back({f.name + "[" + f.levels[l] + "]", f.kind, f.name, f.levels[l]});
  }
  if (opts.model_effects) {
    d.reference_levels["model"] = models.front();
    if (models.size() < 2)
      d.warnings.push_back("factor 'model' has a single level (" + models.front() + "); dropped");
    for (std::size_t l = 1; l < models.size(); ++l)
      d.terms.push_back({"model[" + models[l] + "]", TermKind::model, "model", models[l]});
  }

  const std::size_t k = d.terms.size();
  d.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r) {
    const auto fi = feat_row[r];
    const auto& fv = features.rows[fi];
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < k; ++c) {
      const Term& t = d.terms[c];
      const auto col = static_cast<Eigen::Index>(c);
      double v = 0.0;
      switch (t.kind) {
        case TermKind::intercept: v = 1.0; break;
        case TermKind::continuous:
          v = t.name == "snr" ? fv.x_snr : t.name == "len" ? fv.x_len : fv.x_age;
          break;
        case TermKind::indicator: v = fv.x_miss; break;
        case TermKind::demographic:
        case TermKind::dataset: {
          const auto& fac = *std::find_if(factors.begin(), factors.end(),
                                          [&](const Factor& f) { return f.name == t.factor; });
          v = fac.row_levels[fi] == t.level ? 1.0 : 0.0;
          break;
        }
        case TermKind::model: v = d.row_model_ids[r] == t.level ? 1.0 : 0.0; break;
      }
      d.x(row, col) = v;
    }
  }
  check_rank(d.x, d.terms);
  return d;
}

void set_response(DesignMatrix& design, const ScoreTable& scores, Metric metric) {
  std::unordered_map<std::string, double> value;
  value.reserve(scores.size());
  for (const auto& s : scores) value[row_key(s.sample_id, s.model_id)] = s.metrics.get(metric);
  const std::size_t n = design.rows();
  design.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto it = value.find(row_key(design.row_sample_ids[r], design.row_model_ids[r]));
    if (it == value.end())
      throw InputError("no " + std::string(metric_name(metric)) + " score for (" +
                       design.row_sample_ids[r] + ", " + design.row_model_ids[r] + ")");
    if (!std::isfinite(it->second))
      throw NumericalError("non-finite " + std::string(metric_name(metric)) + " score for (" +
                           design.row_sample_ids[r] + ", " + design.row_model_ids[r] + ")");
    design.y(static_cast<Eigen::Index>(r)) = it->second;
  }
  const double mean = design.y.mean();
  const double sd = std::sqrt((design.y.array() - mean).square().sum() / static_cast<double>(n));
  if (!(sd > 0.0))
    throw NumericalError("metric '" + std::string(metric_name(metric)) +
                         "' is constant; the response cannot be standardized");
  design.y = (design.y.array() - mean) / sd;
  design.response_stats = {mean, sd};
  design.metric = std::string(metric_name(metric));
}

DesignMatrix build_design(const FeatureTable& features, const ScoreTable& scores,
                          Metric metric, const DesignOptions& opts) {
  DesignMatrix d = build_regressors(features, scores, opts);
  set_response(d, scores, metric);
  return d;
}

std::optional<std::size_t> FitResult::index_of(std::string_view term) const {
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].name == term) return i;
  return std::nullopt;
}

std::optional<double> FitResult::coefficient(std::string_view term) const {
  const auto i = index_of(term);
  if (!i) return std::nullopt;
  return coef(static_cast<Eigen::Index>(*i));
}

Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankThreshold);
  const Eigen::Index k = x.cols();
  if (qr.rank() < k) throw NumericalError("X'X is singular");
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const auto& p = qr.colsPermutation();
  return p * (r_inv * r_inv.transpose()) * p.transpose();
}

FitResult fit_ols(const DesignMatrix& design) {
  const std::size_t n = design.rows();
  const std::size_t k = design.cols();
  if (static_cast<std::size_t>(design.y.size()) != n)
    throw InputError("design matrix has no response for every row");
  if (n <= k)
    throw NumericalError("need more rows than columns (n=" + std::to_string(n) +
                         ", k=" + std::to_string(k) + ")");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
  qr.setThreshold(kRankThreshold);
  if (static_cast<std::size_t>(qr.rank()) < k) check_rank(design.x, design.terms);

  FitResult fit;
  fit.metric = design.metric;
  fit.terms = design.terms;
  fit.reference_levels = design.reference_levels;
  fit.warnings = design.warnings;
  fit.response_stats = design.response_stats;
  fit.n = n;
  fit.k = k;
  fit.n_clusters = design.n_clusters;
  fit.coef = qr.solve(design.y);
  fit.fitted = design.x * fit.coef;
  fit.residuals = design.y - fit.fitted;

  const double ybar = design.y.mean();
  const double sst = (design.y.array() - ybar).square().sum();
  const double ssr = fit.residuals.squaredNorm();
  if (!(sst > 0.0)) throw NumericalError("response has zero variance");
  fit.r2 = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
  if (k < 2) {
    fit.f_stat = 0.0;
  } else if (fit.r2 >= 1.0) {
    fit.f_stat = std::numeric_limits<double>::infinity();
  } else {
    fit.f_stat = (fit.r2 / static_cast<double>(k - 1)) /
                 ((1.0 - fit.r2) / static_cast<double>(n - k));
  }

  const double sigma2 = ssr / static_cast<double>(n - k);
  fit.classical_se = (sigma2 * xtx_inverse(design.x).diagonal().array()).sqrt();
  return fit;
}

Eigen::VectorXd cluster_robust_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                                  std::span<const std::size_t> clusters) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index k = x.cols();
  if (clusters.size() != n || static_cast<std::size_t>(residuals.size()) != n)
    throw InputError("cluster ids and residuals must have one entry per row");
  std::unordered_map<std::size_t, Eigen::Index> dense;
  for (std::size_t c : clusters) dense.emplace(c, static_cast<Eigen::Index>(dense.size()));
  const auto g = static_cast<Eigen::Index>(dense.size());
  if (g < 2) throw NumericalError("clustered standard errors need at least two clusters");
  if (n <= static_cast<std::size_t>(k)) throw NumericalError("need more rows than columns");

  Eigen::MatrixXd score_sums = Eigen::MatrixXd::Zero(g, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    score_sums.row(dense[clusters[i]]) += x.row(row) * residuals(row);
  }
  const Eigen::MatrixXd meat = score_sums.transpose() * score_sums;
  const Eigen::MatrixXd bread = xtx_inverse(x);
  const double gd = static_cast<double>(g);
  const double nd = static_cast<double>(n);
  const double c = gd / (gd - 1.0) * (nd - 1.0) / (nd - static_cast<double>(k));
  const Eigen::MatrixXd v = c * bread * meat * bread;
  return v.diagonal().array().max(0.0).sqrt();
}

Eigen::VectorXd cluster_robust_se(const DesignMatrix& design, const FitResult& fit) {
  return cluster_robust_se(design.x, fit.residuals, design.clusters);
}

FitResult fit_meaf(const DesignMatrix& design) {
  FitResult fit = fit_ols(design);
  fit.clustered_se = cluster_robust_se(design, fit);
  return fit;
}

const FitResult& MetricFits::at(Metric m) const {
  for (const auto& f : fits)
    if (f.metric == metric_name(m)) return f;
  throw InputError("no fit for metric '" + std::string(metric_name(m)) + "'");
}

MetricFits fit_all_metrics(const FeatureTable& features, const ScoreTable& scores,
                           const DesignOptions& opts) {
  DesignMatrix design = build_regressors(features, scores, opts);
  MetricFits out;
  for (Metric m : kAllMetrics) {
    set_response(design, scores, m);
    out.fits.push_back(fit_meaf(design));
  }
  return out;
}

// --- export ------------------------------------------------------------------------

std::string fit_to_json(const FitResult& fit) {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  ordered_json j;
  j["metric"] = fit.metric;
  j["se_type"] = "CR1 clustered by speaker";
  ordered_json terms = ordered_json::array();
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const auto& t = fit.terms[i];
    const auto idx = static_cast<Eigen::Index>(i);
    ordered_json tj;
    tj["name"] = t.name;
    tj["kind"] = std::string(kind_name(t.kind));
    if (!t.factor.empty()) {
      tj["factor"] = t.factor;
      tj["level"] = t.level;
      tj["reference_level"] = fit.reference_levels.count(t.factor)
                                  ? fit.reference_levels.at(t.factor)
                                  : std::string();
    }
    tj["coef"] = num(fit.coef(idx));
    tj["se"] = idx < fit.clustered_se.size() ? num(fit.clustered_se(idx)) : ordered_json();
    tj["classical_se"] =
        idx < fit.classical_se.size() ? num(fit.classical_se(idx)) : ordered_json();
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  j["r2"] = num(fit.r2);
  j["f"] = num(fit.f_stat);
  j["n"] = fit.n;
  j["k"] = fit.k;
  j["clusters"] = fit.n_clusters;
  j["reference_levels"] = fit.reference_levels;
  j["warnings"] = fit.warnings;
  j["response"] = {{"mean", num(fit.response_stats.mean)}, {"sd", num(fit.response_stats.sd)}};
  return j.dump(2) + "\n";
}

FitResult fit_from_json(std::string_view text) {
  FitResult fit;
  try {
    const auto j = nlohmann::json::parse(text);
    auto num = [](const nlohmann::json& v) {
      return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
    };
    fit.metric = j.at("metric").get<std::string>();
    const auto& terms = j.at("terms");
    const auto k = static_cast<Eigen::Index>(terms.size());
    fit.coef.resize(k);
    fit.clustered_se.resize(k);
    fit.classical_se.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& tj = terms.at(static_cast<std::size_t>(i));
      Term t;
      t.name = tj.at("name").get<std::string>();
      t.kind = parse_kind(tj.at("kind").get<std::string>());
      t.factor = tj.value("factor", "");
      t.level = tj.value("level", "");
      fit.terms.push_back(std::move(t));
      fit.coef(i) = tj.at("coef").get<double>();
      fit.clustered_se(i) = num(tj.at("se"));
      fit.classical_se(i) = num(tj.at("classical_se"));
    }
    fit.r2 = j.at("r2").get<double>();
    fit.f_stat = num(j.at("f"));
    fit.n = j.at("n").get<std::size_t>();
    fit.k = j.at("k").get<std::size_t>();
    fit.n_clusters = j.at("clusters").get<std::size_t>();
    fit.reference_levels = j.at("reference_levels").get<std::map<std::string, std::string>>();
    fit.warnings = j.at("warnings").get<std::vector<std::string>>();
    fit.response_stats = {j.at("response").at("mean").get<double>(),
                          j.at("response").at("sd").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("fit JSON: ") + e.what());
  }
  return fit;
}

std::string format_coefficients_csv(const MetricFits& fits) {
  std::string out = "metric,term,coef,se,reference_level\n";
  for (const auto& f : fits.fits) {
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      const auto& t = f.terms[i];
      std::string ref;
      if (!t.factor.empty() && f.reference_levels.count(t.factor))
        ref = f.reference_levels.at(t.factor);
      out += f.metric + ',' + csv_escape(t.name) + ',' + format_double(f.coef(idx)) + ',' +
             format_double(f.clustered_se(idx)) + ',' + csv_escape(ref) + '\n';
    }
  }
  return out;
}

std::string format_fit_summary_csv(const MetricFits& fits) {
  std::string out = "metric,r2,f,n,k,clusters\n";
  for (const auto& f : fits.fits)
    out += f.metric + ',' + format_double(f.r2) + ',' + format_double(f.f_stat) + ',' +
           std::to_string(f.n) + ',' + std::to_string(f.k) + ',' +
           std::to_string(f.n_clusters) + '\n';
  return out;
}

}  // namespace asraudit
