#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "asraudit/error.hpp"
#include "asraudit/meaf.hpp"
#include "asraudit/synthetic.hpp"

using namespace asraudit;

namespace {

using Mat = std::vector<std::vector<double>>;

// Gauss-Jordan inverse with partial pivoting; independent of Eigen.
Mat invert(Mat a) {
  const std::size_t k = a.size();
  Mat inv(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(inv[c], inv[p]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < k; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < k; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

Mat xtx_of(const Eigen::MatrixXd& x) {
  const auto k = static_cast<std::size_t>(x.cols());
  Mat m(k, std::vector<double>(k, 0.0));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        m[i][j] += x(r, static_cast<Eigen::Index>(i)) * x(r, static_cast<Eigen::Index>(j));
  return m;
}

std::vector<double> normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto inv = invert(xtx_of(x));
  const auto k = static_cast<std::size_t>(x.cols());
  std::vector<double> xty(k, 0.0), beta(k, 0.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < k; ++i) xty[i] += x(r, static_cast<Eigen::Index>(i)) * y(r);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) beta[i] += inv[i][j] * xty[j];
  return beta;
}

// White's heteroskedasticity-robust covariance with the n/(n-k) correction.
std::vector<double> hc1_se(const Eigen::MatrixXd& x, const Eigen::VectorXd& e) {
  const auto k = static_cast<std::size_t>(x.cols());
  const auto n = static_cast<double>(x.rows());
  const auto inv = invert(xtx_of(x));
  Mat meat(k, std::vector<double>(k, 0.0));
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        meat[i][j] += e(r) * e(r) * x(r, static_cast<Eigen::Index>(i)) * x(r, static_cast<Eigen::Index>(j));
  std::vector<double> se(k);
  for (std::size_t d = 0; d < k; ++d) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) v += inv[d][i] * meat[i][j] * inv[j][d];
    se[d] = std::sqrt(v * n / (n - static_cast<double>(k)));
  }
  return se;
}

DesignMatrix random_design(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  DesignMatrix d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t c = 0; c < k; ++c)
    d.terms.push_back({c == 0 ? "intercept" : "x" + std::to_string(c),
                       c == 0 ? TermKind::intercept : TermKind::continuous, "", ""});
  for (Eigen::Index r = 0; r < d.x.rows(); ++r) {
    d.x(r, 0) = 1.0;
    for (Eigen::Index c = 1; c < d.x.cols(); ++c) d.x(r, c) = z(rng);
    // Heteroskedastic noise so HC1 and classical SEs differ.
    d.y(r) = 0.5 - 0.3 * d.x(r, 1) + (1.0 + std::fabs(d.x(r, 1))) * z(rng);
    d.clusters.push_back(static_cast<std::size_t>(r));
  }
  d.n_clusters = n;
  return d;
}

FeatureVector fv(const std::string& id, const std::string& spk, const std::string& ds, double snr,
                 double len, double age, int miss, Sex sex, L1Status l1, Typicality typ) {
  return {id, spk, ds, snr, len, age, miss, sex, l1, typ};
}

ScoreTable scores_for(const FeatureTable& f, const std::vector<std::string>& models,
                      const std::function<double(const FeatureVector&, std::size_t)>& value) {
  ScoreTable t;
  for (const auto& r : f.rows)
    for (std::size_t m = 0; m < models.size(); ++m) {
      ScoreRow row{r.sample_id, models[m], {}};
      for (Metric metric : kAllMetrics) row.metrics.set(metric, value(r, m));
      t.push_back(row);
    }
  return t;
}

FeatureTable small_features(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  FeatureTable f;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t spk = i / 3;
    f.rows.push_back(fv("u" + std::to_string(i), "s" + std::to_string(spk),
                        spk % 2 ? "beta" : "alpha", z(rng), z(rng), i % 5 == 0 ? 0.0 : z(rng),
                        i % 5 == 0, spk % 3 == 0 ? Sex::male : Sex::female,
                        spk % 4 == 1 ? L1Status::nonnative : L1Status::native,
                        spk % 5 == 2 ? Typicality::atypical : Typicality::typical));
  }
  return f;
}

}  // namespace

TEST(Ols, MatchesNormalEquations) {
  const auto d = random_design(200, 5, 1);
  const auto fit = fit_ols(d);
  const auto beta = normal_equations(d.x, d.y);
  for (std::size_t i = 0; i < beta.size(); ++i)
    EXPECT_NEAR(fit.coef(static_cast<Eigen::Index>(i)), beta[i], 1e-10);
  const double ybar = d.y.mean();
  double sst = 0.0, ssr = 0.0;
  for (Eigen::Index r = 0; r < d.y.size(); ++r) {
    double yhat = 0.0;
    for (std::size_t c = 0; c < beta.size(); ++c) yhat += d.x(r, static_cast<Eigen::Index>(c)) * beta[c];
    ssr += (d.y(r) - yhat) * (d.y(r) - yhat);
    sst += (d.y(r) - ybar) * (d.y(r) - ybar);
  }
  const double r2 = 1.0 - ssr / sst;
  EXPECT_NEAR(fit.r2, r2, 1e-12);
  EXPECT_NEAR(fit.f_stat, (r2 / 4.0) / ((1.0 - r2) / 195.0), 1e-8);
  const auto inv = invert(xtx_of(d.x));
  for (std::size_t i = 0; i < beta.size(); ++i)
    EXPECT_NEAR(fit.classical_se(static_cast<Eigen::Index>(i)), std::sqrt(ssr / 195.0 * inv[i][i]), 1e-10);
}

TEST(ClusteredSe, SingletonClustersEqualHc1) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto d = random_design(150, 4, seed);
    const auto fit = fit_meaf(d);
    const auto hc1 = hc1_se(d.x, fit.residuals);
    for (std::size_t i = 0; i < hc1.size(); ++i)
      EXPECT_NEAR(fit.clustered_se(static_cast<Eigen::Index>(i)) / hc1[i], 1.0, 1e-8);
  }
}

TEST(ClusteredSe, DuplicatedRowsInflateOverClassical) {
  const auto base = random_design(60, 4, 5);
  DesignMatrix d;
  d.terms = base.terms;
  const Eigen::Index copies = 5;
  d.x.resize(base.x.rows() * copies, base.x.cols());
  d.y.resize(base.y.size() * copies);
  for (Eigen::Index r = 0; r < base.x.rows(); ++r)
    for (Eigen::Index c = 0; c < copies; ++c) {
      d.x.row(r * copies + c) = base.x.row(r);
      d.y(r * copies + c) = base.y(r);
      d.clusters.push_back(static_cast<std::size_t>(r));
    }
  d.n_clusters = static_cast<std::size_t>(base.x.rows());
  const auto fit = fit_meaf(d);
  for (Eigen::Index i = 0; i < fit.coef.size(); ++i)
    EXPECT_GT(fit.clustered_se(i), fit.classical_se(i)) << i;
}

TEST(ClusteredSe, NeedsTwoClusters) {
  auto d = random_design(30, 3, 6);
  std::fill(d.clusters.begin(), d.clusters.end(), 0);
  const auto fit = fit_ols(d);
  EXPECT_THROW(cluster_robust_se(d, fit), NumericalError);
}

TEST(Design, ColumnsReferenceLevelsAndRowOrder) {
  const auto f = small_features(30, 7);
  const auto s = scores_for(f, {"zeta", "alpha"}, [](const FeatureVector& r, std::size_t m) {
    return 1.0 + r.x_snr + 0.1 * static_cast<double>(m) + 0.01 * r.x_len;
  });
  const auto d = build_design(f, s, Metric::wer);
  std::vector<std::string> names;
  for (const auto& t : d.terms) names.push_back(t.name);
  EXPECT_EQ(names, (std::vector<std::string>{"intercept", "snr", "len", "age", "miss", "sex[male]",
                                             "l1[nonnative]", "typ[atypical]", "dataset[beta]",
                                             "model[zeta]"}));
  EXPECT_EQ(d.reference_levels.at("sex"), "female");
  EXPECT_EQ(d.reference_levels.at("dataset"), "alpha");
  EXPECT_EQ(d.reference_levels.at("model"), "alpha");
  EXPECT_EQ(d.rows(), 60u);
  EXPECT_EQ(d.row_sample_ids[1], "u0");
  EXPECT_EQ(d.row_model_ids[0], "zeta");
  EXPECT_EQ(d.n_clusters, 10u);
  EXPECT_EQ(d.clusters[5], 0u);
  EXPECT_EQ(d.clusters[6], 1u);
  EXPECT_NEAR(d.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(d.y.squaredNorm() / 60.0, 1.0, 1e-12);
}

TEST(Design, DropsConstantIndicatorAndSingleLevelFactors) {
  auto f = small_features(30, 8);
  for (auto& r : f.rows) {
    r.x_miss = 0;
    r.typicality = Typicality::typical;
  }
  const auto s = scores_for(f, {"a", "b"}, [](const FeatureVector& r, std::size_t m) {
    return r.x_snr + static_cast<double>(m);
  });
  const auto d = build_design(f, s, Metric::wer);
  EXPECT_FALSE(d.column("miss"));
  EXPECT_FALSE(d.column("typ[atypical]"));
  EXPECT_EQ(d.warnings.size(), 2u);
}

TEST(Design, RankDeficiencyNamesColumns) {
  auto f = small_features(30, 9);
  // Atypical speakers only in dataset beta, and every beta speaker atypical.
  for (auto& r : f.rows)
    r.typicality = r.dataset_id == "beta" ? Typicality::atypical : Typicality::typical;
  const auto s = scores_for(f, {"a", "b"}, [](const FeatureVector& r, std::size_t m) {
    return r.x_snr + static_cast<double>(m);
  });
  try {
    build_design(f, s, Metric::wer);
    FAIL();
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("rank deficient"), std::string::npos);
    EXPECT_TRUE(msg.find("typ[atypical]") != std::string::npos ||
                msg.find("dataset[beta]") != std::string::npos)
        << msg;
  }
}

TEST(Design, InputErrors) {
  const auto f = small_features(12, 10);
  auto s = scores_for(f, {"a", "b"}, [](const FeatureVector& r, std::size_t) { return r.x_snr; });
  s.pop_back();
  EXPECT_THROW(build_design(f, s, Metric::wer), InputError);
  auto constant = scores_for(f, {"a", "b"}, [](const FeatureVector&, std::size_t) { return 0.3; });
  EXPECT_THROW(build_design(f, constant, Metric::wer), NumericalError);
}

TEST(Meaf, ExactLinearResponseIsRecovered) {
  const auto f = small_features(60, 11);
  const auto s = scores_for(f, {"a", "b", "c"}, [](const FeatureVector& r, std::size_t m) {
    return 2.0 - 0.3 * r.x_snr + 0.2 * r.x_len + 0.1 * r.x_age + 0.05 * r.x_miss +
           (r.typicality == Typicality::atypical ? 0.8 : 0.0) +
           (r.l1 == L1Status::nonnative ? 0.3 : 0.0) + (r.dataset_id == "beta" ? -0.1 : 0.0) +
           0.25 * static_cast<double>(m);
  });
  const auto d = build_design(f, s, Metric::ember);
  const auto fit = fit_meaf(d);
  const double sd = d.response_stats.sd;
  EXPECT_NEAR(*fit.coefficient("snr") * sd, -0.3, 1e-10);
  EXPECT_NEAR(*fit.coefficient("typ[atypical]") * sd, 0.8, 1e-10);
  EXPECT_NEAR(*fit.coefficient("l1[nonnative]") * sd, 0.3, 1e-10);
  EXPECT_NEAR(*fit.coefficient("sex[male]") * sd, 0.0, 1e-10);
  EXPECT_NEAR(*fit.coefficient("model[c]") * sd, 0.5, 1e-10);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(fit.f_stat));
}

TEST(Meaf, InvariantToRowOrderAndAffineMetricScale) {
  const auto f = small_features(45, 12);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto s = scores_for(f, {"a", "b"}, [&](const FeatureVector& r, std::size_t m) {
    return 0.2 * r.x_snr - 0.1 * static_cast<double>(m) + z(rng);
  });
  const auto fit = fit_meaf(build_design(f, s, Metric::wer));

  auto shuffled = s;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(3));
  auto scaled = s;
  for (auto& row : scaled) row.metrics.wer = 100.0 * row.metrics.wer + 7.0;
  for (const auto& other : {shuffled, scaled}) {
    const auto g = fit_meaf(build_design(f, other, Metric::wer));
    for (Eigen::Index i = 0; i < fit.coef.size(); ++i) {
      EXPECT_NEAR(g.coef(i), fit.coef(i), 1e-10);
      EXPECT_NEAR(g.clustered_se(i), fit.clustered_se(i), 1e-10);
    }
    EXPECT_NEAR(g.r2, fit.r2, 1e-12);
  }
}

TEST(Meaf, JsonRoundTrip) {
  const auto f = small_features(30, 13);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  const auto s = scores_for(f, {"a", "b"}, [&](const FeatureVector& r, std::size_t) { return r.x_snr + z(rng); });
  const auto fit = fit_meaf(build_design(f, s, Metric::cer));
  const auto back = fit_from_json(fit_to_json(fit));
  EXPECT_EQ(back.terms, fit.terms);
  EXPECT_EQ(back.reference_levels, fit.reference_levels);
  EXPECT_EQ(back.metric, "cer");
  for (Eigen::Index i = 0; i < fit.coef.size(); ++i) {
    EXPECT_DOUBLE_EQ(back.coef(i), fit.coef(i));
    EXPECT_DOUBLE_EQ(back.clustered_se(i), fit.clustered_se(i));
  }
  EXPECT_EQ(fit_to_json(back), fit_to_json(fit));
  EXPECT_THROW(fit_from_json("{"), InputError);
}

TEST(Meaf, PlantedCoefficientsOnSmallSyntheticCorpus) {
  SyntheticConfig cfg;
  cfg.utterances = 1500;
  cfg.speakers = 150;
  cfg.seed = 99;
  const auto corpus = generate_synthetic(cfg);
  const auto features = build_features(corpus.records);
  const auto fits = fit_all_metrics(features, corpus.planted_scores);
  const auto& fx = cfg.effects;
  const std::pair<const char*, double> planted[] = {
      {"snr", fx.beta_snr}, {"len", fx.beta_len}, {"typ[atypical]", fx.alpha_atypical},
      {"l1[nonnative]", fx.alpha_nonnative}};
  for (const auto& fit : fits.fits) {
    for (const auto& [term, value] : planted) {
      const auto i = static_cast<Eigen::Index>(*fit.index_of(term));
      EXPECT_LT(std::fabs(fit.coef(i) - value), 4.0 * fit.clustered_se(i)) << fit.metric << " " << term;
    }
    EXPECT_NEAR(fit.r2, corpus.analytic_r2, 0.08);
  }
  EXPECT_EQ(fits.at(Metric::semdist).metric, "semdist");
}
