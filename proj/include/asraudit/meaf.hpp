#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "asraudit/features.hpp"
#include "asraudit/types.hpp"

namespace asraudit {

enum class TermKind {
  intercept,
  continuous,   // x_snr, x_len, x_age
  indicator,    // x_miss
  demographic,  // sex / l1 / typ dummies
  dataset,
  model,
};

struct Term {
  std::string name;    // "snr", "sex[male]", "dataset[cv]", ...
  TermKind kind = TermKind::continuous;
  std::string factor;  // "sex", "l1", "typ", "dataset", "model" for dummies
  std::string level;

  bool operator==(const Term&) const = default;
};

// Regressors of the elasticity model, one row per (utterance, model), plus
// the speaker cluster of each row. The response is filled per metric.
struct DesignMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<Term> terms;
  std::vector<std::size_t> clusters;  // dense speaker index per row
  std::size_t n_clusters = 0;
  std::vector<std::string> row_sample_ids;
  std::vector<std::string> row_model_ids;
  std::map<std::string, std::string> reference_levels;  // factor -> level
  std::vector<std::string> warnings;
  std::string metric;
  ColumnStats response_stats;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }
  std::optional<std::size_t> column(std::string_view name) const;
};

struct DesignOptions {
  bool dataset_effects = true;
  bool model_effects = true;
};

// Joins features and scores on sample_id and dummy-codes the factors with
// drop-first references (female, native, typical, then the lexicographically
// first dataset and model). Factors with a single observed level, and a
// constant missing-age indicator, are dropped with a warning. Throws
// InputError on join misses or an unbalanced model set, NumericalError when
// the remaining columns are rank deficient.
DesignMatrix build_regressors(const FeatureTable& features,
                              const ScoreTable& scores,
                              const DesignOptions& opts = {});

// Standardizes the metric column (population sd) into design.y.
void set_response(DesignMatrix& design, const ScoreTable& scores, Metric metric);

DesignMatrix build_design(const FeatureTable& features, const ScoreTable& scores,
                          Metric metric, const DesignOptions& opts = {});

struct FitResult {
  std::string metric;
  std::vector<Term> terms;
  Eigen::VectorXd coef;
  Eigen::VectorXd clustered_se;
  Eigen::VectorXd classical_se;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double r2 = 0.0;
  double f_stat = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t n_clusters = 0;
  std::map<std::string, std::string> reference_levels;
  std::vector<std::string> warnings;
  ColumnStats response_stats;

  std::optional<std::size_t> index_of(std::string_view term) const;
  std::optional<double> coefficient(std::string_view term) const;
};

// Least squares through column-pivoted Householder QR. Fills coefficients,
// fitted values, residuals, R^2, the overall F and classical standard errors;
// clustered_se is left empty. Throws NumericalError for rank deficiency or
// n <= k.
FitResult fit_ols(const DesignMatrix& design);

// (X'X)^-1 from the QR factors of X.
Eigen::MatrixXd xtx_inverse(const Eigen::MatrixXd& x);

// CR1 sandwich: c (X'X)^-1 [sum_g X_g' u_g u_g' X_g] (X'X)^-1 with
// c = G/(G-1) * (n-1)/(n-k). Returns sqrt of the diagonal. Throws
// NumericalError when there are fewer than two clusters.
Eigen::VectorXd cluster_robust_se(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& residuals,
                                  std::span<const std::size_t> clusters);
Eigen::VectorXd cluster_robust_se(const DesignMatrix& design,
                                  const FitResult& fit);

// OLS plus speaker-clustered standard errors.
FitResult fit_meaf(const DesignMatrix& design);

struct MetricFits {
  std::vector<FitResult> fits;  // in kAllMetrics order

  const FitResult& at(Metric m) const;
};

// Six fits over one shared regressor matrix.
MetricFits fit_all_metrics(const FeatureTable& features,
                           const ScoreTable& scores,
                           const DesignOptions& opts = {});

std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(std::string_view json);

// metric,term,coef,se,reference_level
std::string format_coefficients_csv(const MetricFits& fits);
// metric,r2,f,n,k,clusters
std::string format_fit_summary_csv(const MetricFits& fits);

}  // namespace asraudit
