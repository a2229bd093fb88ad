#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "asraudit/types.hpp"

namespace asraudit {

inline constexpr int kMetricCount = 6;

struct PcaResult {
  Eigen::MatrixXd loadings;                  // metrics x components
  Eigen::VectorXd eigenvalues;               // descending
  Eigen::VectorXd explained_variance_ratio;  // sums to 1
  Eigen::VectorXd means;
  Eigen::VectorXd stds;                      // population sd
};

// Metric matrix in Table-order columns (wer, cer, mer, wil, ember, semdist).
Eigen::MatrixXd metric_matrix(const ScoreTable& scores);

// Correlation-matrix PCA. Each loading column is signed so its largest
// magnitude entry is positive. Throws InputError when there are fewer rows
// than metrics + 1, NumericalError for a constant column.
PcaResult pca(const Eigen::MatrixXd& data);
PcaResult pca_metrics(const ScoreTable& scores);

Eigen::MatrixXd standardize(const Eigen::MatrixXd& data, const PcaResult& r);
Eigen::MatrixXd project(const Eigen::MatrixXd& data, const PcaResult& r,
                        int n_components);
// Back to standardized units.
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& coords, const PcaResult& r);

std::string render_loadings_svg(const PcaResult& r);
void emit_loadings_figure(const PcaResult& r, const std::filesystem::path& path);

// metric,PC1..PC6
std::string format_loadings_csv(const PcaResult& r);
// component,eigenvalue,ratio,cumulative
std::string format_variance_csv(const PcaResult& r);

}  // namespace asraudit
