#include "asraudit/pca.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/svg.hpp"

namespace asraudit {

Eigen::MatrixXd metric_matrix(const ScoreTable& scores) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(scores.size()), kMetricCount);
  for (std::size_t r = 0; r < scores.size(); ++r)
    for (int c = 0; c < kMetricCount; ++c)
      m(static_cast<Eigen::Index>(r), c) = scores[r].metrics.get(kAllMetrics[static_cast<std::size_t>(c)]);
  return m;
}

PcaResult pca(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n < p + 1)
    throw InputError("PCA needs at least " + std::to_string(p + 1) + " rows, found " +
                     std::to_string(n));
  PcaResult r;
  r.means = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - r.means.transpose();
  r.stds = (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt().transpose();
  for (Eigen::Index c = 0; c < p; ++c)
    if (!(r.stds(c) > 0.0))
      throw NumericalError("PCA: column " + std::to_string(c) + " is constant");
  const Eigen::MatrixXd z = centered.array().rowwise() / r.stds.transpose().array();
  Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n);
  corr = 0.5 * (corr + corr.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  if (es.info() != Eigen::Success) throw NumericalError("PCA: eigensolver did not converge");

  // Eigen returns ascending eigenvalues.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });
  r.loadings.resize(p, p);
  r.eigenvalues.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    r.eigenvalues(i) = std::max(0.0, es.eigenvalues()(src));
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index big = 0;
    for (Eigen::Index j = 1; j < p; ++j)
      if (std::fabs(v(j)) > std::fabs(v(big)) + 1e-12) big = j;
    if (v(big) < 0) v = -v;
    r.loadings.col(i) = v;
  }
  r.explained_variance_ratio = r.eigenvalues / r.eigenvalues.sum();
  return r;
}

PcaResult pca_metrics(const ScoreTable& scores) { return pca(metric_matrix(scores)); }

Eigen::MatrixXd standardize(const Eigen::MatrixXd& data, const PcaResult& r) {
  return (data.rowwise() - r.means.transpose()).array().rowwise() / r.stds.transpose().array();
}

Eigen::MatrixXd project(const Eigen::MatrixXd& data, const PcaResult& r, int n_components) {
  if (n_components < 1 || n_components > r.loadings.cols())
    throw InputError("n_components must lie in [1, " + std::to_string(r.loadings.cols()) + "]");
  return standardize(data, r) * r.loadings.leftCols(n_components);
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& coords, const PcaResult& r) {
  return coords * r.loadings.leftCols(coords.cols()).transpose();
}

std::string render_loadings_svg(const PcaResult& r) {
  constexpr double panel = 280, gap = 30, top = 70, margin = 40;
  const int comps = std::min<int>(3, static_cast<int>(r.loadings.cols()));
  const std::array<std::pair<int, int>, 3> pairs = {{{0, 1}, {0, 2}, {1, 2}}};
  const int panels = comps >= 3 ? 3 : 1;
  const double W = margin * 2 + panels * panel + (panels - 1) * gap;
  const double H = top + panel + 60;
  SvgWriter svg(W, H);
  svg.rect(0, 0, W, H, "#ffffff");

  auto pct = [&](int c) { return format_fixed(100.0 * r.explained_variance_ratio(c), 1); };
  double top_sum = 0.0;
  for (int c = 0; c < comps; ++c) top_sum += r.explained_variance_ratio(c);
  svg.text(W / 2, 24, "Metric loadings on the leading principal components", 15, "middle");
  svg.text(W / 2, 46, "Top-" + std::to_string(comps) + " explained variance: " +
                          format_fixed(100.0 * top_sum, 1) + "%", 12, "middle");

  for (int k = 0; k < panels; ++k) {
    const auto [a, b] = pairs[static_cast<std::size_t>(k)];
    const double ox = margin + k * (panel + gap);
    const double cx = ox + panel / 2, cy = top + panel / 2, scale = panel / 2 - 20;
    svg.rect(ox, top, panel, panel, "none", "#333333");
    svg.line(ox, cy, ox + panel, cy, "#bbbbbb");
    svg.line(cx, top, cx, top + panel, "#bbbbbb");
    for (int m = 0; m < kMetricCount && m < r.loadings.rows(); ++m) {
      const double lx = r.loadings(m, a), ly = b < r.loadings.cols() ? r.loadings(m, b) : 0.0;
      const double ex = cx + lx * scale, ey = cy - ly * scale;
      svg.arrow(cx, cy, ex, ey, category_color(static_cast<std::size_t>(m)));
      svg.text(ex + (lx >= 0 ? 4 : -4), ey - 4,
               std::string(metric_name(kAllMetrics[static_cast<std::size_t>(m)])), 11,
               lx >= 0 ? "start" : "end");
    }
    svg.text(cx, top + panel + 22, "PC" + std::to_string(a + 1) + " (" + pct(a) + "%)", 12,
             "middle");
    if (b < comps)
      svg.text(ox - 8, cy, "PC" + std::to_string(b + 1) + " (" + pct(b) + "%)", 12, "middle",
               -90);
  }
  return svg.str();
}

void emit_loadings_figure(const PcaResult& r, const std::filesystem::path& path) {
  write_file(path.string(), render_loadings_svg(r));
}

std::string format_loadings_csv(const PcaResult& r) {
  std::string out = "metric";
  for (Eigen::Index c = 0; c < r.loadings.cols(); ++c) out += ",PC" + std::to_string(c + 1);
  out += '\n';
  for (Eigen::Index m = 0; m < r.loadings.rows(); ++m) {
    out += std::string(metric_name(kAllMetrics[static_cast<std::size_t>(m)]));
    for (Eigen::Index c = 0; c < r.loadings.cols(); ++c) out += ',' + format_double(r.loadings(m, c));
    out += '\n';
  }
  return out;
}

std::string format_variance_csv(const PcaResult& r) {
  std::string out = "component,eigenvalue,ratio,cumulative\n";
  double cum = 0.0;
  for (Eigen::Index c = 0; c < r.eigenvalues.size(); ++c) {
    cum += r.explained_variance_ratio(c);
    out += "PC" + std::to_string(c + 1) + ',' + format_double(r.eigenvalues(c)) + ',' +
           format_double(r.explained_variance_ratio(c)) + ',' + format_double(cum) + '\n';
  }
  return out;
}

}  // namespace asraudit
