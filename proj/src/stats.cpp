#include "asraudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "asraudit/error.hpp"

namespace asraudit {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_sd(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double median(std::span<const double> v) {
  if (v.empty()) return 0.0;
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("correlation inputs differ in length");
  if (a.size() < 2) return 0.0;
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

PermutationTest spearman_permutation_test(std::span<const double> a,
                                          std::span<const double> b,
                                          std::size_t permutations, std::uint64_t seed) {
  if (a.size() != b.size()) throw InputError("correlation inputs differ in length");
  PermutationTest t;
  t.permutations = permutations;
  const auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  std::vector<double> ca(ra.size()), cb(rb.size());
  double saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ca[i] = ra[i] - ma;
    cb[i] = rb[i] - mb;
    saa += ca[i] * ca[i];
    sbb += cb[i] * cb[i];
  }
  if (saa == 0.0 || sbb == 0.0) return t;  // rho 0, p 1
  const double norm = std::sqrt(saa * sbb);
  auto rho = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) s += ca[i] * y[i];
    return s / norm;
  };
  t.statistic = rho(cb);
  const double observed = std::fabs(t.statistic) - 1e-12;
  std::mt19937_64 rng(seed);
  std::size_t extreme = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    std::shuffle(cb.begin(), cb.end(), rng);
    if (std::fabs(rho(cb)) >= observed) ++extreme;
  }
  t.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + permutations);
  return t;
}

}  // namespace asraudit
