#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace asraudit {

double mean(std::span<const double> v);
// Population standard deviation (divide by n).
double population_sd(std::span<const double> v);
double median(std::span<const double> v);

// 1-based ranks, ties get the average rank.
std::vector<double> average_ranks(std::span<const double> v);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

struct PermutationTest {
  double statistic = 0.0;
  double p_value = 1.0;  // two-sided, (1 + #{|r*| >= |r|}) / (1 + permutations)
  std::size_t permutations = 0;
};

// Spearman correlation with a seeded permutation p-value.
PermutationTest spearman_permutation_test(std::span<const double> a,
                                          std::span<const double> b,
                                          std::size_t permutations,
                                          std::uint64_t seed);

}  // namespace asraudit
