#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asraudit/features.hpp"
#include "asraudit/meaf.hpp"

namespace asraudit {

struct SdiScore {
  std::string sample_id;
  std::string dataset_id;
  std::string metric;
  double value = 0.0;
  int decile = 0;
};

// Continuous slopes dotted with the standardized features plus the fitted
// intercept shifts of the sample's sex / l1 / typicality levels. The
// intercept, dataset and model effects are excluded. Reference levels add 0.
// Throws InputError when the sample carries a non-reference level with no
// fitted term (a fit from another audit).
double sdi(const FeatureVector& features, const FitResult& fit);

std::vector<SdiScore> compute_sdi(const FeatureTable& features,
                                  const FitResult& fit);

struct DecileAssignment {
  bool degenerate = false;  // every value identical
};

// decile = min(10, floor(10 (rank-1) / n) + 1) with ties kept in input order.
DecileAssignment assign_deciles(std::span<SdiScore> scores);

enum class DecileScope { pooled, per_dataset };

std::string_view to_string(DecileScope s);
std::optional<DecileScope> parse_decile_scope(std::string_view s);

// Deciles over the whole corpus or within each dataset.
DecileAssignment assign_deciles(std::span<SdiScore> scores, DecileScope scope);

// sample_id,metric,sdi,decile
std::string format_sdi_csv(std::span<const SdiScore> scores);
std::vector<SdiScore> parse_sdi_csv(std::string_view text);

}  // namespace asraudit
