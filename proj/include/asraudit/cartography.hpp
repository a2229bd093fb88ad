#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asraudit/features.hpp"
#include "asraudit/sdi.hpp"
#include "asraudit/stats.hpp"
#include "asraudit/types.hpp"

namespace asraudit {

enum class Quadrant { easy, ambiguous, hard, hard_consensus };

std::string_view to_string(Quadrant q);
std::optional<Quadrant> parse_quadrant(std::string_view s);

struct CartographyPoint {
  std::string sample_id;
  std::string metric;
  double mu = 0.0;
  double sigma = 0.0;
  int sdi_decile = 0;  // 0 until SDI is attached
  Quadrant quadrant = Quadrant::easy;
  Sex sex = Sex::unknown;
  L1Status l1 = L1Status::unknown;
  Typicality typicality = Typicality::unknown;
};

// Mean and population standard deviation of one sample's per-model scores.
// Values are summed in sorted order, so any permutation of the models gives
// identical results; all-equal input yields sigma == 0 exactly.
struct MuSigma {
  double mu;
  double sigma;
};
MuSigma mu_sigma(std::span<const double> per_model);

// One point per sample in first-appearance order. Requires M >= 2 models and
// the same model set for every sample (InputError otherwise).
std::vector<CartographyPoint> cartography(const ScoreTable& scores, Metric metric);

struct QuadrantThresholds {
  double mu_median = 0.0;
  double sigma_median = 0.0;
  bool reliable = true;  // false when mu or sigma is constant
};

// Median split: a coordinate is "high" when strictly above its median.
// easy = low mu / low sigma, ambiguous = low mu / high sigma,
// hard = high mu / high sigma, hard_consensus = high mu / low sigma.
QuadrantThresholds classify_quadrants(std::span<CartographyPoint> points);
Quadrant quadrant_for(double mu, double sigma, const QuadrantThresholds& t);

// Copies deciles and demographic tags onto the points.
void attach_sdi(std::span<CartographyPoint> points,
                std::span<const SdiScore> sdi);
void attach_tags(std::span<CartographyPoint> points, const FeatureTable& features);

struct DecileSummary {
  int decile = 0;
  std::size_t count = 0;
  double mean_sdi = 0.0;
  double mean_mu = 0.0;
  double mean_sigma = 0.0;
};

struct SdiCorrelation {
  std::string metric;
  PermutationTest sdi_mu;
  PermutationTest sdi_sigma;
  std::vector<DecileSummary> deciles;  // 1..10, empty deciles omitted
};

SdiCorrelation correlate_sdi(std::span<const CartographyPoint> points,
                             std::span<const SdiScore> sdi,
                             std::size_t permutations = 10'000,
                             std::uint64_t seed = 0);

enum class ColorBy { sdi_decile, group_tag };

struct CartographyFigure {
  std::string title;
  ColorBy color_by = ColorBy::sdi_decile;
  std::string group_attribute = "typicality";  // sex | l1 | typicality
};

// Deterministic scatter of mu against sigma. Throws InputError for an empty
// point set.
std::string render_cartography_svg(std::span<const CartographyPoint> points,
                                   const CartographyFigure& fig);
void emit_cartography_svg(std::span<const CartographyPoint> points,
                          const CartographyFigure& fig,
                          const std::filesystem::path& path);

// sample_id,metric,mu,sigma,quadrant,sdi_decile
std::string format_cartography_csv(std::span<const CartographyPoint> points);

}  // namespace asraudit
