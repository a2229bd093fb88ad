#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asraudit/types.hpp"

namespace asraudit {

// ---------------------------------------------------------------------------
// WADA-SNR

inline constexpr double kWadaMinDb = -20.0;
inline constexpr double kWadaMaxDb = 100.0;
inline constexpr double kWadaSpeechShape = 0.4;

// Expected amplitude-distribution statistic g as a function of SNR, for
// Gamma(0.4)-amplitude speech plus Gaussian noise.
class WadaTable {
 public:
  struct Entry {
    double snr_db;
    double g;
  };

  // The table shipped with the library (data/wada_snr_table.csv).
  static const WadaTable& builtin();
  static WadaTable parse_csv(std::string_view text);
  static WadaTable load(const std::filesystem::path& path);

  explicit WadaTable(std::vector<Entry> entries);

  std::span<const Entry> entries() const { return entries_; }

  // Inverse lookup by linear interpolation, clamped to the table's range.
  double snr_for(double g) const;

  std::string to_csv() const;

 private:
  std::vector<Entry> entries_;  // ascending snr, g made non-decreasing
};

struct WadaTableOptions {
  double min_db = kWadaMinDb;
  double max_db = kWadaMaxDb;
  double step_db = 1.0;
  std::size_t samples = 2'000'000;
  std::uint64_t seed = 1;
};

// Monte-Carlo estimate of g over the SNR grid, using common random numbers
// across grid points so the curve is smooth in SNR.
WadaTable generate_wada_table(const WadaTableOptions& opts = {});

// ln(mean |x|) - mean(ln |x|) over the non-zero samples.
double wada_statistic(std::span<const double> samples);

// Throws NumericalError for silent or shorter-than-0.1 s input.
double wada_snr(std::span<const double> samples, std::uint32_t sample_rate,
                const WadaTable& table = WadaTable::builtin());

// ---------------------------------------------------------------------------
// Age

class AgeBinMap {
 public:
  static const AgeBinMap& builtin();
  static AgeBinMap parse_csv(std::string_view text);
  static AgeBinMap load(const std::filesystem::path& path);

  void add(std::string_view label, double midpoint_years);
  std::optional<double> midpoint(std::string_view label) const;
  std::size_t size() const { return bins_.size(); }

 private:
  std::map<std::string, double> bins_;  // case-folded label
};

// Numeric strings parse directly; "20-29" style ranges map to their midpoint;
// anything else goes through the bin map. Blank or unknown input is nullopt.
std::optional<double> parse_age(const std::optional<std::string>& age_raw,
                                const AgeBinMap& bins = AgeBinMap::builtin());

// ---------------------------------------------------------------------------
// Feature table

enum class SnrSource { manifest, wada, manifest_then_wada };

std::string_view to_string(SnrSource s);
std::optional<SnrSource> parse_snr_source(std::string_view s);

struct ColumnStats {
  double mean = 0.0;
  double sd = 1.0;  // population standard deviation

  bool operator==(const ColumnStats&) const = default;
};

// z-scoring parameters of the continuous columns, keyed "snr", "len", "age".
struct StandardizationStats {
  std::map<std::string, ColumnStats> columns;
  double age_impute_value = 0.0;  // mean of the observed ages, in years

  std::string to_json() const;
  static StandardizationStats from_json(std::string_view text);
  bool operator==(const StandardizationStats&) const = default;
};

// Per-utterance values before standardization.
struct RawFeatures {
  std::string sample_id;
  std::string speaker_id;
  std::string dataset_id;
  double snr_db = 0.0;
  double log_duration = 0.0;
  std::optional<double> age_years;
  Sex sex = Sex::unknown;
  L1Status l1 = L1Status::unknown;
  Typicality typicality = Typicality::unknown;
};

struct FeatureVector {
  std::string sample_id;
  std::string speaker_id;
  std::string dataset_id;
  double x_snr = 0.0;
  double x_len = 0.0;
  double x_age = 0.0;
  int x_miss = 0;
  Sex sex = Sex::unknown;
  L1Status l1 = L1Status::unknown;
  Typicality typicality = Typicality::unknown;
};

struct FeatureTable {
  std::vector<FeatureVector> rows;
  StandardizationStats stats;

  const FeatureVector* find(std::string_view sample_id) const;
};

struct FeatureOptions {
  SnrSource snr_source = SnrSource::manifest_then_wada;
  const AgeBinMap* age_bins = nullptr;  // builtin when null
  const WadaTable* wada_table = nullptr;  // builtin when null
};

// Resolves SNR, duration and age for every record. Throws InputError listing
// the records that lack a usable SNR or duration.
std::vector<RawFeatures> extract_raw_features(
    std::span<const UtteranceRecord> records, const FeatureOptions& opts = {});

// Mean-imputes missing ages, then z-scores snr, log-duration and age with
// population statistics. Throws NumericalError for a zero-variance column.
StandardizationStats fit_standardization(std::span<const RawFeatures> raw);

// Applies previously fitted statistics; deterministic, so refitting and
// reapplying on the same data reproduces identical columns.
FeatureTable apply_standardization(std::span<const RawFeatures> raw,
                                   const StandardizationStats& stats);

FeatureTable build_features(std::span<const UtteranceRecord> records,
                            const FeatureOptions& opts = {});

std::string format_features_csv(const FeatureTable& table);
FeatureTable parse_features_csv(std::string_view text,
                                const StandardizationStats& stats);

}  // namespace asraudit
