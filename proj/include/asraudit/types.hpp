#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asraudit {

enum class Sex { female, male, unknown };
enum class L1Status { native, nonnative, unknown };
enum class Typicality { typical, atypical, unknown };

std::string_view to_string(Sex v);
std::string_view to_string(L1Status v);
std::string_view to_string(Typicality v);

// Accept the common spellings ("f", "non-native", "L2", ...). Empty or
// unrecognized input yields nullopt; the caller decides whether that is an
// error or "unknown".
std::optional<Sex> parse_sex(std::string_view s);
std::optional<L1Status> parse_l1(std::string_view s);
std::optional<Typicality> parse_typicality(std::string_view s);

struct UtteranceRecord {
  std::string sample_id;
  std::string speaker_id;
  std::string dataset_id;
  std::string reference;
  std::map<std::string, std::string> hypotheses;  // model_id -> text
  std::optional<double> duration_s;
  std::optional<std::string> audio_path;
  std::optional<std::string> age_raw;
  Sex sex = Sex::unknown;
  L1Status l1 = L1Status::unknown;
  Typicality typicality = Typicality::unknown;
  std::optional<double> snr_db;

  bool operator==(const UtteranceRecord&) const = default;
};

enum class Metric { wer, cer, mer, wil, ember, semdist };

inline constexpr std::array<Metric, 6> kAllMetrics = {
    Metric::wer, Metric::cer, Metric::mer,
    Metric::wil, Metric::ember, Metric::semdist};

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

enum MetricFlag : std::uint8_t {
  kFlagEmptyRef = 1u << 0,
  kFlagOovSentence = 1u << 1,
};

struct MetricVector {
  double wer = 0.0;
  double cer = 0.0;
  double mer = 0.0;
  double wil = 0.0;
  double ember = 0.0;
  double semdist = 0.0;
  std::uint8_t flags = 0;

  double get(Metric m) const;
  void set(Metric m, double v);
};

// One scored (utterance, model) pair.
struct ScoreRow {
  std::string sample_id;
  std::string model_id;
  MetricVector metrics;
};

using ScoreTable = std::vector<ScoreRow>;

// Model ids present in a score table, sorted.
std::vector<std::string> model_ids(const ScoreTable& scores);

}  // namespace asraudit
