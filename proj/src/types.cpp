#include "asraudit/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace asraudit {
namespace {

std::string lower_ascii(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::string_view to_string(Sex v) {
  switch (v) {
    case Sex::female: return "female";
    case Sex::male: return "male";
    case Sex::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(L1Status v) {
  switch (v) {
    case L1Status::native: return "native";
    case L1Status::nonnative: return "nonnative";
    case L1Status::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Typicality v) {
  switch (v) {
    case Typicality::typical: return "typical";
    case Typicality::atypical: return "atypical";
    case Typicality::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<Sex> parse_sex(std::string_view s) {
  const std::string v = lower_ascii(s);
  if (v == "female" || v == "f" || v == "woman") return Sex::female;
  if (v == "male" || v == "m" || v == "man") return Sex::male;
  if (v == "unknown" || v == "other" || v == "na" || v == "n/a") return Sex::unknown;
  return std::nullopt;
}

std::optional<L1Status> parse_l1(std::string_view s) {
  const std::string v = lower_ascii(s);
  if (v == "native" || v == "l1" || v == "true") return L1Status::native;
  if (v == "nonnative" || v == "non-native" || v == "non_native" || v == "l2" ||
      v == "false")
    return L1Status::nonnative;
  if (v == "unknown" || v == "na" || v == "n/a") return L1Status::unknown;
  return std::nullopt;
}

std::optional<Typicality> parse_typicality(std::string_view s) {
  const std::string v = lower_ascii(s);
  if (v == "typical") return Typicality::typical;
  if (v == "atypical" || v == "disordered" || v == "dysarthric")
    return Typicality::atypical;
  if (v == "unknown" || v == "na" || v == "n/a") return Typicality::unknown;
  return std::nullopt;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::wer: return "wer";
    case Metric::cer: return "cer";
    case Metric::mer: return "mer";
    case Metric::wil: return "wil";
    case Metric::ember: return "ember";
    case Metric::semdist: return "semdist";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  const std::string v = lower_ascii(name);
  for (Metric m : kAllMetrics)
    if (metric_name(m) == v) return m;
  return std::nullopt;
}

double MetricVector::get(Metric m) const {
  switch (m) {
    case Metric::wer: return wer;
    case Metric::cer: return cer;
    case Metric::mer: return mer;
    case Metric::wil: return wil;
    case Metric::ember: return ember;
    case Metric::semdist: return semdist;
  }
  return 0.0;
}

void MetricVector::set(Metric m, double v) {
  switch (m) {
    case Metric::wer: wer = v; break;
    case Metric::cer: cer = v; break;
    case Metric::mer: mer = v; break;
    case Metric::wil: wil = v; break;
    case Metric::ember: ember = v; break;
    case Metric::semdist: semdist = v; break;
  }
}

std::vector<std::string> model_ids(const ScoreTable& scores) {
  std::set<std::string> ids;
  for (const auto& row : scores) ids.insert(row.model_id);
  return {ids.begin(), ids.end()};
}

}  // namespace asraudit
