#include "asraudit/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "asraudit/audio.hpp"
#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/text.hpp"
#include "builtin_data.hpp"

namespace asraudit {

// --- WADA ----------------------------------------------------------------------

WadaTable::WadaTable(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) throw InputError("WADA table needs at least two entries");
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.snr_db < b.snr_db; });
  // Monte-Carlo wiggle must not make the inverse multivalued.
  for (std::size_t i = 1; i < entries_.size(); ++i)
    entries_[i].g = std::max(entries_[i].g, entries_[i - 1].g);
}

WadaTable WadaTable::parse_csv(std::string_view text) {
  std::vector<Entry> entries;
  for (const auto& row : asraudit::parse_csv(text)) {
    if (row.fields.size() != 2)
      throw InputError("WADA table line " + std::to_string(row.line) + ": expected 2 fields");
    Entry e;
    if (!parse_double(row.fields[0], e.snr_db) || !parse_double(row.fields[1], e.g)) {
      if (row.line == 1) continue;  // header
      throw InputError("WADA table line " + std::to_string(row.line) + ": non-numeric field");
    }
    entries.push_back(e);
  }
  return WadaTable(std::move(entries));
}

WadaTable WadaTable::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw InputError("WADA table not found: " + path.string());
  return parse_csv(read_file(path.string()));
}

const WadaTable& WadaTable::builtin() {
  static const WadaTable table = parse_csv(builtin::kWadaTableCsv);
  return table;
}

double WadaTable::snr_for(double g) const {
  if (g <= entries_.front().g) return entries_.front().snr_db;
  if (g >= entries_.back().g) return entries_.back().snr_db;
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), g,
                                   [](const Entry& e, double v) { return e.g < v; });
  const Entry& hi = *it;
  const Entry& lo = *(it - 1);
  if (hi.g == lo.g) return lo.snr_db;
  return lo.snr_db + (g - lo.g) / (hi.g - lo.g) * (hi.snr_db - lo.snr_db);
}

std::string WadaTable::to_csv() const {
  std::string out = "snr_db,expected_g\n";
  for (const auto& e : entries_) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%g,%.10f\n", e.snr_db, e.g);
    out += buf;
  }
  return out;
}

WadaTable generate_wada_table(const WadaTableOptions& opts) {
  if (opts.samples < 1000) throw InputError("WADA table generation needs >= 1000 samples");
  if (!(opts.step_db > 0.0) || opts.max_db <= opts.min_db)
    throw InputError("WADA table generation: bad SNR grid");
  std::mt19937_64 rng(opts.seed);
  std::gamma_distribution<double> gamma(kWadaSpeechShape, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution sign(0.5);

  std::vector<double> speech(opts.samples), noise(opts.samples);
  double ps = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    speech[i] = sign(rng) ? gamma(rng) : -gamma(rng);
    noise[i] = normal(rng);
    ps += speech[i] * speech[i];
    pn += noise[i] * noise[i];
  }
  std::vector<double> mix(opts.samples);
  std::vector<WadaTable::Entry> entries;
  const int steps = static_cast<int>(std::lround((opts.max_db - opts.min_db) / opts.step_db));
  for (int s = 0; s <= steps; ++s) {
    const double snr = opts.min_db + s * opts.step_db;
    const double scale = std::sqrt(ps / (pn * std::pow(10.0, snr / 10.0)));
    for (std::size_t i = 0; i < opts.samples; ++i) mix[i] = speech[i] + scale * noise[i];
    entries.push_back({snr, wada_statistic(mix)});
  }
  return WadaTable(std::move(entries));
}

double wada_statistic(std::span<const double> samples) {
  double abs_sum = 0.0, log_sum = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    const double a = std::fabs(x);
    if (a == 0.0 || !std::isfinite(a)) continue;
    abs_sum += a;
    log_sum += std::log(a);
    ++n;
  }
  if (n == 0) throw NumericalError("WADA-SNR undefined: signal has no non-zero samples");
  return std::log(abs_sum / n) - log_sum / n;
}

double wada_snr(std::span<const double> samples, std::uint32_t sample_rate,
                const WadaTable& table) {
  if (sample_rate == 0 || samples.size() < sample_rate / 10)
    throw NumericalError("WADA-SNR undefined: need at least 0.1 s of audio");
  for (double x : samples)
    if (!std::isfinite(x)) throw NumericalError("WADA-SNR undefined: non-finite sample");
  return std::clamp(table.snr_for(wada_statistic(samples)), kWadaMinDb, kWadaMaxDb);
}

// --- age -------------------------------------------------------------------------

void AgeBinMap::add(std::string_view label, double midpoint_years) {
  bins_[fold_case(trim(label))] = midpoint_years;
}

std::optional<double> AgeBinMap::midpoint(std::string_view label) const {
  const auto it = bins_.find(fold_case(trim(label)));
  if (it == bins_.end()) return std::nullopt;
  return it->second;
}

AgeBinMap AgeBinMap::parse_csv(std::string_view text) {
  AgeBinMap map;
  for (const auto& row : asraudit::parse_csv(text)) {
    if (row.fields.size() != 2)
      throw InputError("age bin table line " + std::to_string(row.line) + ": expected 2 fields");
    double mid;
    if (!parse_double(row.fields[1], mid)) {
      if (row.line == 1) continue;
      throw InputError("age bin table line " + std::to_string(row.line) +
                       ": non-numeric midpoint");
    }
    map.add(row.fields[0], mid);
  }
  return map;
}

AgeBinMap AgeBinMap::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw InputError("age bin table not found: " + path.string());
  return parse_csv(read_file(path.string()));
}

const AgeBinMap& AgeBinMap::builtin() {
  static const AgeBinMap map = parse_csv(builtin::kAgeBinsCsv);
  return map;
}

std::optional<double> parse_age(const std::optional<std::string>& age_raw,
                                const AgeBinMap& bins) {
  if (!age_raw) return std::nullopt;
  const std::string s = trim(*age_raw);
  if (s.empty()) return std::nullopt;
  double v;
  if (parse_double(s, v)) {
    if (std::isfinite(v) && v >= 0.0) return v;
    return std::nullopt;
  }
  if (const auto dash = s.find('-'); dash != std::string::npos && dash > 0) {
    double lo, hi;
    if (parse_double(s.substr(0, dash), lo) && parse_double(s.substr(dash + 1), hi) &&
        lo >= 0.0 && hi >= lo)
      return (lo + hi) / 2.0;
  }
  return bins.midpoint(s);
}

// --- feature table -----------------------------------------------------------------

std::string_view to_string(SnrSource s) {
  switch (s) {
    case SnrSource::manifest: return "manifest";
    case SnrSource::wada: return "wada";
    case SnrSource::manifest_then_wada: return "manifest_then_wada";
  }
  return "?";
}

std::optional<SnrSource> parse_snr_source(std::string_view s) {
  for (SnrSource v : {SnrSource::manifest, SnrSource::wada, SnrSource::manifest_then_wada})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

namespace {

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

ColumnStats column_stats(const std::vector<double>& v, const char* name) {
  ColumnStats s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(v.size()));
  if (!(s.sd > 0.0) || !std::isfinite(s.sd))
    throw NumericalError(std::string("feature column '") + name +
                         "' has zero variance and cannot be standardized");
  return s;
}

}  // namespace

std::vector<RawFeatures> extract_raw_features(std::span<const UtteranceRecord> records,
                                              const FeatureOptions& opts) {
  const WadaTable& table = opts.wada_table ? *opts.wada_table : WadaTable::builtin();
  const AgeBinMap& bins = opts.age_bins ? *opts.age_bins : AgeBinMap::builtin();
  std::vector<RawFeatures> out;
  std::vector<std::string> no_snr, no_duration;
  out.reserve(records.size());
  for (const auto& r : records) {
    RawFeatures f;
    f.sample_id = r.sample_id;
    f.speaker_id = r.speaker_id;
    f.dataset_id = r.dataset_id;
    f.sex = r.sex;
    f.l1 = r.l1;
    f.typicality = r.typicality;
    f.age_years = parse_age(r.age_raw, bins);

    const bool want_wada = opts.snr_source == SnrSource::wada ||
                           (opts.snr_source == SnrSource::manifest_then_wada && !r.snr_db);
    const bool need_audio = (want_wada || !r.duration_s) && r.audio_path;
    std::optional<AudioBuffer> audio;
    if (need_audio) audio = read_wav(*r.audio_path);

    if (opts.snr_source != SnrSource::wada && r.snr_db) {
      f.snr_db = *r.snr_db;
    } else if (want_wada && audio) {
      try {
        f.snr_db = wada_snr(audio->samples, audio->sample_rate, table);
      } catch (const NumericalError& e) {
        throw NumericalError("sample '" + r.sample_id + "': " + e.what());
      }
    } else {
      no_snr.push_back(r.sample_id);
    }

    if (r.duration_s) {
      f.log_duration = std::log(*r.duration_s);
    } else if (audio && audio->duration_s() > 0.0) {
      f.log_duration = std::log(audio->duration_s());
    } else {
      no_duration.push_back(r.sample_id);
    }
    out.push_back(std::move(f));
  }
  if (!no_snr.empty())
    throw InputError("no usable SNR (snr_source=" + std::string(to_string(opts.snr_source)) +
                     ") for " + list_ids(no_snr));
  if (!no_duration.empty())
    throw InputError("no usable duration for " + list_ids(no_duration));
  return out;
}

StandardizationStats fit_standardization(std::span<const RawFeatures> raw) {
  if (raw.empty()) throw InputError("cannot standardize an empty feature table");
  StandardizationStats stats;
  std::vector<double> snr, len, observed;
  for (const auto& f : raw) {
    snr.push_back(f.snr_db);
    len.push_back(f.log_duration);
    if (f.age_years) observed.push_back(*f.age_years);
  }
  if (observed.empty())
    throw NumericalError("feature column 'age' has no observed values to impute from");
  double sum = 0.0;
  for (double a : observed) sum += a;
  stats.age_impute_value = sum / static_cast<double>(observed.size());
  std::vector<double> age;
  for (const auto& f : raw) age.push_back(f.age_years.value_or(stats.age_impute_value));

  stats.columns["snr"] = column_stats(snr, "snr");
  stats.columns["len"] = column_stats(len, "len");
  stats.columns["age"] = column_stats(age, "age");
  return stats;
}

FeatureTable apply_standardization(std::span<const RawFeatures> raw,
                                   const StandardizationStats& stats) {
  auto col = [&](const char* name) {
    const auto it = stats.columns.find(name);
    if (it == stats.columns.end())
      throw InputError(std::string("standardization stats lack column '") + name + "'");
    return it->second;
  };
  const ColumnStats snr = col("snr"), len = col("len"), age = col("age");
  FeatureTable table;
  table.stats = stats;
  table.rows.reserve(raw.size());
  for (const auto& f : raw) {
    FeatureVector v;
    v.sample_id = f.sample_id;
    v.speaker_id = f.speaker_id;
    v.dataset_id = f.dataset_id;
    v.x_snr = (f.snr_db - snr.mean) / snr.sd;
    v.x_len = (f.log_duration - len.mean) / len.sd;
    v.x_miss = f.age_years ? 0 : 1;
    // Imputed rows sit exactly at the mean, hence z = 0.
    v.x_age = f.age_years ? (*f.age_years - age.mean) / age.sd : 0.0;
    v.sex = f.sex;
    v.l1 = f.l1;
    v.typicality = f.typicality;
    table.rows.push_back(std::move(v));
  }
  return table;
}

FeatureTable build_features(std::span<const UtteranceRecord> records,
                            const FeatureOptions& opts) {
  const auto raw = extract_raw_features(records, opts);
  return apply_standardization(raw, fit_standardization(raw));
}

const FeatureVector* FeatureTable::find(std::string_view sample_id) const {
  for (const auto& r : rows)
    if (r.sample_id == sample_id) return &r;
  return nullptr;
}

std::string StandardizationStats::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [name, s] : columns) j["columns"][name] = {{"mean", s.mean}, {"sd", s.sd}};
  j["age_impute_value"] = age_impute_value;
  return j.dump(2) + "\n";
}

StandardizationStats StandardizationStats::from_json(std::string_view text) {
  StandardizationStats s;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [name, c] : j.at("columns").items())
      s.columns[name] = {c.at("mean").get<double>(), c.at("sd").get<double>()};
    s.age_impute_value = j.at("age_impute_value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("standardization stats: ") + e.what());
  }
  return s;
}

namespace {

std::string exact(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_features_csv(const FeatureTable& table) {
  std::string out =
      "sample_id,speaker_id,dataset_id,x_snr,x_len,x_age,x_miss,sex,l1,typicality\n";
  for (const auto& r : table.rows) {
    out += csv_escape(r.sample_id) + ',' + csv_escape(r.speaker_id) + ',' +
           csv_escape(r.dataset_id) + ',' + exact(r.x_snr) + ',' + exact(r.x_len) + ',' +
           exact(r.x_age) + ',' + std::to_string(r.x_miss) + ',' +
           std::string(to_string(r.sex)) + ',' + std::string(to_string(r.l1)) + ',' +
           std::string(to_string(r.typicality)) + '\n';
  }
  return out;
}

FeatureTable parse_features_csv(std::string_view text, const StandardizationStats& stats) {
  const auto rows = asraudit::parse_csv(text);
  if (rows.empty()) throw InputError("features table: missing header");
  const std::vector<std::string> expected = {"sample_id", "speaker_id", "dataset_id", "x_snr",
                                             "x_len",     "x_age",      "x_miss",     "sex",
                                             "l1",        "typicality"};
  if (rows[0].fields != expected) throw InputError("features table: unexpected header");
  FeatureTable table;
  table.stats = stats;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto where = "features table line " + std::to_string(rows[i].line);
    if (f.size() != expected.size()) throw InputError(where + ": wrong number of fields");
    FeatureVector v;
    v.sample_id = f[0];
    v.speaker_id = f[1];
    v.dataset_id = f[2];
    double miss;
    if (!parse_double(f[3], v.x_snr) || !parse_double(f[4], v.x_len) ||
        !parse_double(f[5], v.x_age) || !parse_double(f[6], miss))
      throw InputError(where + ": non-numeric feature");
    v.x_miss = miss != 0.0 ? 1 : 0;
    const auto sex = parse_sex(f[7]);
    const auto l1 = parse_l1(f[8]);
    const auto typ = parse_typicality(f[9]);
    if (!sex || !l1 || !typ) throw InputError(where + ": bad categorical level");
    v.sex = *sex;
    v.l1 = *l1;
    v.typicality = *typ;
    table.rows.push_back(std::move(v));
  }
  return table;
}

}  // namespace asraudit
