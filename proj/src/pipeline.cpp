#include "asraudit/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "asraudit/cartography.hpp"
#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/meaf.hpp"
#include "asraudit/pca.hpp"
#include "asraudit/stats.hpp"

namespace asraudit {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kScoresCsv = "scores.csv";
constexpr const char* kFlagsJson = "flags_summary.json";
constexpr const char* kFeaturesCsv = "features.csv";
constexpr const char* kStandardizationJson = "standardization.json";
constexpr const char* kDatasetSummaryCsv = "dataset_summary.csv";
constexpr const char* kCoefficientsCsv = "fit_coefficients.csv";
constexpr const char* kFitSummaryCsv = "fit_summary.csv";
constexpr const char* kSdiCsv = "sdi.csv";
constexpr const char* kCartographyCsv = "cartography.csv";
constexpr const char* kCorrelationCsv = "cartography_correlation.csv";
constexpr const char* kDecilesCsv = "cartography_deciles.csv";
constexpr const char* kLoadingsCsv = "pca_loadings.csv";
constexpr const char* kVarianceCsv = "pca_variance.csv";
constexpr const char* kProjectionCsv = "pca_projection.csv";
constexpr const char* kReportMd = "report.md";
constexpr const char* kRunManifest = "run_manifest.json";

fs::path fit_json_path(const fs::path& out, Metric m) {
  return out / "fit" / ("fit_" + std::string(metric_name(m)) + ".json");
}

void require_input(const fs::path& p, const char* what) {
  if (p.empty()) throw InputError(std::string("no ") + what + " configured");
  if (!fs::exists(p)) throw InputError(std::string(what) + " not found: " + p.string());
}

void require_artifact(const fs::path& out, const fs::path& rel, const char* producer) {
  if (!fs::exists(out / rel))
    throw InputError("missing " + rel.generic_string() + " in " + out.string() + ": run " +
                     producer + " first");
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_artifact(const fs::path& out, const fs::path& rel, std::string_view content) {
  const fs::path p = out / rel;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file(p.string(), content);
}

// Records the command in run_manifest.json with hashes of its outputs.
void record_run(const AuditConfig& cfg, const std::string& command,
                const std::vector<std::string>& outputs) {
  const fs::path path = cfg.out / kRunManifest;
  json m;
  if (fs::exists(path)) {
    try {
      m = json::parse(read_file(path.string()));
    } catch (const json::exception&) {
      m = json::object();
    }
  }
  m["toolkit"] = "asr-audit";
  m["version"] = ASRAUDIT_VERSION;
  json c = json::object();
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  m["config"] = c;
  m["config_hash"] = cfg.hash();
  m["seed"] = cfg.seed;

  json inputs = json::object();
  const auto add_input = [&](const char* key, const fs::path& p) {
    if (!p.empty() && fs::exists(p))
      inputs[key] = {{"path", p.generic_string()}, {"sha256", sha256_file(p)}};
  };
  add_input("manifest", cfg.manifest);
  add_input("embeddings", cfg.embeddings);
  if (cfg.sentence_vectors) add_input("sentence_vectors", *cfg.sentence_vectors);
  if (cfg.scores) add_input("scores", *cfg.scores);
  if (cfg.age_bins) add_input("age_bins", *cfg.age_bins);
  if (cfg.wada_table) add_input("wada_table", *cfg.wada_table);
  m["inputs"] = inputs;

  json outs = json::object();
  for (const auto& rel : outputs) outs[rel] = sha256_file(cfg.out / rel);
  if (!m.contains("commands")) m["commands"] = json::object();
  m["commands"][command] = {{"completed_at", timestamp_utc()}, {"outputs", outs}};
  write_file(path.string(), m.dump(2) + "\n");
}

std::vector<UtteranceRecord> load_records(const AuditConfig& cfg) {
  require_input(cfg.manifest, "manifest");
  return load_manifest(cfg.manifest, cfg.manifest_format.value_or(manifest_format_for(cfg.manifest)));
}

ScoreTable load_scores(const fs::path& out) {
  require_artifact(out, kScoresCsv, "score");
  return read_scores(out / kScoresCsv);
}

FeatureTable load_features(const fs::path& out) {
  require_artifact(out, kFeaturesCsv, "features");
  require_artifact(out, kStandardizationJson, "features");
  const auto stats = StandardizationStats::from_json(read_file((out / kStandardizationJson).string()));
  return parse_features_csv(read_file((out / kFeaturesCsv).string()), stats);
}

MetricFits load_fits(const fs::path& out) {
  MetricFits fits;
  for (Metric m : kAllMetrics) {
    const fs::path p = fit_json_path(out, m);
    require_artifact(out, fs::relative(p, out), "fit");
    fits.fits.push_back(fit_from_json(read_file(p.string())));
  }
  return fits;
}

std::vector<SdiScore> load_sdi(const fs::path& out) {
  require_artifact(out, kSdiCsv, "sdi");
  return parse_sdi_csv(read_file((out / kSdiCsv).string()));
}

// Imported score tables must cover exactly the manifest's (sample, model) pairs.
void check_scores_against_manifest(const ScoreTable& scores,
                                   std::span<const UtteranceRecord> records) {
  std::set<std::pair<std::string, std::string>> expected;
  for (const auto& r : records)
    for (const auto& [model, text] : r.hypotheses) expected.emplace(r.sample_id, model);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& row : scores) {
    const auto key = std::make_pair(row.sample_id, row.model_id);
    if (!expected.count(key))
      throw InputError("score table row (" + row.sample_id + ", " + row.model_id +
                       ") is not in the manifest");
    if (!seen.insert(key).second)
      throw InputError("score table has duplicate row (" + row.sample_id + ", " +
                       row.model_id + ")");
  }
  if (seen.size() != expected.size())
    throw InputError("score table covers " + std::to_string(seen.size()) + " of " +
                     std::to_string(expected.size()) + " manifest (sample, model) pairs");
}

std::string sex_tag(Sex s) { return std::string(to_string(s)); }

std::string md_num(double v, int decimals = 3) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  return format_fixed(v, decimals);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> AuditConfig::entries() const {
  const auto opt = [](const std::optional<fs::path>& p) {
    return p ? p->generic_string() : std::string();
  };
  return {
      {"manifest", manifest.generic_string()},
      {"manifest-format",
       manifest_format ? (*manifest_format == ManifestFormat::csv ? "csv" : "jsonl") : ""},
      {"embeddings", embeddings.generic_string()},
      {"sentence-vectors", opt(sentence_vectors)},
      {"scores", opt(scores)},
      {"age-bins", opt(age_bins)},
      {"wada-table", opt(wada_table)},
      {"out", out.generic_string()},
      {"ember-tau", format_double(ember.similarity_threshold)},
      {"ember-lambda", format_double(ember.similar_sub_weight)},
      {"snr-source", std::string(to_string(snr_source))},
      {"decile-scope", std::string(to_string(decile_scope))},
      {"seed", std::to_string(seed)},
      {"permutations", std::to_string(permutations)},
      {"strata-metric", std::string(metric_name(strata_metric))},
  };
}

std::string AuditConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries())
    if (k != "out") canon += k + "=" + v + "\n";
  return sha256_hex(canon);
}

fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "asr_audit_out";
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[digest[i] >> 4];
    s += hex[digest[i] & 0xF];
  }
  return s;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path.string())); }

void cmd_score(const AuditConfig& cfg) {
  const auto records = load_records(cfg);
  fs::create_directories(cfg.out);
  ScoreTable scores;
  std::string source;
  if (cfg.scores) {
    require_input(*cfg.scores, "score table");
    scores = read_scores(*cfg.scores);
    check_scores_against_manifest(scores, records);
    source = "imported";
  } else {
    require_input(cfg.embeddings, "embeddings");
    cfg.ember.validate();
    const auto emb = load_embeddings(cfg.embeddings);
    std::optional<SentenceVectors> sv;
    if (cfg.sentence_vectors) {
      require_input(*cfg.sentence_vectors, "sentence vectors");
      sv = SentenceVectors::load(*cfg.sentence_vectors);
    }
    ScoringOptions opts{cfg.ember, sv ? &*sv : nullptr};
    scores = score_all(records, emb, opts);
    source = "transcripts";
  }
  write_artifact(cfg.out, kScoresCsv, format_scores(scores));

  json flags;
  flags["source"] = source;
  flags["rows"] = scores.size();
  std::size_t empty_ref = 0, oov = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_model;
  for (const auto& row : scores) {
    auto& pm = per_model[row.model_id];
    if (row.metrics.flags & kFlagEmptyRef) ++empty_ref, ++pm.first;
    if (row.metrics.flags & kFlagOovSentence) ++oov, ++pm.second;
  }
  flags["empty_ref"] = empty_ref;
  flags["oov_sentence"] = oov;
  json models = json::object();
  for (const auto& [m, c] : per_model) models[m] = {{"empty_ref", c.first}, {"oov_sentence", c.second}};
  flags["per_model"] = models;
  write_artifact(cfg.out, kFlagsJson, flags.dump(2) + "\n");
  record_run(cfg, "score", {kScoresCsv, kFlagsJson});
}

void cmd_features(const AuditConfig& cfg) {
  const auto records = load_records(cfg);
  std::optional<AgeBinMap> bins;
  std::optional<WadaTable> table;
  if (cfg.age_bins) {
    require_input(*cfg.age_bins, "age bin map");
    bins = AgeBinMap::load(*cfg.age_bins);
  }
  if (cfg.wada_table) {
    require_input(*cfg.wada_table, "WADA table");
    table = WadaTable::load(*cfg.wada_table);
  }
  FeatureOptions opts{cfg.snr_source, bins ? &*bins : nullptr, table ? &*table : nullptr};
  const auto raw = extract_raw_features(records, opts);
  const auto stats = fit_standardization(raw);
  const auto features = apply_standardization(raw, stats);
  write_artifact(cfg.out, kFeaturesCsv, format_features_csv(features));
  write_artifact(cfg.out, kStandardizationJson, stats.to_json());

  // Per-dataset averages and ratios, plus a pooled row.
  struct Acc {
    std::size_t n = 0, age_n = 0, male = 0, nonnative = 0, atypical = 0;
    std::set<std::string> speakers;
    double snr = 0.0, dur = 0.0, age = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& r : raw) {
    for (const std::string& key : {r.dataset_id, std::string("(all)")}) {
      auto& a = acc[key];
      ++a.n;
      a.speakers.insert(r.speaker_id);
      a.snr += r.snr_db;
      a.dur += std::exp(r.log_duration);
      if (r.age_years) a.age += *r.age_years, ++a.age_n;
      a.male += r.sex == Sex::male;
      a.nonnative += r.l1 == L1Status::nonnative;
      a.atypical += r.typicality == Typicality::atypical;
    }
  }
  std::string csv =
      "dataset_id,utterances,speakers,mean_snr_db,mean_duration_s,mean_age_years,"
      "age_missing_ratio,male_ratio,nonnative_ratio,atypical_ratio\n";
  const auto emit = [&](const std::string& key, const Acc& a) {
    const double n = static_cast<double>(a.n);
    csv += csv_escape(key) + "," + std::to_string(a.n) + "," + std::to_string(a.speakers.size()) +
           "," + format_fixed(a.snr / n, 4) + "," + format_fixed(a.dur / n, 4) + "," +
           (a.age_n ? format_fixed(a.age / static_cast<double>(a.age_n), 4) : std::string()) +
           "," + format_fixed(1.0 - static_cast<double>(a.age_n) / n, 4) + "," +
           format_fixed(static_cast<double>(a.male) / n, 4) + "," +
           format_fixed(static_cast<double>(a.nonnative) / n, 4) + "," +
           format_fixed(static_cast<double>(a.atypical) / n, 4) + "\n";
  };
  for (const auto& [k, a] : acc)
    if (k != "(all)") emit(k, a);
  emit("(all)", acc.at("(all)"));
  write_artifact(cfg.out, kDatasetSummaryCsv, csv);
  record_run(cfg, "features", {kFeaturesCsv, kStandardizationJson, kDatasetSummaryCsv});
}

void cmd_fit(const AuditConfig& cfg) {
  const auto features = load_features(cfg.out);
  const auto scores = load_scores(cfg.out);
  const auto fits = fit_all_metrics(features, scores);
  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    const fs::path rel = fs::relative(fit_json_path(cfg.out, kAllMetrics[i]), cfg.out);
    write_artifact(cfg.out, rel, fit_to_json(fits.fits[i]));
    outputs.push_back(rel.generic_string());
  }
  write_artifact(cfg.out, kCoefficientsCsv, format_coefficients_csv(fits));
  write_artifact(cfg.out, kFitSummaryCsv, format_fit_summary_csv(fits));
  outputs.push_back(kCoefficientsCsv);
  outputs.push_back(kFitSummaryCsv);
  record_run(cfg, "fit", outputs);
}

void cmd_sdi(const AuditConfig& cfg) {
  const auto fits = load_fits(cfg.out);
  const auto features = load_features(cfg.out);
  std::vector<SdiScore> all;
  for (const auto& fit : fits.fits) {
    auto s = compute_sdi(features, fit);
    assign_deciles(s, cfg.decile_scope);
    all.insert(all.end(), s.begin(), s.end());
  }
  write_artifact(cfg.out, kSdiCsv, format_sdi_csv(all));
  record_run(cfg, "sdi", {kSdiCsv});
}

void cmd_cartography(const AuditConfig& cfg) {
  const auto scores = load_scores(cfg.out);
  const auto sdi_all = load_sdi(cfg.out);
  const auto features = load_features(cfg.out);

  std::vector<CartographyPoint> all_points;
  std::string corr = "metric,rho_sdi_mu,p_sdi_mu,rho_sdi_sigma,p_sdi_sigma,permutations,quadrants_reliable\n";
  std::string deciles = "metric,decile,count,mean_sdi,mean_mu,mean_sigma\n";
  std::vector<std::string> outputs = {kCartographyCsv, kCorrelationCsv, kDecilesCsv};

  for (std::size_t mi = 0; mi < kAllMetrics.size(); ++mi) {
    const Metric metric = kAllMetrics[mi];
    const std::string name(metric_name(metric));
    std::vector<SdiScore> sdi;
    for (const auto& s : sdi_all)
      if (s.metric == name) sdi.push_back(s);
    auto points = cartography(scores, metric);
    const auto thresholds = classify_quadrants(points);
    attach_sdi(points, sdi);
    attach_tags(points, features);
    const auto c = correlate_sdi(points, sdi, cfg.permutations, cfg.seed + 2 * mi);
    corr += name + "," + format_double(c.sdi_mu.statistic) + "," + format_double(c.sdi_mu.p_value) +
            "," + format_double(c.sdi_sigma.statistic) + "," +
            format_double(c.sdi_sigma.p_value) + "," + std::to_string(cfg.permutations) + "," +
            (thresholds.reliable ? "true" : "false") + "\n";
    for (const auto& d : c.deciles)
      deciles += name + "," + std::to_string(d.decile) + "," + std::to_string(d.count) + "," +
                 format_double(d.mean_sdi) + "," + format_double(d.mean_mu) + "," +
                 format_double(d.mean_sigma) + "\n";

    const std::string rel = "figures/cartography_" + name + ".svg";
    emit_cartography_svg(points, {"Data map: " + name + " (colored by SDI decile)"}, cfg.out / rel);
    outputs.push_back(rel);

    if (metric == cfg.strata_metric) {
      for (const std::string attr : {"sex", "l1", "typicality"}) {
        const std::string grel = "figures/cartography_" + name + "_" + attr + ".svg";
        emit_cartography_svg(points, {"Data map: " + name + " by " + attr, ColorBy::group_tag, attr},
                             cfg.out / grel);
        outputs.push_back(grel);
        std::map<std::string, std::vector<CartographyPoint>> strata;
        for (const auto& p : points) {
          const std::string level =
              attr == "sex" ? sex_tag(p.sex)
              : attr == "l1" ? std::string(to_string(p.l1))
                             : std::string(to_string(p.typicality));
          if (level != "unknown") strata[level].push_back(p);
        }
        for (const auto& [level, pts] : strata) {
          const std::string srel = "figures/cartography_" + name + "_" + attr + "_" + level + ".svg";
          emit_cartography_svg(pts, {"Data map: " + name + ", " + attr + " = " + level}, cfg.out / srel);
          outputs.push_back(srel);
        }
      }
    }
    all_points.insert(all_points.end(), points.begin(), points.end());
  }
  write_artifact(cfg.out, kCartographyCsv, format_cartography_csv(all_points));
  write_artifact(cfg.out, kCorrelationCsv, corr);
  write_artifact(cfg.out, kDecilesCsv, deciles);
  record_run(cfg, "cartography", outputs);
}

void cmd_pca(const AuditConfig& cfg) {
  const auto scores = load_scores(cfg.out);
  const auto result = pca_metrics(scores);
  write_artifact(cfg.out, kLoadingsCsv, format_loadings_csv(result));
  write_artifact(cfg.out, kVarianceCsv, format_variance_csv(result));
  const auto coords = project(metric_matrix(scores), result, 3);
  std::string proj = "sample_id,model_id,pc1,pc2,pc3\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    proj += csv_escape(scores[i].sample_id) + "," + csv_escape(scores[i].model_id) + "," +
            format_double(coords(r, 0)) + "," + format_double(coords(r, 1)) + "," +
            format_double(coords(r, 2)) + "\n";
  }
  write_artifact(cfg.out, kProjectionCsv, proj);
  fs::create_directories(cfg.out / "figures");
  emit_loadings_figure(result, cfg.out / "figures/pca_loadings.svg");
  record_run(cfg, "pca", {kLoadingsCsv, kVarianceCsv, kProjectionCsv, "figures/pca_loadings.svg"});
}

namespace {

std::string csv_as_markdown(std::string_view text, std::size_t max_rows = 1000) {
  const auto rows = parse_csv(text);
  if (rows.empty()) return "";
  std::string md = "|";
  for (const auto& f : rows[0].fields) md += " " + f + " |";
  md += "\n|";
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) md += "---|";
  md += "\n";
  for (std::size_t r = 1; r < rows.size() && r <= max_rows; ++r) {
    md += "|";
    for (const auto& f : rows[r].fields) md += " " + f + " |";
    md += "\n";
  }
  return md;
}

}  // namespace

void cmd_report(const AuditConfig& cfg) {
  const fs::path& out = cfg.out;
  const auto missing = [&](const fs::path& rel) { return !fs::exists(out / rel); };
  if (missing(kScoresCsv)) cmd_score(cfg);
  if (missing(kFeaturesCsv) || missing(kStandardizationJson) || missing(kDatasetSummaryCsv))
    cmd_features(cfg);
  bool fits_missing = missing(kCoefficientsCsv) || missing(kFitSummaryCsv);
  for (Metric m : kAllMetrics) fits_missing = fits_missing || !fs::exists(fit_json_path(out, m));
  if (fits_missing) cmd_fit(cfg);
  if (missing(kSdiCsv)) cmd_sdi(cfg);
  if (missing(kCartographyCsv) || missing(kCorrelationCsv) || missing(kDecilesCsv)) cmd_cartography(cfg);
  if (missing(kLoadingsCsv) || missing(kVarianceCsv) || missing("figures/pca_loadings.svg")) cmd_pca(cfg);

  const auto scores = load_scores(out);
  const auto fits = load_fits(out);
  const auto read = [&](const char* rel) { return read_file((out / rel).string()); };

  std::ostringstream md;
  md << "# ASR audit report\n\n";
  md << "Toolkit version " << ASRAUDIT_VERSION << ", config hash `" << cfg.hash() << "`, seed "
     << cfg.seed << ".\n\n";

  md << "## Dataset characteristics\n\n"
     << "Averages (SNR in dB, duration in seconds, age in years) and ratios over utterances.\n\n"
     << csv_as_markdown(read(kDatasetSummaryCsv)) << "\n";

  md << "## Mean metric scores by model\n\n| model | n |";
  for (Metric m : kAllMetrics) md << " " << metric_name(m) << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) md << "---|";
  md << "\n";
  {
    std::map<std::string, std::pair<std::size_t, std::array<double, 6>>> by_model;
    for (const auto& row : scores) {
      auto& e = by_model[row.model_id];
      ++e.first;
      for (std::size_t i = 0; i < kAllMetrics.size(); ++i) e.second[i] += row.metrics.get(kAllMetrics[i]);
    }
    for (const auto& [model, e] : by_model) {
      md << "| " << model << " | " << e.first << " |";
      for (double v : e.second) md << " " << md_num(v / static_cast<double>(e.first), 4) << " |";
      md << "\n";
    }
  }
  md << "\n";

  md << "## Metric covariance structure (PCA)\n\n"
     << csv_as_markdown(read(kVarianceCsv)) << "\n"
     << csv_as_markdown(read(kLoadingsCsv)) << "\n"
     << "![PCA loadings](figures/pca_loadings.svg)\n\n";

  md << "## Metric elasticities\n\n"
     << "Standardized coefficients with speaker-clustered standard errors. Reference levels: ";
  {
    bool first = true;
    for (const auto& [f, lvl] : fits.fits.front().reference_levels) {
      md << (first ? "" : ", ") << f << " = " << lvl;
      first = false;
    }
  }
  md << ".\n\n| term |";
  for (Metric m : kAllMetrics) md << " " << metric_name(m) << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) md << "---|";
  md << "\n";
  for (const auto& term : fits.fits.front().terms) {
    if (term.kind == TermKind::dataset || term.kind == TermKind::model) continue;
    md << "| " << term.name << " |";
    for (const auto& fit : fits.fits) {
      const auto i = fit.index_of(term.name);
      if (!i) {
        md << " |";
        continue;
      }
      const auto k = static_cast<Eigen::Index>(*i);
      const double t = fit.coef(k) / fit.clustered_se(k);
      const char* stars = std::fabs(t) > 3.29 ? "***" : std::fabs(t) > 2.58 ? "**" : std::fabs(t) > 1.96 ? "*" : "";
      md << " " << md_num(fit.coef(k)) << stars << " (" << md_num(fit.clustered_se(k)) << ") |";
    }
    md << "\n";
  }
  md << "\nDataset and model fixed effects are listed in `" << kCoefficientsCsv
     << "`. Significance: * |t| > 1.96, ** > 2.58, *** > 3.29.\n\n";
  md << csv_as_markdown(read(kFitSummaryCsv)) << "\n";
  {
    std::set<std::string> warnings;
    for (const auto& fit : fits.fits) warnings.insert(fit.warnings.begin(), fit.warnings.end());
    if (!warnings.empty()) {
      md << "Design warnings:\n\n";
      for (const auto& w : warnings) md << "- " << w << "\n";
      md << "\n";
    }
  }

  md << "## Sample difficulty and data maps\n\n"
     << "Spearman correlation of SDI with the cross-model mean error (mu) and disagreement "
        "(sigma), with permutation p-values.\n\n"
     << csv_as_markdown(read(kCorrelationCsv)) << "\n";
  {
    // Quadrant counts per metric.
    const auto rows = parse_csv(read(kCartographyCsv));
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (std::size_t r = 1; r < rows.size(); ++r) ++counts[rows[r].fields[1]][rows[r].fields[4]];
    md << "| metric | easy | ambiguous | hard | hard_consensus |\n|---|---|---|---|---|\n";
    for (Metric m : kAllMetrics) {
      const auto& c = counts[std::string(metric_name(m))];
      const auto get = [&](const char* q) {
        const auto it = c.find(q);
        return it == c.end() ? std::size_t{0} : it->second;
      };
      md << "| " << metric_name(m) << " | " << get("easy") << " | " << get("ambiguous") << " | "
         << get("hard") << " | " << get("hard_consensus") << " |\n";
    }
    md << "\n";
  }
  md << "Per-decile means:\n\n" << csv_as_markdown(read(kDecilesCsv)) << "\n";
  for (Metric m : kAllMetrics)
    md << "![Data map " << metric_name(m) << "](figures/cartography_" << metric_name(m) << ".svg)\n";
  md << "\n";
  {
    const std::string name(metric_name(cfg.strata_metric));
    std::vector<std::string> figs;
    if (fs::exists(out / "figures"))
      for (const auto& e : fs::directory_iterator(out / "figures")) {
        const std::string f = e.path().filename().string();
        if (f.rfind("cartography_" + name + "_", 0) == 0) figs.push_back(f);
      }
    std::sort(figs.begin(), figs.end());
    if (!figs.empty()) {
      md << "### Data maps by speaker group (" << name << ")\n\n";
      for (const auto& f : figs) md << "![" << f << "](figures/" << f << ")\n";
      md << "\n";
    }
  }
  {
    const auto flags = json::parse(read(kFlagsJson));
    md << "## Scoring flags\n\nScore source: " << flags["source"].get<std::string>() << ". "
       << flags["empty_ref"].get<std::size_t>() << " rows with an empty reference, "
       << flags["oov_sentence"].get<std::size_t>()
       << " rows whose sentence embedding was entirely out of vocabulary.\n";
  }
  write_artifact(out, kReportMd, md.str());
  record_run(cfg, "report", {kReportMd});
}

std::vector<std::string> list_artifacts(const fs::path& out) {
  std::vector<std::string> files;
  if (!fs::exists(out)) return files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), out).generic_string();
    if (rel != kRunManifest) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace asraudit
