#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asraudit/features.hpp"
#include "asraudit/ingest.hpp"
#include "asraudit/metrics.hpp"
#include "asraudit/sdi.hpp"

namespace asraudit {

inline constexpr const char* kOutputRootEnv = "ASR_AUDIT_OUT";

struct AuditConfig {
  std::filesystem::path manifest;
  std::optional<ManifestFormat> manifest_format;  // from the extension when unset
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> sentence_vectors;
  // A precomputed score table used instead of scoring the transcripts.
  std::optional<std::filesystem::path> scores;
  std::optional<std::filesystem::path> age_bins;
  std::optional<std::filesystem::path> wada_table;
  std::filesystem::path out;
  EmbERConfig ember;
  SnrSource snr_source = SnrSource::manifest_then_wada;
  DecileScope decile_scope = DecileScope::pooled;
  std::uint64_t seed = 0;
  std::size_t permutations = 10'000;
  Metric strata_metric = Metric::ember;  // metric for the per-stratum maps

  // Canonical key/value listing, the same keys the config file accepts.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string hash() const;  // SHA-256 over entries() minus "out"
};

// $ASR_AUDIT_OUT when set, otherwise "asr_audit_out".
std::filesystem::path default_output_root();

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Each command reads its inputs from the config and the run directory and
// writes its artifacts into cfg.out. A missing upstream artifact raises
// InputError naming the command that produces it.
void cmd_score(const AuditConfig& cfg);
void cmd_features(const AuditConfig& cfg);
void cmd_fit(const AuditConfig& cfg);
void cmd_sdi(const AuditConfig& cfg);
void cmd_cartography(const AuditConfig& cfg);
void cmd_pca(const AuditConfig& cfg);
// Runs whatever upstream commands have not produced their artifacts yet.
void cmd_report(const AuditConfig& cfg);

// Every artifact path (relative to cfg.out) a full report run produces,
// excluding run_manifest.json.
std::vector<std::string> list_artifacts(const std::filesystem::path& out);

}  // namespace asraudit
