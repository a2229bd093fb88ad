#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asraudit/types.hpp"

namespace asraudit {

// Effects planted on the standardized scale. The generated response for
// utterance i, model m is
//   y = b_snr z_snr + b_len z_len + b_age z_age + b_miss miss
//     + a_sex + a_l1 + a_typ + g_dataset + d_model + u_speaker + e
// with the idiosyncratic noise sized so Var(y) = 1.
struct PlantedEffects {
  double beta_snr = -0.3;
  double beta_len = 0.2;
  double beta_age = 0.1;
  double beta_miss = 0.05;
  double alpha_male = 0.1;
  double alpha_nonnative = 0.3;
  double alpha_atypical = 0.8;
  std::vector<double> dataset_effects = {0.0, 0.2, -0.15};
  std::vector<double> model_effects = {0.0, 0.25, -0.1, 0.15};
  double speaker_sd = 0.35;
};

struct SyntheticConfig {
  std::size_t utterances = 5000;
  std::size_t speakers = 250;
  std::uint64_t seed = 20240917;
  double p_male = 0.5;
  double p_nonnative = 0.3;
  double p_atypical = 0.2;
  double p_age_missing = 0.15;
  // Share of utterances shipped as WAV audio with snr_db left out of the
  // manifest, so the WADA path is exercised.
  double audio_fraction = 0.0;
  PlantedEffects effects;
};

struct SyntheticCorpus {
  std::vector<UtteranceRecord> records;
  ScoreTable planted_scores;  // metric = scale * (y + 6), fresh noise per metric
  std::map<std::string, double> true_difficulty;  // sample_id -> planted SDI
  double fixed_variance = 0.0;    // Var of everything except speaker and noise
  double noise_variance = 0.0;
  double analytic_r2 = 0.0;
  std::string embeddings_text;
  std::vector<std::string> model_ids;
  std::vector<std::string> dataset_ids;
  // Audio to write next to the manifest: relative path -> samples @16 kHz.
  std::map<std::string, std::vector<double>> audio;
};

// Throws InputError when the planted effects leave no room for noise
// (fixed + speaker variance >= 1) or the sizes are inconsistent.
SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg = {});

// Writes manifest.jsonl, embeddings.txt, planted_scores.csv, truth.json,
// true_difficulty.csv and audio/*.wav into `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const SyntheticConfig& cfg,
                     const std::filesystem::path& dir);

// Metric scaling applied to the planted response: value = scale * (y + 6).
double synthetic_metric_scale(Metric m);

}  // namespace asraudit
