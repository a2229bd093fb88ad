#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "asraudit/error.hpp"
#include "asraudit/ingest.hpp"
#include "asraudit/meaf.hpp"
#include "asraudit/synthetic.hpp"
#include "json.hpp"

using namespace asraudit;
namespace fs = std::filesystem;

namespace {

SyntheticConfig small() {
  SyntheticConfig cfg;
  cfg.utterances = 400;
  cfg.speakers = 40;
  cfg.seed = 7;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Synthetic, DeterministicPerSeed) {
  const auto a = generate_synthetic(small());
  const auto b = generate_synthetic(small());
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.true_difficulty, b.true_difficulty);
  EXPECT_EQ(format_scores(a.planted_scores), format_scores(b.planted_scores));
  auto cfg = small();
  cfg.seed = 8;
  EXPECT_NE(generate_synthetic(cfg).records, a.records);
}

TEST(Synthetic, ShapeAndVarianceBudget) {
  const auto c = generate_synthetic(small());
  ASSERT_EQ(c.records.size(), 400u);
  EXPECT_EQ(c.planted_scores.size(), 400u * c.model_ids.size());
  std::set<std::string> speakers;
  for (const auto& r : c.records) {
    speakers.insert(r.speaker_id);
    EXPECT_EQ(r.hypotheses.size(), c.model_ids.size());
    EXPECT_TRUE(r.snr_db.has_value());
  }
  EXPECT_EQ(speakers.size(), 40u);
  const double speaker = small().effects.speaker_sd * small().effects.speaker_sd;
  EXPECT_NEAR(c.fixed_variance + speaker + c.noise_variance, 1.0, 1e-12);
  EXPECT_GT(c.noise_variance, 0.0);
  EXPECT_DOUBLE_EQ(c.analytic_r2, c.fixed_variance);
  for (Metric m : kAllMetrics) EXPECT_GT(synthetic_metric_scale(m), 0.0);
}

TEST(Synthetic, MetricsShareTheResponseOnUnitScale) {
  const auto c = generate_synthetic(small());
  const double n = static_cast<double>(c.planted_scores.size());
  std::vector<double> sum(6, 0.0), sq(6, 0.0);
  double cross = 0.0;
  for (const auto& row : c.planted_scores) {
    std::vector<double> y(6);
    for (std::size_t i = 0; i < 6; ++i) {
      y[i] = row.metrics.get(kAllMetrics[i]) / synthetic_metric_scale(kAllMetrics[i]) - 6.0;
      sum[i] += y[i];
      sq[i] += y[i] * y[i];
    }
    cross += y[0] * y[1];
  }
  for (std::size_t i = 0; i < 6; ++i) {
    const double var = sq[i] / n - (sum[i] / n) * (sum[i] / n);
    EXPECT_NEAR(var, 1.0, 0.2) << i;
  }
  // Only the idiosyncratic noise differs between metrics.
  const double cov = cross / n - (sum[0] / n) * (sum[1] / n);
  EXPECT_NEAR(cov, 1.0 - c.noise_variance, 0.15);
}

TEST(Synthetic, RejectsImpossibleBudget) {
  auto cfg = small();
  cfg.effects.speaker_sd = 1.0;
  EXPECT_THROW(generate_synthetic(cfg), InputError);
  cfg = small();
  cfg.speakers = 0;
  EXPECT_THROW(generate_synthetic(cfg), InputError);
}

TEST(Synthetic, WrittenCorpusRoundTrips) {
  auto cfg = small();
  cfg.audio_fraction = 0.05;
  const auto c = generate_synthetic(cfg);
  const fs::path dir = fs::temp_directory_path() / "asraudit_synth_test";
  fs::remove_all(dir);
  write_synthetic(c, cfg, dir);
  for (const char* f : {"manifest.jsonl", "embeddings.txt", "planted_scores.csv",
                        "true_difficulty.csv", "truth.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto records = load_manifest(dir / "manifest.jsonl", ManifestFormat::jsonl);
  ASSERT_EQ(records.size(), c.records.size());
  std::size_t with_audio = 0;
  for (const auto& r : records)
    if (r.audio_path) {
      ++with_audio;
      EXPECT_FALSE(r.snr_db.has_value());
      EXPECT_TRUE(fs::exists(dir / *r.audio_path));
    }
  EXPECT_EQ(with_audio, c.audio.size());
  EXPECT_GT(with_audio, 0u);
  const auto truth = nlohmann::json::parse(slurp(dir / "truth.json"));
  EXPECT_DOUBLE_EQ(truth["planted"]["snr"].get<double>(), cfg.effects.beta_snr);
  EXPECT_DOUBLE_EQ(truth["planted"]["typ[atypical]"].get<double>(), cfg.effects.alpha_atypical);
  EXPECT_DOUBLE_EQ(truth["analytic_r2"].get<double>(), c.analytic_r2);
  fs::remove_all(dir);
}
