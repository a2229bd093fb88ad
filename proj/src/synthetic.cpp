#include "asraudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>

#include "json.hpp"

#include "asraudit/audio.hpp"
#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/features.hpp"
#include "asraudit/ingest.hpp"

namespace asraudit {
namespace {

constexpr std::uint32_t kSampleRate = 16000;

// Vocabulary for the transcripts: each base word has a near-synonym whose
// vector is a small perturbation, so similar substitutions clear the EmbER
// threshold and dissimilar ones do not.
const std::vector<std::pair<std::string, std::string>>& word_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"the", "this"},    {"a", "an"},           {"store", "shop"},
      {"snake", "serpent"}, {"snack", "treat"},  {"go", "walk"},
      {"meet", "greet"},  {"ask", "question"},   {"her", "she"},
      {"big", "large"},   {"small", "little"},   {"house", "home"},
      {"car", "auto"},    {"road", "street"},    {"fast", "quick"},
      {"slow", "sluggish"}, {"happy", "glad"},   {"sad", "unhappy"},
      {"child", "kid"},   {"man", "guy"},        {"woman", "lady"},
      {"dog", "puppy"},   {"cat", "kitten"},     {"eat", "consume"},
      {"drink", "sip"},   {"red", "crimson"},    {"blue", "azure"},
      {"plastic", "vinyl"}, {"bring", "fetch"},  {"call", "phone"},
      {"cheese", "cheddar"}, {"spoon", "ladle"}, {"bag", "sack"},
      {"brother", "sibling"}, {"peas", "beans"}, {"train", "railway"}};
  return pairs;
}

std::vector<double> zscore(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size()));
  std::vector<double> out;
  for (double x : v) out.push_back((x - m) / sd);
  return out;
}

struct Speaker {
  std::string id;
  std::size_t dataset;
  Sex sex;
  L1Status l1;
  Typicality typ;
  std::optional<double> age;
  double effect;
};

}  // namespace

double synthetic_metric_scale(Metric m) {
  switch (m) {
    case Metric::wer: return 0.05;
    case Metric::cer: return 0.03;
    case Metric::mer: return 0.04;
    case Metric::wil: return 0.06;
    case Metric::ember: return 0.045;
    case Metric::semdist: return 0.02;
  }
  return 0.05;
}

SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg) {
  const PlantedEffects& fx = cfg.effects;
  if (cfg.utterances < 2 || cfg.speakers < 2 || cfg.speakers > cfg.utterances)
    throw InputError("synthetic corpus needs 2 <= speakers <= utterances");
  if (fx.dataset_effects.empty() || fx.model_effects.size() < 2)
    throw InputError("synthetic corpus needs >= 1 dataset and >= 2 models");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticCorpus c;
  for (std::size_t d = 0; d < fx.dataset_effects.size(); ++d)
    c.dataset_ids.push_back("ds" + std::to_string(d + 1));
  for (std::size_t m = 0; m < fx.model_effects.size(); ++m)
    c.model_ids.push_back("model" + std::string(1, static_cast<char>('A' + m)));

  // Speakers; every factor level is forced to appear at least once so small
  // corpora stay estimable.
  std::vector<Speaker> speakers;
  for (std::size_t s = 0; s < cfg.speakers; ++s) {
    Speaker sp;
    char buf[32];
    std::snprintf(buf, sizeof buf, "spk%04zu", s + 1);
    sp.id = buf;
    sp.dataset = s % fx.dataset_effects.size();
    sp.sex = s == 0 ? Sex::male : s == 1 ? Sex::female
             : unit(rng) < cfg.p_male ? Sex::male : Sex::female;
    sp.l1 = s == 0 ? L1Status::nonnative : s == 1 ? L1Status::native
            : unit(rng) < cfg.p_nonnative ? L1Status::nonnative : L1Status::native;
    sp.typ = s == 0 ? Typicality::atypical : s == 1 ? Typicality::typical
             : unit(rng) < cfg.p_atypical ? Typicality::atypical : Typicality::typical;
    // Rounded as written to the manifest, so planted z-scores match ingestion.
    sp.age = std::round(10.0 * (18.0 + 62.0 * unit(rng))) / 10.0;
    if (s == 1 || (s > 1 && unit(rng) < cfg.p_age_missing)) sp.age.reset();
    sp.effect = fx.speaker_sd * normal(rng);
    speakers.push_back(std::move(sp));
  }

  // Utterance-level acoustics.
  const std::size_t n = cfg.utterances;
  std::vector<std::size_t> spk_of(n);
  std::vector<double> snr(n), log_dur(n), age_filled(n);
  std::vector<int> miss(n);
  double age_sum = 0.0;
  std::size_t age_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    spk_of[i] = i % cfg.speakers;
    const auto& sp = speakers[spk_of[i]];
    snr[i] = std::stod(format_double(18.0 + 4.0 * static_cast<double>(sp.dataset) + 7.0 * normal(rng)));
    log_dur[i] = std::log(std::stod(format_double(std::exp(std::log(4.0) + 0.5 * normal(rng)))));
    if (sp.age) {
      age_sum += *sp.age;
      ++age_count;
    }
  }
  const double age_mean = age_sum / static_cast<double>(std::max<std::size_t>(age_count, 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sp = speakers[spk_of[i]];
    miss[i] = sp.age ? 0 : 1;
    age_filled[i] = sp.age.value_or(age_mean);
  }
  const auto z_snr = zscore(snr);
  const auto z_len = zscore(log_dur);
  const auto z_age = zscore(age_filled);

  // Variance budget, taken over the realized (utterance, model) rows.
  std::vector<double> difficulty(n);
  {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& sp = speakers[spk_of[i]];
      difficulty[i] =
          fx.beta_snr * z_snr[i] + fx.beta_len * z_len[i] + fx.beta_age * z_age[i] +
          fx.beta_miss * miss[i] + (sp.sex == Sex::male ? fx.alpha_male : 0.0) +
          (sp.l1 == L1Status::nonnative ? fx.alpha_nonnative : 0.0) +
          (sp.typ == Typicality::atypical ? fx.alpha_atypical : 0.0);
      for (double dm : fx.model_effects) {
        const double f = difficulty[i] + fx.dataset_effects[sp.dataset] + dm;
        sum += f;
        sq += f * f;
      }
    }
    const double rows = static_cast<double>(n * fx.model_effects.size());
    c.fixed_variance = sq / rows - (sum / rows) * (sum / rows);
  }
  c.noise_variance = 1.0 - c.fixed_variance - fx.speaker_sd * fx.speaker_sd;
  if (c.noise_variance <= 0.0)
    throw InputError("planted effects explain all variance; lower the effect sizes");
  c.analytic_r2 = c.fixed_variance;
  const double noise_sd = std::sqrt(c.noise_variance);

  // Text material.
  const auto& pairs = word_pairs();
  std::vector<std::string> vocab;
  for (const auto& [a, b] : pairs) vocab.push_back(a);
  {
    constexpr int dim = 16;
    std::string emb = std::to_string(pairs.size() * 2) + " " + std::to_string(dim) + "\n";
    for (const auto& [a, b] : pairs) {
      std::vector<double> base(dim);
      for (double& x : base) x = normal(rng);
      std::string la = a, lb = b;
      for (int k = 0; k < dim; ++k) la += " " + format_fixed(base[static_cast<std::size_t>(k)], 5);
      for (int k = 0; k < dim; ++k)
        lb += " " + format_fixed(base[static_cast<std::size_t>(k)] + 0.25 * normal(rng), 5);
      emb += la + "\n" + lb + "\n";
    }
    c.embeddings_text = std::move(emb);
  }
  std::uniform_int_distribution<std::size_t> pick_word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> pick_len(8, 18);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& sp = speakers[spk_of[i]];
    UtteranceRecord r;
    char buf[32];
    std::snprintf(buf, sizeof buf, "utt%05zu", i + 1);
    r.sample_id = buf;
    r.speaker_id = sp.id;
    r.dataset_id = c.dataset_ids[sp.dataset];
    r.sex = sp.sex;
    r.l1 = sp.l1;
    r.typicality = sp.typ;
    if (sp.age) r.age_raw = format_fixed(*sp.age, 1);
    r.duration_s = std::stod(format_double(std::exp(log_dur[i])));
    r.snr_db = std::stod(format_double(snr[i]));

    c.true_difficulty[r.sample_id] = difficulty[i];

    std::vector<std::string> ref;
    const int len = pick_len(rng);
    for (int w = 0; w < len; ++w) ref.push_back(vocab[pick_word(rng)]);
    r.reference.clear();
    for (std::size_t w = 0; w < ref.size(); ++w) r.reference += (w ? " " : "") + ref[w];

    for (std::size_t m = 0; m < c.model_ids.size(); ++m) {
      const double base = difficulty[i] + fx.dataset_effects[sp.dataset] + fx.model_effects[m] +
                          sp.effect;
      double wer_y = 0.0;
      ScoreRow row{r.sample_id, c.model_ids[m], {}};
      for (Metric metric : kAllMetrics) {
        const double y = base + noise_sd * normal(rng);
        if (metric == Metric::wer) wer_y = y;
        row.metrics.set(metric, synthetic_metric_scale(metric) * (y + 6.0));
      }
      c.planted_scores.push_back(std::move(row));

      // Hypothesis text whose error rate follows the planted WER response.
      const double rate = std::clamp(0.12 + 0.08 * wer_y, 0.0, 0.9);
      const auto edits = static_cast<std::size_t>(std::lround(rate * len));
      std::vector<std::string> hyp = ref;
      for (std::size_t e = 0; e < edits && !hyp.empty(); ++e) {
        std::uniform_int_distribution<std::size_t> pos(0, hyp.size() - 1);
        const std::size_t p = pos(rng);
        const double kind = unit(rng);
        if (kind < 0.3) {
          for (const auto& [a, b] : pairs)
            if (hyp[p] == a) {
              hyp[p] = b;
              break;
            }
        } else if (kind < 0.6) {
          hyp[p] = vocab[pick_word(rng)];
        } else if (kind < 0.8) {
          hyp.erase(hyp.begin() + static_cast<std::ptrdiff_t>(p));
        } else {
          hyp.insert(hyp.begin() + static_cast<std::ptrdiff_t>(p), vocab[pick_word(rng)]);
        }
      }
      std::string text;
      for (std::size_t w = 0; w < hyp.size(); ++w) text += (w ? " " : "") + hyp[w];
      r.hypotheses[c.model_ids[m]] = text;
    }

    if (cfg.audio_fraction > 0.0 && unit(rng) < cfg.audio_fraction) {
      // Half a second of Gamma-amplitude "speech" in Gaussian noise at the
      // planted SNR; the manifest then omits snr_db.
      std::gamma_distribution<double> gamma(kWadaSpeechShape, 1.0);
      const std::size_t len_s = kSampleRate / 2;
      std::vector<double> speech(len_s), noise(len_s);
      double ps = 0.0, pn = 0.0;
      for (std::size_t k = 0; k < len_s; ++k) {
        speech[k] = (unit(rng) < 0.5 ? -1.0 : 1.0) * gamma(rng);
        noise[k] = normal(rng);
        ps += speech[k] * speech[k];
        pn += noise[k] * noise[k];
      }
      const double scale = std::sqrt(ps / (pn * std::pow(10.0, *r.snr_db / 10.0)));
      double peak = 0.0;
      for (std::size_t k = 0; k < len_s; ++k) {
        speech[k] += scale * noise[k];
        peak = std::max(peak, std::fabs(speech[k]));
      }
      for (double& x : speech) x *= 0.5 / peak;
      const std::string rel = "audio/" + r.sample_id + ".wav";
      c.audio[rel] = std::move(speech);
      r.audio_path = rel;
      r.snr_db.reset();
    }
    c.records.push_back(std::move(r));
  }
  return c;
}

void write_synthetic(const SyntheticCorpus& c, const SyntheticConfig& cfg,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (!c.audio.empty()) std::filesystem::create_directories(dir / "audio");
  for (const auto& [rel, samples] : c.audio)
    write_wav(dir / rel, AudioBuffer{samples, kSampleRate}, WavEncoding::pcm16);
  write_file((dir / "manifest.jsonl").string(), to_jsonl(c.records));
  write_file((dir / "embeddings.txt").string(), c.embeddings_text);
  write_file((dir / "planted_scores.csv").string(), format_scores(c.planted_scores));

  std::string diff = "sample_id,true_difficulty\n";
  for (const auto& r : c.records)
    diff += r.sample_id + "," + format_double(c.true_difficulty.at(r.sample_id)) + "\n";
  write_file((dir / "true_difficulty.csv").string(), diff);

  const auto& fx = cfg.effects;
  nlohmann::ordered_json t;
  t["seed"] = cfg.seed;
  t["utterances"] = cfg.utterances;
  t["speakers"] = cfg.speakers;
  t["planted"] = {{"snr", fx.beta_snr},
                  {"len", fx.beta_len},
                  {"age", fx.beta_age},
                  {"miss", fx.beta_miss},
                  {"sex[male]", fx.alpha_male},
                  {"l1[nonnative]", fx.alpha_nonnative},
                  {"typ[atypical]", fx.alpha_atypical}};
  for (std::size_t d = 1; d < fx.dataset_effects.size(); ++d)
    t["planted"]["dataset[" + c.dataset_ids[d] + "]"] = fx.dataset_effects[d] - fx.dataset_effects[0];
  for (std::size_t m = 1; m < fx.model_effects.size(); ++m)
    t["planted"]["model[" + c.model_ids[m] + "]"] = fx.model_effects[m] - fx.model_effects[0];
  t["speaker_sd"] = fx.speaker_sd;
  t["noise_variance"] = c.noise_variance;
  t["fixed_variance"] = c.fixed_variance;
  t["analytic_r2"] = c.analytic_r2;
  nlohmann::ordered_json scales;
  for (Metric m : kAllMetrics) scales[std::string(metric_name(m))] = synthetic_metric_scale(m);
  t["metric_scale"] = scales;
  t["note"] = "metric = scale * (y + 6); y has unit variance by construction";
  write_file((dir / "truth.json").string(), t.dump(2) + "\n");
}

}  // namespace asraudit
