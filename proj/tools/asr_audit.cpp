#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "asraudit/error.hpp"
#include "asraudit/pipeline.hpp"
#include "asraudit/synthetic.hpp"

namespace {

using namespace asraudit;

struct RawOptions {
  std::string manifest, manifest_format, embeddings, sentence_vectors, scores, age_bins,
      wada_table, out;
  double tau = 0.4, lambda = 0.1;
  std::string snr_source = "manifest_then_wada";
  std::string decile_scope = "pooled";
  std::uint64_t seed = 0;
  std::size_t permutations = 10'000;
  std::string strata_metric = "ember";
};

void add_audit_options(CLI::App* sub, RawOptions& o) {
  sub->add_option("--manifest", o.manifest, "Utterance manifest (.jsonl or .csv)");
  sub->add_option("--manifest-format", o.manifest_format, "jsonl | csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  sub->add_option("--embeddings", o.embeddings, "Word vectors in text format");
  sub->add_option("--sentence-vectors", o.sentence_vectors, "Precomputed sentence vectors (JSONL)");
  sub->add_option("--scores", o.scores, "Import a precomputed score table instead of scoring");
  sub->add_option("--age-bins", o.age_bins, "Age bin label -> midpoint CSV");
  sub->add_option("--wada-table", o.wada_table, "WADA-SNR lookup table CSV");
  sub->add_option("--out", o.out, "Run directory (default: $ASR_AUDIT_OUT or ./asr_audit_out)");
  sub->add_option("--ember-tau", o.tau, "EmbER cosine threshold");
  sub->add_option("--ember-lambda", o.lambda, "EmbER weight for similar substitutions");
  sub->add_option("--snr-source", o.snr_source, "manifest | wada | manifest_then_wada");
  sub->add_option("--decile-scope", o.decile_scope, "pooled | per_dataset");
  sub->add_option("--seed", o.seed, "Seed for permutation tests");
  sub->add_option("--permutations", o.permutations, "Permutation count for SDI correlations");
  sub->add_option("--strata-metric", o.strata_metric, "Metric for per-group data maps");
}

AuditConfig to_config(const RawOptions& o) {
  AuditConfig c;
  c.manifest = o.manifest;
  if (!o.manifest_format.empty())
    c.manifest_format = o.manifest_format == "csv" ? ManifestFormat::csv : ManifestFormat::jsonl;
  c.embeddings = o.embeddings;
  if (!o.sentence_vectors.empty()) c.sentence_vectors = o.sentence_vectors;
  if (!o.scores.empty()) c.scores = o.scores;
  if (!o.age_bins.empty()) c.age_bins = o.age_bins;
  if (!o.wada_table.empty()) c.wada_table = o.wada_table;
  c.out = o.out.empty() ? default_output_root() : std::filesystem::path(o.out);
  c.ember.similarity_threshold = o.tau;
  c.ember.similar_sub_weight = o.lambda;
  const auto snr = parse_snr_source(o.snr_source);
  if (!snr) throw InputError("unknown snr source '" + o.snr_source + "'");
  c.snr_source = *snr;
  const auto scope = parse_decile_scope(o.decile_scope);
  if (!scope) throw InputError("unknown decile scope '" + o.decile_scope + "'");
  c.decile_scope = *scope;
  c.seed = o.seed;
  c.permutations = o.permutations;
  const auto m = parse_metric(o.strata_metric);
  if (!m) throw InputError("unknown metric '" + o.strata_metric + "'");
  c.strata_metric = *m;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demographic and acoustic audit of ASR evaluation metrics"};
  app.set_version_flag("--version", ASRAUDIT_VERSION);
  app.set_config("--config", "", "Flat key = value config file; flags override it");
  app.require_subcommand(1);

  RawOptions opts;
  struct Command {
    const char* name;
    const char* help;
    void (*run)(const AuditConfig&);
  };
  const Command commands[] = {
      {"score", "Score every (utterance, model) pair", cmd_score},
      {"features", "Extract and standardize utterance features", cmd_features},
      {"fit", "Fit the fixed-effects elasticity regression per metric", cmd_fit},
      {"sdi", "Compute sample difficulty indices and deciles", cmd_sdi},
      {"cartography", "Data maps and SDI correlation tests", cmd_cartography},
      {"pca", "PCA of the six metrics", cmd_pca},
      {"report", "Build the Markdown report, running missing steps", cmd_report},
  };
  add_audit_options(&app, opts);
  for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();

  SyntheticConfig syn;
  std::string syn_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a planted-coefficient synthetic corpus");
  gen->add_option("--out", syn_out, "Output directory")->required();
  gen->add_option("--utterances", syn.utterances, "Number of utterances");
  gen->add_option("--speakers", syn.speakers, "Number of speakers");
  gen->add_option("--seed", syn.seed, "Generator seed");
  gen->add_option("--audio-fraction", syn.audio_fraction,
                  "Share of utterances shipped as WAV without snr_db")
      ->check(CLI::Range(0.0, 1.0));

  WadaTableOptions wada;
  std::string wada_out;
  auto* gw = app.add_subcommand("gen-wada-table", "Regenerate the WADA-SNR lookup table");
  gw->add_option("--out", wada_out, "Output CSV")->required();
  gw->add_option("--samples", wada.samples, "Monte-Carlo samples per SNR step");
  gw->add_option("--seed", wada.seed, "Generator seed");
  gw->add_option("--step", wada.step_db, "SNR step in dB");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      const auto corpus = generate_synthetic(syn);
      write_synthetic(corpus, syn, syn_out);
      std::cout << "wrote " << corpus.records.size() << " utterances to " << syn_out << "\n";
      return 0;
    }
    if (gw->parsed()) {
      const auto table = generate_wada_table(wada);
      std::ofstream(wada_out, std::ios::binary) << table.to_csv();
      std::cout << "wrote " << table.entries().size() << " rows to " << wada_out << "\n";
      return 0;
    }
    const AuditConfig cfg = to_config(opts);
    for (const auto& c : commands)
      if (app.got_subcommand(c.name)) {
        c.run(cfg);
        std::cout << c.name << ": done, artifacts in " << cfg.out.string() << "\n";
      }
    return 0;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
