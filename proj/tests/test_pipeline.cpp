#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asraudit/error.hpp"
#include "asraudit/pipeline.hpp"
#include "json.hpp"

using namespace asraudit;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = fs::path(ASRAUDIT_FIXTURES) / "corpus";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("asraudit_" + name);
  fs::remove_all(d);
  return d;
}

AuditConfig fixture_config(const fs::path& out) {
  AuditConfig cfg;
  cfg.manifest = kCorpus / "manifest.jsonl";
  cfg.embeddings = kCorpus / "embeddings.txt";
  cfg.out = out;
  cfg.seed = 11;
  cfg.permutations = 999;
  return cfg;
}

nlohmann::json without_timestamps(nlohmann::json m) {
  for (auto& [name, c] : m["commands"].items()) c.erase("completed_at");
  m.erase("config");  // holds the run directory
  return m;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ASRAUDIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, FixtureReportIsDeterministic) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const auto t0 = std::chrono::steady_clock::now();
  cmd_report(fixture_config(a));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 30.0);
  cmd_report(fixture_config(b));
  const auto files = list_artifacts(a);
  EXPECT_EQ(files, list_artifacts(b));
  for (const char* expected : {"scores.csv", "features.csv", "fit/fit_wer.json", "sdi.csv",
                               "cartography.csv", "pca_loadings.csv", "report.md",
                               "figures/pca_loadings.svg", "figures/cartography_ember.svg"})
    EXPECT_NE(std::find(files.begin(), files.end(), expected), files.end()) << expected;
  for (const auto& f : files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto ma = nlohmann::json::parse(slurp(a / "run_manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(b / "run_manifest.json"));
  EXPECT_EQ(without_timestamps(ma), without_timestamps(mb));
  EXPECT_EQ(ma["config_hash"], fixture_config(b).hash());
  for (const auto& [name, c] : ma["commands"].items())
    for (const auto& [rel, sha] : c["outputs"].items()) EXPECT_EQ(sha, sha256_file(a / rel)) << rel;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, StepsRequireTheirProducers) {
  const auto out = fresh_dir("order");
  const auto cfg = fixture_config(out);
  try {
    cmd_sdi(cfg);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("run fit first"), std::string::npos) << e.what();
  }
  cmd_score(cfg);
  cmd_features(cfg);
  cmd_fit(cfg);
  EXPECT_NO_THROW(cmd_sdi(cfg));
  fs::remove_all(out);
}

TEST(Pipeline, ConfigHashIgnoresOutputDirectory) {
  auto a = fixture_config("x"), b = fixture_config("y");
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 12;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ExitCodesAndConfigFile) {
  const auto out = fresh_dir("cli");
  const std::string common = " --manifest " + (kCorpus / "manifest.jsonl").string() +
                             " --embeddings " + (kCorpus / "embeddings.txt").string();
  EXPECT_EQ(run_cli("fit --out " + out.string() + common), 1);
  EXPECT_EQ(run_cli("score --manifest /nonexistent.jsonl --out " + out.string()), 1);
  EXPECT_EQ(run_cli("score --no-such-flag"), 1);
  EXPECT_EQ(run_cli("--help"), 0);

  fs::create_directories(out);
  const fs::path ini = out / "audit.ini";
  std::ofstream(ini) << "manifest=" << (kCorpus / "manifest.jsonl").string() << "\n"
                     << "embeddings=" << (kCorpus / "embeddings.txt").string() << "\n"
                     << "out=" << (out / "run").string() << "\n"
                     << "seed=5\npermutations=99\n";
  ASSERT_EQ(run_cli("--config " + ini.string() + " --seed 6 score"), 0);
  const auto m = nlohmann::json::parse(slurp(out / "run" / "run_manifest.json"));
  EXPECT_EQ(m["seed"], 6);
  EXPECT_EQ(m["config"]["permutations"], "99");
  fs::remove_all(out);
}
