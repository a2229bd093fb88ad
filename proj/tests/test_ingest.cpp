#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/ingest.hpp"

using namespace asraudit;

namespace {

const char* kJsonl =
    R"({"sample_id":"u1","speaker_id":"s1","dataset_id":"cv","reference":"the store","hypotheses":{"m2":"this store","m1":"the store"},"duration_s":2.5,"snr_db":12,"age":"twenties","sex":"F","l1":"L2","typicality":"typical"}
{"sample_id":"u2","speaker_id":"s2","dataset_id":"saa","reference":"a snack","hypotheses":{"m1":"snack","m2":"a snack"},"duration_s":1.0,"age":41,"sex":"male"}
)";

std::string with_line(const std::string& line) {
  return std::string(R"({"sample_id":"u0","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m1":"x","m2":"y"},"duration_s":1})") +
         "\n" + line + "\n";
}

void expect_error(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
    FAIL() << "expected InputError containing '" << needle << "'";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Manifest, ParsesJsonl) {
  const auto recs = parse_manifest(kJsonl, ManifestFormat::jsonl);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].hypotheses.size(), 2u);
  EXPECT_EQ(recs[0].hypotheses.begin()->first, "m1");
  EXPECT_EQ(recs[0].sex, Sex::female);
  EXPECT_EQ(recs[0].l1, L1Status::nonnative);
  EXPECT_EQ(recs[0].typicality, Typicality::typical);
  EXPECT_EQ(recs[0].age_raw, "twenties");
  EXPECT_DOUBLE_EQ(*recs[0].snr_db, 12.0);
  EXPECT_EQ(recs[1].age_raw, "41");
  EXPECT_EQ(recs[1].l1, L1Status::unknown);
  EXPECT_FALSE(recs[1].snr_db.has_value());
}

TEST(Manifest, JsonlRoundTrip) {
  const auto recs = parse_manifest(kJsonl, ManifestFormat::jsonl);
  EXPECT_EQ(parse_manifest(to_jsonl(recs), ManifestFormat::jsonl), recs);
}

TEST(Manifest, ParsesCsvWithQuotedFields) {
  const std::string csv =
      "sample_id,speaker_id,dataset_id,reference,hyp__m1,hyp__m2,duration_s,age,sex,l1,typicality\n"
      "u1,s1,cv,\"the store, again\",\"the store again\",\"this \"\"store\"\"\",2.5,,female,native,atypical\n";
  const auto recs = parse_manifest(csv, ManifestFormat::csv);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].reference, "the store, again");
  EXPECT_EQ(recs[0].hypotheses.at("m2"), "this \"store\"");
  EXPECT_FALSE(recs[0].age_raw.has_value());
  EXPECT_EQ(recs[0].typicality, Typicality::atypical);
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  expect_error([] { parse_manifest(with_line(R"({"sample_id":"u0","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m1":"x","m2":"y"},"duration_s":1})"), ManifestFormat::jsonl); },
               "2: duplicate sample_id 'u0'");
  expect_error([] { parse_manifest(with_line(R"({"sample_id":"u1","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m1":"x"},"duration_s":1})"), ManifestFormat::jsonl); },
               "2: inconsistent model set");
  expect_error([] { parse_manifest(with_line(R"({"sample_id":"u1","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m1":"x","m2":"y"},"duration_s":0})"), ManifestFormat::jsonl); },
               "2:");
  expect_error([] { parse_manifest(with_line(R"({"sample_id":"u1","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m1":"x","m2":"y"},"sex":"robot"})"), ManifestFormat::jsonl); },
               "2:");
  expect_error([] { parse_manifest(with_line("{not json"), ManifestFormat::jsonl); }, "2:");
}

TEST(Manifest, ResolvesAudioRelativeToManifest) {
  const std::string line =
      R"({"sample_id":"u","speaker_id":"s","dataset_id":"d","reference":"x","hypotheses":{"m":"x"},"audio_path":"audio/u.wav"})";
  const auto recs = parse_manifest(line, ManifestFormat::jsonl, "/data/corpus/manifest.jsonl");
  EXPECT_EQ(*recs[0].audio_path, "/data/corpus/audio/u.wav");
  EXPECT_EQ(manifest_format_for("x/m.CSV"), ManifestFormat::csv);
  EXPECT_EQ(manifest_format_for("x/m.jsonl"), ManifestFormat::jsonl);
  EXPECT_THROW(load_manifest("/nonexistent/m.jsonl", ManifestFormat::jsonl), InputError);
}

TEST(Embeddings, HeaderIsOptionalAndFirstOccurrenceWins) {
  const auto with_header = parse_embeddings("3 2\nThe 1 0\nthis 0.9 0.1\nthe 5 5\n");
  EXPECT_EQ(with_header.dim(), 2u);
  EXPECT_EQ(with_header.size(), 2u);
  EXPECT_EQ(with_header.duplicates_skipped(), 1u);
  ASSERT_NE(with_header.find("THE"), nullptr);
  EXPECT_DOUBLE_EQ((*with_header.find("the"))[0], 1.0);
  const auto no_header = parse_embeddings("cat 1 0 0\ndog 0 1 0\n");
  EXPECT_EQ(no_header.dim(), 3u);
  EXPECT_EQ(no_header.find("cow"), nullptr);
  const auto as_is = parse_embeddings("Cat 1 0\n", CaseMode::as_is);
  EXPECT_EQ(as_is.find("cat"), nullptr);
  EXPECT_NE(as_is.find("Cat"), nullptr);
}

TEST(Embeddings, RejectsMalformedLines) {
  expect_error([] { parse_embeddings("a 1 2\nb 1 2 3\n"); }, "line 2");
  expect_error([] { parse_embeddings("a 1 x\n"); }, "line 1");
  expect_error([] { parse_embeddings(""); }, "no vectors");
}

TEST(Scores, RoundTripAndSchema) {
  ScoreTable t;
  ScoreRow r{"u,1", "m1", {}};
  r.metrics.wer = 0.5;
  r.metrics.cer = 1.0 / 3.0;
  r.metrics.semdist = 2.0;
  t.push_back(r);
  const std::string text = format_scores(t);
  EXPECT_EQ(text.substr(0, kScoreHeader.size()), kScoreHeader);
  const auto back = parse_scores(text);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].sample_id, "u,1");
  EXPECT_NEAR(back[0].metrics.cer, 1.0 / 3.0, 1e-9);
  EXPECT_EQ(format_scores(back), text);
  expect_error([] { parse_scores("sample_id,model_id,wer,cer,mer,wil,ember\nu,m,0,0,0,0,0\n"); },
               "score table schema: missing column 'semdist'");
  expect_error([] { parse_scores(std::string(kScoreHeader) + "\nu,m,0,0,0,0,zero,0\n"); }, "line 2");
}

TEST(Csv, ParsesRfc4180) {
  const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\n\n\"multi\nline\",x\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].fields, (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rows[1].fields[0], "multi\nline");
  EXPECT_EQ(rows[1].line, 3u);
  EXPECT_THROW(parse_csv("\"open"), InputError);
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a\"b"), "\"a\"\"b\"");
  EXPECT_EQ(format_double(-0.0), "0");
  double v;
  EXPECT_TRUE(parse_double(" 1.5 ", v) || parse_double("1.5", v));
  EXPECT_FALSE(parse_double("1.5x", v));
  EXPECT_FALSE(parse_double("", v));
}
