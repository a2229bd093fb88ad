#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "asraudit/align.hpp"
#include "asraudit/error.hpp"
#include "asraudit/metrics.hpp"
#include "asraudit/text.hpp"

using namespace asraudit;

namespace {

AlignmentResult words(const std::string& r, const std::string& h) {
  return align(normalize(r), normalize(h));
}

EmbeddingTable toy_table() {
  return parse_embeddings(
      "the 1 0 0 0\n"
      "this 0.9 0.3 0 0\n"
      "snake 0 1 0 0\n"
      "snack 0.2 0 1 0\n"
      "cat 1 0 0 0\n"
      "dog 0 1 0 0\n");
}

// Hand formulas from raw counts; independent of the library's metric code.
double hand_wer(std::size_t s, std::size_t d, std::size_t i, std::size_t n) {
  return static_cast<double>(s + d + i) / static_cast<double>(n);
}

}  // namespace

TEST(Wer, Examples) {
  // H=2, I=1 over two reference words
  auto a = words("a b", "a x b");
  EXPECT_DOUBLE_EQ(wer(a), 0.5);
  EXPECT_DOUBLE_EQ(wer(words("a b c", "a b c")), 0.0);
  a = words("a b c", "x c d");
  EXPECT_EQ(a.errors(), 3u);
  EXPECT_DOUBLE_EQ(wer(a), 1.0);
  EXPECT_DOUBLE_EQ(wer(a), hand_wer(a.subs, a.dels, a.ins, 3));
}

TEST(Wer, EmptyReference) {
  std::uint8_t flags = 0;
  EXPECT_DOUBLE_EQ(wer(words("", ""), &flags), 0.0);
  EXPECT_EQ(flags, 0);
  EXPECT_DOUBLE_EQ(wer(words("", "a b"), &flags), 2.0);
  EXPECT_TRUE(flags & kFlagEmptyRef);
}

TEST(Cer, Examples) {
  EXPECT_DOUBLE_EQ(cer(align_chars("ab", "ab")), 0.0);
  EXPECT_DOUBLE_EQ(cer(align_chars("ab", "ac")), 0.5);
}

TEST(Mer, Examples) {
  EXPECT_DOUBLE_EQ(mer(words("a b", "a b c d")), 0.5);
  EXPECT_DOUBLE_EQ(mer(words("a b", "a b")), 0.0);
  EXPECT_DOUBLE_EQ(mer(words("a b c", "")), 1.0);
  EXPECT_DOUBLE_EQ(mer(words("", "")), 0.0);
}

TEST(Wil, Examples) {
  EXPECT_DOUBLE_EQ(wil(words("a b", "a b c d")), 0.5);
  EXPECT_DOUBLE_EQ(wil(words("a b", "a b")), 0.0);
  EXPECT_DOUBLE_EQ(wil(words("a b", "c d")), 1.0);
  EXPECT_DOUBLE_EQ(wil(words("", "")), 0.0);
  EXPECT_DOUBLE_EQ(wil(words("a", "")), 1.0);
  EXPECT_DOUBLE_EQ(wil(words("", "a")), 1.0);
}

TEST(Ember, WeightsSimilarSubstitutions) {
  const auto emb = toy_table();
  const EmbERConfig cfg;
  EXPECT_DOUBLE_EQ(ember(words("the store", "this store"), emb, cfg), 0.1 / 2.0);
  EXPECT_DOUBLE_EQ(ember(words("plastic snake", "plastic snack"), emb, cfg), 1.0 / 2.0);
  // Out-of-vocabulary substitutions are dissimilar.
  EXPECT_DOUBLE_EQ(ember(words("the zebra", "the yak"), emb, cfg), 0.5);
  // Threshold is inclusive.
  const auto eq = parse_embeddings("p 1 0\nq 0.4 0.9165151389911680\n");
  EXPECT_NEAR(cosine_similarity(*eq.find("p"), *eq.find("q")), 0.4, 1e-12);
  const double c = cosine_similarity(*eq.find("p"), *eq.find("q"));
  EXPECT_DOUBLE_EQ(ember(words("p", "q"), eq, EmbERConfig{c, 0.1}), 0.1);
  EXPECT_DOUBLE_EQ(ember(words("p", "q"), eq, EmbERConfig{std::nextafter(c, 2.0), 0.1}), 1.0);
}

TEST(Ember, ConfigValidation) {
  EXPECT_THROW((EmbERConfig{0.4, 1.5}.validate()), InputError);
  EXPECT_THROW((EmbERConfig{1.5, 0.1}.validate()), InputError);
  EXPECT_NO_THROW((EmbERConfig{-1.0, 0.0}.validate()));
}

TEST(SentenceEmbedding, MeanPooling) {
  const auto emb = parse_embeddings("cat 1 0\ndog 0 1\n");
  EXPECT_EQ(sentence_embedding({"cat"}, emb), (std::vector<double>{1, 0}));
  EXPECT_EQ(sentence_embedding({"cat", "dog"}, emb), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(sentence_embedding({"cow"}, emb), (std::vector<double>{0, 0}));
  EXPECT_EQ(sentence_embedding({"cat", "cow"}, emb), (std::vector<double>{1, 0}));
}

TEST(SemDist, Bounds) {
  const std::vector<double> x{1, 0}, y{0, 1}, z{-1, 0}, zero{0, 0};
  EXPECT_DOUBLE_EQ(semdist_vectors(x, x), 0.0);
  EXPECT_DOUBLE_EQ(semdist_vectors(x, y), 1.0);
  EXPECT_DOUBLE_EQ(semdist_vectors(x, z), 2.0);
  std::uint8_t flags = 0;
  EXPECT_DOUBLE_EQ(semdist_vectors(x, zero, &flags), 1.0);
  EXPECT_TRUE(flags & kFlagOovSentence);
}

TEST(SemDist, IdenticalTokensScoreZeroEvenWhenOov) {
  const auto emb = toy_table();
  std::uint8_t flags = 0;
  EXPECT_DOUBLE_EQ(semdist({"zebra"}, {"zebra"}, emb, &flags), 0.0);
  EXPECT_TRUE(flags & kFlagOovSentence);
  flags = 0;
  EXPECT_DOUBLE_EQ(semdist({"zebra"}, {"yak"}, emb, &flags), 1.0);
  EXPECT_TRUE(flags & kFlagOovSentence);
}

TEST(SentenceVectors, SidecarLookup) {
  const auto sv = SentenceVectors::parse(
      "{\"key\":\"u1|ref\",\"vec\":[1,0]}\n{\"key\":\"u1|m1\",\"vec\":[0,1]}\n");
  EXPECT_EQ(sv.size(), 2u);
  EXPECT_EQ(sv.at(SentenceVectors::hyp_key("u1", "m1")), (std::vector<double>{0, 1}));
  EXPECT_THROW(sv.at("u2|ref"), InputError);
  EXPECT_THROW(SentenceVectors::parse("{\"key\":\"a\",\"vec\":[1]}\n{\"key\":\"b\",\"vec\":[1,2]}\n"),
               InputError);

  UtteranceRecord r;
  r.sample_id = "u1";
  r.reference = "the cat";
  r.hypotheses = {{"m1", "the dog"}};
  ScoringOptions opts;
  opts.sentence_vectors = &sv;
  const auto rows = score_all(std::span<const UtteranceRecord>(&r, 1), toy_table(), opts);
  EXPECT_DOUBLE_EQ(rows[0].metrics.semdist, 1.0);
  r.hypotheses = {{"m2", "the dog"}};
  EXPECT_THROW(score_all(std::span<const UtteranceRecord>(&r, 1), toy_table(), opts), InputError);
}

TEST(ScoreAll, OrderAndPerfectHypotheses) {
  std::vector<UtteranceRecord> recs(2);
  recs[0].sample_id = "z";
  recs[0].reference = "The cat.";
  recs[0].hypotheses = {{"m2", "the cat"}, {"m1", "THE CAT"}};
  recs[1].sample_id = "a";
  recs[1].reference = "dog";
  recs[1].hypotheses = {{"m2", "dog"}, {"m1", "  dog  "}};
  const auto rows = score_all(recs, toy_table());
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].sample_id, "z");
  EXPECT_EQ(rows[0].model_id, "m1");
  EXPECT_EQ(rows[1].model_id, "m2");
  EXPECT_EQ(rows[2].sample_id, "a");
  for (const auto& row : rows)
    for (Metric m : kAllMetrics) EXPECT_EQ(row.metrics.get(m), 0.0) << metric_name(m);
}

TEST(ScoreAll, HandComputedToyCorpus) {
  // Each row: reference, hypothesis, then S, D, I, H at the word level.
  struct Case {
    const char* ref;
    const char* hyp;
    std::size_t s, d, i, h;
  };
  const Case cases[] = {
      {"the cat sat", "the cat sat", 0, 0, 0, 3}, {"the cat sat", "this cat sat", 1, 0, 0, 2},
      {"the cat sat", "cat sat", 0, 1, 0, 2},     {"the cat sat", "the cat sat down", 0, 0, 1, 3},
      {"a b c d", "a x c y", 2, 0, 0, 2},         {"a b", "c", 1, 1, 0, 0},
      {"one", "one two three", 0, 0, 2, 1},       {"snake", "snack", 1, 0, 0, 0},
      {"a b c", "", 0, 3, 0, 0},                  {"x y z w", "x y z w", 0, 0, 0, 4},
  };
  const auto emb = toy_table();
  for (const auto& c : cases) {
    const auto mv = score_pair(c.ref, c.hyp, emb, {});
    const double n_ref = static_cast<double>(c.s + c.d + c.h);
    const double n_hyp = static_cast<double>(c.s + c.i + c.h);
    const double e = static_cast<double>(c.s + c.d + c.i);
    EXPECT_DOUBLE_EQ(mv.wer, e / n_ref) << c.ref << " | " << c.hyp;
    EXPECT_DOUBLE_EQ(mv.mer, e / (e + static_cast<double>(c.h)));
    const double wil_hand =
        n_hyp == 0 ? 1.0 : 1.0 - static_cast<double>(c.h * c.h) / (n_ref * n_hyp);
    EXPECT_NEAR(mv.wil, wil_hand, 1e-15);
  }
}

TEST(MetricIdentities, RandomPairs) {
  std::mt19937 rng(11);
  const std::vector<std::string> vocab = {"the", "this", "cat", "dog", "snake", "snack", "a", "b"};
  std::uniform_int_distribution<std::size_t> w(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 8);
  const auto emb = toy_table();
  const EmbeddingTable empty(4);
  std::size_t violations = 0;
  for (int t = 0; t < 1000; ++t) {
    std::string r, h;
    for (int k = len(rng); k > 0; --k) r += vocab[w(rng)] + " ";
    for (int k = len(rng) - 1; k > 0; --k) h += vocab[w(rng)] + " ";
    const auto mv = score_pair(r, h, emb, {});
    const auto plain = score_pair(r, h, empty, {});
    violations += mv.mer > mv.wer + 1e-15;
    violations += mv.mer > mv.wil + 1e-15;
    violations += mv.ember > mv.wer + 1e-15;
    violations += plain.ember != plain.wer;
    violations += semdist(normalize(r), normalize(r), emb) != 0.0;
    violations += mv.mer < 0 || mv.mer > 1 || mv.wil < 0 || mv.wil > 1;
    violations += mv.semdist < 0 || mv.semdist > 2;
    violations += std::fabs(semdist(normalize(r), normalize(h), emb) -
                            semdist(normalize(h), normalize(r), emb)) > 1e-12;
    const auto upper = score_pair("  " + r + " ", h, emb, {});
    violations += upper.wer != mv.wer || upper.cer != mv.cer;
  }
  EXPECT_EQ(violations, 0u);
}

TEST(SingleEditPassage, ErrorPatternsOrderAsExpected) {
  // 69-word passage containing every context of the worked examples.
  std::vector<std::string> ref;
  const std::vector<std::string> contexts = {"go", "meet", "ask", "her", "a", "snack", "for",
                                             "the", "store", "plastic", "snake"};
  ref.insert(ref.end(), contexts.begin(), contexts.end());
  for (int k = 0; ref.size() < 69; ++k) ref.push_back("w" + std::to_string(k));
  ASSERT_EQ(ref.size(), 69u);
  const auto emb = toy_table();
  const EmbERConfig cfg;
  ASSERT_GE(cosine_similarity(*emb.find("the"), *emb.find("this")), cfg.similarity_threshold);
  ASSERT_LT(cosine_similarity(*emb.find("snake"), *emb.find("snack")), cfg.similarity_threshold);

  const auto edit = [&](auto f) {
    auto h = ref;
    f(h);
    return score_pair(join(ref), join(h), emb, cfg);
  };
  const auto ins_to = edit([](auto& h) { h.insert(h.begin() + 1, "to"); });
  const auto ins_i = edit([](auto& h) { h.insert(h.begin() + 2, "i"); });
  const auto del_a = edit([](auto& h) { h.erase(h.begin() + 4); });
  const auto sub_sim = edit([](auto& h) { h[7] = "this"; });
  const auto sub_dis = edit([](auto& h) { h[10] = "snack"; });

  for (const auto* mv : {&ins_to, &ins_i, &del_a, &sub_sim, &sub_dis})
    EXPECT_DOUBLE_EQ(mv->wer, 1.0 / 69.0);
  EXPECT_NEAR(sub_sim.ember / sub_dis.ember, 0.1, 1e-9);
  EXPECT_GT(sub_sim.wil, ins_to.wil);
  EXPECT_GT(sub_dis.wil, ins_i.wil);
  EXPECT_DOUBLE_EQ(sub_sim.wil, sub_dis.wil);
  // Known three-decimal values for a 69-word passage.
  const auto r3 = [](double v) { return std::round(v * 1000.0) / 1000.0; };
  EXPECT_DOUBLE_EQ(r3(ins_to.wer), 0.014);
  EXPECT_DOUBLE_EQ(r3(sub_dis.wil), 0.029);
  EXPECT_DOUBLE_EQ(r3(ins_to.wil), 0.014);
  EXPECT_DOUBLE_EQ(r3(100.0 * sub_sim.ember), 0.145);
  EXPECT_DOUBLE_EQ(r3(100.0 * sub_dis.ember), 1.449);
  EXPECT_DOUBLE_EQ(r3(100.0 * del_a.ember), 1.449);
}
