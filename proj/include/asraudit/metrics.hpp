#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "asraudit/align.hpp"
#include "asraudit/ingest.hpp"
#include "asraudit/types.hpp"

namespace asraudit {

struct EmbERConfig {
  double similarity_threshold = 0.4;  // tau, cosine in [-1, 1]
  double similar_sub_weight = 0.1;    // lambda in [0, 1]

  // Throws InputError when out of range.
  void validate() const;
};

// Each rate takes an alignment at the matching level. An empty reference with
// a non-empty hypothesis sets kFlagEmptyRef (when `flags` is given) and
// divides by 1 instead of 0.
double wer(const AlignmentResult& a, std::uint8_t* flags = nullptr);
double cer(const AlignmentResult& a, std::uint8_t* flags = nullptr);
double mer(const AlignmentResult& a);
double wil(const AlignmentResult& a);
double ember(const AlignmentResult& a, const EmbeddingTable& emb,
             const EmbERConfig& cfg, std::uint8_t* flags = nullptr);

// 0 for a zero vector on either side.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Mean of in-vocabulary token vectors; all zeros when nothing is covered.
std::vector<double> sentence_embedding(const TokenList& tokens,
                                       const EmbeddingTable& emb);

// Sentence vectors from an external encoder, keyed "<sample_id>|ref" and
// "<sample_id>|<model_id>". Loaded from JSONL {"key": ..., "vec": [...]}.
class SentenceVectors {
 public:
  static SentenceVectors load(const std::filesystem::path& path);
  static SentenceVectors parse(std::string_view jsonl);

  void insert(std::string key, std::vector<double> vec);
  // Throws InputError naming the key when absent.
  const std::vector<double>& at(const std::string& key) const;
  std::size_t size() const { return vectors_.size(); }

  static std::string ref_key(std::string_view sample_id);
  static std::string hyp_key(std::string_view sample_id,
                             std::string_view model_id);

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// 1 - cos(e_ref, e_hyp), clamped into [0, 2]. Identical token sequences score
// 0. A zero vector on either side of a differing pair scores 1 and sets
// kFlagOovSentence.
double semdist_vectors(std::span<const double> e_ref,
                       std::span<const double> e_hyp,
                       std::uint8_t* flags = nullptr);
double semdist(const TokenList& ref, const TokenList& hyp,
               const EmbeddingTable& emb, std::uint8_t* flags = nullptr);

// All six metrics for one pair of raw transcripts.
MetricVector score_pair(std::string_view reference, std::string_view hypothesis,
                        const EmbeddingTable& emb, const EmbERConfig& cfg);

struct ScoringOptions {
  EmbERConfig ember;
  // When set, SemDist reads sentence vectors from here instead of mean
  // pooling word vectors.
  const SentenceVectors* sentence_vectors = nullptr;
};

// One row per (record, model), in manifest order then sorted model id.
ScoreTable score_all(std::span<const UtteranceRecord> records,
                     const EmbeddingTable& emb, const ScoringOptions& opts = {});

}  // namespace asraudit
