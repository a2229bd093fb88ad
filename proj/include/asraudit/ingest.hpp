#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "asraudit/types.hpp"

namespace asraudit {

enum class ManifestFormat { jsonl, csv };

// Picks the format from the file extension (.csv, anything else is JSONL).
ManifestFormat manifest_format_for(const std::filesystem::path& path);

// Parses and validates an audit manifest. Relative audio paths are resolved
// against the manifest's directory. Throws InputError with the offending line
// number for malformed rows, duplicate sample ids, model-set mismatches and
// non-positive durations.
std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path,
                                           ManifestFormat format);

// Parses manifest text directly; `origin` is used in diagnostics and to
// resolve relative audio paths.
std::vector<UtteranceRecord> parse_manifest(
    std::string_view text, ManifestFormat format,
    const std::filesystem::path& origin = {});

// Writes records back out in JSONL form (one object per line).
std::string to_jsonl(std::span<const UtteranceRecord> records);

enum class CaseMode { as_is, lowercase };

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim, CaseMode mode = CaseMode::lowercase)
      : dim_(dim), case_mode_(mode) {}

  std::size_t dim() const { return dim_; }
  CaseMode case_mode() const { return case_mode_; }
  std::size_t size() const { return vectors_.size(); }
  bool empty() const { return vectors_.empty(); }
  std::size_t duplicates_skipped() const { return duplicates_skipped_; }

  // Returns false (and counts a duplicate) when the normalized token is
  // already present; the first vector wins.
  bool insert(std::string_view token, std::vector<double> vec);

  // nullptr when the token is out of vocabulary.
  const std::vector<double>* find(std::string_view token) const;

 private:
  std::string key_for(std::string_view token) const;

  std::size_t dim_ = 0;
  CaseMode case_mode_ = CaseMode::lowercase;
  std::size_t duplicates_skipped_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Word-vector text format: "token v1 ... vd" per line, optional "count dim"
// header. Throws InputError on empty input, non-numeric components, or a
// dimension mismatch (with line number).
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               CaseMode mode = CaseMode::lowercase);
EmbeddingTable parse_embeddings(std::string_view text,
                                CaseMode mode = CaseMode::lowercase);

inline constexpr std::string_view kScoreHeader =
    "sample_id,model_id,wer,cer,mer,wil,ember,semdist";

void write_scores(const ScoreTable& scores, const std::filesystem::path& path);
ScoreTable read_scores(const std::filesystem::path& path);
std::string format_scores(const ScoreTable& scores);
ScoreTable parse_scores(std::string_view text);

}  // namespace asraudit
