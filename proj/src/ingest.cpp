#include "asraudit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"
#include "asraudit/text.hpp"

namespace asraudit {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& origin, std::size_t line,
                       const std::string& what) {
  std::ostringstream ss;
  if (!origin.empty()) ss << origin.string() << ":";
  ss << line << ": " << what;
  throw InputError(ss.str());
}

std::string describe(const std::map<std::string, std::string>& hyps) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : hyps) {
    if (!first) out += ",";
    out += k;
    first = false;
  }
  return out + "}";
}

template <typename Enum, typename Parser>
Enum parse_level(const std::string& raw, Parser parse, const char* field,
                 const std::filesystem::path& origin, std::size_t line) {
  if (trim(raw).empty()) return Enum::unknown;
  const auto v = parse(raw);
  if (!v) fail(origin, line, std::string("unrecognized ") + field + " value '" + raw + "'");
  return *v;
}

std::string resolve_audio(const std::string& p, const std::filesystem::path& origin) {
  std::filesystem::path path(p);
  if (path.is_relative() && !origin.empty()) path = origin.parent_path() / path;
  return path.lexically_normal().string();
}

void validate_numbers(const UtteranceRecord& r, const std::filesystem::path& origin,
                      std::size_t line) {
  if (r.duration_s && !(std::isfinite(*r.duration_s) && *r.duration_s > 0.0))
    fail(origin, line, "duration_s must be finite and > 0 (sample '" + r.sample_id + "')");
  if (r.snr_db && !std::isfinite(*r.snr_db))
    fail(origin, line, "snr_db must be finite (sample '" + r.sample_id + "')");
}

std::optional<double> json_number(const json& obj, const char* key,
                                  const std::filesystem::path& origin,
                                  std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (trim(s).empty()) return std::nullopt;
    double v;
    if (parse_double(s, v)) return v;
  }
  fail(origin, line, std::string("field '") + key + "' is not a number");
}

std::string json_string(const json& obj, const char* key, bool required,
                        const std::filesystem::path& origin, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) fail(origin, line, std::string("missing required field '") + key + "'");
    return {};
  }
  if (!it->is_string()) fail(origin, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

UtteranceRecord record_from_json(const json& obj, const std::filesystem::path& origin,
                                 std::size_t line) {
  if (!obj.is_object()) fail(origin, line, "expected a JSON object");
  UtteranceRecord r;
  r.sample_id = json_string(obj, "sample_id", true, origin, line);
  r.speaker_id = json_string(obj, "speaker_id", true, origin, line);
  r.dataset_id = json_string(obj, "dataset_id", true, origin, line);
  r.reference = json_string(obj, "reference", true, origin, line);

  const auto hyps = obj.find("hypotheses");
  if (hyps == obj.end() || !hyps->is_object())
    fail(origin, line, "missing 'hypotheses' object");
  for (const auto& [model, text] : hyps->items()) {
    if (!text.is_string())
      fail(origin, line, "hypothesis for model '" + model + "' must be a string");
    r.hypotheses.emplace(model, text.get<std::string>());
  }

  r.duration_s = json_number(obj, "duration_s", origin, line);
  r.snr_db = json_number(obj, "snr_db", origin, line);
  if (auto p = json_string(obj, "audio_path", false, origin, line); !p.empty())
    r.audio_path = resolve_audio(p, origin);

  for (const char* key : {"age", "age_raw"}) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) continue;
    if (it->is_number()) {
      std::ostringstream ss;
      ss.precision(17);
      ss << it->get<double>();
      r.age_raw = ss.str();
    } else if (it->is_string()) {
      if (!trim(it->get<std::string>()).empty()) r.age_raw = it->get<std::string>();
    } else {
      fail(origin, line, std::string("field '") + key + "' must be a string or number");
    }
  }

  r.sex = parse_level<Sex>(json_string(obj, "sex", false, origin, line), parse_sex,
                           "sex", origin, line);
  r.l1 = parse_level<L1Status>(json_string(obj, "l1", false, origin, line), parse_l1,
                               "l1", origin, line);
  r.typicality = parse_level<Typicality>(json_string(obj, "typicality", false, origin, line),
                                         parse_typicality, "typicality", origin, line);
  return r;
}

struct Located {
  UtteranceRecord record;
  std::size_t line;
};

std::vector<Located> parse_jsonl(std::string_view text,
                                 const std::filesystem::path& origin) {
  std::vector<Located> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const std::string line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (!line.empty()) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(origin, line_no, std::string("malformed JSON: ") + e.what());
      }
      out.push_back({record_from_json(obj, origin, line_no), line_no});
    }
    if (nl == std::string_view::npos) break;
  }
  return out;
}

std::vector<Located> parse_manifest_csv(std::string_view text,
                                        const std::filesystem::path& origin) {
  const auto rows = parse_csv(text);
  if (rows.empty()) return {};
  const auto& header = rows.front().fields;
  std::map<std::string, std::size_t> col;
  std::vector<std::pair<std::string, std::size_t>> hyp_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name.rfind("hyp__", 0) == 0) {
      if (name.size() == 5) fail(origin, rows.front().line, "empty model id in column 'hyp__'");
      hyp_cols.emplace_back(name.substr(5), i);
    } else {
      col[name] = i;
    }
  }
  for (const char* req : {"sample_id", "speaker_id", "dataset_id", "reference"})
    if (!col.count(req))
      fail(origin, rows.front().line, std::string("missing required column '") + req + "'");
  if (hyp_cols.empty())
    fail(origin, rows.front().line, "no hypothesis columns (expected hyp__<model_id>)");

  std::vector<Located> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size())
      fail(origin, row.line,
           "expected " + std::to_string(header.size()) + " fields, found " +
               std::to_string(row.fields.size()));
    auto cell = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      return it == col.end() ? std::string() : row.fields[it->second];
    };
    auto number = [&](const char* name) -> std::optional<double> {
      const std::string v = trim(cell(name));
      if (v.empty()) return std::nullopt;
      double d;
      if (!parse_double(v, d))
        fail(origin, row.line, std::string("field '") + name + "' is not a number");
      return d;
    };
    UtteranceRecord rec;
    rec.sample_id = cell("sample_id");
    rec.speaker_id = cell("speaker_id");
    rec.dataset_id = cell("dataset_id");
    rec.reference = cell("reference");
    for (const auto& [model, idx] : hyp_cols) rec.hypotheses.emplace(model, row.fields[idx]);
    rec.duration_s = number("duration_s");
    rec.snr_db = number("snr_db");
    if (auto p = trim(cell("audio_path")); !p.empty()) rec.audio_path = resolve_audio(p, origin);
    std::string age = trim(cell("age"));
    if (age.empty()) age = trim(cell("age_raw"));
    if (!age.empty()) rec.age_raw = age;
    rec.sex = parse_level<Sex>(cell("sex"), parse_sex, "sex", origin, row.line);
    rec.l1 = parse_level<L1Status>(cell("l1"), parse_l1, "l1", origin, row.line);
    rec.typicality = parse_level<Typicality>(cell("typicality"), parse_typicality,
                                             "typicality", origin, row.line);
    out.push_back({std::move(rec), row.line});
  }
  return out;
}

}  // namespace

ManifestFormat manifest_format_for(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? ManifestFormat::csv : ManifestFormat::jsonl;
}

std::vector<UtteranceRecord> parse_manifest(std::string_view text, ManifestFormat format,
                                            const std::filesystem::path& origin) {
  auto located = format == ManifestFormat::jsonl ? parse_jsonl(text, origin)
                                                 : parse_manifest_csv(text, origin);
  std::set<std::string> seen;
  std::vector<UtteranceRecord> out;
  out.reserve(located.size());
  for (auto& [rec, line] : located) {
    if (rec.sample_id.empty()) fail(origin, line, "empty sample_id");
    if (rec.speaker_id.empty()) fail(origin, line, "empty speaker_id");
    if (rec.dataset_id.empty()) fail(origin, line, "empty dataset_id");
    if (rec.hypotheses.empty()) fail(origin, line, "record has no hypotheses");
    if (!seen.insert(rec.sample_id).second)
      fail(origin, line, "duplicate sample_id '" + rec.sample_id + "'");
    validate_numbers(rec, origin, line);
    if (!out.empty()) {
      const auto& first = out.front().hypotheses;
      bool same = first.size() == rec.hypotheses.size();
      auto b = rec.hypotheses.cbegin();
      for (auto a = first.cbegin(); same && a != first.cend(); ++a, ++b)
        same = a->first == b->first;
      if (!same)
        fail(origin, line,
             "inconsistent model set: expected " + describe(first) + ", found " +
                 describe(rec.hypotheses));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path,
                                           ManifestFormat format) {
  if (!std::filesystem::exists(path))
    throw InputError("manifest not found: " + path.string());
  return parse_manifest(read_file(path.string()), format, path);
}

std::string to_jsonl(std::span<const UtteranceRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json obj = json::object();
    obj["sample_id"] = r.sample_id;
    obj["speaker_id"] = r.speaker_id;
    obj["dataset_id"] = r.dataset_id;
    obj["reference"] = r.reference;
    obj["hypotheses"] = r.hypotheses;
    if (r.duration_s) obj["duration_s"] = *r.duration_s;
    if (r.audio_path) obj["audio_path"] = *r.audio_path;
    if (r.age_raw) obj["age"] = *r.age_raw;
    if (r.sex != Sex::unknown) obj["sex"] = std::string(to_string(r.sex));
    if (r.l1 != L1Status::unknown) obj["l1"] = std::string(to_string(r.l1));
    if (r.typicality != Typicality::unknown)
      obj["typicality"] = std::string(to_string(r.typicality));
    if (r.snr_db) obj["snr_db"] = *r.snr_db;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

// --- embeddings ------------------------------------------------------------

std::string EmbeddingTable::key_for(std::string_view token) const {
  return case_mode_ == CaseMode::lowercase ? fold_case(token) : std::string(token);
}

bool EmbeddingTable::insert(std::string_view token, std::vector<double> vec) {
  if (vec.size() != dim_)
    throw InputError("embedding for '" + std::string(token) + "' has dimension " +
                     std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  auto [it, inserted] = vectors_.try_emplace(key_for(token), std::move(vec));
  if (!inserted) ++duplicates_skipped_;
  return inserted;
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  const auto it = vectors_.find(key_for(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > b) out.emplace_back(line.substr(b, i - b));
  }
  return out;
}

bool is_integer(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

EmbeddingTable parse_embeddings(std::string_view text, CaseMode mode) {
  EmbeddingTable table;
  bool have_dim = false;
  bool first_line = true;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const auto fields = split_ws(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (fields.empty()) continue;
    if (first_line) {
      first_line = false;
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) continue;
    }
    if (fields.size() < 2)
      throw InputError("embeddings line " + std::to_string(line_no) +
                       ": expected a token followed by at least one component");
    const std::size_t dim = fields.size() - 1;
    if (!have_dim) {
      table = EmbeddingTable(dim, mode);
      have_dim = true;
    } else if (dim != table.dim()) {
      throw InputError("embeddings line " + std::to_string(line_no) +
                       ": dimension mismatch, expected " + std::to_string(table.dim()) +
                       " components, found " + std::to_string(dim));
    }
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_double(fields[i + 1], vec[i]) || !std::isfinite(vec[i]))
        throw InputError("embeddings line " + std::to_string(line_no) +
                         ": non-numeric component '" + fields[i + 1] + "'");
    }
    table.insert(fields[0], std::move(vec));
  }
  if (!have_dim) throw InputError("embeddings file contains no vectors");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, CaseMode mode) {
  if (!std::filesystem::exists(path))
    throw InputError("embeddings file not found: " + path.string());
  try {
    return parse_embeddings(read_file(path.string()), mode);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// --- score table -----------------------------------------------------------

std::string format_scores(const ScoreTable& scores) {
  std::string out(kScoreHeader);
  out += '\n';
  for (const auto& row : scores) {
    out += csv_escape(row.sample_id);
    out += ',';
    out += csv_escape(row.model_id);
    for (Metric m : kAllMetrics) {
      out += ',';
      out += format_double(row.metrics.get(m));
    }
    out += '\n';
  }
  return out;
}

ScoreTable parse_scores(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw InputError("score table: missing header");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[trim(rows[0].fields[i])] = i;
  std::vector<std::size_t> metric_cols;
  for (const char* name : {"sample_id", "model_id"})
    if (!col.count(name))
      throw InputError(std::string("score table schema: missing column '") + name + "'");
  for (Metric m : kAllMetrics) {
    const auto it = col.find(std::string(metric_name(m)));
    if (it == col.end())
      throw InputError("score table schema: missing column '" +
                       std::string(metric_name(m)) + "'");
    metric_cols.push_back(it->second);
  }
  ScoreTable out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != rows[0].fields.size())
      throw InputError("score table line " + std::to_string(rows[r].line) +
                       ": wrong number of fields");
    ScoreRow row;
    row.sample_id = f[col["sample_id"]];
    row.model_id = f[col["model_id"]];
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
      double v;
      if (!parse_double(f[metric_cols[i]], v))
        throw InputError("score table line " + std::to_string(rows[r].line) +
                         ": non-numeric " + std::string(metric_name(kAllMetrics[i])));
      row.metrics.set(kAllMetrics[i], v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_scores(const ScoreTable& scores, const std::filesystem::path& path) {
  write_file(path.string(), format_scores(scores));
}

ScoreTable read_scores(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw InputError("score table not found: " + path.string());
  return parse_scores(read_file(path.string()));
}

}  // namespace asraudit
