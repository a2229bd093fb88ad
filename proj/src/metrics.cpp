#include "asraudit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "asraudit/csv.hpp"
#include "asraudit/error.hpp"

namespace asraudit {
namespace {

double error_rate(const AlignmentResult& a, double errors, std::uint8_t* flags) {
  const std::size_t n = a.n_ref();
  if (n > 0) return errors / static_cast<double>(n);
  if (a.n_hyp() == 0) return 0.0;
  if (flags) *flags |= kFlagEmptyRef;
  return errors;
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

void EmbERConfig::validate() const {
  if (!(similarity_threshold >= -1.0 && similarity_threshold <= 1.0))
    throw InputError("EmbER similarity threshold must lie in [-1, 1]");
  if (!(similar_sub_weight >= 0.0 && similar_sub_weight <= 1.0))
    throw InputError("EmbER similar-substitution weight must lie in [0, 1]");
}

double wer(const AlignmentResult& a, std::uint8_t* flags) {
  return error_rate(a, static_cast<double>(a.errors()), flags);
}

double cer(const AlignmentResult& a, std::uint8_t* flags) {
  return error_rate(a, static_cast<double>(a.errors()), flags);
}

double mer(const AlignmentResult& a) {
  const std::size_t denom = a.hits + a.errors();
  return denom == 0 ? 0.0 : static_cast<double>(a.errors()) / static_cast<double>(denom);
}

double wil(const AlignmentResult& a) {
  const std::size_t nr = a.n_ref();
  const std::size_t nh = a.n_hyp();
  if (nr == 0 && nh == 0) return 0.0;
  if (nr == 0 || nh == 0) return 1.0;
  const double h = static_cast<double>(a.hits);
  return 1.0 - (h * h) / (static_cast<double>(nr) * static_cast<double>(nh));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double ember(const AlignmentResult& a, const EmbeddingTable& emb,
             const EmbERConfig& cfg, std::uint8_t* flags) {
  double cost = 0.0;
  for (const auto& op : a.ops) {
    switch (op.op) {
      case EditOp::hit:
        break;
      case EditOp::del:
      case EditOp::ins:
        cost += 1.0;
        break;
      case EditOp::sub: {
        const auto* r = emb.find(*op.ref);
        const auto* h = emb.find(*op.hyp);
        const bool similar = r && h && !is_zero(*r) && !is_zero(*h) &&
                             cosine_similarity(*r, *h) >= cfg.similarity_threshold;
        cost += similar ? cfg.similar_sub_weight : 1.0;
        break;
      }
    }
  }
  return error_rate(a, cost, flags);
}

std::vector<double> sentence_embedding(const TokenList& tokens, const EmbeddingTable& emb) {
  std::vector<double> sum(emb.dim(), 0.0);
  std::size_t covered = 0;
  for (const auto& t : tokens) {
    if (const auto* v = emb.find(t)) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      ++covered;
    }
  }
  if (covered > 0)
    for (double& x : sum) x /= static_cast<double>(covered);
  return sum;
}

double semdist_vectors(std::span<const double> e_ref, std::span<const double> e_hyp,
                       std::uint8_t* flags) {
  if (e_ref.size() != e_hyp.size())
    throw InputError("sentence vectors differ in dimension");
  if (is_zero(e_ref) || is_zero(e_hyp)) {
    if (flags) *flags |= kFlagOovSentence;
    return 1.0;
  }
  if (std::equal(e_ref.begin(), e_ref.end(), e_hyp.begin())) return 0.0;
  return std::clamp(1.0 - cosine_similarity(e_ref, e_hyp), 0.0, 2.0);
}

double semdist(const TokenList& ref, const TokenList& hyp, const EmbeddingTable& emb,
               std::uint8_t* flags) {
  const auto e_ref = sentence_embedding(ref, emb);
  const auto e_hyp = sentence_embedding(hyp, emb);
  if (ref == hyp) {
    if (flags && is_zero(e_ref)) *flags |= kFlagOovSentence;
    return 0.0;
  }
  return semdist_vectors(e_ref, e_hyp, flags);
}

// --- sentence vectors --------------------------------------------------------

std::string SentenceVectors::ref_key(std::string_view sample_id) {
  return std::string(sample_id) + "|ref";
}

std::string SentenceVectors::hyp_key(std::string_view sample_id, std::string_view model_id) {
  return std::string(sample_id) + "|" + std::string(model_id);
}

void SentenceVectors::insert(std::string key, std::vector<double> vec) {
  if (vectors_.empty()) dim_ = vec.size();
  if (vec.size() != dim_ || dim_ == 0)
    throw InputError("sentence vector '" + key + "' has dimension " +
                     std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  vectors_.insert_or_assign(std::move(key), std::move(vec));
}

const std::vector<double>& SentenceVectors::at(const std::string& key) const {
  const auto it = vectors_.find(key);
  if (it == vectors_.end()) throw InputError("sentence vectors: missing key '" + key + "'");
  return it->second;
}

SentenceVectors SentenceVectors::parse(std::string_view jsonl) {
  SentenceVectors out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const auto end = nl == std::string_view::npos ? jsonl.size() : nl;
    const std::string line = trim(jsonl.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      out.insert(obj.at("key").get<std::string>(), obj.at("vec").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError("sentence vectors line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

SentenceVectors SentenceVectors::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw InputError("sentence vector file not found: " + path.string());
  return parse(read_file(path.string()));
}

// --- scoring -----------------------------------------------------------------

namespace {

MetricVector score_tokens(const TokenList& ref, const TokenList& hyp,
                          const EmbeddingTable& emb, const EmbERConfig& cfg) {
  MetricVector mv;
  const auto words = align(ref, hyp, AlignLevel::word);
  const auto chars = align_chars(ref, hyp);
  mv.wer = wer(words, &mv.flags);
  mv.cer = cer(chars);
  mv.mer = mer(words);
  mv.wil = wil(words);
  mv.ember = ember(words, emb, cfg);
  return mv;
}

}  // namespace

MetricVector score_pair(std::string_view reference, std::string_view hypothesis,
                        const EmbeddingTable& emb, const EmbERConfig& cfg) {
  const auto ref = normalize(reference);
  const auto hyp = normalize(hypothesis);
  MetricVector mv = score_tokens(ref, hyp, emb, cfg);
  mv.semdist = semdist(ref, hyp, emb, &mv.flags);
  return mv;
}

ScoreTable score_all(std::span<const UtteranceRecord> records, const EmbeddingTable& emb,
                     const ScoringOptions& opts) {
  opts.ember.validate();
  ScoreTable out;
  for (const auto& rec : records) {
    const auto ref = normalize(rec.reference);
    for (const auto& [model, text] : rec.hypotheses) {
      const auto hyp = normalize(text);
      ScoreRow row{rec.sample_id, model, score_tokens(ref, hyp, emb, opts.ember)};
      if (opts.sentence_vectors) {
        const auto& e_ref = opts.sentence_vectors->at(SentenceVectors::ref_key(rec.sample_id));
        const auto& e_hyp =
            opts.sentence_vectors->at(SentenceVectors::hyp_key(rec.sample_id, model));
        row.metrics.semdist =
            ref == hyp ? 0.0 : semdist_vectors(e_ref, e_hyp, &row.metrics.flags);
      } else {
        row.metrics.semdist = semdist(ref, hyp, emb, &row.metrics.flags);
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace asraudit
