#ifndef NEWSCLUST_CORPUS_H_
#define NEWSCLUST_CORPUS_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsclust/domain.h"

namespace newsclust {

// ---------------------------------------------------------------------------
// Corpus files
//
// JSON-lines, one article per line:
//   {"id": "...", "lang": "en", "date": "2014-11-02T10:00:00Z",
//    "title": "..." | null,
//    "paragraphs": ["...", ...]      or   "text": "para\n\npara",
//    "cluster": "gold label" | null}

// Splits on blank lines; paragraphs are trimmed and empty ones dropped.
std::vector<std::string> SplitParagraphs(std::string_view text);

// Parses and sorts by timestamp (ties by id). Malformed lines are reported
// together, with line numbers, in one ValidationError.
std::vector<DocumentInput> ParseCorpus(std::string_view text);
std::vector<DocumentInput> LoadCorpus(const std::filesystem::path& path);
std::string FormatCorpus(std::span<const DocumentInput> docs);
void SaveCorpus(std::span<const DocumentInput> docs,
                const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Representations

// d2 = first paragraph; d3 = mean(first paragraph, title) or d2 without a
// title; d1 = unweighted mean over all paragraphs plus the title if present.
DocRepr BuildRepr(const std::optional<DenseVec>& title_vec,
                  const DenseVec& fp_vec, std::span<const DenseVec> para_vecs,
                  DayTimestamp ts);

// ---------------------------------------------------------------------------
// Embedding cache
//
// Binary file, little-endian:
//   "NCEMB001"
//   u64 header length, header JSON {"dim","encoder","segmentation",
//                                   "vectors","records"}
//   per vector (ascending hash):  u64 content hash, dim x f64
//   per record (ascending key):   u32 key length, key = doc_id '\0' unit,
//                                 u64 content hash
// Units are "title", "fp" and "para_<k>". Vectors are shared between units
// with identical text.

std::uint64_t ContentHash(std::string_view text);

class EmbeddingCache {
 public:
  // A missing file yields an empty cache.
  static EmbeddingCache Load(const std::filesystem::path& path);
  static EmbeddingCache Parse(std::string_view bytes);
  std::string Serialize() const;
  void Save(const std::filesystem::path& path) const;

  // Fixes the encoder identity on first use; afterwards a different
  // encoder or dimension is refused.
  void BindEncoder(const std::string& encoder, std::size_t dim);

  const DenseVec* Find(const std::string& doc_id, std::string_view unit) const;
  const DenseVec* FindByHash(std::uint64_t hash) const;
  void Put(const std::string& doc_id, std::string_view unit,
           std::string_view text, DenseVec vec);

  const std::string& encoder() const { return encoder_; }
  std::size_t dim() const { return dim_; }
  std::size_t record_count() const { return records_.size(); }
  std::size_t vector_count() const { return vectors_.size(); }
  bool modified() const { return modified_; }

 private:
  std::string encoder_;
  std::size_t dim_ = 0;
  std::map<std::string, std::uint64_t> records_;
  std::map<std::uint64_t, DenseVec> vectors_;
  bool modified_ = false;
};

// ---------------------------------------------------------------------------
// Embedding providers

struct EmbeddingBatch {
  std::vector<DenseVec> vectors;
  std::string model;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per text, in order. May be called from several threads.
  virtual EmbeddingBatch Embed(const std::vector<std::string>& texts) = 0;
};

struct HttpProviderOptions {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{120};
};

// Client for the sidecar: POST /embed {"texts": [...]} ->
// {"vectors": [[...]], "dim": D, "model": "..."}. Connection failures and
// 5xx responses are retried with exponential backoff.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string base_url,
                                 HttpProviderOptions options = {});
  EmbeddingBatch Embed(const std::vector<std::string>& texts) override;

 private:
  std::string base_url_;
  HttpProviderOptions options_;
};

struct EmbedOptions {
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

struct EmbedStats {
  std::size_t provider_calls = 0;
  std::size_t texts_embedded = 0;
};

// Builds representations for `docs`, filling cache misses through
// `provider` (write-through). Without a provider any miss is a
// ValidationError listing the affected documents.
std::vector<DocRepr> EmbedCorpus(std::span<const DocumentInput> docs,
                                 EmbeddingCache& cache,
                                 EmbeddingProvider* provider,
                                 const EmbedOptions& options = {},
                                 EmbedStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct LanguageRegime {
  std::string code;
  double noise_scale = 1.0;  // multiplies the per-unit noise
  double shift = 0.0;        // length of a language-wide offset vector
};

struct SynthConfig {
  std::size_t n_stories = 20;
  std::size_t docs_per_story = 30;
  std::size_t dim = 64;
  // Expected cosine between a unit embedding and its story center.
  double sep = 0.5;
  double time_spread_days = 30.0;
  double story_duration_days = 2.0;
  std::size_t split_stories = 0;
  double split_gap_days = 20.0;
  // Share of stories whose documents span several languages and carry one
  // gold label per language, linked by positive connections.
  double crosslingual_fraction = 0.25;
  std::vector<LanguageRegime> languages = {
      {"en", 1.0, 0.1}, {"es", 1.0, 0.1}, {"de", 1.0, 0.1}};
  std::size_t min_paragraphs = 2;
  std::size_t max_paragraphs = 5;
  double title_probability = 0.9;
  std::uint64_t seed = 1;
  std::string id_prefix = "doc";
  std::string label_prefix = "story";
  std::int64_t start_day = 16376;  // 2014-11-02

  void Validate() const;
};

struct SynthCorpus {
  std::vector<DocumentInput> documents;  // timestamp order
  std::set<std::pair<std::string, std::string>> connections;
};

// Unit-norm story centers; mutually orthogonal while n <= dim.
std::vector<DenseVec> StoryCenters(std::size_t n, std::size_t dim,
                                   std::uint64_t seed);

// Samples documents around `centers` (one story per center) and stores their
// unit embeddings in `cache` under encoder "synthetic".
SynthCorpus SynthesizeCorpus(const SynthConfig& config,
                             std::span<const DenseVec> centers,
                             EmbeddingCache& cache);

}  // namespace newsclust

#endif  // NEWSCLUST_CORPUS_H_
