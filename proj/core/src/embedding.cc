#include <algorithm>
#include <bit>
#include <cstring>
#include <future>
#include <thread>
#include <unordered_map>

#include "file_util.h"
#include "httplib.h"
#include "json.hpp"
#include "newsclust/corpus.h"
#include "newsclust/error.h"

namespace newsclust {
namespace {

using nlohmann::json;

constexpr std::string_view kCacheMagic = "NCEMB001";
constexpr std::string_view kSegmentation = "blank-line";

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void PutLe(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bits.begin(), bits.end());
  }
  out.append(bits.data(), bits.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    std::array<char, sizeof(T)> bits;
    std::memcpy(bits.data(), Take(sizeof(T)).data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(bits.begin(), bits.end());
    }
    return std::bit_cast<T>(bits);
  }
  std::string_view Take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError("embedding cache is truncated");
    }
    const std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string RecordKey(const std::string& doc_id, std::string_view unit) {
  std::string key = doc_id;
  key += '\0';
  key += unit;
  return key;
}

// The text of every unit a document contributes.
std::vector<std::pair<std::string, const std::string*>> UnitsOf(
    const DocumentInput& d) {
  std::vector<std::pair<std::string, const std::string*>> units;
  if (d.title) units.emplace_back("title", &*d.title);
  units.emplace_back("fp", &d.paragraphs.front());
  for (std::size_t k = 0; k < d.paragraphs.size(); ++k) {
    units.emplace_back("para_" + std::to_string(k), &d.paragraphs[k]);
  }
  return units;
}

}  // namespace

std::uint64_t ContentHash(std::string_view text) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

EmbeddingCache EmbeddingCache::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return EmbeddingCache{};
  try {
    return Parse(internal::ReadFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

EmbeddingCache EmbeddingCache::Parse(std::string_view bytes) {
  Reader r(bytes);
  if (r.Take(kCacheMagic.size()) != kCacheMagic) {
    throw ValidationError("not an embedding cache (bad magic)");
  }
  const auto header_len = r.Get<std::uint64_t>();
  json header;
  try {
    header = json::parse(r.Take(header_len));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad cache header: ") + e.what());
  }
  EmbeddingCache cache;
  cache.encoder_ = header.at("encoder").get<std::string>();
  cache.dim_ = header.at("dim").get<std::size_t>();
  const auto n_vectors = header.at("vectors").get<std::size_t>();
  const auto n_records = header.at("records").get<std::size_t>();
  for (std::size_t i = 0; i < n_vectors; ++i) {
    const auto hash = r.Get<std::uint64_t>();
    std::vector<double> v(cache.dim_);
    for (double& x : v) x = r.Get<double>();
    cache.vectors_.emplace(hash, DenseVec(std::move(v)));
  }
  for (std::size_t i = 0; i < n_records; ++i) {
    const auto len = r.Get<std::uint32_t>();
    std::string key(r.Take(len));
    const auto hash = r.Get<std::uint64_t>();
    if (!cache.vectors_.count(hash)) {
      throw ValidationError("cache record points at a missing vector");
    }
    cache.records_.emplace(std::move(key), hash);
  }
  if (!r.done()) throw ValidationError("trailing bytes in embedding cache");
  return cache;
}

std::string EmbeddingCache::Serialize() const {
  const json header = {{"dim", dim_},
                       {"encoder", encoder_},
                       {"segmentation", kSegmentation},
                       {"vectors", vectors_.size()},
                       {"records", records_.size()}};
  const std::string h = header.dump();
  std::string out(kCacheMagic);
  PutLe<std::uint64_t>(out, h.size());
  out += h;
  for (const auto& [hash, vec] : vectors_) {
    PutLe<std::uint64_t>(out, hash);
    for (double x : vec.values()) PutLe<double>(out, x);
  }
  for (const auto& [key, hash] : records_) {
    PutLe<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
    out += key;
    PutLe<std::uint64_t>(out, hash);
  }
  return out;
}

void EmbeddingCache::Save(const std::filesystem::path& path) const {
  internal::WriteFile(path, Serialize());
}

void EmbeddingCache::BindEncoder(const std::string& encoder, std::size_t dim) {
  if (encoder.empty() || dim == 0) {
    throw ValidationError("encoder needs a name and a positive dimension");
  }
  if (encoder_.empty()) {
    encoder_ = encoder;
    dim_ = dim;
    modified_ = true;
    return;
  }
  if (encoder_ != encoder) {
    throw ValidationError("refusing to mix encoders in one cache ('" +
                          encoder_ + "' vs '" + encoder + "')");
  }
  if (dim_ != dim) {
    throw ValidationError("encoder '" + encoder + "' changed dimension (" +
                          std::to_string(dim_) + " vs " + std::to_string(dim) +
                          ")");
  }
}

const DenseVec* EmbeddingCache::Find(const std::string& doc_id,
                                     std::string_view unit) const {
  auto it = records_.find(RecordKey(doc_id, unit));
  if (it == records_.end()) return nullptr;
  return FindByHash(it->second);
}

const DenseVec* EmbeddingCache::FindByHash(std::uint64_t hash) const {
  auto it = vectors_.find(hash);
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingCache::Put(const std::string& doc_id, std::string_view unit,
                         std::string_view text, DenseVec vec) {
  if (encoder_.empty()) {
    throw ValidationError("bind an encoder before filling the cache");
  }
  if (vec.dim() != dim_) {
    throw ValidationError("vector dimension " + std::to_string(vec.dim()) +
                          " does not match cache dimension " +
                          std::to_string(dim_));
  }
  const std::uint64_t hash = ContentHash(text);
  auto [vit, vnew] = vectors_.emplace(hash, std::move(vec));
  auto [rit, rnew] = records_.insert_or_assign(RecordKey(doc_id, unit), hash);
  (void)vit;
  (void)rit;
  modified_ = modified_ || vnew || rnew;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url,
                                             HttpProviderOptions options)
    : base_url_(std::move(base_url)), options_(options) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.empty()) throw ValidationError("empty embedding service URL");
  if (options_.attempts < 1) throw ValidationError("attempts must be >= 1");
}

EmbeddingBatch HttpEmbeddingProvider::Embed(
    const std::vector<std::string>& texts) {
  const std::string body = json{{"texts", texts}}.dump();
  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    const auto res = client.Post("/embed", body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    } else if (res->status != 200) {
      std::string detail = res->body;
      try {
        detail = json::parse(res->body).at("error").get<std::string>();
      } catch (const std::exception&) {
      }
      throw RuntimeError("embedding service rejected request (HTTP " +
                         std::to_string(res->status) + "): " + detail);
    } else {
      EmbeddingBatch batch;
      try {
        const json j = json::parse(res->body);
        batch.model = j.at("model").get<std::string>();
        const auto dim = j.at("dim").get<std::size_t>();
        for (const json& v : j.at("vectors")) {
          auto values = v.get<std::vector<double>>();
          if (values.size() != dim) {
            throw ValidationError("vector length does not match 'dim'");
          }
          batch.vectors.emplace_back(std::move(values));
        }
      } catch (const std::exception& e) {
        throw RuntimeError(std::string("bad embedding response: ") + e.what());
      }
      if (batch.vectors.size() != texts.size()) {
        throw RuntimeError("embedding service returned " +
                           std::to_string(batch.vectors.size()) +
                           " vectors for " + std::to_string(texts.size()) +
                           " texts");
      }
      return batch;
    }
    if (attempt < options_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw RuntimeError("embedding service at " + base_url_ + " unreachable after " +
                     std::to_string(options_.attempts) +
                     " attempts: " + last_error);
}

std::vector<DocRepr> EmbedCorpus(std::span<const DocumentInput> docs,
                                 EmbeddingCache& cache,
                                 EmbeddingProvider* provider,
                                 const EmbedOptions& options,
                                 EmbedStats* stats) {
  if (options.batch_size == 0 || options.max_in_flight == 0) {
    throw ValidationError("batch size and in-flight limit must be positive");
  }
  EmbedStats local;
  EmbedStats& st = stats ? *stats : local;

  // Units missing a record. Texts already embedded for another unit only
  // need a record; the rest are requested once per distinct text.
  struct Pending {
    const std::string* doc_id;
    std::string unit;
    const std::string* text;
  };
  std::vector<Pending> pending;
  std::vector<const std::string*> unique_texts;
  std::unordered_map<std::uint64_t, std::size_t> text_index;
  std::vector<std::string> missing_docs;
  for (const DocumentInput& d : docs) {
    bool doc_missing = false;
    for (auto& [unit, text] : UnitsOf(d)) {
      if (cache.Find(d.id, unit)) continue;
      const std::uint64_t h = ContentHash(*text);
      if (const DenseVec* v = cache.FindByHash(h)) {
        cache.Put(d.id, unit, *text, *v);
        continue;
      }
      doc_missing = true;
      if (text_index.emplace(h, unique_texts.size()).second) {
        unique_texts.push_back(text);
      }
      pending.push_back({&d.id, unit, text});
    }
    if (doc_missing) missing_docs.push_back(d.id);
  }

  if (!pending.empty() && provider == nullptr) {
    std::string msg = std::to_string(missing_docs.size()) +
                      " documents missing from the embedding cache:";
    for (std::size_t i = 0; i < missing_docs.size() && i < 20; ++i) {
      msg += " " + missing_docs[i];
    }
    if (missing_docs.size() > 20) msg += " ...";
    throw ValidationError(msg);
  }

  std::vector<std::optional<DenseVec>> fetched(unique_texts.size());
  for (std::size_t start = 0; start < unique_texts.size();) {
    std::vector<std::pair<std::size_t, std::future<EmbeddingBatch>>> wave;
    for (std::size_t k = 0;
         k < options.max_in_flight && start < unique_texts.size(); ++k) {
      const std::size_t end =
          std::min(unique_texts.size(), start + options.batch_size);
      std::vector<std::string> texts;
      for (std::size_t i = start; i < end; ++i) {
        texts.push_back(*unique_texts[i]);
      }
      wave.emplace_back(start, std::async(std::launch::async,
                                          [provider, t = std::move(texts)] {
                                            return provider->Embed(t);
                                          }));
      ++st.provider_calls;
      start = end;
    }
    // Results are applied in batch order so the cache contents do not
    // depend on completion order.
    for (auto& [offset, fut] : wave) {
      EmbeddingBatch batch = fut.get();
      if (!batch.vectors.empty()) {
        cache.BindEncoder(batch.model, batch.vectors.front().dim());
      }
      for (std::size_t i = 0; i < batch.vectors.size(); ++i) {
        fetched[offset + i] = std::move(batch.vectors[i]);
        ++st.texts_embedded;
      }
    }
  }
  for (const Pending& p : pending) {
    const std::size_t idx = text_index.at(ContentHash(*p.text));
    cache.Put(*p.doc_id, p.unit, *p.text, *fetched[idx]);
  }

  std::vector<DocRepr> out;
  out.reserve(docs.size());
  for (const DocumentInput& d : docs) {
    std::optional<DenseVec> title;
    if (d.title) title = *cache.Find(d.id, "title");
    std::vector<DenseVec> paras;
    for (std::size_t k = 0; k < d.paragraphs.size(); ++k) {
      paras.push_back(*cache.Find(d.id, "para_" + std::to_string(k)));
    }
    DocRepr r = BuildRepr(title, *cache.Find(d.id, "fp"), paras,
                          DayTimestamp::FromInstant(d.timestamp));
    r.id = d.id;
    r.gold_label = d.gold_label;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace newsclust
