#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>

#include <gtest/gtest.h>

#include "newsclust/corpus.h"
#include "newsclust/error.h"
#include "test_support.h"

namespace newsclust {
namespace {

using testing::Vec;

// Returns basis vector (hash % dim) for each text and counts calls.
class CountingProvider : public EmbeddingProvider {
 public:
  explicit CountingProvider(std::size_t dim = 8, std::string model = "stub")
      : dim_(dim), model_(std::move(model)) {}

  EmbeddingBatch Embed(const std::vector<std::string>& texts) override {
    ++calls;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (const auto& t : texts) seen.push_back(t);
    }
    EmbeddingBatch b;
    b.model = model_;
    for (const std::string& t : texts) {
      std::vector<double> v(dim_, 0.0);
      v[ContentHash(t) % dim_] = 1.0;
      b.vectors.emplace_back(v);
    }
    return b;
  }

  std::atomic<int> calls{0};
  std::vector<std::string> seen;

 private:
  std::size_t dim_;
  std::string model_;
  std::mutex mu_;
};

DocumentInput Input(std::string id, std::optional<std::string> title,
                    std::vector<std::string> paras) {
  DocumentInput d;
  d.id = std::move(id);
  d.language = "en";
  d.title = std::move(title);
  d.paragraphs = std::move(paras);
  return d;
}

TEST(ContentHashTest, Fnv1aReference) {
  EXPECT_EQ(ContentHash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(ContentHash("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(EmbedCorpusTest, ColdCacheFillsThenHits) {
  const auto dir = testing::TempDir("cache");
  const std::vector<DocumentInput> docs = {
      Input("a", "Title A", {"p1", "p2"}), Input("b", std::nullopt, {"q1"})};
  {
    EmbeddingCache cache = EmbeddingCache::Load(dir / "c.bin");
    EXPECT_EQ(cache.record_count(), 0u);
    CountingProvider p;
    EmbedStats stats;
    const auto reprs = EmbedCorpus(docs, cache, &p, {}, &stats);
    EXPECT_EQ(reprs.size(), 2u);
    EXPECT_GE(p.calls, 1);
    // Distinct texts: "Title A", "p1", "p2", "q1" (fp repeats para_0).
    EXPECT_EQ(stats.texts_embedded, 4u);
    EXPECT_EQ(cache.encoder(), "stub");
    cache.Save(dir / "c.bin");
  }
  EmbeddingCache cache = EmbeddingCache::Load(dir / "c.bin");
  EXPECT_EQ(cache.record_count(), 6u);
  CountingProvider p;
  EmbedCorpus(docs, cache, &p);
  EXPECT_EQ(p.calls, 0);
  EXPECT_FALSE(cache.modified());
  EXPECT_NO_THROW(EmbedCorpus(docs, cache, nullptr));
}

TEST(EmbedCorpusTest, IdenticalUnitsShareVectors) {
  EmbeddingCache cache;
  CountingProvider p;
  const std::vector<DocumentInput> docs = {Input("a", "same", {"x"}),
                                           Input("b", "same", {"y"})};
  EmbedCorpus(docs, cache, &p);
  EXPECT_EQ(*cache.Find("a", "title"), *cache.Find("b", "title"));
  EXPECT_EQ(std::count(p.seen.begin(), p.seen.end(), "same"), 1);
  EXPECT_EQ(cache.vector_count(), 3u);
}

TEST(EmbedCorpusTest, CacheOnlyMissListsDocuments) {
  EmbeddingCache cache;
  try {
    EmbedCorpus(std::vector<DocumentInput>{Input("zz", std::nullopt, {"x"})},
                cache, nullptr);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
  }
}

TEST(EmbedCorpusTest, BatchesRespectSizeAndKeepOrder) {
  EmbeddingCache cache;
  CountingProvider p;
  std::vector<DocumentInput> docs;
  for (int i = 0; i < 10; ++i) {
    docs.push_back(Input("d" + std::to_string(i), std::nullopt,
                         {"text " + std::to_string(i)}));
  }
  EmbedOptions opts;
  opts.batch_size = 3;
  opts.max_in_flight = 2;
  EmbedStats stats;
  const auto reprs = EmbedCorpus(docs, cache, &p, opts, &stats);
  EXPECT_EQ(stats.provider_calls, 4u);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> v(8, 0.0);
    v[ContentHash("text " + std::to_string(i)) % 8] = 1.0;
    EXPECT_EQ(reprs[i].d2, DenseVec(v));
  }
}

TEST(EmbeddingCacheTest, SerializeRoundTripIsStable) {
  EmbeddingCache cache;
  cache.BindEncoder("enc", 2);
  cache.Put("b", "fp", "hello", Vec({1, 2}));
  cache.Put("a", "title", "world", Vec({3, -4.5}));
  cache.Put("a", "fp", "hello", Vec({1, 2}));
  const std::string bytes = cache.Serialize();
  EXPECT_EQ(bytes.substr(0, 8), "NCEMB001");
  const EmbeddingCache back = EmbeddingCache::Parse(bytes);
  EXPECT_EQ(back.Serialize(), bytes);
  EXPECT_EQ(*back.Find("a", "title"), Vec({3, -4.5}));
  EXPECT_EQ(back.vector_count(), 2u);
  EXPECT_EQ(back.Find("a", "para_0"), nullptr);
}

TEST(EmbeddingCacheTest, RejectsMixedEncodersAndCorruption) {
  EmbeddingCache cache;
  cache.BindEncoder("enc", 2);
  EXPECT_THROW(cache.BindEncoder("other", 2), ValidationError);
  EXPECT_THROW(cache.BindEncoder("enc", 3), ValidationError);
  EXPECT_THROW(cache.Put("a", "fp", "t", Vec({1, 2, 3})), ValidationError);
  cache.Put("a", "fp", "t", Vec({1, 2}));
  const std::string bytes = cache.Serialize();
  EXPECT_THROW(EmbeddingCache::Parse(bytes.substr(0, bytes.size() - 3)),
               ValidationError);
  EXPECT_THROW(EmbeddingCache::Parse("NOTACACHE"), ValidationError);

  CountingProvider other(2, "different-model");
  EXPECT_THROW(EmbedCorpus(std::vector<DocumentInput>{Input("b", std::nullopt, {"new"})},
                           cache, &other),
               ValidationError);
}

}  // namespace
}  // namespace newsclust
