#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "newsclust/corpus.h"
#include "newsclust/engine.h"
#include "newsclust/error.h"
#include "newsclust/eval.h"
#include "newsclust/features.h"
#include "newsclust/trainer.h"
#include "test_support.h"

namespace newsclust {
namespace {

using testing::Basis;
using testing::Doc;
using testing::Vec;

using Connections = std::set<std::pair<std::string, std::string>>;

LinearModel CosineRank() {
  std::vector<double> w(8, 0.0);
  w[0] = 1.0;
  return {ModelKind::kRank, w, 0.0};
}

double Cos(const DenseVec& a, const DenseVec& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// Pairwise F1 of a clustering given as groups, by explicit enumeration.
double BrutePairF1(const std::vector<std::vector<std::string>>& groups,
                   const std::map<std::string, std::string>& story) {
  std::vector<std::pair<std::string, std::size_t>> docs;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const std::string& d : groups[g]) docs.emplace_back(d, g);
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = i + 1; j < docs.size(); ++j) {
      const bool same = story.at(docs[i].first) == story.at(docs[j].first);
      const bool together = docs[i].second == docs[j].second;
      tp += together && same;
      fp += together && !same;
      fn += !together && same;
    }
  }
  const double p = tp + fp ? tp / (tp + fp) : 0, r = tp + fn ? tp / (tp + fn) : 0;
  return p + r ? 2 * p * r / (p + r) : 0;
}

TEST(StoryLabelerTest, ConnectedLabelsShareAStory) {
  const std::vector<DocRepr> docs = {Doc("x", Vec({1}), 0, "a-en"),
                                     Doc("y", Vec({1}), 0, "a-de"),
                                     Doc("z", Vec({1}), 0, "b")};
  const StoryLabeler l(docs, {{"a-de", "a-en"}});
  EXPECT_EQ(l.StoryOf("x"), l.StoryOf("y"));
  EXPECT_NE(l.StoryOf("x"), l.StoryOf("z"));
  EXPECT_THROW(l.StoryOf("missing"), ValidationError);
  const std::vector<DocRepr> unlabeled = {Doc("u", Vec({1}), 0)};
  EXPECT_THROW(StoryLabeler(unlabeled, {}), ValidationError);
}

TEST(RankExamplesTest, ColdStartEmitsNothing) {
  const std::vector<DocRepr> docs = {Doc("a1", Basis(3, 0), 0, "a"),
                                     Doc("b1", Basis(3, 1), 0, "b"),
                                     Doc("c1", Basis(3, 2), 0, "c")};
  const StoryLabeler l(docs, {});
  EXPECT_TRUE(GenRankExamples(docs, l, {}, 20, FeatureSet::kEight).empty());
}

TEST(RankExamplesTest, FewerCandidatesThanK) {
  const std::vector<DocRepr> docs = {
      Doc("a1", Basis(4, 0), 0, "a"), Doc("b1", Basis(4, 1), 0, "b"),
      Doc("c1", Basis(4, 2), 0, "c"), Doc("d1", Basis(4, 3), 0, "d"),
      Doc("a2", Basis(4, 0), 1, "a")};
  const StoryLabeler l(docs, {});
  const auto pairs = GenRankExamples(docs, l, {}, 20, FeatureSet::kEight);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(GenRankExamples(docs, l, {}, 2, FeatureSet::kEight).size(), 2u);
  for (const RankPair& p : pairs) EXPECT_DOUBLE_EQ(p.pos[0], 1.0);
  const auto four = GenRankExamples(docs, l, {}, 20, FeatureSet::kFour);
  EXPECT_EQ(four.front().pos.arity(), 4u);
}

TEST(RankExamplesTest, SeparatedStoriesOrderPositivesFirst) {
  SynthConfig cfg;
  cfg.n_stories = 2;
  cfg.docs_per_story = 25;
  cfg.dim = 16;
  cfg.sep = 0.8;
  cfg.crosslingual_fraction = 0;
  EmbeddingCache cache;
  const auto synth = SynthesizeCorpus(cfg, StoryCenters(2, 16, 3), cache);
  const auto docs = EmbedCorpus(synth.documents, cache, nullptr);
  const StoryLabeler l(docs, synth.connections);
  const auto pairs = GenRankExamples(docs, l, {}, 20, FeatureSet::kEight);
  ASSERT_FALSE(pairs.empty());
  for (const RankPair& p : pairs) EXPECT_GT(p.pos[0], p.neg[0]);
}

TEST(AcceptExamplesTest, OnlyGoldLiveGivesSinglePositive) {
  const std::vector<DocRepr> docs = {Doc("a1", Basis(2, 0), 0, "a"),
                                     Doc("a2", Basis(2, 0), 0, "a")};
  const StoryLabeler l(docs, {});
  const auto ex = GenAcceptExamples(docs, l, {}, CosineRank());
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].y, 1);
}

std::vector<DocRepr> ThreeClusterFixture(const DenseVec& probe) {
  return {Doc("a1", Basis(3, 0), 0, "a"), Doc("b1", Basis(3, 1), 0, "b"),
          Doc("c1", Basis(3, 2), 0, "c"), Doc("a2", probe, 0, "a")};
}

TEST(AcceptExamplesTest, GoldFirstTakesSecondAsNegative) {
  const DenseVec probe = Vec({1.0, 0.5, 0.1});
  const auto docs = ThreeClusterFixture(probe);
  const StoryLabeler l(docs, {});
  const auto ex = GenAcceptExamples(docs, l, {}, CosineRank(), false);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].y, 1);
  EXPECT_NEAR(ex[0].f[0], Cos(probe, Basis(3, 0)), 1e-12);
  EXPECT_EQ(ex[1].y, -1);
  EXPECT_NEAR(ex[1].f[0], Cos(probe, Basis(3, 1)), 1e-12);
}

TEST(AcceptExamplesTest, GoldSecondTakesThirdAsNegative) {
  const DenseVec probe = Vec({0.5, 1.0, 0.1});
  const auto docs = ThreeClusterFixture(probe);
  const StoryLabeler l(docs, {});
  const auto ex = GenAcceptExamples(docs, l, {}, CosineRank(), false);
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_NEAR(ex[0].f[0], Cos(probe, Basis(3, 0)), 1e-12);
  EXPECT_EQ(ex[1].y, -1);
  EXPECT_NEAR(ex[1].f[0], Cos(probe, Basis(3, 2)), 1e-12);
}

TEST(AcceptExamplesTest, NewStoryNegativeUsesTopCluster) {
  const auto docs = ThreeClusterFixture(Vec({1.0, 0.5, 0.1}));
  const StoryLabeler l(docs, {});
  const auto ex = GenAcceptExamples(docs, l, {}, CosineRank(), true);
  // b1 against {a}, c1 against {a, b}, then the two examples for a2.
  ASSERT_EQ(ex.size(), 4u);
  EXPECT_EQ(ex[0].y, -1);
  EXPECT_EQ(ex[1].y, -1);
  EXPECT_NEAR(ex[0].f[0], 0.0, 1e-12);
}

TEST(LocalPairF1Test, PureSameStory) {
  const std::vector<DocRepr> docs = {Doc("a1", Vec({1}), 0, "a"),
                                     Doc("a2", Vec({1}), 0, "a"),
                                     Doc("a3", Vec({1}), 0, "a")};
  const StoryLabeler l(docs, {});
  const std::vector<std::string> s = {"a1", "a2"}, c = {"a3"};
  const auto [merged, separate] = LocalPairF1(s, c, l);
  EXPECT_DOUBLE_EQ(merged, 1.0);
  EXPECT_LT(separate, merged);
}

TEST(LocalPairF1Test, PureDifferentStories) {
  const std::vector<DocRepr> docs = {Doc("a1", Vec({1}), 0, "a"),
                                     Doc("a2", Vec({1}), 0, "a"),
                                     Doc("b1", Vec({1}), 0, "b")};
  const StoryLabeler l(docs, {});
  const std::vector<std::string> s = {"a1", "a2"}, c = {"b1"};
  const auto [merged, separate] = LocalPairF1(s, c, l);
  EXPECT_DOUBLE_EQ(separate, 1.0);
  EXPECT_LT(merged, separate);
}

TEST(LocalPairF1Test, MixedClusterMatchesEnumeration) {
  const std::vector<DocRepr> docs = {
      Doc("a1", Vec({1}), 0, "a"), Doc("a2", Vec({1}), 0, "a"),
      Doc("b1", Vec({1}), 0, "b"), Doc("b2", Vec({1}), 0, "b")};
  const StoryLabeler l(docs, {});
  const std::map<std::string, std::string> story = {
      {"a1", "a"}, {"a2", "a"}, {"b1", "b"}, {"b2", "b"}};
  const std::vector<std::string> s = {"a1", "a2", "b1"}, c = {"b2"};
  const double merged = BrutePairF1({{"a1", "a2", "b1", "b2"}}, story);
  const double separate = BrutePairF1({s, c}, story);
  EXPECT_NEAR(merged, 0.5, 1e-12);
  EXPECT_NEAR(separate, 0.4, 1e-12);
  const auto [m, sep] = LocalPairF1(s, c, l);
  EXPECT_NEAR(m, merged, 1e-12);
  EXPECT_NEAR(sep, separate, 1e-12);
}

TEST(LocalPairF1Test, RandomGroupsMatchEnumeration) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DocRepr> docs;
    std::map<std::string, std::string> story;
    std::vector<std::string> a, b;
    const std::size_t n = 2 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "d" + std::to_string(i);
      const std::string s = "s" + std::to_string(rng() % 3);
      docs.push_back(Doc(id, Vec({1}), 0, s));
      story[id] = s;
      (i == 0 || (i > 1 && rng() % 2) ? a : b).push_back(id);
    }
    const StoryLabeler l(docs, {});
    const auto [m, sep] = LocalPairF1(a, b, l);
    std::vector<std::string> all = a;
    all.insert(all.end(), b.begin(), b.end());
    EXPECT_NEAR(m, BrutePairF1({all}, story), 1e-12);
    EXPECT_NEAR(sep, BrutePairF1({a, b}, story), 1e-12);
  }
}

TEST(MergeExamplesTest, LabelsFollowLocalF1) {
  SynthConfig cfg;
  cfg.n_stories = 4;
  cfg.docs_per_story = 20;
  cfg.dim = 16;
  cfg.split_stories = 2;
  cfg.crosslingual_fraction = 0;
  EmbeddingCache cache;
  const auto synth = SynthesizeCorpus(cfg, StoryCenters(4, 16, 5), cache);
  const auto docs = EmbedCorpus(synth.documents, cache, nullptr);
  const StoryLabeler l(docs, synth.connections);
  TrainerOptions opts;
  const TrainedModels models = TrainAll(docs, synth.connections, opts);
  const auto samples = GenMergeExamples(docs, l, {}, SizeLimits::Default(),
                                        models.rank, models.accept, 3);
  ASSERT_FALSE(samples.empty());
  for (const MergeSample& m : samples) {
    EXPECT_EQ(m.f.arity(), kClusterPairArity);
    EXPECT_EQ(m.y, m.f1_merged > m.f1_separate ? 1 : -1);
    EXPECT_NE(m.src_id, m.cand_id);
  }
}

TEST(TrainAllTest, ThreeStoryCorpusGeneralizes) {
  SynthConfig cfg;
  cfg.n_stories = 3;
  cfg.docs_per_story = 30;
  cfg.dim = 32;
  cfg.split_stories = 1;
  const auto centers = StoryCenters(6, 32, 11);
  EmbeddingCache cache;
  const auto train = SynthesizeCorpus(cfg, std::span(centers).first(3), cache);
  SynthConfig test_cfg = cfg;
  test_cfg.seed = 2;
  test_cfg.id_prefix = "test";
  test_cfg.label_prefix = "test";
  test_cfg.start_day += 200;
  const auto test = SynthesizeCorpus(test_cfg, std::span(centers).last(3), cache);

  const auto train_docs = EmbedCorpus(train.documents, cache, nullptr);
  const TrainedModels m = TrainAll(train_docs, train.connections, {});
  EXPECT_EQ(m.rank.kind, ModelKind::kRank);
  EXPECT_EQ(m.accept.kind, ModelKind::kAccept);
  EXPECT_EQ(m.merge.kind, ModelKind::kMerge);
  EXPECT_EQ(m.merge.arity(), kClusterPairArity);
  EXPECT_GT(m.report.rank_pairs, 0u);
  EXPECT_GT(m.report.accept_positive, 0u);
  EXPECT_GT(m.report.accept_negative, 0u);

  Engine engine({m.rank, m.accept, m.merge}, {});
  const auto records =
      RunStream(engine, EmbedCorpus(test.documents, cache, nullptr));
  GoldStandard gold;
  for (const DocumentInput& d : test.documents) gold.AddLabel(d.id, *d.gold_label);
  for (const auto& [a, b] : test.connections) gold.AddConnection(a, b);
  EXPECT_GE(BCubed(ResolveFinalClusters(records), gold).f1, 0.95);
}

TEST(TrainAllTest, EmptyCorpus) {
  EXPECT_THROW(TrainAll({}, {}, {}), ValidationError);
}

TEST(TrainAllTest, SingleStoryHasNoRankPairs) {
  const std::vector<DocRepr> docs = {Doc("a1", Basis(2, 0), 0, "a"),
                                     Doc("a2", Basis(2, 0), 1, "a")};
  try {
    TrainAll(docs, {}, {});
    FAIL();
  } catch (const RuntimeError& e) {
    EXPECT_NE(std::string(e.what()).find("two gold stories"), std::string::npos);
  }
}

TEST(TrainAllTest, SingleClassMergeFallsBackToNeverMerge) {
  // Two stories, far apart: nothing is ever worth merging.
  std::vector<DocRepr> docs;
  for (int i = 0; i < 5; ++i) {
    docs.push_back(Doc("a" + std::to_string(i), Basis(2, 0), i, "a"));
    docs.push_back(Doc("b" + std::to_string(i), Basis(2, 1), i, "b"));
  }
  const TrainedModels m = TrainAll(docs, {}, {});
  EXPECT_TRUE(m.report.merge_fallback);
  EXPECT_LT(m.merge.bias, 0.0);
  for (double w : m.merge.weights) EXPECT_EQ(w, 0.0);
}

TEST(TrainAllTest, FourFeatureModels) {
  std::vector<DocRepr> docs;
  for (int i = 0; i < 5; ++i) {
    docs.push_back(Doc("a" + std::to_string(i), Vec({1, 0.1 * i}), i, "a"));
    docs.push_back(Doc("b" + std::to_string(i), Vec({0.1 * i, 1}), i, "b"));
  }
  TrainerOptions opts;
  opts.features = FeatureSet::kFour;
  const TrainedModels m = TrainAll(docs, {}, opts);
  EXPECT_EQ(m.rank.arity(), 4u);
  EXPECT_EQ(m.accept.arity(), 4u);
  EXPECT_EQ(m.merge.arity(), kClusterPairArity);
}

TEST(TrainAllTest, ReportJsonHasCounts) {
  TrainingReport r;
  r.rank_pairs = 7;
  r.merge_fallback = true;
  const std::string j = ReportToJson(r);
  EXPECT_NE(j.find("\"pairs\": 7"), std::string::npos);
  EXPECT_NE(j.find("\"fallback_never_merge\": true"), std::string::npos);
}

}  // namespace
}  // namespace newsclust
