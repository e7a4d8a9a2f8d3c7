#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "newsclust/error.h"
#include "newsclust/eval.h"
#include "test_support.h"

namespace newsclust {
namespace {

using testing::BruteBCubed;
using testing::BruteStandardF1;
using testing::GoldFixture;

TEST(SameStoryTest, DirectConnectionsOnly) {
  GoldFixture f;
  f.label = {{"x", "a"}, {"y", "b"}, {"z", "c"}};
  f.connections = {{"a", "b"}, {"b", "c"}};
  const GoldStandard g = f.Build();
  EXPECT_TRUE(g.SameStory("a", "a"));
  EXPECT_TRUE(g.SameStory("a", "b"));
  EXPECT_TRUE(g.SameStory("b", "a"));
  EXPECT_FALSE(g.SameStory("a", "c"));
  EXPECT_TRUE(g.SameStory("a", "c", /*closure=*/true));
  EXPECT_EQ(g.Component("c"), "a");
}

TEST(GoldStandardTest, UnknownConnectionLabel) {
  GoldStandard g;
  g.AddLabel("x", "a");
  g.AddConnection("a", "nope");
  EXPECT_THROW(g.Validate(), ValidationError);
}

TEST(StandardF1Test, PerfectClustering) {
  GoldFixture f;
  Prediction pred;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "d" + std::to_string(i);
    f.label[id] = i < 3 ? "a" : "b";
    pred[id] = i < 3 ? 0 : 1;
  }
  const auto pr = StandardF1(pred, f.Build());
  EXPECT_DOUBLE_EQ(pr.p, 1.0);
  EXPECT_DOUBLE_EQ(pr.r, 1.0);
  EXPECT_DOUBLE_EQ(pr.f1, 1.0);
}

TEST(StandardF1Test, EverythingInOneCluster) {
  GoldFixture f;
  Prediction pred;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "d" + std::to_string(i);
    f.label[id] = i < 3 ? "a" : "b";
    pred[id] = 7;
  }
  const auto pr = StandardF1(pred, f.Build());
  EXPECT_DOUBLE_EQ(pr.r, 1.0);
  EXPECT_NEAR(pr.p, 0.4, 1e-12);
}

TEST(StandardF1Test, ZeroDenominatorsGiveZero) {
  GoldFixture f;
  f.label = {{"x", "a"}, {"y", "b"}};
  const auto pr = StandardF1({{"x", 0}, {"y", 1}}, f.Build());
  EXPECT_EQ(pr.p, 0.0);
  EXPECT_EQ(pr.r, 0.0);
  EXPECT_EQ(pr.f1, 0.0);
}

TEST(StandardF1Test, MissingPredictionIsError) {
  GoldFixture f;
  f.label = {{"x", "a"}, {"y", "a"}};
  EXPECT_THROW(StandardF1({{"x", 0}}, f.Build()), ValidationError);
}

TEST(BCubedTest, OneCleanCluster) {
  GoldFixture f;
  f.label = {{"x", "a"}, {"y", "a"}, {"z", "a"}};
  const auto pr = BCubed({{"x", 1}, {"y", 1}, {"z", 1}}, f.Build());
  EXPECT_DOUBLE_EQ(pr.p, 1.0);
  EXPECT_DOUBLE_EQ(pr.r, 1.0);
}

TEST(BCubedTest, TwoUnrelatedDocsTogether) {
  GoldFixture f;
  f.label = {{"x", "a"}, {"y", "b"}};
  const auto pr = BCubed({{"x", 1}, {"y", 1}}, f.Build());
  EXPECT_NEAR(pr.p, 0.5, 1e-12);
  EXPECT_NEAR(pr.r, 1.0, 1e-12);
  EXPECT_NEAR(pr.f1, 2.0 / 3.0, 1e-12);
}

TEST(BCubedTest, ConnectedLabelsCountAsOneStory) {
  GoldFixture f;
  f.label = {{"x", "a-en"}, {"y", "a-es"}};
  f.connections = {{"a-en", "a-es"}};
  const auto pr = BCubed({{"x", 1}, {"y", 1}}, f.Build());
  EXPECT_DOUBLE_EQ(pr.f1, 1.0);
}

// Random instance with up to 12 documents, 4 labels, sparse connections.
std::pair<GoldFixture, Prediction> RandomInstance(std::mt19937_64& rng) {
  GoldFixture f;
  Prediction pred;
  const std::size_t n = 1 + rng() % 12;
  const std::size_t labels = 1 + rng() % 4;
  const std::size_t clusters = 1 + rng() % 5;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "d" + std::to_string(i);
    f.label[id] = "l" + std::to_string(rng() % labels);
    pred[id] = 100 + rng() % clusters;
  }
  std::set<std::string> used;
  for (const auto& [d, l] : f.label) used.insert(l);
  const std::vector<std::string> ls(used.begin(), used.end());
  for (std::size_t i = 0; i < ls.size(); ++i) {
    for (std::size_t j = i + 1; j < ls.size(); ++j) {
      if (rng() % 3 == 0) f.connections.insert({ls[i], ls[j]});
    }
  }
  return {f, pred};
}

TEST(MetricOracleTest, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 200; ++trial) {
    const auto [f, pred] = RandomInstance(rng);
    const GoldStandard g = f.Build();
    for (bool closure : {false, true}) {
      const auto got = StandardF1(pred, g, closure);
      const auto want = BruteStandardF1(pred, f, closure);
      EXPECT_NEAR(got.p, want.p, 1e-12);
      EXPECT_NEAR(got.r, want.r, 1e-12);
      EXPECT_NEAR(got.f1, want.f1, 1e-12);
    }
    const auto got = BCubed(pred, g);
    const auto want = BruteBCubed(pred, f);
    EXPECT_NEAR(got.p, want.p, 1e-12);
    EXPECT_NEAR(got.r, want.r, 1e-12);
    EXPECT_NEAR(got.f1, want.f1, 1e-12);
  }
}

TEST(MetricPropertyTest, InvariantUnderClusterRenaming) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [f, pred] = RandomInstance(rng);
    Prediction renamed;
    for (const auto& [d, c] : pred) renamed[d] = 7919 * c + 13;
    const GoldStandard g = f.Build();
    EXPECT_NEAR(StandardF1(pred, g).f1, StandardF1(renamed, g).f1, 1e-15);
    EXPECT_NEAR(BCubed(pred, g).f1, BCubed(renamed, g).f1, 1e-15);
  }
}

TEST(MetricPropertyTest, GoldComponentsScorePerfectly) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto [f, pred] = RandomInstance(rng);
    const auto cls = testing::LabelClasses(f);
    for (auto& [d, c] : pred) c = static_cast<ClusterId>(cls.at(f.label.at(d)));
    const GoldStandard g = f.Build();
    EXPECT_DOUBLE_EQ(BCubed(pred, g).f1, 1.0);
    const auto closure = StandardF1(pred, g, true);
    if (pred.size() > 1 && closure.p > 0) {
      EXPECT_DOUBLE_EQ(closure.f1, 1.0);
    }
  }
}

TEST(MetricPropertyTest, MergingClustersNeverLowersRecall) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto [f, pred] = RandomInstance(rng);
    const GoldStandard g = f.Build();
    const double before = StandardF1(pred, g).r;
    const ClusterId from = pred.begin()->second;
    const ClusterId to = std::prev(pred.end())->second;
    for (auto& [d, c] : pred) {
      if (c == from) c = to;
    }
    EXPECT_GE(StandardF1(pred, g).r, before - 1e-15);
  }
}

TEST(EvaluateTest, LanguageFilterAndUnlabeledDocs) {
  GoldStandard g;
  g.AddLabel("x", "a", "en");
  g.AddLabel("y", "a", "en");
  g.AddLabel("z", "a", "de");
  const Prediction pred = {{"x", 0}, {"y", 0}, {"z", 1}, {"extra", 5}};
  EvalOptions opts;
  opts.language = "en";
  const EvalReport en = Evaluate(pred, g, opts);
  EXPECT_EQ(en.n_docs, 2u);
  EXPECT_EQ(en.n_clusters, 1u);
  EXPECT_DOUBLE_EQ(en.std_f1, 1.0);
  const EvalReport all = Evaluate(pred, g);
  EXPECT_EQ(all.n_docs, 3u);
  EXPECT_NEAR(all.std_r, 1.0 / 3.0, 1e-12);
  EXPECT_NE(ReportToJson(all, {}).find("\"bcubed_f1\""), std::string::npos);
  EXPECT_NE(ReportToTable(all).find("BCubed"), std::string::npos);
}

TEST(GoldFilesTest, LoadLabelsAndConnections) {
  const auto dir = testing::TempDir("gold");
  {
    std::ofstream(dir / "gold.jsonl")
        << "{\"id\":\"x\",\"cluster\":\"a-en\",\"lang\":\"en\"}\n"
        << "{\"id\":\"y\",\"label\":\"a-de\"}\n"
        << "{\"id\":\"z\",\"cluster\":null}\n";
    std::ofstream(dir / "conn.tsv") << "# positive pairs\na-en\ta-de\n";
  }
  const GoldStandard g = LoadGoldStandard(dir / "gold.jsonl", dir / "conn.tsv");
  EXPECT_EQ(g.labels().size(), 2u);
  EXPECT_TRUE(g.SameStory("a-en", "a-de"));
  ASSERT_NE(g.LanguageOf("x"), nullptr);
  EXPECT_EQ(*g.LanguageOf("x"), "en");
  EXPECT_EQ(g.LanguageOf("y"), nullptr);
  EXPECT_THROW(ParseConnections("only-one-field\n"), ValidationError);
  const std::set<std::pair<std::string, std::string>> conns = {{"a", "b"}};
  const auto parsed = ParseConnections(FormatConnections(conns));
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0], (std::pair<std::string, std::string>{"a", "b"}));
}

}  // namespace
}  // namespace newsclust
