#include "newsclust/trainer.h"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "newsclust/engine.h"
#include "newsclust/error.h"
#include "newsclust/pool.h"

namespace newsclust {
namespace {

using nlohmann::json;

struct Ranked {
  const Cluster* cluster;
  FeatureVec f;
  double key;
};

// Live clusters scored against `doc`, best first (ties: lower id).
std::vector<Ranked> RankClusters(const ClusterPool& pool, const DocRepr& doc,
                                 const TemporalParams& temporal,
                                 FeatureSet features,
                                 const LinearModel* model) {
  std::vector<Ranked> out;
  for (const Cluster* c : pool.LiveClusters()) {
    FeatureVec f = Project(DocClusterFeatures(doc, *c, temporal), features);
    // f[0] is cos(d1, c1) in both feature sets.
    const double key = model ? Score(*model, f) : f[0];
    out.push_back({c, std::move(f), key});
  }
  std::stable_sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    return a.key > b.key;
  });
  return out;
}

double PairF1(double tp, double fp, double fn) {
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

PoolConfig LeanPool() {
  PoolConfig cfg;
  cfg.lean = true;
  return cfg;
}

double Choose2(double n) { return n * (n - 1) / 2; }

json FeatureJson(const FeatureVec& f) {
  return std::vector<double>(f.values().begin(), f.values().end());
}

}  // namespace

StoryLabeler::StoryLabeler(
    std::span<const DocRepr> corpus,
    const std::set<std::pair<std::string, std::string>>& connections) {
  for (const DocRepr& d : corpus) {
    if (!d.gold_label) {
      throw ValidationError("training document '" + d.id +
                            "' has no gold label");
    }
    gold_.AddLabel(d.id, *d.gold_label);
  }
  for (const auto& [a, b] : connections) gold_.AddConnection(a, b);
  for (const DocRepr& d : corpus) {
    story_of_doc_[d.id] = gold_.Component(*d.gold_label);
  }
}

const std::string& StoryLabeler::StoryOf(const DocRepr& doc) const {
  return StoryOf(doc.id);
}

const std::string& StoryLabeler::StoryOf(const std::string& doc_id) const {
  auto it = story_of_doc_.find(doc_id);
  if (it == story_of_doc_.end()) {
    throw ValidationError("document '" + doc_id + "' has no gold label");
  }
  return it->second;
}

std::pair<double, double> LocalPairF1(std::span<const std::string> a,
                                      std::span<const std::string> b,
                                      const StoryLabeler& labeler) {
  std::map<std::string, double> ca, cb, cu;
  for (const std::string& id : a) {
    ca[labeler.StoryOf(id)] += 1;
    cu[labeler.StoryOf(id)] += 1;
  }
  for (const std::string& id : b) {
    cb[labeler.StoryOf(id)] += 1;
    cu[labeler.StoryOf(id)] += 1;
  }
  const double n = static_cast<double>(a.size() + b.size());

  double tp_merged = 0;
  for (const auto& [s, k] : cu) tp_merged += Choose2(k);
  const double f1_merged = PairF1(tp_merged, Choose2(n) - tp_merged, 0);

  double tp_a = 0, tp_b = 0, cross = 0;
  for (const auto& [s, k] : ca) tp_a += Choose2(k);
  for (const auto& [s, k] : cb) {
    tp_b += Choose2(k);
    auto it = ca.find(s);
    if (it != ca.end()) cross += it->second * k;
  }
  const double fp_sep = Choose2(static_cast<double>(a.size())) - tp_a +
                        Choose2(static_cast<double>(b.size())) - tp_b;
  const double f1_separate = PairF1(tp_a + tp_b, fp_sep, cross);
  return {f1_merged, f1_separate};
}

std::vector<RankPair> GenRankExamples(std::span<const DocRepr> corpus,
                                      const StoryLabeler& labeler,
                                      const TemporalParams& temporal,
                                      std::size_t k_neg, FeatureSet features,
                                      const LinearModel* order_model) {
  ClusterPool pool(LeanPool());
  std::map<std::string, ClusterId> gold_cluster;
  std::vector<RankPair> pairs;
  for (const DocRepr& d : corpus) {
    const std::string& story = labeler.StoryOf(d);
    auto it = gold_cluster.find(story);
    if (it == gold_cluster.end()) {
      gold_cluster.emplace(story, pool.Create(d));
      continue;
    }
    const ClusterId gold = it->second;
    const FeatureVec pos = Project(
        DocClusterFeatures(d, pool.Live(gold), temporal), features);
    std::size_t emitted = 0;
    for (const Ranked& r :
         RankClusters(pool, d, temporal, features, order_model)) {
      if (emitted == k_neg) break;
      if (r.cluster->id == gold) continue;
      pairs.push_back({pos, r.f});
      ++emitted;
    }
    pool.Insert(gold, d);
  }
  return pairs;
}

std::vector<LabeledExample> GenAcceptExamples(std::span<const DocRepr> corpus,
                                              const StoryLabeler& labeler,
                                              const TemporalParams& temporal,
                                              const LinearModel& rank_model,
                                              bool new_story_negatives) {
  const FeatureSet features = FeatureSetForArity(rank_model.arity());
  ClusterPool pool(LeanPool());
  std::map<std::string, ClusterId> gold_cluster;
  std::vector<LabeledExample> out;
  for (const DocRepr& d : corpus) {
    const std::string& story = labeler.StoryOf(d);
    auto it = gold_cluster.find(story);
    const std::vector<Ranked> ranked =
        RankClusters(pool, d, temporal, features, &rank_model);
    if (it == gold_cluster.end()) {
      if (new_story_negatives && !ranked.empty()) {
        out.push_back({ranked.front().f, -1});
      }
      gold_cluster.emplace(story, pool.Create(d));
      continue;
    }
    const ClusterId gold = it->second;
    for (const Ranked& r : ranked) {
      if (r.cluster->id == gold) out.push_back({r.f, +1});
    }
    std::size_t slot = 1;
    if (slot < ranked.size() && ranked[slot].cluster->id == gold) ++slot;
    if (slot < ranked.size()) out.push_back({ranked[slot].f, -1});
    pool.Insert(gold, d);
  }
  return out;
}

std::vector<MergeSample> GenMergeExamples(std::span<const DocRepr> corpus,
                                          const StoryLabeler& labeler,
                                          const TemporalParams& temporal,
                                          const SizeLimits& size_limits,
                                          const LinearModel& rank_model,
                                          const LinearModel& accept_model,
                                          std::size_t top_m) {
  EngineConfig cfg;
  cfg.temporal = temporal;
  cfg.size_limits = size_limits;
  cfg.merge_enabled = false;
  cfg.merge_top_m = top_m;
  cfg.pool.lean = true;
  Engine engine(EngineModels{rank_model, accept_model, std::nullopt}, cfg);

  std::vector<MergeSample> out;
  for (const DocRepr& d : corpus) {
    labeler.StoryOf(d);
    const ClusterId s = engine.Assign(d).cluster_id;
    for (const MergeCandidate& cand : engine.MergeCandidates(s)) {
      MergeSample m;
      m.f = engine.PairFeatures(s, cand.id);
      m.src_id = s;
      m.cand_id = cand.id;
      std::tie(m.f1_merged, m.f1_separate) =
          LocalPairF1(engine.pool().Live(s).members,
                      engine.pool().Live(cand.id).members, labeler);
      m.y = m.f1_merged > m.f1_separate ? 1 : -1;
      if (m.y > 0) engine.Absorb(s, cand.id);
      out.push_back(std::move(m));
    }
  }
  return out;
}

TrainedModels TrainAll(
    std::span<const DocRepr> corpus,
    const std::set<std::pair<std::string, std::string>>& connections,
    const TrainerOptions& options) {
  if (corpus.empty()) throw ValidationError("training corpus is empty");
  options.temporal.Validate();
  options.train.Validate();
  const StoryLabeler labeler(corpus, connections);

  TrainedModels out;
  TrainingReport& rep = out.report;
  rep.documents = corpus.size();

  std::vector<RankPair> pairs = GenRankExamples(
      corpus, labeler, options.temporal, options.k_neg, options.features);
  if (pairs.empty()) {
    throw RuntimeError(
        "rank training produced no pairs: the corpus needs at least two "
        "gold stories live at the same time");
  }
  out.rank = TrainRank(pairs, options.train);
  for (int pass = 1; pass < options.rank_mining_passes; ++pass) {
    pairs = GenRankExamples(corpus, labeler, options.temporal, options.k_neg,
                            options.features, &out.rank);
    out.rank = TrainRank(pairs, options.train);
  }
  rep.rank_pairs = pairs.size();
  rep.rank_objective =
      RankObjective(out.rank, pairs, options.train.l2_lambda);

  const std::vector<LabeledExample> accept_examples =
      GenAcceptExamples(corpus, labeler, options.temporal, out.rank,
                        options.new_story_negatives);
  for (const LabeledExample& e : accept_examples) {
    ++(e.y > 0 ? rep.accept_positive : rep.accept_negative);
  }
  out.accept = TrainBinary(accept_examples, ModelKind::kAccept, options.train);
  rep.accept_objective =
      BinaryObjective(out.accept, accept_examples, options.train.l2_lambda);

  const std::vector<MergeSample> merge_samples = GenMergeExamples(
      corpus, labeler, options.temporal, options.size_limits, out.rank,
      out.accept, options.merge_top_m);
  std::vector<LabeledExample> merge_examples;
  for (const MergeSample& m : merge_samples) {
    merge_examples.push_back({m.f, m.y});
    ++(m.y > 0 ? rep.merge_positive : rep.merge_negative);
  }
  if (rep.merge_positive == 0 || rep.merge_negative == 0) {
    out.merge = LinearModel{ModelKind::kMerge,
                            std::vector<double>(kClusterPairArity, 0.0), -1.0};
    rep.merge_fallback = true;
  } else {
    out.merge = TrainBinary(merge_examples, ModelKind::kMerge, options.train);
  }
  rep.merge_objective =
      BinaryObjective(out.merge, merge_examples, options.train.l2_lambda);
  return out;
}

std::string ReportToJson(const TrainingReport& r) {
  auto ratio = [](std::size_t pos, std::size_t neg) {
    return neg > 0 ? json(static_cast<double>(pos) / static_cast<double>(neg))
                   : json();
  };
  const json j = {
      {"documents", r.documents},
      {"rank", {{"pairs", r.rank_pairs}, {"objective", r.rank_objective}}},
      {"accept",
       {{"positive", r.accept_positive},
        {"negative", r.accept_negative},
        {"positive_to_negative", ratio(r.accept_positive, r.accept_negative)},
        {"objective", r.accept_objective}}},
      {"merge",
       {{"positive", r.merge_positive},
        {"negative", r.merge_negative},
        {"positive_to_negative", ratio(r.merge_positive, r.merge_negative)},
        {"objective", r.merge_objective},
        {"fallback_never_merge", r.merge_fallback}}},
  };
  return j.dump(2) + "\n";
}

std::string RankPairsToJsonl(std::span<const RankPair> pairs) {
  std::string out;
  for (const RankPair& p : pairs) {
    out += json{{"pos", FeatureJson(p.pos)}, {"neg", FeatureJson(p.neg)}}.dump();
    out += '\n';
  }
  return out;
}

std::string LabeledExamplesToJsonl(std::span<const LabeledExample> examples) {
  std::string out;
  for (const LabeledExample& e : examples) {
    out += json{{"f", FeatureJson(e.f)}, {"y", e.y}}.dump();
    out += '\n';
  }
  return out;
}

std::string MergeSamplesToJsonl(std::span<const MergeSample> samples) {
  std::string out;
  for (const MergeSample& m : samples) {
    out += json{{"f", FeatureJson(m.f)},
                {"y", m.y},
                {"src_id", m.src_id},
                {"cand_id", m.cand_id},
                {"f1_merged", m.f1_merged},
                {"f1_separate", m.f1_separate}}
               .dump();
    out += '\n';
  }
  return out;
}

}  // namespace newsclust
