#ifndef NEWSCLUST_TRAINER_H_
#define NEWSCLUST_TRAINER_H_

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsclust/domain.h"
#include "newsclust/eval.h"
#include "newsclust/features.h"
#include "newsclust/models.h"

namespace newsclust {

// Maps each training document to its story: the connected component of its
// gold label under the positive connections.
class StoryLabeler {
 public:
  StoryLabeler(std::span<const DocRepr> corpus,
               const std::set<std::pair<std::string, std::string>>& connections);

  // Throws ValidationError for a document without a gold label.
  const std::string& StoryOf(const DocRepr& doc) const;
  const std::string& StoryOf(const std::string& doc_id) const;

 private:
  GoldStandard gold_;
  std::unordered_map<std::string, std::string> story_of_doc_;
};

struct MergeSample {
  FeatureVec f;  // 11 features
  int y = -1;
  ClusterId src_id = 0;
  ClusterId cand_id = 0;
  double f1_merged = 0.0;
  double f1_separate = 0.0;
};

// Pairwise F1 over the union of two clusters' documents, with the union
// treated as one cluster (first) or as the two given clusters (second).
std::pair<double, double> LocalPairF1(std::span<const std::string> a,
                                      std::span<const std::string> b,
                                      const StoryLabeler& labeler);

// Teacher-forced replay. Each document whose story already has a cluster
// yields (gold features, negative features) pairs against the top `k_neg`
// other clusters, ordered by `order_model` or, without one, by cos(d1, c1).
// The document then joins its gold cluster.
std::vector<RankPair> GenRankExamples(std::span<const DocRepr> corpus,
                                      const StoryLabeler& labeler,
                                      const TemporalParams& temporal,
                                      std::size_t k_neg, FeatureSet features,
                                      const LinearModel* order_model = nullptr);

// Teacher-forced replay. +1: gold-cluster features. -1: the cluster in
// second rank position (skipping the gold cluster). When the story has no
// cluster yet and `new_story_negatives` is set, the top-ranked cluster
// becomes the negative instead.
std::vector<LabeledExample> GenAcceptExamples(std::span<const DocRepr> corpus,
                                              const StoryLabeler& labeler,
                                              const TemporalParams& temporal,
                                              const LinearModel& rank_model,
                                              bool new_story_negatives = true);

// Runs the real engine (rank + accept) over the stream. After each
// assignment the receiving cluster is paired with its top `top_m` ranked
// candidates; a pair is +1 when merging raises local pairwise F1, and +1
// pairs are merged before the stream continues.
std::vector<MergeSample> GenMergeExamples(std::span<const DocRepr> corpus,
                                          const StoryLabeler& labeler,
                                          const TemporalParams& temporal,
                                          const SizeLimits& size_limits,
                                          const LinearModel& rank_model,
                                          const LinearModel& accept_model,
                                          std::size_t top_m = 5);

struct TrainerOptions {
  TemporalParams temporal;
  SizeLimits size_limits = SizeLimits::Default();
  TrainConfig train;
  FeatureSet features = FeatureSet::kEight;
  std::size_t k_neg = 20;
  std::size_t merge_top_m = 5;
  // 2 re-mines rank negatives with the first-pass model and retrains.
  int rank_mining_passes = 1;
  bool new_story_negatives = true;
};

struct TrainingReport {
  std::size_t documents = 0;
  std::size_t rank_pairs = 0;
  std::size_t accept_positive = 0;
  std::size_t accept_negative = 0;
  std::size_t merge_positive = 0;
  std::size_t merge_negative = 0;
  double rank_objective = 0.0;
  double accept_objective = 0.0;
  double merge_objective = 0.0;
  // Set when the merge examples held a single class and a never-merge model
  // was emitted instead of a trained one.
  bool merge_fallback = false;
};

struct TrainedModels {
  LinearModel rank;
  LinearModel accept;
  LinearModel merge;
  TrainingReport report;
};

TrainedModels TrainAll(
    std::span<const DocRepr> corpus,
    const std::set<std::pair<std::string, std::string>>& connections,
    const TrainerOptions& options);

std::string ReportToJson(const TrainingReport& report);

// JSON-lines exports for offline inspection.
std::string RankPairsToJsonl(std::span<const RankPair> pairs);
std::string LabeledExamplesToJsonl(std::span<const LabeledExample> examples);
std::string MergeSamplesToJsonl(std::span<const MergeSample> samples);

}  // namespace newsclust

#endif  // NEWSCLUST_TRAINER_H_
