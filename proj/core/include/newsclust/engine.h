#ifndef NEWSCLUST_ENGINE_H_
#define NEWSCLUST_ENGINE_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsclust/domain.h"
#include "newsclust/features.h"
#include "newsclust/pool.h"

namespace newsclust {

struct EngineConfig {
  TemporalParams temporal;
  SizeLimits size_limits = SizeLimits::Default();
  bool merge_enabled = true;
  // Evaluate the merge model on every other live cluster instead of the
  // top `merge_top_m` by rank score.
  bool merge_eval_all = false;
  std::size_t merge_top_m = 5;
  PoolConfig pool;
};

struct EngineModels {
  LinearModel rank;
  LinearModel accept;
  std::optional<LinearModel> merge;  // required when merging is enabled
};

struct AssignmentRecord {
  std::string doc_id;
  ClusterId cluster_id = 0;
  std::optional<double> rank_score;    // unset when the pool was empty
  std::optional<double> accept_score;  // unset when the pool was empty
  bool created = false;
  std::vector<MergeLogEntry> merges;

  friend bool operator==(const AssignmentRecord&,
                         const AssignmentRecord&) = default;
};

struct MergeCandidate {
  ClusterId id = 0;
  double rank_score = 0.0;
};

// The online loop: rank every live cluster, accept into the best one or open
// a new cluster, then try to absorb similar clusters into the receiver.
class Engine {
 public:
  // Throws ValidationError if the models do not fit the configuration.
  Engine(EngineModels models, EngineConfig config);

  AssignmentRecord ProcessDocument(const DocRepr& doc);

  // Rank and accept-or-create only; `merges` is left empty.
  AssignmentRecord Assign(const DocRepr& doc);

  // Absorbs positively scored candidates into `receiver`, best first,
  // re-scoring the remainder after every absorption.
  std::vector<MergeLogEntry> MergeStep(ClusterId receiver);

  // Other live clusters ordered by rank score of the pair features
  // (descending, ties by lower id); truncated to merge_top_m unless
  // merge_eval_all is set.
  std::vector<MergeCandidate> MergeCandidates(ClusterId receiver) const;
  FeatureVec PairFeatures(ClusterId receiver, ClusterId candidate) const;
  MergeLogEntry Absorb(ClusterId receiver, ClusterId candidate);

  FeatureSet feature_set() const { return feature_set_; }
  const EngineModels& models() const { return models_; }
  const EngineConfig& config() const { return config_; }
  const ClusterPool& pool() const { return pool_; }

 private:
  EngineModels models_;
  EngineConfig config_;
  FeatureSet feature_set_;
  ClusterPool pool_;
  std::optional<DayTimestamp> clock_;
};

std::vector<AssignmentRecord> RunStream(Engine& engine,
                                        std::span<const DocRepr> stream);

// One JSON object per line:
//   {"doc_id":..,"cluster_id":..,"rank_score":..|null,"accept_score":..|null,
//    "created":..,"merges":[[retired,into],..]}
std::string AssignmentsToJsonl(std::span<const AssignmentRecord> records);
std::vector<AssignmentRecord> ParseAssignments(std::string_view text);

// Final cluster of every document after following the merge log.
std::map<std::string, ClusterId> ResolveFinalClusters(
    std::span<const AssignmentRecord> records);

}  // namespace newsclust

#endif  // NEWSCLUST_ENGINE_H_
