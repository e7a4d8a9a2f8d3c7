#ifndef NEWSCLUST_POOL_H_
#define NEWSCLUST_POOL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "newsclust/domain.h"

namespace newsclust {

struct PoolConfig {
  // Clusters whose newest document is more than this many days behind the
  // stream clock leave the live set. Unset disables archiving.
  std::optional<std::int64_t> archive_horizon_days;
  // Drop per-document vectors once centroids are updated.
  bool lean = false;

  void Validate() const;
};

struct MergeLogEntry {
  ClusterId retired = 0;
  ClusterId into = 0;
  friend bool operator==(const MergeLogEntry&, const MergeLogEntry&) = default;
};

// Owns every cluster of a run. Single writer: callers serialize mutations;
// pointers returned by LiveClusters() stay valid until the next mutation.
class ClusterPool {
 public:
  explicit ClusterPool(PoolConfig config = {});

  ClusterId Create(const DocRepr& doc);
  void Insert(ClusterId id, const DocRepr& doc);
  // Folds `src` into `dst` and retires `src`.
  void Merge(ClusterId dst, ClusterId src);
  std::size_t ArchiveSweep(DayTimestamp clock);

  // Ascending cluster id.
  std::vector<const Cluster*> LiveClusters() const;
  const Cluster& Live(ClusterId id) const;
  bool IsLive(ClusterId id) const { return live_.count(id) != 0; }

  const std::map<ClusterId, Cluster>& live() const { return live_; }
  const std::map<ClusterId, Cluster>& archived() const { return archived_; }
  const std::vector<MergeLogEntry>& merge_log() const { return merge_log_; }
  std::size_t documents_processed() const { return seen_docs_.size(); }
  const PoolConfig& config() const { return config_; }

  // Retained document, or nullptr in lean mode / for unknown ids.
  const DocRepr* FindDocument(const std::string& id) const;

 private:
  Cluster& MutableLive(ClusterId id);
  void Remember(const DocRepr& doc);

  PoolConfig config_;
  ClusterId next_id_ = 0;
  std::map<ClusterId, Cluster> live_;
  std::map<ClusterId, Cluster> archived_;
  std::vector<MergeLogEntry> merge_log_;
  std::unordered_set<std::string> seen_docs_;
  std::unordered_map<std::string, DocRepr> documents_;
};

// One exported cluster (a line of the pool JSON-lines file).
struct ClusterSummary {
  ClusterId id = 0;
  bool archived = false;
  std::vector<std::string> members;
  std::int64_t ts_newest = 0;
  std::int64_t ts_oldest = 0;
  double ts_mean = 0.0;
  std::optional<std::vector<std::vector<double>>> centroids;  // c1, c2, c3
};

// JSON-lines, one cluster per line in ascending id order, live and archived:
//   {"id":..,"status":"live"|"archived","size":..,"members":[..],
//    "ts_newest":..,"ts_oldest":..,"ts_mean":..[,"centroids":[[..],[..],[..]]]}
std::string ExportPool(const ClusterPool& pool, bool include_centroids);
std::vector<ClusterSummary> ParsePoolExport(std::string_view text);

}  // namespace newsclust

#endif  // NEWSCLUST_POOL_H_
