#include "newsclust/pool.h"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "newsclust/error.h"

namespace newsclust {

using nlohmann::json;

void PoolConfig::Validate() const {
  if (archive_horizon_days && *archive_horizon_days <= 0) {
    throw ValidationError("archive horizon must be positive");
  }
}

ClusterPool::ClusterPool(PoolConfig config) : config_(config) {
  config_.Validate();
}

void ClusterPool::Remember(const DocRepr& doc) {
  if (!seen_docs_.insert(doc.id).second) {
    throw ValidationError("document '" + doc.id + "' already in the pool");
  }
  if (!config_.lean) documents_.emplace(doc.id, doc);
}

ClusterId ClusterPool::Create(const DocRepr& doc) {
  if (doc.d2.dim() != doc.d1.dim() || doc.d3.dim() != doc.d1.dim()) {
    throw ValidationError("document '" + doc.id + "' has mixed view dims");
  }
  if (!live_.empty()) CheckSameDim(doc.d1, live_.begin()->second.c1, "create");
  Remember(doc);
  Cluster c;
  c.id = next_id_++;
  c.c1 = doc.d1;
  c.c2 = doc.d2;
  c.c3 = doc.d3;
  c.ts_newest = doc.ts;
  c.ts_oldest = doc.ts;
  c.ts_mean = static_cast<double>(doc.ts.day);
  c.members.push_back(doc.id);
  const ClusterId id = c.id;
  live_.emplace(id, std::move(c));
  return id;
}

Cluster& ClusterPool::MutableLive(ClusterId id) {
  auto it = live_.find(id);
  if (it == live_.end()) {
    throw ValidationError("cluster " + std::to_string(id) +
                          (archived_.count(id) ? " is archived" : " is not live"));
  }
  return it->second;
}

const Cluster& ClusterPool::Live(ClusterId id) const {
  return const_cast<ClusterPool*>(this)->MutableLive(id);
}

void ClusterPool::Insert(ClusterId id, const DocRepr& doc) {
  Cluster& c = MutableLive(id);
  CheckSameDim(c.c1, doc.d1, "insert");
  CheckSameDim(c.c2, doc.d2, "insert");
  CheckSameDim(c.c3, doc.d3, "insert");
  Remember(doc);
  const std::size_t n = c.size();
  c.c1 = CentroidUpdate(c.c1, n, doc.d1);
  c.c2 = CentroidUpdate(c.c2, n, doc.d2);
  c.c3 = CentroidUpdate(c.c3, n, doc.d3);
  c.ts_newest = std::max(c.ts_newest, doc.ts);
  c.ts_oldest = std::min(c.ts_oldest, doc.ts);
  c.ts_mean += (static_cast<double>(doc.ts.day) - c.ts_mean) /
               static_cast<double>(n + 1);
  c.members.push_back(doc.id);
}

void ClusterPool::Merge(ClusterId dst, ClusterId src) {
  if (dst == src) {
    throw ValidationError("cannot merge cluster " + std::to_string(dst) +
                          " into itself");
  }
  Cluster& into = MutableLive(dst);
  Cluster& from = MutableLive(src);
  const std::size_t na = into.size();
  const std::size_t nb = from.size();
  into.c1 = WeightedMean(into.c1, na, from.c1, nb);
  into.c2 = WeightedMean(into.c2, na, from.c2, nb);
  into.c3 = WeightedMean(into.c3, na, from.c3, nb);
  into.ts_newest = std::max(into.ts_newest, from.ts_newest);
  into.ts_oldest = std::min(into.ts_oldest, from.ts_oldest);
  into.ts_mean = (static_cast<double>(na) * into.ts_mean +
                  static_cast<double>(nb) * from.ts_mean) /
                 static_cast<double>(na + nb);
  into.members.insert(into.members.end(), from.members.begin(),
                      from.members.end());
  live_.erase(src);
  merge_log_.push_back({src, dst});
}

std::size_t ClusterPool::ArchiveSweep(DayTimestamp clock) {
  if (!config_.archive_horizon_days) return 0;
  const std::int64_t cutoff = clock.day - *config_.archive_horizon_days;
  std::size_t moved = 0;
  for (auto it = live_.begin(); it != live_.end();) {
    if (it->second.ts_newest.day < cutoff) {
      archived_.insert(live_.extract(it++));
      ++moved;
    } else {
      ++it;
    }
  }
  return moved;
}

std::vector<const Cluster*> ClusterPool::LiveClusters() const {
  std::vector<const Cluster*> out;
  out.reserve(live_.size());
  for (const auto& [id, c] : live_) out.push_back(&c);
  return out;
}

const DocRepr* ClusterPool::FindDocument(const std::string& id) const {
  auto it = documents_.find(id);
  return it == documents_.end() ? nullptr : &it->second;
}

namespace {

json ClusterJson(const Cluster& c, bool archived, bool include_centroids) {
  json j = {{"id", c.id},
            {"status", archived ? "archived" : "live"},
            {"size", c.size()},
            {"members", c.members},
            {"ts_newest", c.ts_newest.day},
            {"ts_oldest", c.ts_oldest.day},
            {"ts_mean", c.ts_mean}};
  if (include_centroids) {
    json cs = json::array();
    for (const DenseVec* v : {&c.c1, &c.c2, &c.c3}) {
      cs.push_back(std::vector<double>(v->values().begin(), v->values().end()));
    }
    j["centroids"] = std::move(cs);
  }
  return j;
}

}  // namespace

std::string ExportPool(const ClusterPool& pool, bool include_centroids) {
  std::vector<std::pair<const Cluster*, bool>> all;
  for (const auto& [id, c] : pool.live()) all.emplace_back(&c, false);
  for (const auto& [id, c] : pool.archived()) all.emplace_back(&c, true);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first->id < b.first->id;
  });
  std::string out;
  for (const auto& [c, archived] : all) {
    out += ClusterJson(*c, archived, include_centroids).dump();
    out += '\n';
  }
  return out;
}

std::vector<ClusterSummary> ParsePoolExport(std::string_view text) {
  std::vector<ClusterSummary> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ClusterSummary s;
      s.id = j.at("id").get<ClusterId>();
      s.archived = j.at("status").get<std::string>() == "archived";
      s.members = j.at("members").get<std::vector<std::string>>();
      s.ts_newest = j.at("ts_newest").get<std::int64_t>();
      s.ts_oldest = j.at("ts_oldest").get<std::int64_t>();
      s.ts_mean = j.at("ts_mean").get<double>();
      if (j.contains("centroids")) {
        s.centroids = j["centroids"].get<std::vector<std::vector<double>>>();
      }
      if (j.at("size").get<std::size_t>() != s.members.size()) {
        throw ValidationError("size does not match member count");
      }
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ValidationError("pool export line " + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  return out;
}

}  // namespace newsclust
