#include "newsclust/engine.h"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "newsclust/error.h"
#include "newsclust/models.h"

namespace newsclust {

using nlohmann::json;

Engine::Engine(EngineModels models, EngineConfig config)
    : models_(std::move(models)),
      config_(std::move(config)),
      feature_set_(FeatureSet::kEight),
      pool_(config_.pool) {
  config_.temporal.Validate();
  if (models_.rank.kind != ModelKind::kRank) {
    throw ValidationError("engine: rank slot holds a non-rank model");
  }
  if (models_.accept.kind != ModelKind::kAccept) {
    throw ValidationError("engine: accept slot holds a non-accept model");
  }
  Validate(models_.rank);
  Validate(models_.accept);
  feature_set_ = FeatureSetForArity(models_.rank.arity());
  CheckArity(models_.accept, Arity(feature_set_), "engine");
  if (config_.merge_enabled) {
    if (!models_.merge) {
      throw ValidationError("engine: merging enabled without a merge model");
    }
    if (models_.merge->kind != ModelKind::kMerge) {
      throw ValidationError("engine: merge slot holds a non-merge model");
    }
    Validate(*models_.merge);
    CheckArity(*models_.merge, kClusterPairArity, "engine");
    if (config_.merge_top_m == 0 && !config_.merge_eval_all) {
      throw ValidationError("engine: merge_top_m must be positive");
    }
  }
}

AssignmentRecord Engine::Assign(const DocRepr& doc) {
  if (config_.pool.archive_horizon_days) {
    clock_ = clock_ ? std::max(*clock_, doc.ts) : doc.ts;
    pool_.ArchiveSweep(*clock_);
  }
  AssignmentRecord rec;
  rec.doc_id = doc.id;

  const Cluster* best = nullptr;
  FeatureVec best_features;
  double best_score = 0.0;
  for (const Cluster* c : pool_.LiveClusters()) {
    FeatureVec f =
        Project(DocClusterFeatures(doc, *c, config_.temporal), feature_set_);
    const double s = Score(models_.rank, f);
    // Ascending id scan, so strict '>' keeps the lowest id on ties.
    if (best == nullptr || s > best_score) {
      best = c;
      best_score = s;
      best_features = std::move(f);
    }
  }

  if (best == nullptr) {
    rec.cluster_id = pool_.Create(doc);
    rec.created = true;
    return rec;
  }
  rec.rank_score = best_score;
  rec.accept_score = Score(models_.accept, best_features);
  if (*rec.accept_score > 0.0) {
    rec.cluster_id = best->id;
    pool_.Insert(best->id, doc);
  } else {
    rec.cluster_id = pool_.Create(doc);
    rec.created = true;
  }
  return rec;
}

AssignmentRecord Engine::ProcessDocument(const DocRepr& doc) {
  AssignmentRecord rec = Assign(doc);
  if (config_.merge_enabled) rec.merges = MergeStep(rec.cluster_id);
  return rec;
}

FeatureVec Engine::PairFeatures(ClusterId receiver, ClusterId candidate) const {
  return ClusterPairFeatures(pool_.Live(receiver), pool_.Live(candidate),
                             config_.temporal, config_.size_limits,
                             models_.accept);
}

std::vector<MergeCandidate> Engine::MergeCandidates(ClusterId receiver) const {
  const Cluster& src = pool_.Live(receiver);
  std::vector<MergeCandidate> out;
  for (const Cluster* c : pool_.LiveClusters()) {
    if (c->id == receiver) continue;
    const FeatureVec base = ClusterPairFeatures(
        src, *c, config_.temporal, config_.size_limits, models_.accept);
    const FeatureVec first8(std::vector<double>(
        base.values().begin(), base.values().begin() + kDocClusterArity));
    out.push_back({c->id, Score(models_.rank, Project(first8, feature_set_))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const MergeCandidate& a, const MergeCandidate& b) {
                     return a.rank_score > b.rank_score;
                   });
  if (!config_.merge_eval_all && out.size() > config_.merge_top_m) {
    out.resize(config_.merge_top_m);
  }
  return out;
}

MergeLogEntry Engine::Absorb(ClusterId receiver, ClusterId candidate) {
  pool_.Merge(receiver, candidate);
  return pool_.merge_log().back();
}

std::vector<MergeLogEntry> Engine::MergeStep(ClusterId receiver) {
  if (!models_.merge) {
    throw ValidationError("engine: merge step without a merge model");
  }
  std::vector<MergeLogEntry> merges;
  std::vector<MergeCandidate> remaining = MergeCandidates(receiver);
  while (!remaining.empty()) {
    auto best = remaining.end();
    double best_score = 0.0;
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const double s = Score(*models_.merge, PairFeatures(receiver, it->id));
      if (s > 0.0 && (best == remaining.end() || s > best_score)) {
        best = it;
        best_score = s;
      }
    }
    if (best == remaining.end()) break;
    merges.push_back(Absorb(receiver, best->id));
    remaining.erase(best);
  }
  return merges;
}

std::vector<AssignmentRecord> RunStream(Engine& engine,
                                        std::span<const DocRepr> stream) {
  std::vector<AssignmentRecord> out;
  out.reserve(stream.size());
  for (const DocRepr& d : stream) out.push_back(engine.ProcessDocument(d));
  return out;
}

std::string AssignmentsToJsonl(std::span<const AssignmentRecord> records) {
  std::string out;
  for (const AssignmentRecord& r : records) {
    json merges = json::array();
    for (const MergeLogEntry& m : r.merges) merges.push_back({m.retired, m.into});
    json j = {{"doc_id", r.doc_id},
              {"cluster_id", r.cluster_id},
              {"rank_score", r.rank_score ? json(*r.rank_score) : json()},
              {"accept_score", r.accept_score ? json(*r.accept_score) : json()},
              {"created", r.created},
              {"merges", std::move(merges)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<AssignmentRecord> ParseAssignments(std::string_view text) {
  std::vector<AssignmentRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AssignmentRecord r;
      r.doc_id = j.at("doc_id").get<std::string>();
      r.cluster_id = j.at("cluster_id").get<ClusterId>();
      if (j.contains("rank_score") && !j["rank_score"].is_null()) {
        r.rank_score = j["rank_score"].get<double>();
      }
      if (j.contains("accept_score") && !j["accept_score"].is_null()) {
        r.accept_score = j["accept_score"].get<double>();
      }
      r.created = j.value("created", false);
      if (j.contains("merges")) {
        for (const json& m : j["merges"]) {
          r.merges.push_back({m.at(0).get<ClusterId>(), m.at(1).get<ClusterId>()});
        }
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ValidationError("assignments line " + std::to_string(line_no) +
                            ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, ClusterId> ResolveFinalClusters(
    std::span<const AssignmentRecord> records) {
  std::unordered_map<ClusterId, ClusterId> retired_into;
  for (const AssignmentRecord& r : records) {
    for (const MergeLogEntry& m : r.merges) {
      if (m.retired == m.into || retired_into.count(m.retired)) {
        throw ValidationError("merge log retires cluster " +
                              std::to_string(m.retired) + " twice");
      }
      retired_into[m.retired] = m.into;
    }
  }
  std::map<std::string, ClusterId> out;
  for (const AssignmentRecord& r : records) {
    ClusterId id = r.cluster_id;
    // Chains are acyclic: a retired id never receives documents again.
    for (std::size_t hops = 0; retired_into.count(id); ++hops) {
      if (hops > retired_into.size()) {
        throw ValidationError("merge log contains a cycle");
      }
      id = retired_into[id];
    }
    if (!out.emplace(r.doc_id, id).second) {
      throw ValidationError("document '" + r.doc_id + "' assigned twice");
    }
  }
  return out;
}

}  // namespace newsclust
