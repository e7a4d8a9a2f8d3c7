#include "newsclust/eval.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "file_util.h"
#include "json.hpp"
#include "newsclust/error.h"

namespace newsclust {
namespace {

using nlohmann::json;

double Harmonic(double p, double r) {
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double Ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double Pairs(std::size_t n) {
  return static_cast<double>(n) * static_cast<double>(n - (n > 0)) / 2.0;
}

std::pair<std::string, std::string> Ordered(const std::string& a,
                                            const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

// Labeled documents grouped by predicted cluster.
std::map<ClusterId, std::vector<const std::string*>> GroupByCluster(
    const Prediction& pred, const GoldStandard& gold) {
  std::map<ClusterId, std::vector<const std::string*>> groups;
  std::size_t missing = 0;
  std::string example;
  for (const auto& [doc, label] : gold.labels()) {
    auto it = pred.find(doc);
    if (it == pred.end()) {
      if (missing++ == 0) example = doc;
      continue;
    }
    groups[it->second].push_back(&label);
  }
  if (missing > 0) {
    throw ValidationError(std::to_string(missing) +
                          " labeled documents have no prediction (e.g. '" +
                          example + "')");
  }
  return groups;
}

}  // namespace

void GoldStandard::AddLabel(const std::string& doc_id, const std::string& label,
                            std::optional<std::string> language) {
  auto [it, inserted] = labels_.emplace(doc_id, label);
  if (!inserted && it->second != label) {
    throw ValidationError("document '" + doc_id + "' has two gold labels");
  }
  label_set_.insert(label);
  if (language) languages_[doc_id] = *language;
  components_dirty_ = true;
}

void GoldStandard::AddConnection(const std::string& a, const std::string& b) {
  if (a == b) return;
  connections_.insert(Ordered(a, b));
  components_dirty_ = true;
}

void GoldStandard::Validate() const {
  for (const auto& [a, b] : connections_) {
    for (const std::string* l : {&a, &b}) {
      if (!label_set_.count(*l)) {
        throw ValidationError("connection references unknown label '" + *l +
                              "'");
      }
    }
  }
}

const std::string* GoldStandard::LabelOf(const std::string& doc_id) const {
  auto it = labels_.find(doc_id);
  return it == labels_.end() ? nullptr : &it->second;
}

const std::string* GoldStandard::LanguageOf(const std::string& doc_id) const {
  auto it = languages_.find(doc_id);
  return it == languages_.end() ? nullptr : &it->second;
}

void GoldStandard::RebuildComponents() const {
  std::map<std::string, std::vector<std::string>> adj;
  for (const std::string& l : label_set_) adj[l];
  for (const auto& [a, b] : connections_) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  component_.clear();
  // std::map iterates in label order, so each root is its component's
  // smallest label.
  for (const auto& [root, unused] : adj) {
    if (component_.count(root)) continue;
    std::vector<std::string> stack{root};
    component_[root] = root;
    while (!stack.empty()) {
      const std::string cur = stack.back();
      stack.pop_back();
      for (const std::string& next : adj[cur]) {
        if (component_.emplace(next, root).second) stack.push_back(next);
      }
    }
  }
  components_dirty_ = false;
}

const std::string& GoldStandard::Component(const std::string& label) const {
  if (components_dirty_) RebuildComponents();
  auto it = component_.find(label);
  if (it == component_.end()) {
    throw ValidationError("unknown gold label '" + label + "'");
  }
  return it->second;
}

bool GoldStandard::SameStory(const std::string& l1, const std::string& l2,
                             bool closure) const {
  if (l1 == l2) return true;
  if (closure) return Component(l1) == Component(l2);
  return connections_.count(Ordered(l1, l2)) != 0;
}

PrecisionRecall StandardF1(const Prediction& pred, const GoldStandard& gold,
                           bool closure) {
  const auto groups = GroupByCluster(pred, gold);

  // Story key per label: the label itself, or its component under closure.
  auto key = [&](const std::string& l) -> const std::string& {
    return closure ? gold.Component(l) : l;
  };
  std::unordered_map<std::string, std::vector<std::string>> neighbors;
  if (!closure) {
    for (const auto& [a, b] : gold.connections()) {
      neighbors[a].push_back(b);
      neighbors[b].push_back(a);
    }
  }

  double same_cluster = 0.0, tp = 0.0;
  std::map<std::string, std::size_t> totals;
  for (const auto& [cid, labels] : groups) {
    std::map<std::string, std::size_t> counts;
    for (const std::string* l : labels) ++counts[key(*l)];
    same_cluster += Pairs(labels.size());
    for (const auto& [l, n] : counts) {
      tp += Pairs(n);
      totals[l] += n;
      auto nb = neighbors.find(l);
      if (nb == neighbors.end()) continue;
      for (const std::string& other : nb->second) {
        auto oc = counts.find(other);
        if (other > l && oc != counts.end()) {
          tp += static_cast<double>(n) * static_cast<double>(oc->second);
        }
      }
    }
  }
  double same_story = 0.0;
  for (const auto& [l, n] : totals) same_story += Pairs(n);
  if (!closure) {
    for (const auto& [a, b] : gold.connections()) {
      auto ia = totals.find(a), ib = totals.find(b);
      if (ia != totals.end() && ib != totals.end()) {
        same_story += static_cast<double>(ia->second) *
                      static_cast<double>(ib->second);
      }
    }
  }
  PrecisionRecall out;
  out.p = Ratio(tp, same_cluster);
  out.r = Ratio(tp, same_story);
  out.f1 = Harmonic(out.p, out.r);
  return out;
}

PrecisionRecall BCubed(const Prediction& pred, const GoldStandard& gold) {
  const auto groups = GroupByCluster(pred, gold);
  std::map<std::string, std::size_t> comp_sizes;
  std::size_t n = 0;
  for (const auto& [cid, labels] : groups) {
    for (const std::string* l : labels) ++comp_sizes[gold.Component(*l)];
    n += labels.size();
  }
  double p_sum = 0.0, r_sum = 0.0;
  for (const auto& [cid, labels] : groups) {
    std::map<std::string, std::size_t> counts;
    for (const std::string* l : labels) ++counts[gold.Component(*l)];
    for (const auto& [comp, k] : counts) {
      const double kk = static_cast<double>(k) * static_cast<double>(k);
      p_sum += kk / static_cast<double>(labels.size());
      r_sum += kk / static_cast<double>(comp_sizes[comp]);
    }
  }
  PrecisionRecall out;
  out.p = Ratio(p_sum, static_cast<double>(n));
  out.r = Ratio(r_sum, static_cast<double>(n));
  out.f1 = Harmonic(out.p, out.r);
  return out;
}

EvalReport Evaluate(const Prediction& pred, const GoldStandard& gold,
                    const EvalOptions& options) {
  GoldStandard scoped;
  for (const auto& [doc, label] : gold.labels()) {
    const std::string* lang = gold.LanguageOf(doc);
    if (options.language && (lang == nullptr || *lang != *options.language)) {
      continue;
    }
    scoped.AddLabel(doc, label,
                    lang ? std::optional<std::string>(*lang) : std::nullopt);
  }
  for (const auto& [a, b] : gold.connections()) scoped.AddConnection(a, b);

  Prediction restricted;
  for (const auto& [doc, label] : scoped.labels()) {
    auto it = pred.find(doc);
    if (it != pred.end()) restricted.emplace(doc, it->second);
  }

  EvalReport report;
  const PrecisionRecall std_prf = StandardF1(restricted, scoped, options.closure);
  const PrecisionRecall bc = BCubed(restricted, scoped);
  report.std_p = std_prf.p;
  report.std_r = std_prf.r;
  report.std_f1 = std_prf.f1;
  report.bcubed_p = bc.p;
  report.bcubed_r = bc.r;
  report.bcubed_f1 = bc.f1;
  report.n_docs = restricted.size();
  std::set<ClusterId> clusters;
  for (const auto& [doc, cid] : restricted) clusters.insert(cid);
  report.n_clusters = clusters.size();
  return report;
}

std::string ReportToJson(const EvalReport& r, const EvalOptions& options) {
  json j = {
      {"std_p", r.std_p},
      {"std_r", r.std_r},
      {"std_f1", r.std_f1},
      {"bcubed_p", r.bcubed_p},
      {"bcubed_r", r.bcubed_r},
      {"bcubed_f1", r.bcubed_f1},
      {"n_docs", r.n_docs},
      {"n_clusters", r.n_clusters},
      {"closure", options.closure},
      {"language", options.language ? json(*options.language) : json()},
      {"zero_denominator", "metrics with an empty denominator are reported as 0"},
  };
  return j.dump(2) + "\n";
}

std::string ReportToTable(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%-8s %-8s %-8s | %-8s %-8s %-8s | %s\n"
                "%-8s %-8s %-8s | %-8s %-8s %-8s | %s\n"
                "%-8.2f %-8.2f %-8.2f | %-8.2f %-8.2f %-8.2f | %zu\n",
                "BCubed", "", "", "Standard", "", "", "Clusters", "F1", "P",
                "R", "F1", "P", "R", "", 100 * r.bcubed_f1, 100 * r.bcubed_p,
                100 * r.bcubed_r, 100 * r.std_f1, 100 * r.std_p,
                100 * r.std_r, r.n_clusters);
  return buf;
}

std::vector<std::pair<std::string, std::string>> ParseConnections(
    std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError("connections line " + std::to_string(line_no) +
                            ": expected 'labelA<TAB>labelB'");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

std::string FormatConnections(
    const std::set<std::pair<std::string, std::string>>& connections) {
  std::string out;
  for (const auto& [a, b] : connections) out += a + "\t" + b + "\n";
  return out;
}

GoldStandard LoadGoldStandard(
    const std::filesystem::path& labels_path,
    const std::optional<std::filesystem::path>& connections_path) {
  GoldStandard gold;
  std::istringstream in{internal::ReadFile(labels_path)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const json* label = nullptr;
      if (j.contains("cluster")) label = &j["cluster"];
      else if (j.contains("label")) label = &j["label"];
      if (label == nullptr || label->is_null()) continue;
      std::optional<std::string> lang;
      if (j.contains("lang") && j["lang"].is_string()) {
        lang = j["lang"].get<std::string>();
      }
      gold.AddLabel(j.at("id").get<std::string>(),
                    label->is_string() ? label->get<std::string>()
                                       : label->dump(),
                    lang);
    } catch (const std::exception& e) {
      throw ValidationError(labels_path.string() + " line " +
                            std::to_string(line_no) + ": " + e.what());
    }
  }
  if (connections_path) {
    for (const auto& [a, b] :
         ParseConnections(internal::ReadFile(*connections_path))) {
      gold.AddConnection(a, b);
    }
  }
  gold.Validate();
  return gold;
}

}  // namespace newsclust
