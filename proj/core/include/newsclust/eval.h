#ifndef NEWSCLUST_EVAL_H_
#define NEWSCLUST_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsclust/domain.h"

namespace newsclust {

// Gold story labels per document plus positive crosslingual connections
// between labels.
class GoldStandard {
 public:
  void AddLabel(const std::string& doc_id, const std::string& label,
                std::optional<std::string> language = std::nullopt);
  void AddConnection(const std::string& a, const std::string& b);

  // Throws ValidationError if a connection names an unknown label.
  void Validate() const;

  const std::string* LabelOf(const std::string& doc_id) const;
  const std::string* LanguageOf(const std::string& doc_id) const;

  // l1 == l2, or {l1, l2} is a direct connection. With `closure`, labels in
  // the same connected component also match.
  bool SameStory(const std::string& l1, const std::string& l2,
                 bool closure = false) const;

  // Canonical representative (lexicographically smallest label) of the
  // connected component containing `label`.
  const std::string& Component(const std::string& label) const;

  const std::map<std::string, std::string>& labels() const { return labels_; }
  const std::set<std::pair<std::string, std::string>>& connections() const {
    return connections_;
  }

 private:
  void RebuildComponents() const;

  std::map<std::string, std::string> labels_;
  std::unordered_map<std::string, std::string> languages_;
  std::set<std::string> label_set_;
  std::set<std::pair<std::string, std::string>> connections_;
  mutable bool components_dirty_ = true;
  mutable std::unordered_map<std::string, std::string> component_;
};

struct PrecisionRecall {
  double p = 0.0;
  double r = 0.0;
  double f1 = 0.0;
};

// Predicted clustering: document id -> cluster id.
using Prediction = std::map<std::string, ClusterId>;

// Pairwise precision/recall over unordered document pairs; a pair is
// positive when SameStory holds for the two labels. Zero denominators give 0.
// Every labeled document must appear in `pred`.
PrecisionRecall StandardF1(const Prediction& pred, const GoldStandard& gold,
                           bool closure = false);

// BCubed with gold identity = connected component of labels.
PrecisionRecall BCubed(const Prediction& pred, const GoldStandard& gold);

struct EvalOptions {
  bool closure = false;
  std::optional<std::string> language;
};

struct EvalReport {
  double std_p = 0.0, std_r = 0.0, std_f1 = 0.0;
  double bcubed_p = 0.0, bcubed_r = 0.0, bcubed_f1 = 0.0;
  std::size_t n_docs = 0;
  std::size_t n_clusters = 0;
};

// Restricts to labeled documents (of `options.language`, if set), then
// computes both metrics. Unlabeled predicted documents are ignored.
EvalReport Evaluate(const Prediction& pred, const GoldStandard& gold,
                    const EvalOptions& options = {});

std::string ReportToJson(const EvalReport& report, const EvalOptions& options);
std::string ReportToTable(const EvalReport& report);

// Labels: JSON-lines with "id" and "cluster" (or "label"), optional "lang";
// lines whose label is null are skipped. A corpus file qualifies.
// Connections: one "labelA<TAB>labelB" pair per line.
GoldStandard LoadGoldStandard(
    const std::filesystem::path& labels_path,
    const std::optional<std::filesystem::path>& connections_path);
std::vector<std::pair<std::string, std::string>> ParseConnections(
    std::string_view text);
std::string FormatConnections(
    const std::set<std::pair<std::string, std::string>>& connections);

}  // namespace newsclust

#endif  // NEWSCLUST_EVAL_H_
