#ifndef NEWSCLUST_DOMAIN_H_
#define NEWSCLUST_DOMAIN_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace newsclust {

inline constexpr std::size_t kDefaultEmbeddingDim = 512;

// A dense embedding. Entries are always finite; construction rejects NaN/Inf.
class DenseVec {
 public:
  DenseVec() = default;
  explicit DenseVec(std::vector<double> values);

  static DenseVec Zeros(std::size_t dim);

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const DenseVec&, const DenseVec&) = default;

 private:
  std::vector<double> values_;
};

// Returns the mean of n_before vectors (whose mean is `centroid`) plus `x`,
// computed as c + (x - c) / (n_before + 1). `centroid` is ignored when
// n_before == 0. Throws ValidationError on a dimension mismatch.
DenseVec CentroidUpdate(const DenseVec& centroid, std::size_t n_before,
                        const DenseVec& x);

// Size-weighted mean of two centroids.
DenseVec WeightedMean(const DenseVec& a, std::size_t weight_a,
                      const DenseVec& b, std::size_t weight_b);

// Unweighted arithmetic mean of a nonempty set of equal-dimension vectors.
DenseVec Mean(std::span<const DenseVec> vectors);

void CheckSameDim(const DenseVec& a, const DenseVec& b, std::string_view what);

// A UTC instant with second resolution.
struct Instant {
  std::int64_t epoch_seconds = 0;
  friend auto operator<=>(const Instant&, const Instant&) = default;
};

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.fff]]" with an optional "Z" or
// "+HH:MM"/"-HH:MM" offset (a space may replace the 'T'). Throws
// ValidationError on anything else.
Instant ParseIso8601(std::string_view text);
std::string FormatIso8601(Instant instant);

// Day-level timestamp: floor(epoch_seconds / 86400).
struct DayTimestamp {
  std::int64_t day = 0;

  static DayTimestamp FromInstant(Instant instant);
  friend auto operator<=>(const DayTimestamp&, const DayTimestamp&) = default;
};

// A raw article before embedding. `language` is carried as metadata only.
struct DocumentInput {
  std::string id;
  std::string language;
  Instant timestamp;
  std::optional<std::string> title;
  std::vector<std::string> paragraphs;  // paragraphs[0] is the first paragraph
  std::optional<std::string> gold_label;

  friend bool operator==(const DocumentInput&, const DocumentInput&) = default;
};

// The three dense views of a document plus its day timestamp.
struct DocRepr {
  std::string id;
  DenseVec d1;  // body + title
  DenseVec d2;  // first paragraph
  DenseVec d3;  // first paragraph + title
  DayTimestamp ts;
  std::optional<std::string> gold_label;

  std::size_t dim() const { return d1.dim(); }
};

using ClusterId = std::uint64_t;

struct Cluster {
  ClusterId id = 0;
  DenseVec c1;  // running mean of members' d1
  DenseVec c2;  // running mean of members' d2
  DenseVec c3;  // running mean of members' d3
  DayTimestamp ts_newest;
  DayTimestamp ts_oldest;
  double ts_mean = 0.0;
  std::vector<std::string> members;

  std::size_t size() const { return members.size(); }
  std::size_t dim() const { return c1.dim(); }
};

// Similarity features in canonical order (see features.h).
class FeatureVec {
 public:
  FeatureVec() = default;
  explicit FeatureVec(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t arity() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  friend bool operator==(const FeatureVec&, const FeatureVec&) = default;

 private:
  std::vector<double> values_;
};

enum class ModelKind { kRank, kAccept, kMerge };

std::string_view ToString(ModelKind kind);
ModelKind ParseModelKind(std::string_view text);

// score = dot(weights, f) + bias. Rank models always carry bias 0.
struct LinearModel {
  ModelKind kind = ModelKind::kRank;
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t arity() const { return weights.size(); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

// Throws ValidationError unless the model satisfies its kind's invariants.
void Validate(const LinearModel& model);

}  // namespace newsclust

#endif  // NEWSCLUST_DOMAIN_H_
