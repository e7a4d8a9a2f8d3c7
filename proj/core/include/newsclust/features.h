#ifndef NEWSCLUST_FEATURES_H_
#define NEWSCLUST_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "newsclust/domain.h"

namespace newsclust {

// Gaussian kernel parameters over day differences.
struct TemporalParams {
  double mu = 0.0;
  double sigma = 3.0;

  void Validate() const;
};

// Strictly increasing positive cluster-size thresholds.
class SizeLimits {
 public:
  explicit SizeLimits(std::vector<std::int64_t> limits);
  static SizeLimits Default();  // {1, 2, 3, 5, 10, 20, 50}

  std::span<const std::int64_t> limits() const { return limits_; }

 private:
  std::vector<std::int64_t> limits_;
};

// Canonical document-cluster feature layout.
//   0 cos(d1, c1)   1 cos(d2, c2)   2 cos(d3, c3)
//   3 cos(d2, c1)   4 cos(d3, c1)
//   5 ts(d, newest) 6 ts(d, oldest) 7 ts(d, mean)
// Cluster-pair vectors append:
//   8 accept score on 0..7   9 size(src)   10 size(cand)
inline constexpr std::size_t kDocClusterArity = 8;
inline constexpr std::size_t kClusterPairArity = 11;
inline constexpr std::size_t kAcceptScoreFeature = 8;
inline constexpr std::size_t kSrcSizeFeature = 9;
inline constexpr std::size_t kCandSizeFeature = 10;

// Which of the 8 document-cluster features the rank and accept models see.
// kFour keeps {cos(d1,c1), ts newest, ts oldest, ts mean}.
enum class FeatureSet { kFour, kEight };

std::size_t Arity(FeatureSet set);
FeatureSet FeatureSetForArity(std::size_t arity);
FeatureVec Project(const FeatureVec& doc_cluster, FeatureSet set);

// a.b / (|a||b|) clamped to [-1, 1]. A zero-norm input yields 0 and bumps
// DegenerateCosineCount().
double Cosine(const DenseVec& a, const DenseVec& b);
std::uint64_t DegenerateCosineCount();

// exp(-(|d_ts - c_ts| - mu)^2 / (2 sigma^2)), in (0, 1].
double TemporalScore(double d_ts, double c_ts, const TemporalParams& params);

// Fraction of thresholds strictly below k.
double SizeScore(std::size_t k, const SizeLimits& limits);

FeatureVec DocClusterFeatures(const DocRepr& doc, const Cluster& cluster,
                              const TemporalParams& params);

// Treats `src` as a pseudo-document (centroids as views, ts_mean as its
// timestamp) against `cand`, then appends the accept model's score on the
// (projected) first eight features and the two size scores.
FeatureVec ClusterPairFeatures(const Cluster& src, const Cluster& cand,
                               const TemporalParams& params,
                               const SizeLimits& limits,
                               const LinearModel& accept_model);

}  // namespace newsclust

#endif  // NEWSCLUST_FEATURES_H_
