#include "newsclust/features.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "newsclust/error.h"
#include "newsclust/models.h"

namespace newsclust {
namespace {

std::atomic<std::uint64_t> g_degenerate_cosines{0};

double Temporal(double d_ts, double c_ts, const TemporalParams& p) {
  const double off = std::abs(d_ts - c_ts) - p.mu;
  return std::exp(-(off * off) / (2.0 * p.sigma * p.sigma));
}

// f1..f8 for a document-like triple of views against a cluster.
FeatureVec ViewsAgainst(const DenseVec& v1, const DenseVec& v2,
                        const DenseVec& v3, double ts, const Cluster& c,
                        const TemporalParams& p) {
  CheckSameDim(v1, c.c1, "features");
  CheckSameDim(v2, c.c2, "features");
  CheckSameDim(v3, c.c3, "features");
  return FeatureVec({
      Cosine(v1, c.c1),
      Cosine(v2, c.c2),
      Cosine(v3, c.c3),
      Cosine(v2, c.c1),
      Cosine(v3, c.c1),
      Temporal(ts, static_cast<double>(c.ts_newest.day), p),
      Temporal(ts, static_cast<double>(c.ts_oldest.day), p),
      Temporal(ts, c.ts_mean, p),
  });
}

}  // namespace

void TemporalParams::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("temporal sigma must be positive");
  }
  if (!std::isfinite(mu)) throw ValidationError("temporal mu must be finite");
}

SizeLimits::SizeLimits(std::vector<std::int64_t> limits)
    : limits_(std::move(limits)) {
  if (limits_.empty()) throw ValidationError("size limits must be nonempty");
  for (std::size_t i = 0; i < limits_.size(); ++i) {
    if (limits_[i] <= 0) throw ValidationError("size limits must be positive");
    if (i > 0 && limits_[i] <= limits_[i - 1]) {
      throw ValidationError("size limits must be strictly increasing");
    }
  }
}

SizeLimits SizeLimits::Default() { return SizeLimits({1, 2, 3, 5, 10, 20, 50}); }

std::size_t Arity(FeatureSet set) {
  return set == FeatureSet::kFour ? 4 : kDocClusterArity;
}

FeatureSet FeatureSetForArity(std::size_t arity) {
  if (arity == 4) return FeatureSet::kFour;
  if (arity == kDocClusterArity) return FeatureSet::kEight;
  throw ValidationError("no feature set has arity " + std::to_string(arity));
}

FeatureVec Project(const FeatureVec& f, FeatureSet set) {
  if (f.arity() != kDocClusterArity) {
    throw ValidationError("projection expects an 8-feature vector");
  }
  if (set == FeatureSet::kEight) return f;
  return FeatureVec({f[0], f[5], f[6], f[7]});
}

double Cosine(const DenseVec& a, const DenseVec& b) {
  CheckSameDim(a, b, "cosine");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    g_degenerate_cosines.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::uint64_t DegenerateCosineCount() {
  return g_degenerate_cosines.load(std::memory_order_relaxed);
}

double TemporalScore(double d_ts, double c_ts, const TemporalParams& params) {
  params.Validate();
  return Temporal(d_ts, c_ts, params);
}

double SizeScore(std::size_t k, const SizeLimits& limits) {
  const auto v = limits.limits();
  const auto exceeded = std::count_if(v.begin(), v.end(), [k](std::int64_t l) {
    return static_cast<std::int64_t>(k) > l;
  });
  return static_cast<double>(exceeded) / static_cast<double>(v.size());
}

FeatureVec DocClusterFeatures(const DocRepr& doc, const Cluster& cluster,
                              const TemporalParams& params) {
  return ViewsAgainst(doc.d1, doc.d2, doc.d3, static_cast<double>(doc.ts.day),
                      cluster, params);
}

FeatureVec ClusterPairFeatures(const Cluster& src, const Cluster& cand,
                               const TemporalParams& params,
                               const SizeLimits& limits,
                               const LinearModel& accept_model) {
  if (accept_model.kind != ModelKind::kAccept) {
    throw ValidationError("cluster-pair features need an accept model");
  }
  const FeatureVec base =
      ViewsAgainst(src.c1, src.c2, src.c3, src.ts_mean, cand, params);
  const FeatureSet set = FeatureSetForArity(accept_model.arity());
  std::vector<double> out(base.values().begin(), base.values().end());
  out.push_back(Score(accept_model, Project(base, set)));
  out.push_back(SizeScore(src.size(), limits));
  out.push_back(SizeScore(cand.size(), limits));
  return FeatureVec(std::move(out));
}

}  // namespace newsclust
