#ifndef NEWSCLUST_MODELS_H_
#define NEWSCLUST_MODELS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "newsclust/domain.h"

namespace newsclust {

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.01;
  double l2_lambda = 1e-4;
  std::uint64_t seed = 42;
  bool shuffle = true;
  // Pegasos-style step eta_t = learning_rate / (1 + lambda * t) instead of a
  // constant rate.
  bool decay = false;

  void Validate() const;
};

// A preference: `pos` should outscore `neg`.
struct RankPair {
  FeatureVec pos;
  FeatureVec neg;
};

struct LabeledExample {
  FeatureVec f;
  int y = 1;  // +1 or -1
};

// dot(weights, f) + bias. Throws ValidationError on arity mismatch.
double Score(const LinearModel& model, const FeatureVec& f);

void CheckArity(const LinearModel& model, std::size_t arity,
                std::string_view where);

// Pairwise hinge (Rank-SVM) by SGD:
//   min (lambda/2)|w|^2 + (1/N) sum max(0, 1 - w.(pos - neg)).
// Bias is fixed at 0. Deterministic for a given config.
LinearModel TrainRank(std::span<const RankPair> pairs, const TrainConfig& cfg);

// Binary hinge SVM by SGD:
//   min (lambda/2)|w|^2 + (1/N) sum max(0, 1 - y(w.f + b)).
// Requires both classes; throws RuntimeError naming the missing one.
LinearModel TrainBinary(std::span<const LabeledExample> examples,
                        ModelKind kind, const TrainConfig& cfg);

// Regularized objectives, as minimized by the trainers.
double RankObjective(const LinearModel& model, std::span<const RankPair> pairs,
                     double l2_lambda);
double BinaryObjective(const LinearModel& model,
                       std::span<const LabeledExample> examples,
                       double l2_lambda);

// Text format, one field per line, floats with 17 significant digits:
//   newsclust-linear-model 1
//   kind <rank|accept|merge>
//   arity <n>
//   bias <b>
//   weights <w_1> ... <w_n>
//   end
std::string SerializeModel(const LinearModel& model);
LinearModel ParseModel(std::string_view text);
void SaveModel(const LinearModel& model, const std::filesystem::path& path);
LinearModel LoadModel(const std::filesystem::path& path);

}  // namespace newsclust

#endif  // NEWSCLUST_MODELS_H_
