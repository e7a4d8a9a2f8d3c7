#include "newsclust/models.h"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "file_util.h"
#include "newsclust/error.h"

namespace newsclust {
namespace {

constexpr std::string_view kMagic = "newsclust-linear-model 1";

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double SquaredNorm(std::span<const double> w) { return Dot(w, w); }

// Visit order for one epoch.
class EpochOrder {
 public:
  EpochOrder(std::size_t n, const TrainConfig& cfg)
      : order_(n), rng_(cfg.seed), shuffle_(cfg.shuffle) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
  const std::vector<std::size_t>& Next() {
    if (shuffle_) std::shuffle(order_.begin(), order_.end(), rng_);
    return order_;
  }

 private:
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
  bool shuffle_;
};

double StepSize(const TrainConfig& cfg, std::uint64_t t) {
  if (!cfg.decay) return cfg.learning_rate;
  return cfg.learning_rate / (1.0 + cfg.l2_lambda * static_cast<double>(t));
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw ValidationError("learning rate must be positive");
  }
  if (!(l2_lambda >= 0.0)) throw ValidationError("l2 lambda must be >= 0");
}

void CheckArity(const LinearModel& model, std::size_t arity,
                std::string_view where) {
  if (model.arity() != arity) {
    throw ValidationError(std::string(where) + ": " +
                          std::string(ToString(model.kind)) +
                          " model arity " + std::to_string(model.arity()) +
                          " does not match feature arity " +
                          std::to_string(arity));
  }
}

double Score(const LinearModel& model, const FeatureVec& f) {
  CheckArity(model, f.arity(), "score");
  return Dot(model.weights, f.values()) + model.bias;
}

LinearModel TrainRank(std::span<const RankPair> pairs, const TrainConfig& cfg) {
  cfg.Validate();
  if (pairs.empty()) throw RuntimeError("rank training needs at least one pair");
  const std::size_t arity = pairs.front().pos.arity();
  std::vector<std::vector<double>> diffs;
  diffs.reserve(pairs.size());
  for (const RankPair& p : pairs) {
    if (p.pos.arity() != arity || p.neg.arity() != arity) {
      throw ValidationError("rank pairs have inconsistent arity");
    }
    std::vector<double> d(arity);
    for (std::size_t i = 0; i < arity; ++i) d[i] = p.pos[i] - p.neg[i];
    diffs.push_back(std::move(d));
  }

  std::vector<double> w(arity, 0.0);
  EpochOrder order(pairs.size(), cfg);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t idx : order.Next()) {
      const double eta = StepSize(cfg, t++);
      const std::vector<double>& d = diffs[idx];
      const double margin = Dot(w, d);
      const double shrink = 1.0 - eta * cfg.l2_lambda;
      for (double& wi : w) wi *= shrink;
      if (margin < 1.0) {
        for (std::size_t i = 0; i < arity; ++i) w[i] += eta * d[i];
      }
    }
  }
  return LinearModel{ModelKind::kRank, std::move(w), 0.0};
}

LinearModel TrainBinary(std::span<const LabeledExample> examples,
                        ModelKind kind, const TrainConfig& cfg) {
  cfg.Validate();
  if (kind == ModelKind::kRank) {
    throw ValidationError("binary training cannot produce a rank model");
  }
  const std::string name(ToString(kind));
  if (examples.empty()) {
    throw RuntimeError(name + " training needs examples of both classes");
  }
  const bool has_pos = std::any_of(examples.begin(), examples.end(),
                                   [](const auto& e) { return e.y > 0; });
  const bool has_neg = std::any_of(examples.begin(), examples.end(),
                                   [](const auto& e) { return e.y < 0; });
  if (!has_pos) {
    throw RuntimeError(name + " training has no positive (+1) examples");
  }
  if (!has_neg) {
    throw RuntimeError(name + " training has no negative (-1) examples");
  }
  const std::size_t arity = examples.front().f.arity();
  for (const LabeledExample& e : examples) {
    if (e.f.arity() != arity) {
      throw ValidationError(name + " examples have inconsistent arity");
    }
    if (e.y != 1 && e.y != -1) throw ValidationError("labels must be +1/-1");
  }

  std::vector<double> w(arity, 0.0);
  double b = 0.0;
  EpochOrder order(examples.size(), cfg);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t idx : order.Next()) {
      const double eta = StepSize(cfg, t++);
      const LabeledExample& e = examples[idx];
      const double y = static_cast<double>(e.y);
      const double margin = y * (Dot(w, e.f.values()) + b);
      const double shrink = 1.0 - eta * cfg.l2_lambda;
      for (double& wi : w) wi *= shrink;
      if (margin < 1.0) {
        for (std::size_t i = 0; i < arity; ++i) w[i] += eta * y * e.f[i];
        b += eta * y;
      }
    }
  }
  return LinearModel{kind, std::move(w), b};
}

double RankObjective(const LinearModel& model, std::span<const RankPair> pairs,
                     double l2_lambda) {
  double loss = 0.0;
  for (const RankPair& p : pairs) {
    loss += std::max(0.0, 1.0 - (Score(model, p.pos) - Score(model, p.neg)));
  }
  if (!pairs.empty()) loss /= static_cast<double>(pairs.size());
  return 0.5 * l2_lambda * SquaredNorm(model.weights) + loss;
}

double BinaryObjective(const LinearModel& model,
                       std::span<const LabeledExample> examples,
                       double l2_lambda) {
  double loss = 0.0;
  for (const LabeledExample& e : examples) {
    loss += std::max(0.0, 1.0 - e.y * Score(model, e.f));
  }
  if (!examples.empty()) loss /= static_cast<double>(examples.size());
  return 0.5 * l2_lambda * SquaredNorm(model.weights) + loss;
}

std::string SerializeModel(const LinearModel& model) {
  Validate(model);
  std::string out;
  out += kMagic;
  out += "\nkind ";
  out += ToString(model.kind);
  out += "\narity " + std::to_string(model.arity());
  out += "\nbias " + internal::FormatDouble(model.bias);
  out += "\nweights";
  for (double w : model.weights) out += " " + internal::FormatDouble(w);
  out += "\nend\n";
  return out;
}

LinearModel ParseModel(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& why) -> LinearModel {
    throw ValidationError("malformed model file: " + why);
  };
  std::string line;
  if (!std::getline(in, line) || line != kMagic) return fail("bad header");

  auto field = [&](std::string_view key) {
    std::string l;
    if (!std::getline(in, l)) fail("missing '" + std::string(key) + "' line");
    std::istringstream ls(l);
    std::string k;
    ls >> k;
    if (k != key) fail("expected '" + std::string(key) + "', got '" + k + "'");
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    return tokens;
  };

  LinearModel model;
  auto kind = field("kind");
  if (kind.size() != 1) fail("kind needs one value");
  model.kind = ParseModelKind(kind[0]);
  auto arity = field("arity");
  if (arity.size() != 1) fail("arity needs one value");
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(
      arity[0].data(), arity[0].data() + arity[0].size(), n);
  if (ec != std::errc() || ptr != arity[0].data() + arity[0].size()) {
    fail("bad arity '" + arity[0] + "'");
  }
  auto bias = field("bias");
  if (bias.size() != 1) fail("bias needs one value");
  model.bias = internal::ParseDouble(bias[0]);
  auto weights = field("weights");
  if (weights.size() != n) {
    fail("expected " + std::to_string(n) + " weights, found " +
         std::to_string(weights.size()));
  }
  for (const std::string& w : weights) {
    model.weights.push_back(internal::ParseDouble(w));
  }
  if (!std::getline(in, line) || line != "end") fail("missing 'end' marker");
  Validate(model);
  return model;
}

void SaveModel(const LinearModel& model, const std::filesystem::path& path) {
  internal::WriteFile(path, SerializeModel(model));
}

LinearModel LoadModel(const std::filesystem::path& path) {
  try {
    return ParseModel(internal::ReadFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace newsclust
