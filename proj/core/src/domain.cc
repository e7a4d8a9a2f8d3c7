#include "newsclust/domain.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "newsclust/error.h"

namespace newsclust {

DenseVec::DenseVec(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("non-finite vector entry at index " +
                            std::to_string(i));
    }
  }
}

DenseVec DenseVec::Zeros(std::size_t dim) {
  return DenseVec(std::vector<double>(dim, 0.0));
}

void CheckSameDim(const DenseVec& a, const DenseVec& b, std::string_view what) {
  if (a.dim() != b.dim()) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
}

DenseVec CentroidUpdate(const DenseVec& centroid, std::size_t n_before,
                        const DenseVec& x) {
  if (n_before == 0) return x;
  CheckSameDim(centroid, x, "centroid update");
  const double inv = 1.0 / static_cast<double>(n_before + 1);
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = centroid[i] + (x[i] - centroid[i]) * inv;
  }
  return DenseVec(std::move(out));
}

DenseVec WeightedMean(const DenseVec& a, std::size_t weight_a,
                      const DenseVec& b, std::size_t weight_b) {
  CheckSameDim(a, b, "weighted mean");
  const double total = static_cast<double>(weight_a + weight_b);
  if (total == 0.0) throw ValidationError("weighted mean: zero total weight");
  const double wa = static_cast<double>(weight_a) / total;
  const double wb = static_cast<double>(weight_b) / total;
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a[i] + wb * b[i];
  return DenseVec(std::move(out));
}

DenseVec Mean(std::span<const DenseVec> vectors) {
  if (vectors.empty()) throw ValidationError("mean of an empty vector set");
  std::vector<double> out(vectors.front().dim(), 0.0);
  for (const DenseVec& v : vectors) {
    CheckSameDim(vectors.front(), v, "mean");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (double& x : out) x /= n;
  return DenseVec(std::move(out));
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ == text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  bool Consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Reads exactly `digits` decimal digits.
  bool ReadInt(int digits, int& out) {
    if (pos_ + digits > text_.size()) return false;
    const char* first = text_.data() + pos_;
    for (int i = 0; i < digits; ++i) {
      if (first[i] < '0' || first[i] > '9') return false;
    }
    std::from_chars(first, first + digits, out);
    pos_ += digits;
    return true;
  }
  void SkipDigits() {
    while (!done() && peek() >= '0' && peek() <= '9') ++pos_;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

[[noreturn]] void BadTimestamp(std::string_view text) {
  throw ValidationError("invalid ISO-8601 timestamp '" + std::string(text) +
                        "'");
}

}  // namespace

Instant ParseIso8601(std::string_view text) {
  using namespace std::chrono;
  Cursor cur(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!cur.ReadInt(4, y) || !cur.Consume('-') || !cur.ReadInt(2, mo) ||
      !cur.Consume('-') || !cur.ReadInt(2, d)) {
    BadTimestamp(text);
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) BadTimestamp(text);
  int offset_seconds = 0;
  if (!cur.done()) {
    if (!cur.Consume('T') && !cur.Consume(' ')) BadTimestamp(text);
    if (!cur.ReadInt(2, h) || !cur.Consume(':') || !cur.ReadInt(2, mi)) {
      BadTimestamp(text);
    }
    if (cur.Consume(':')) {
      if (!cur.ReadInt(2, s)) BadTimestamp(text);
      if (cur.Consume('.')) cur.SkipDigits();
    }
    if (h > 23 || mi > 59 || s > 60) BadTimestamp(text);
    if (cur.Consume('Z')) {
    } else if (cur.peek() == '+' || cur.peek() == '-') {
      const int sign = cur.peek() == '+' ? 1 : -1;
      cur.Consume(cur.peek());
      int oh = 0, om = 0;
      if (!cur.ReadInt(2, oh)) BadTimestamp(text);
      cur.Consume(':');
      if (!cur.ReadInt(2, om)) BadTimestamp(text);
      offset_seconds = sign * (oh * 3600 + om * 60);
    }
    if (!cur.done()) BadTimestamp(text);
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return Instant{days * 86400 + h * 3600 + mi * 60 + s - offset_seconds};
}

std::string FormatIso8601(Instant instant) {
  using namespace std::chrono;
  const DayTimestamp day = DayTimestamp::FromInstant(instant);
  const std::int64_t secs = instant.epoch_seconds - day.day * 86400;
  const year_month_day ymd{sys_days{days{day.day}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
  return buf;
}

DayTimestamp DayTimestamp::FromInstant(Instant instant) {
  std::int64_t q = instant.epoch_seconds / 86400;
  if (instant.epoch_seconds % 86400 < 0) --q;
  return DayTimestamp{q};
}

std::string_view ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRank:
      return "rank";
    case ModelKind::kAccept:
      return "accept";
    case ModelKind::kMerge:
      return "merge";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view text) {
  if (text == "rank") return ModelKind::kRank;
  if (text == "accept") return ModelKind::kAccept;
  if (text == "merge") return ModelKind::kMerge;
  throw ValidationError("unknown model kind '" + std::string(text) + "'");
}

void Validate(const LinearModel& model) {
  if (model.weights.empty()) throw ValidationError("model has no weights");
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw ValidationError("model has non-finite weight");
  }
  if (!std::isfinite(model.bias)) {
    throw ValidationError("model has non-finite bias");
  }
  if (model.kind == ModelKind::kRank && model.bias != 0.0) {
    throw ValidationError("rank model must have zero bias");
  }
}

}  // namespace newsclust
