#include <algorithm>
#include <cmath>
#include <random>

#include "newsclust/corpus.h"
#include "newsclust/error.h"

namespace newsclust {
namespace {

std::vector<double> Gaussian(std::size_t dim, double sigma,
                             std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = sigma * n(rng);
  return v;
}

void Normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

// Offset shared by every unit written in one language.
std::vector<double> LanguageOffset(const LanguageRegime& lang, std::size_t dim,
                                   std::uint64_t seed) {
  if (lang.shift == 0.0) return std::vector<double>(dim, 0.0);
  std::mt19937_64 rng(seed ^ ContentHash(lang.code));
  std::vector<double> v = Gaussian(dim, 1.0, rng);
  Normalize(v);
  for (double& x : v) x *= lang.shift;
  return v;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_stories == 0 || docs_per_story == 0) {
    throw ValidationError("synth needs at least one story and document");
  }
  if (dim == 0) throw ValidationError("synth dimension must be positive");
  if (!(sep > 0.0 && sep <= 1.0)) {
    throw ValidationError("synth sep must lie in (0, 1]");
  }
  if (split_stories > n_stories) {
    throw ValidationError("cannot split more stories than exist");
  }
  if (languages.empty()) throw ValidationError("synth needs a language");
  if (min_paragraphs == 0 || max_paragraphs < min_paragraphs) {
    throw ValidationError("bad paragraph range");
  }
  if (!(crosslingual_fraction >= 0.0 && crosslingual_fraction <= 1.0)) {
    throw ValidationError("crosslingual fraction must lie in [0, 1]");
  }
  if (time_spread_days < 0.0 || story_duration_days < 0.0 ||
      split_gap_days < 0.0) {
    throw ValidationError("synth time parameters must be non-negative");
  }
}

std::vector<DenseVec> StoryCenters(std::size_t n, std::size_t dim,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> basis;
  std::vector<DenseVec> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v = Gaussian(dim, 1.0, rng);
    if (basis.size() < dim) {
      // Gram-Schmidt against the previous centers.
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += v[k] * b[k];
        for (std::size_t k = 0; k < dim; ++k) v[k] -= dot * b[k];
      }
    }
    Normalize(v);
    basis.push_back(v);
    out.emplace_back(std::move(v));
  }
  return out;
}

SynthCorpus SynthesizeCorpus(const SynthConfig& config,
                             std::span<const DenseVec> centers,
                             EmbeddingCache& cache) {
  config.Validate();
  if (centers.size() != config.n_stories) {
    throw ValidationError("need one center per story");
  }
  for (const DenseVec& c : centers) {
    if (c.dim() != config.dim) {
      throw ValidationError("center dimension does not match config");
    }
  }
  cache.BindEncoder("synthetic", config.dim);

  // Unit noise is split evenly between a per-document latent and per-unit
  // jitter; the total makes the expected unit/center cosine equal `sep`.
  const double total_sigma =
      std::sqrt((1.0 / (config.sep * config.sep) - 1.0) /
                static_cast<double>(config.dim));
  const double part_sigma = total_sigma / std::sqrt(2.0);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> offsets;
  for (const LanguageRegime& l : config.languages) {
    offsets.push_back(LanguageOffset(l, config.dim, config.seed));
  }

  std::vector<std::size_t> story_order(config.n_stories);
  for (std::size_t i = 0; i < story_order.size(); ++i) story_order[i] = i;
  std::shuffle(story_order.begin(), story_order.end(), rng);
  std::vector<bool> split(config.n_stories, false);
  for (std::size_t i = 0; i < config.split_stories; ++i) {
    split[story_order[i]] = true;
  }
  std::shuffle(story_order.begin(), story_order.end(), rng);
  std::vector<bool> multi(config.n_stories, false);
  const auto n_multi = static_cast<std::size_t>(std::llround(
      config.crosslingual_fraction * static_cast<double>(config.n_stories)));
  for (std::size_t i = 0; i < n_multi && config.languages.size() > 1; ++i) {
    multi[story_order[i]] = true;
  }

  struct Draft {
    DocumentInput doc;
    std::size_t lang;
    std::size_t story;
  };
  std::vector<Draft> drafts;
  SynthCorpus out;
  for (std::size_t s = 0; s < config.n_stories; ++s) {
    const std::string story = config.label_prefix + std::to_string(s);
    const bool crosslingual = multi[s];
    const std::size_t home = static_cast<std::size_t>(
        unit(rng) * static_cast<double>(config.languages.size()));
    const double start = unit(rng) * config.time_spread_days;
    std::set<std::size_t> used_langs;
    for (std::size_t i = 0; i < config.docs_per_story; ++i) {
      Draft dr;
      dr.story = s;
      dr.lang = crosslingual
                    ? static_cast<std::size_t>(
                          unit(rng) *
                          static_cast<double>(config.languages.size()))
                    : home;
      dr.lang = std::min(dr.lang, config.languages.size() - 1);
      used_langs.insert(dr.lang);
      double day = start + std::abs(normal(rng)) * config.story_duration_days;
      if (split[s] && i >= config.docs_per_story / 2) {
        day += config.split_gap_days;
      }
      const double seconds =
          (static_cast<double>(config.start_day) + day) * 86400.0;
      dr.doc.timestamp = Instant{static_cast<std::int64_t>(std::floor(seconds))};
      dr.doc.language = config.languages[dr.lang].code;
      dr.doc.gold_label =
          crosslingual ? story + "-" + dr.doc.language : story;
      drafts.push_back(std::move(dr));
    }
    if (crosslingual) {
      for (std::size_t a : used_langs) {
        for (std::size_t b : used_langs) {
          if (a < b) {
            out.connections.emplace(story + "-" + config.languages[a].code,
                                    story + "-" + config.languages[b].code);
          }
        }
      }
    }
  }
  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const Draft& a, const Draft& b) {
                     return a.doc.timestamp < b.doc.timestamp;
                   });

  const std::size_t width = std::to_string(drafts.size()).size();
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Draft& dr = drafts[i];
    std::string num = std::to_string(i);
    num.insert(0, width - num.size(), '0');
    DocumentInput& d = dr.doc;
    d.id = config.id_prefix + "-" + num;

    const std::span<const double> center = centers[dr.story].values();
    std::vector<double> latent = Gaussian(config.dim, part_sigma, rng);
    const LanguageRegime& lang = config.languages[dr.lang];
    auto sample_unit = [&] {
      std::vector<double> v =
          Gaussian(config.dim, part_sigma * lang.noise_scale, rng);
      for (std::size_t k = 0; k < config.dim; ++k) {
        v[k] += center[k] + latent[k] + offsets[dr.lang][k];
      }
      return DenseVec(std::move(v));
    };

    const std::size_t n_paras =
        config.min_paragraphs +
        static_cast<std::size_t>(
            unit(rng) *
            static_cast<double>(config.max_paragraphs - config.min_paragraphs + 1));
    const std::size_t paras = std::min(n_paras, config.max_paragraphs);
    if (unit(rng) < config.title_probability) {
      d.title = "title of " + d.id;
      cache.Put(d.id, "title", *d.title, sample_unit());
    }
    for (std::size_t k = 0; k < paras; ++k) {
      d.paragraphs.push_back("paragraph " + std::to_string(k) + " of " + d.id);
      cache.Put(d.id, "para_" + std::to_string(k), d.paragraphs.back(),
                sample_unit());
    }
    cache.Put(d.id, "fp", d.paragraphs.front(), *cache.Find(d.id, "para_0"));
    out.documents.push_back(std::move(d));
  }
  return out;
}

}  // namespace newsclust
