#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "newsclust/corpus.h"
#include "newsclust/engine.h"
#include "newsclust/error.h"
#include "newsclust/eval.h"
#include "newsclust/models.h"
#include "newsclust/pool.h"
#include "newsclust/trainer.h"

namespace newsclust::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

void RequireFile(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw ValidationError(std::string(what) + " '" + path.string() +
                          "' does not exist");
  }
}

std::string HashFile(const fs::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(ContentHash(ReadText(path))));
  return buf;
}

// Flags, seeds and input hashes of one invocation, written beside outputs.
void WriteManifest(const fs::path& path, const std::string& command,
                   const std::vector<std::string>& args,
                   const std::vector<fs::path>& inputs) {
  json in = json::object();
  for (const fs::path& p : inputs) {
    if (!p.empty() && fs::is_regular_file(p)) in[p.string()] = HashFile(p);
  }
  const json j = {{"tool", "newsclust"},
                  {"command", command},
                  {"args", std::vector<std::string>(args.begin() + 1, args.end())},
                  {"input_fnv1a64", in}};
  WriteText(path, j.dump(2) + "\n");
}

std::vector<std::int64_t> ParseLimits(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError("bad size limit '" + tok + "'");
    }
  }
  return out;
}

FeatureSet ParseFeatureSet(int n) {
  if (n == 4) return FeatureSet::kFour;
  if (n == 8) return FeatureSet::kEight;
  throw ValidationError("--features must be 4 or 8");
}

std::set<std::pair<std::string, std::string>> LoadConnections(
    const std::string& path) {
  std::set<std::pair<std::string, std::string>> out;
  if (path.empty()) return out;
  RequireFile(path, "connections file");
  for (auto& [a, b] : ParseConnections(ReadText(path))) {
    if (a != b) out.emplace(std::min(a, b), std::max(a, b));
  }
  return out;
}

std::vector<DocRepr> LoadRepresentations(const std::string& corpus_path,
                                         const std::string& cache_path,
                                         const std::string& lang = "") {
  RequireFile(corpus_path, "corpus");
  RequireFile(cache_path, "embedding cache");
  std::vector<DocumentInput> docs = LoadCorpus(corpus_path);
  if (!lang.empty()) {
    std::erase_if(docs, [&](const DocumentInput& d) { return d.language != lang; });
  }
  EmbeddingCache cache = EmbeddingCache::Load(cache_path);
  return EmbedCorpus(docs, cache, nullptr);
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t stories = 20;
  std::size_t test_stories = 0;  // 0: same as --stories
  std::size_t docs_per_story = 30;
  std::size_t dim = 64;
  double sep = 0.5;
  std::uint64_t seed = 1;
  std::size_t split_stories = 0;
  double split_gap = 20.0;
  double crosslingual = 0.25;
  double time_spread = 30.0;
  double duration = 2.0;
  std::string languages = "en,es,de";
  std::string out;
  bool json_output = false;
};

int RunSynth(const SynthArgs& a, const std::vector<std::string>& args,
             std::ostream& out) {
  if (a.out.empty()) throw ValidationError("--out is required");
  SynthConfig cfg;
  cfg.docs_per_story = a.docs_per_story;
  cfg.dim = a.dim;
  cfg.sep = a.sep;
  cfg.split_stories = a.split_stories;
  cfg.split_gap_days = a.split_gap;
  cfg.crosslingual_fraction = a.crosslingual;
  cfg.time_spread_days = a.time_spread;
  cfg.story_duration_days = a.duration;
  cfg.languages.clear();
  std::stringstream ss(a.languages);
  for (std::string code; std::getline(ss, code, ',');) {
    if (!code.empty()) cfg.languages.push_back({code, 1.0, 0.1});
  }
  const std::size_t n_test = a.test_stories ? a.test_stories : a.stories;
  const std::vector<DenseVec> centers =
      StoryCenters(a.stories + n_test, a.dim, a.seed);

  EmbeddingCache cache;
  SynthConfig train = cfg;
  train.n_stories = a.stories;
  train.seed = a.seed * 2 + 1;
  train.id_prefix = "train";
  train.label_prefix = "train-s";
  const SynthCorpus train_corpus = SynthesizeCorpus(
      train, std::span(centers).first(a.stories), cache);

  SynthConfig test = cfg;
  test.n_stories = n_test;
  test.seed = a.seed * 2 + 2;
  test.id_prefix = "test";
  test.label_prefix = "test-s";
  test.start_day = cfg.start_day +
                   static_cast<std::int64_t>(cfg.time_spread_days +
                                             cfg.split_gap_days) + 60;
  const SynthCorpus test_corpus = SynthesizeCorpus(
      test, std::span(centers).subspan(a.stories), cache);

  const fs::path dir(a.out);
  SaveCorpus(train_corpus.documents, dir / "train.jsonl");
  SaveCorpus(test_corpus.documents, dir / "test.jsonl");
  // Gold labels of the held-out stream; training labels live in the corpus.
  std::string gold;
  for (const DocumentInput& d : test_corpus.documents) {
    gold += json{{"id", d.id}, {"lang", d.language}, {"cluster", *d.gold_label}}
                .dump() +
            "\n";
  }
  WriteText(dir / "gold.jsonl", gold);
  WriteText(dir / "train_connections.tsv",
            FormatConnections(train_corpus.connections));
  WriteText(dir / "test_connections.tsv",
            FormatConnections(test_corpus.connections));
  cache.Save(dir / "cache.bin");
  WriteManifest(dir / "manifest.json", "synth", args, {});
  if (a.json_output) {
    out << json{{"train_documents", train_corpus.documents.size()},
                {"test_documents", test_corpus.documents.size()},
                {"train_connections", train_corpus.connections.size()},
                {"test_connections", test_corpus.connections.size()},
                {"out", dir.string()}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << "synth: " << train_corpus.documents.size() << " train docs, "
      << test_corpus.documents.size() << " test docs, "
      << train_corpus.connections.size() + test_corpus.connections.size()
      << " connections -> " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
  std::string corpus;
  std::string cache;
  std::string service;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  bool json_output = false;
};

int RunEmbed(const EmbedArgs& a, std::ostream& out) {
  RequireFile(a.corpus, "corpus");
  if (a.cache.empty()) throw ValidationError("--cache is required");
  const std::vector<DocumentInput> docs = LoadCorpus(a.corpus);
  EmbeddingCache cache = EmbeddingCache::Load(a.cache);
  std::unique_ptr<EmbeddingProvider> provider;
  if (!a.service.empty()) {
    provider = std::make_unique<HttpEmbeddingProvider>(a.service);
  }
  EmbedStats stats;
  EmbedOptions opts;
  opts.batch_size = a.batch_size;
  opts.max_in_flight = a.max_in_flight;
  const auto reprs = EmbedCorpus(docs, cache, provider.get(), opts, &stats);
  if (cache.modified()) cache.Save(a.cache);
  if (a.json_output) {
    out << json{{"documents", reprs.size()},
                {"texts_embedded", stats.texts_embedded},
                {"requests", stats.provider_calls},
                {"records", cache.record_count()},
                {"vectors", cache.vector_count()},
                {"encoder", cache.encoder()},
                {"dim", cache.dim()}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << "embed: " << reprs.size() << " documents, " << stats.texts_embedded
      << " texts embedded in " << stats.provider_calls << " requests, cache "
      << cache.record_count() << " records / " << cache.vector_count()
      << " vectors (" << cache.encoder() << ", dim " << cache.dim() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ModelParams {
  double mu = 0.0;
  double sigma = 3.0;
  std::string size_limits = "1,2,3,5,10,20,50";
};

struct TrainArgs {
  std::string corpus;
  std::string cache;
  std::string connections;
  std::string out;
  ModelParams params;
  int epochs = 20;
  double learning_rate = 0.01;
  double lambda = 1e-4;
  std::uint64_t seed = 42;
  int features = 8;
  std::size_t k_neg = 20;
  std::size_t merge_top_m = 5;
  int mining_passes = 1;
  bool export_examples = false;
  bool json_output = false;
};

int RunTrain(const TrainArgs& a, const std::vector<std::string>& args,
             std::ostream& out) {
  if (a.out.empty()) throw ValidationError("--out is required");
  TrainerOptions opts;
  opts.temporal = {a.params.mu, a.params.sigma};
  opts.temporal.Validate();
  opts.size_limits = SizeLimits(ParseLimits(a.params.size_limits));
  opts.train.epochs = a.epochs;
  opts.train.learning_rate = a.learning_rate;
  opts.train.l2_lambda = a.lambda;
  opts.train.seed = a.seed;
  opts.train.Validate();
  opts.features = ParseFeatureSet(a.features);
  opts.k_neg = a.k_neg;
  opts.merge_top_m = a.merge_top_m;
  opts.rank_mining_passes = a.mining_passes;
  const auto connections = LoadConnections(a.connections);
  const std::vector<DocRepr> corpus = LoadRepresentations(a.corpus, a.cache);

  const TrainedModels models = TrainAll(corpus, connections, opts);
  const fs::path dir(a.out);
  SaveModel(models.rank, dir / "rank.model");
  SaveModel(models.accept, dir / "accept.model");
  SaveModel(models.merge, dir / "merge.model");
  const std::string report = ReportToJson(models.report);
  WriteText(dir / "report.json", report);
  const json config = {{"mu", a.params.mu},
                       {"sigma", a.params.sigma},
                       {"size_limits", ParseLimits(a.params.size_limits)},
                       {"features", a.features}};
  WriteText(dir / "config.json", config.dump(2) + "\n");
  if (a.export_examples) {
    const StoryLabeler labeler(corpus, connections);
    WriteText(dir / "rank_pairs.jsonl",
              RankPairsToJsonl(GenRankExamples(corpus, labeler, opts.temporal,
                                               opts.k_neg, opts.features)));
    WriteText(dir / "accept_examples.jsonl",
              LabeledExamplesToJsonl(GenAcceptExamples(
                  corpus, labeler, opts.temporal, models.rank)));
    WriteText(dir / "merge_examples.jsonl",
              MergeSamplesToJsonl(GenMergeExamples(
                  corpus, labeler, opts.temporal, opts.size_limits,
                  models.rank, models.accept, opts.merge_top_m)));
  }
  WriteManifest(dir / "manifest.json", "train", args,
                {a.corpus, a.cache, a.connections});
  if (a.json_output) {
    out << report;
  } else {
    const TrainingReport& r = models.report;
    out << "train: " << r.documents << " documents, " << r.rank_pairs
        << " rank pairs, accept " << r.accept_positive << "+/"
        << r.accept_negative << "-, merge " << r.merge_positive << "+/"
        << r.merge_negative << "-"
        << (r.merge_fallback ? " (single-class: never-merge model)" : "")
        << " -> " << dir.string() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ClusterArgs {
  std::string corpus;
  std::string cache;
  std::string models;
  std::string out;
  std::string pool_out;
  std::string lang;
  int features = 0;  // 0: from the models
  bool no_merge = false;
  bool merge_eval_all = false;
  std::size_t merge_top_m = 5;
  std::int64_t archive_days = 0;
  bool centroids = false;
  bool json_output = false;
  // Unset values fall back to the model directory's config.json.
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<std::string> size_limits;
};

int RunCluster(const ClusterArgs& a, const std::vector<std::string>& args,
               std::ostream& out) {
  if (a.out.empty()) throw ValidationError("--out is required");
  const fs::path dir(a.models);
  EngineModels models{LoadModel(dir / "rank.model"),
                      LoadModel(dir / "accept.model"), std::nullopt};
  if (!a.no_merge) models.merge = LoadModel(dir / "merge.model");

  EngineConfig cfg;
  json trained = json::object();
  if (fs::is_regular_file(dir / "config.json")) {
    trained = json::parse(ReadText(dir / "config.json"));
  }
  cfg.temporal.mu = a.mu.value_or(trained.value("mu", 0.0));
  cfg.temporal.sigma = a.sigma.value_or(trained.value("sigma", 3.0));
  if (a.size_limits) {
    cfg.size_limits = SizeLimits(ParseLimits(*a.size_limits));
  } else if (trained.contains("size_limits")) {
    cfg.size_limits =
        SizeLimits(trained["size_limits"].get<std::vector<std::int64_t>>());
  }
  if (a.features != 0 &&
      Arity(ParseFeatureSet(a.features)) != models.rank.arity()) {
    throw ValidationError("--features " + std::to_string(a.features) +
                          " does not match the " +
                          std::to_string(models.rank.arity()) +
                          "-feature models in " + dir.string());
  }
  cfg.merge_enabled = !a.no_merge;
  cfg.merge_eval_all = a.merge_eval_all;
  cfg.merge_top_m = a.merge_top_m;
  if (a.archive_days < 0) throw ValidationError("--archive-days must be > 0");
  if (a.archive_days > 0) cfg.pool.archive_horizon_days = a.archive_days;

  Engine engine(std::move(models), cfg);
  const std::vector<DocRepr> stream =
      LoadRepresentations(a.corpus, a.cache, a.lang);
  const std::vector<AssignmentRecord> records = RunStream(engine, stream);

  const fs::path out_path(a.out);
  fs::path pool_path(a.pool_out);
  if (pool_path.empty()) {
    pool_path = out_path;
    pool_path.replace_extension(".pool.jsonl");
  }
  WriteText(out_path, AssignmentsToJsonl(records));
  WriteText(pool_path, ExportPool(engine.pool(), a.centroids));
  fs::path manifest = out_path;
  manifest.replace_extension(".manifest.json");
  WriteManifest(manifest, "cluster", args,
                {a.corpus, a.cache, dir / "rank.model", dir / "accept.model",
                 a.no_merge ? fs::path() : dir / "merge.model"});

  const json summary = {
      {"documents", records.size()},
      {"clusters", engine.pool().live().size() + engine.pool().archived().size()},
      {"archived", engine.pool().archived().size()},
      {"merges", engine.pool().merge_log().size()},
      {"degenerate_cosines", DegenerateCosineCount()}};
  if (a.json_output) {
    out << summary.dump(2) << "\n";
  } else {
    out << "cluster: " << summary["documents"] << " documents, "
        << summary["clusters"] << " clusters (" << summary["archived"]
        << " archived), " << summary["merges"] << " merges\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string assignments;
  std::string gold;
  std::string connections;
  std::string lang;
  bool closure = false;
  bool json_output = false;
};

int RunEvaluate(const EvaluateArgs& a, std::ostream& out) {
  RequireFile(a.assignments, "assignments file");
  RequireFile(a.gold, "gold file");
  std::optional<fs::path> conn;
  if (!a.connections.empty()) {
    RequireFile(a.connections, "connections file");
    conn = a.connections;
  }
  const GoldStandard gold = LoadGoldStandard(a.gold, conn);
  const auto records = ParseAssignments(ReadText(a.assignments));
  const Prediction pred = ResolveFinalClusters(records);
  EvalOptions opts;
  opts.closure = a.closure;
  if (!a.lang.empty()) opts.language = a.lang;
  const EvalReport report = Evaluate(pred, gold, opts);
  if (a.json_output) {
    out << ReportToJson(report, opts);
  } else {
    out << ReportToTable(report);
    out << "documents " << report.n_docs
        << (a.closure ? ", standard F1 with transitive connections" : "")
        << (a.lang.empty() ? "" : ", language " + a.lang)
        << " (empty denominators count as 0)\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  std::string pool;
  ClusterId cluster = 0;
  bool json_output = false;
};

int RunInspect(const InspectArgs& a, std::ostream& out) {
  RequireFile(a.pool, "pool export");
  for (const ClusterSummary& s : ParsePoolExport(ReadText(a.pool))) {
    if (s.id != a.cluster) continue;
    if (a.json_output) {
      out << json{{"id", s.id},
                  {"status", s.archived ? "archived" : "live"},
                  {"size", s.members.size()},
                  {"members", s.members},
                  {"ts_newest", s.ts_newest},
                  {"ts_oldest", s.ts_oldest},
                  {"ts_mean", s.ts_mean}}
                 .dump(2)
          << "\n";
      return kExitOk;
    }
    out << "cluster " << s.id << (s.archived ? " (archived)" : "") << "\n"
        << "size      " << s.members.size() << "\n"
        << "oldest    " << FormatIso8601(Instant{s.ts_oldest * 86400}).substr(0, 10)
        << "\n"
        << "newest    " << FormatIso8601(Instant{s.ts_newest * 86400}).substr(0, 10)
        << "\n"
        << "mean day  " << s.ts_mean << "\n"
        << "members  ";
    for (const std::string& m : s.members) out << " " << m;
    out << "\n";
    return kExitOk;
  }
  throw ValidationError("cluster " + std::to_string(a.cluster) +
                        " not found in " + a.pool);
}

void ReportError(std::ostream& err, const char* kind, const std::string& command,
                 const std::string& message) {
  err << json{{"error", kind}, {"command", command}, {"message", message}}.dump()
      << "\n";
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Online multilingual news-stream clustering", "newsclust"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic train/test corpus, "
                                        "gold files and embedding cache");
  s->add_option("--stories", synth.stories, "Training stories");
  s->add_option("--test-stories", synth.test_stories,
                "Held-out stories (0: same as --stories)");
  s->add_option("--docs-per-story", synth.docs_per_story, "Documents per story");
  s->add_option("--dim", synth.dim, "Embedding dimension");
  s->add_option("--sep", synth.sep, "Expected unit/story-center cosine, (0,1]");
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--split-stories", synth.split_stories,
                "Stories split into two bursts in time (per partition)");
  s->add_option("--split-gap", synth.split_gap, "Days between split bursts");
  s->add_option("--crosslingual", synth.crosslingual,
                "Fraction of stories labeled per language with connections");
  s->add_option("--time-spread", synth.time_spread, "Days over which stories start");
  s->add_option("--duration", synth.duration, "Per-story time scale in days");
  s->add_option("--languages", synth.languages, "Comma-separated language codes");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_flag("--json", synth.json_output, "Print the summary as JSON");

  EmbedArgs embed;
  auto* e = app.add_subcommand("embed", "Fill the embedding cache for a corpus");
  e->add_option("--corpus", embed.corpus, "Corpus JSON-lines")->required();
  e->add_option("--cache", embed.cache, "Embedding cache file")->required();
  e->add_option("--service", embed.service,
                "Embedding service base URL (omit for cache-only)");
  e->add_option("--batch-size", embed.batch_size, "Texts per request");
  e->add_option("--max-in-flight", embed.max_in_flight, "Concurrent requests");
  e->add_flag("--json", embed.json_output, "Print the summary as JSON");

  auto add_params = [](CLI::App* cmd, ModelParams& p) {
    cmd->add_option("--mu", p.mu, "Temporal kernel offset (days)");
    cmd->add_option("--sigma", p.sigma, "Temporal kernel width (days)");
    cmd->add_option("--size-limits", p.size_limits,
                    "Cluster-size thresholds, strictly increasing");
  };

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train rank, accept and merge models");
  t->add_option("--corpus", train.corpus, "Training corpus")->required();
  t->add_option("--cache", train.cache, "Embedding cache")->required();
  t->add_option("--connections", train.connections,
                "Positive label connections (TSV)");
  t->add_option("--out", train.out, "Model directory")->required();
  add_params(t, train.params);
  t->add_option("--epochs", train.epochs, "SGD epochs");
  t->add_option("--learning-rate", train.learning_rate, "SGD step size");
  t->add_option("--lambda", train.lambda, "L2 regularization");
  t->add_option("--seed", train.seed, "Shuffle seed");
  t->add_option("--features", train.features, "Rank/accept features: 4 or 8");
  t->add_option("--k-neg", train.k_neg, "Negative clusters per document");
  t->add_option("--merge-top-m", train.merge_top_m,
                "Merge candidates sampled per insertion");
  t->add_option("--mining-passes", train.mining_passes,
                "Rank negative-mining passes (2 re-mines with the trained model)");
  t->add_flag("--export-examples", train.export_examples,
              "Also write the example sets as JSON-lines");
  t->add_flag("--json", train.json_output, "Print the report as JSON");

  ClusterArgs cluster;
  ModelParams cluster_params;
  auto* c = app.add_subcommand("cluster", "Cluster a document stream");
  c->add_option("--corpus", cluster.corpus, "Corpus to stream")->required();
  c->add_option("--cache", cluster.cache, "Embedding cache")->required();
  c->add_option("--models", cluster.models, "Model directory")->required();
  c->add_option("--out", cluster.out, "Assignments JSON-lines")->required();
  c->add_option("--pool-out", cluster.pool_out,
                "Pool export (default: <out>.pool.jsonl)");
  c->add_option("--features", cluster.features,
                "Expected model feature count, 4 or 8 (0: from models)");
  c->add_flag("--no-merge", cluster.no_merge, "Disable the merge step");
  c->add_flag("--merge-eval-all", cluster.merge_eval_all,
              "Evaluate the merge model on every live cluster");
  c->add_option("--merge-top-m", cluster.merge_top_m,
                "Merge candidates evaluated per insertion");
  c->add_option("--archive-days", cluster.archive_days,
                "Archive clusters idle this many days (0: never)");
  c->add_option("--lang", cluster.lang, "Only stream documents of this language");
  auto* mu = c->add_option("--mu", cluster_params.mu,
                           "Temporal offset (default: from models)");
  auto* sigma = c->add_option("--sigma", cluster_params.sigma,
                              "Temporal width (default: from models)");
  auto* limits = c->add_option("--size-limits", cluster_params.size_limits,
                               "Size thresholds (default: from models)");
  c->add_flag("--centroids", cluster.centroids, "Include centroids in the pool export");
  c->add_flag("--json", cluster.json_output, "Print the summary as JSON");

  EvaluateArgs evaluate;
  auto* v = app.add_subcommand("evaluate", "Score assignments against gold labels");
  v->add_option("--assignments", evaluate.assignments, "Assignments JSON-lines")
      ->required();
  v->add_option("--gold", evaluate.gold, "Gold labels JSON-lines")->required();
  v->add_option("--connections", evaluate.connections,
                "Positive label connections (TSV)");
  v->add_flag("--closure", evaluate.closure,
              "Standard F1 over transitively connected labels");
  v->add_option("--lang", evaluate.lang, "Restrict to one language");
  v->add_flag("--json", evaluate.json_output, "Print the report as JSON");

  InspectArgs inspect;
  auto* i = app.add_subcommand("inspect", "Summarize one cluster of a pool export");
  i->add_option("--pool", inspect.pool, "Pool export JSON-lines")->required();
  i->add_option("--cluster", inspect.cluster, "Cluster id")->required();
  i->add_flag("--json", inspect.json_output, "Print JSON");

  std::string command;
  try {
    // CLI11 consumes the argument list back to front, without argv[0].
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    for (auto* sub : app.get_subcommands()) command = sub->get_name();
    ReportError(err, "validation", command, ex.what());
    return kExitValidation;
  }
  command = app.get_subcommands().front()->get_name();

  try {
    if (s->parsed()) return RunSynth(synth, args, out);
    if (e->parsed()) return RunEmbed(embed, out);
    if (t->parsed()) return RunTrain(train, args, out);
    if (c->parsed()) {
      if (mu->count()) cluster.mu = cluster_params.mu;
      if (sigma->count()) cluster.sigma = cluster_params.sigma;
      if (limits->count()) cluster.size_limits = cluster_params.size_limits;
      return RunCluster(cluster, args, out);
    }
    if (v->parsed()) return RunEvaluate(evaluate, out);
    if (i->parsed()) return RunInspect(inspect, out);
  } catch (const ValidationError& ex) {
    ReportError(err, "validation", command, ex.what());
    return kExitValidation;
  } catch (const std::exception& ex) {
    ReportError(err, "runtime", command, ex.what());
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace newsclust::cli
