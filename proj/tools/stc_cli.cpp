#include "stc_cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stc/corpus.hpp"
#include "stc/evalmetrics.hpp"
#include "stc/rng.hpp"
#include "stc/simgraph.hpp"

namespace stc::cli {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

Algo parse_algo(const std::string& s) {
  if (s == "kmeans") return Algo::KMeans;
  if (s == "hac") return Algo::Hac;
  if (s == "spectral") return Algo::Spectral;
  throw Error(Errc::BadConfig, "unknown clustering algorithm '" + s + "'");
}

Sparsifier parse_sparsifier(const std::string& s) {
  if (s == "none") return Sparsifier::None;
  if (s == "knn") return Sparsifier::Knn;
  if (s == "simdist") return Sparsifier::SimDist;
  throw Error(Errc::BadConfig, "unknown sparsifier '" + s + "'");
}

template <typename T>
T get(const json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, std::string("config key '") + key + "': " + e.what());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::BadConfig, where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error(Errc::BadConfig, "unknown config key '" + key + "' in " + where);
    }
  }
}

std::string format_metrics(double accuracy, double nmi_value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "accuracy=%.4f nmi=%.4f", accuracy, nmi_value);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw Error(Errc::BadConfig, std::string("missing ") + what + " path");
  if (!fs::exists(path)) throw Error(Errc::FileNotFound, std::string(what) + " file not found: " + path);
}

// "dir/name.ext" -> "dir/name.run<r>.ext"
std::string run_path(const std::string& path, int run, int runs) {
  if (path.empty() || runs == 1) return path;
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + ".run" + std::to_string(run) + p.extension().string())).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path);
  out << text;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  require_file(path, "config");
  json doc;
  try {
    std::ifstream in(path);
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, "config " + path + ": " + e.what());
  }
  check_keys(doc,
             {"corpus", "embeddings", "initial", "k", "algo", "n_init", "kmeans_max_iter", "normalize", "linkage",
              "sparsifier", "classifier", "t_max", "p1", "p2", "stopping", "epsilon", "outlier", "mlr", "external",
              "seed", "threads", "runs", "out", "report"},
             "config");
  // Input paths are relative to the config file.
  const fs::path base = fs::path(path).parent_path();
  auto input = [&](const char* key) { return (base / get<std::string>(doc, key)).lexically_normal().string(); };
  RunConfig cfg;
  if (doc.contains("corpus")) cfg.corpus = input("corpus");
  if (doc.contains("embeddings")) cfg.embeddings = input("embeddings");
  if (doc.contains("initial")) cfg.initial = input("initial");
  if (doc.contains("k")) cfg.k = get<int>(doc, "k");
  if (doc.contains("algo")) cfg.algo = parse_algo(get<std::string>(doc, "algo"));
  if (doc.contains("n_init")) cfg.n_init = get<int>(doc, "n_init");
  if (doc.contains("kmeans_max_iter")) cfg.kmeans_max_iter = get<int>(doc, "kmeans_max_iter");
  if (doc.contains("normalize")) cfg.normalize = get<bool>(doc, "normalize");
  if (doc.contains("linkage")) cfg.linkage = parse_linkage(get<std::string>(doc, "linkage"));
  if (doc.contains("sparsifier")) cfg.sparsifier = parse_sparsifier(get<std::string>(doc, "sparsifier"));
  auto& e = cfg.ecic;
  if (doc.contains("classifier")) e.classifier = parse_classifier(get<std::string>(doc, "classifier"));
  if (doc.contains("t_max")) {
    e.t_max = get<int>(doc, "t_max");
    cfg.t_max_set = true;
  }
  if (doc.contains("p1")) e.p1 = get<double>(doc, "p1");
  if (doc.contains("p2")) e.p2 = get<double>(doc, "p2");
  if (doc.contains("stopping")) {
    e.stopping = parse_stopping(get<std::string>(doc, "stopping"));
    cfg.stopping_set = true;
  }
  if (doc.contains("epsilon")) e.epsilon = get<double>(doc, "epsilon");
  if (doc.contains("outlier")) {
    const auto& o = doc["outlier"];
    check_keys(o, {"method", "contamination", "if_trees", "if_subsample", "lof_neighbors"}, "outlier");
    if (o.contains("method")) e.outlier.method = parse_outlier_method(get<std::string>(o, "method"));
    if (o.contains("contamination")) e.outlier.contamination = get<double>(o, "contamination");
    if (o.contains("if_trees")) e.outlier.if_trees = get<int>(o, "if_trees");
    if (o.contains("if_subsample")) e.outlier.if_subsample = get<int>(o, "if_subsample");
    if (o.contains("lof_neighbors")) e.outlier.lof_neighbors = get<int>(o, "lof_neighbors");
  }
  if (doc.contains("mlr")) {
    const auto& m = doc["mlr"];
    check_keys(m, {"l2", "max_epochs", "tol"}, "mlr");
    if (m.contains("l2")) e.mlr.l2 = get<double>(m, "l2");
    if (m.contains("max_epochs")) e.mlr.max_epochs = get<int>(m, "max_epochs");
    if (m.contains("tol")) e.mlr.tol = get<double>(m, "tol");
  }
  if (doc.contains("external")) {
    const auto& x = doc["external"];
    check_keys(x, {"command", "epochs", "learning_rate", "reset_weights", "timeout_s"}, "external");
    if (x.contains("command")) e.external.command = get<std::string>(x, "command");
    if (x.contains("epochs")) e.external.epochs_per_iteration = get<int>(x, "epochs");
    if (x.contains("learning_rate")) e.external.learning_rate = get<double>(x, "learning_rate");
    if (x.contains("reset_weights")) e.external.reset_weights = get<bool>(x, "reset_weights");
    if (x.contains("timeout_s")) e.external.timeout_s = get<double>(x, "timeout_s");
  }
  if (doc.contains("seed")) cfg.seed = get<std::uint64_t>(doc, "seed");
  if (doc.contains("threads")) cfg.threads = get<int>(doc, "threads");
  if (doc.contains("runs")) cfg.runs = get<int>(doc, "runs");
  if (doc.contains("out")) cfg.out = get<std::string>(doc, "out");
  if (doc.contains("report")) cfg.report = get<std::string>(doc, "report");
  return cfg;
}

Labeling initial_clustering(const RunConfig& cfg, const EmbeddingMatrix& x, int k, std::uint64_t seed) {
  switch (cfg.algo) {
    case Algo::KMeans: {
      KMeansOptions opt;
      opt.n_init = cfg.n_init;
      opt.max_iter = cfg.kmeans_max_iter;
      opt.seed = seed;
      opt.threads = cfg.threads;
      return kmeans(cfg.normalize ? x.normalized() : x, k, opt).labeling;
    }
    case Algo::Hac: {
      const SimMatrix s = cosine_matrix(x);
      if (cfg.sparsifier == Sparsifier::None) return hac(s, k, cfg.linkage);
      const int budget = row_budget(s.n(), k);
      const SparseSimMatrix sparse = cfg.sparsifier == Sparsifier::Knn ? sparsify_knn(s, budget) : sparsify_simdist(s, budget);
      return hac(sparse, k, cfg.linkage);
    }
    case Algo::Spectral:
      return spectral(cosine_matrix(x), k, seed, cfg.threads);
  }
  throw Error(Errc::BadConfig, "unhandled clustering algorithm");
}

namespace {

// Command-line overrides; only flags actually given replace config values.
struct Flags {
  std::string config;
  std::optional<std::string> corpus, embeddings, initial, algo, linkage, sparsifier, classifier, worker_cmd, stopping,
      outlier, out, report;
  std::optional<int> k, n_init, t_max, runs, threads, epochs, if_trees, if_subsample, lof_neighbors, mlr_epochs;
  std::optional<double> p1, p2, epsilon, contamination, learning_rate, timeout, l2, mlr_tol;
  std::optional<std::uint64_t> seed;
  bool normalize = false;
  bool warm_start = false;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  auto& e = cfg.ecic;
  if (f.corpus) cfg.corpus = *f.corpus;
  if (f.embeddings) cfg.embeddings = *f.embeddings;
  if (f.initial) cfg.initial = *f.initial;
  if (f.k) cfg.k = *f.k;
  if (f.algo) cfg.algo = parse_algo(*f.algo);
  if (f.n_init) cfg.n_init = *f.n_init;
  if (f.normalize) cfg.normalize = true;
  if (f.linkage) cfg.linkage = parse_linkage(*f.linkage);
  if (f.sparsifier) cfg.sparsifier = parse_sparsifier(*f.sparsifier);
  if (f.classifier) e.classifier = parse_classifier(*f.classifier);
  if (f.worker_cmd) e.external.command = *f.worker_cmd;
  if (f.epochs) e.external.epochs_per_iteration = *f.epochs;
  if (f.learning_rate) e.external.learning_rate = *f.learning_rate;
  if (f.timeout) e.external.timeout_s = *f.timeout;
  if (f.warm_start) e.external.reset_weights = false;
  if (f.t_max) {
    e.t_max = *f.t_max;
    cfg.t_max_set = true;
  }
  if (f.p1) e.p1 = *f.p1;
  if (f.p2) e.p2 = *f.p2;
  if (f.stopping) {
    e.stopping = parse_stopping(*f.stopping);
    cfg.stopping_set = true;
  }
  if (f.epsilon) e.epsilon = *f.epsilon;
  if (f.outlier) e.outlier.method = parse_outlier_method(*f.outlier);
  if (f.contamination) e.outlier.contamination = *f.contamination;
  if (f.if_trees) e.outlier.if_trees = *f.if_trees;
  if (f.if_subsample) e.outlier.if_subsample = *f.if_subsample;
  if (f.lof_neighbors) e.outlier.lof_neighbors = *f.lof_neighbors;
  if (f.l2) e.mlr.l2 = *f.l2;
  if (f.mlr_epochs) e.mlr.max_epochs = *f.mlr_epochs;
  if (f.mlr_tol) e.mlr.tol = *f.mlr_tol;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (f.runs) cfg.runs = *f.runs;
  if (f.out) cfg.out = *f.out;
  if (f.report) cfg.report = *f.report;

  // Classifier-specific defaults: 50 iterations without a criterion for MLR,
  // 10 iterations with the minimum-delta criterion for external models.
  if (!cfg.t_max_set) e.t_max = e.classifier == ClassifierKind::Mlr ? 50 : 10;
  if (!cfg.stopping_set) e.stopping = e.classifier == ClassifierKind::Mlr ? StoppingMode::None : StoppingMode::MinDelta;
  if (cfg.threads < 1) throw Error(Errc::BadConfig, "threads must be >= 1");
  if (cfg.runs < 1) throw Error(Errc::BadConfig, "runs must be >= 1");
  if (cfg.n_init < 1) throw Error(Errc::BadConfig, "n_init must be >= 1");
  return cfg;
}

void add_data_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration");
  app->add_option("--corpus", f.corpus, "corpus TSV (id<TAB>label<TAB>text)");
  app->add_option("--embeddings", f.embeddings, "embedding file (EMB v1 header)");
  app->add_option("--k", f.k, "number of clusters (defaults to the gold class count)");
  app->add_option("--seed", f.seed, "root seed");
  app->add_option("--threads", f.threads, "worker threads for k-means restarts");
  app->add_option("--out", f.out, "output labeling TSV");
}

void add_cluster_flags(CLI::App* app, Flags& f) {
  app->add_option("--algo", f.algo, "kmeans | hac | spectral");
  app->add_option("--n-init", f.n_init, "k-means restarts");
  app->add_flag("--normalize", f.normalize, "L2-normalize rows before k-means");
  app->add_option("--linkage", f.linkage, "single | complete | average | ward");
  app->add_option("--sparsifier", f.sparsifier, "none | knn | simdist (HAC only)");
}

struct Loaded {
  Corpus corpus;
  EmbeddingMatrix x;
};

Loaded load_inputs(const RunConfig& cfg) {
  require_file(cfg.corpus, "corpus");
  require_file(cfg.embeddings, "embeddings");
  Loaded in;
  in.corpus = load_corpus(cfg.corpus, cfg.k);
  in.x = load_embeddings(cfg.embeddings, in.corpus);
  return in;
}

std::optional<Labeling> gold_of(const Corpus& corpus) {
  if (!corpus.has_gold()) return std::nullopt;
  return Labeling(corpus.gold_labels(), std::max(2, corpus.gold_classes()));
}

int cmd_stats(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve(f);
  require_file(cfg.corpus, "corpus");
  out << format_stats(corpus_stats(load_corpus(cfg.corpus, cfg.k))) << '\n';
  return 0;
}

int cmd_cluster(const Flags& f, std::ostream& out) {
  const RunConfig cfg = resolve(f);
  const Loaded in = load_inputs(cfg);
  const Labeling labels = initial_clustering(cfg, in.x, in.corpus.k(), substream_seed(cfg.seed, "cluster"));
  if (!cfg.out.empty()) save_labeling(labels, cfg.out);
  if (const auto gold = gold_of(in.corpus)) out << format_metrics(hungarian_accuracy(labels, *gold), nmi(labels, *gold)) << '\n';
  return 0;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

int cmd_enhance(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(f);
  const Loaded in = load_inputs(cfg);
  const int k = in.corpus.k();
  std::optional<Labeling> given;
  if (!cfg.initial.empty()) {
    require_file(cfg.initial, "initial labeling");
    given = load_labeling(cfg.initial, k);
    if (given->size() != in.corpus.size()) throw Error(Errc::CountMismatch, "initial labeling length differs from corpus");
  }

  std::vector<double> accs, nmis;
  for (int r = 0; r < cfg.runs; ++r) {
    const std::uint64_t root = cfg.seed + static_cast<std::uint64_t>(r);
    const Labeling initial = given ? *given : initial_clustering(cfg, in.x, k, substream_seed(root, "cluster"));
    EcicConfig ecic = cfg.ecic;
    ecic.seed = substream_seed(root, "enhance");
    const std::string report_path = run_path(cfg.report, r, cfg.runs);
    const std::string out_path = run_path(cfg.out, r, cfg.runs);

    EnhanceReport report;
    try {
      report = enhance(in.corpus, in.x, initial, ecic);
    } catch (const EnhanceAborted& aborted) {
      if (!report_path.empty()) write_text(report_path, report_to_json(aborted.partial(), ""));
      throw;
    }
    report.seed = root;
    if (!out_path.empty()) save_labeling(report.final, out_path);
    if (!report_path.empty()) write_text(report_path, report_to_json(report, out_path));

    const std::string prefix = cfg.runs > 1 ? "run " + std::to_string(r) + " " : "";
    if (report.final_accuracy) {
      out << prefix << "initial " << format_metrics(*report.initial_accuracy, *report.initial_nmi) << '\n';
      out << prefix << "final " << format_metrics(*report.final_accuracy, *report.final_nmi) << '\n';
      accs.push_back(*report.final_accuracy);
      nmis.push_back(*report.final_nmi);
    } else {
      err << prefix << "finished after " << report.history.size() << " iterations (" << to_string(report.stop_reason)
          << ")\n";
    }
  }
  if (cfg.runs > 1 && !accs.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean accuracy=%.4f±%.4f nmi=%.4f±%.4f", mean_of(accs), sample_std(accs),
                  mean_of(nmis), sample_std(nmis));
    out << buf << '\n';
  }
  return 0;
}

// A gold file is either a labeling TSV or a corpus TSV (three columns).
Labeling load_gold(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  if (std::count(first.begin(), first.end(), '\t') >= 2) {
    const Corpus corpus = load_corpus(path);
    const auto gold = gold_of(corpus);
    if (!gold) throw Error(Errc::MixedGoldLabels, path + " carries no gold labels");
    return *gold;
  }
  return load_labeling(path);
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path, std::ostream& out) {
  require_file(pred_path, "prediction");
  require_file(gold_path, "gold");
  const Labeling pred = load_labeling(pred_path);
  const Labeling gold = load_gold(gold_path);
  out << format_metrics(hungarian_accuracy(pred, gold), nmi(pred, gold)) << '\n';
  return 0;
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Input: return 2;
    case ErrorCategory::Numeric: return 3;
    case ErrorCategory::Worker: return 4;
  }
  return 3;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Short text clustering with iterative classification"};
  app.require_subcommand(1);
  Flags f;

  auto* stats = app.add_subcommand("stats", "print K, N and mean words per document");
  stats->add_option("--config", f.config, "JSON run configuration");
  stats->add_option("--corpus", f.corpus, "corpus TSV");
  stats->add_option("--k", f.k, "declared number of clusters");

  auto* cluster = app.add_subcommand("cluster", "initial clustering");
  add_data_flags(cluster, f);
  add_cluster_flags(cluster, f);

  auto* enh = app.add_subcommand("enhance", "improve a clustering by iterative classification");
  add_data_flags(enh, f);
  add_cluster_flags(enh, f);
  enh->add_option("--initial", f.initial, "initial labeling TSV (otherwise cluster first)");
  enh->add_option("--classifier", f.classifier, "mlr | external");
  enh->add_option("--worker-cmd", f.worker_cmd, "external worker command line");
  enh->add_option("--epochs", f.epochs, "worker epochs per iteration");
  enh->add_option("--learning-rate", f.learning_rate, "worker learning rate");
  enh->add_option("--timeout", f.timeout, "worker response timeout in seconds");
  enh->add_flag("--warm-start", f.warm_start, "resume worker weights across iterations");
  enh->add_option("--t-max", f.t_max, "maximum iterations");
  enh->add_option("--p1", f.p1, "lower bound of the sampled cap fraction");
  enh->add_option("--p2", f.p2, "upper bound of the sampled cap fraction");
  enh->add_option("--stopping", f.stopping, "none | epsilon | min-delta");
  enh->add_option("--epsilon", f.epsilon, "threshold for the epsilon criterion");
  enh->add_option("--outlier", f.outlier, "if | lof");
  enh->add_option("--contamination", f.contamination, "outlier fraction per cluster");
  enh->add_option("--if-trees", f.if_trees, "isolation trees");
  enh->add_option("--if-subsample", f.if_subsample, "isolation tree subsample size");
  enh->add_option("--lof-neighbors", f.lof_neighbors, "LOF neighborhood size");
  enh->add_option("--l2", f.l2, "MLR L2 strength");
  enh->add_option("--mlr-epochs", f.mlr_epochs, "MLR maximum epochs");
  enh->add_option("--mlr-tol", f.mlr_tol, "MLR gradient tolerance");
  enh->add_option("--runs", f.runs, "repeat with seeds seed..seed+runs-1");
  enh->add_option("--report", f.report, "report JSON path");

  std::string pred_path, gold_path;
  auto* eval = app.add_subcommand("eval", "accuracy and NMI of a labeling against gold labels");
  eval->add_option("pred", pred_path, "predicted labeling TSV")->required();
  eval->add_option("gold", gold_path, "gold labeling TSV or labeled corpus TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (stats->parsed()) return cmd_stats(f, out);
    if (cluster->parsed()) return cmd_cluster(f, out);
    if (enh->parsed()) return cmd_enhance(f, out, err);
    if (eval->parsed()) return cmd_eval(pred_path, gold_path, out);
  } catch (const Error& e) {
    err << "stc: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "stc: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace stc::cli
