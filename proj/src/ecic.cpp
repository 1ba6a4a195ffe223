#include "stc/ecic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "stc/evalmetrics.hpp"
#include "stc/rng.hpp"

namespace stc {

StoppingMode parse_stopping(std::string_view name) {
  if (name == "none") return StoppingMode::None;
  if (name == "epsilon") return StoppingMode::Epsilon;
  if (name == "min-delta" || name == "min_delta") return StoppingMode::MinDelta;
  throw Error(Errc::BadConfig, "unknown stopping criterion '" + std::string(name) + "'");
}

std::string_view to_string(StoppingMode mode) {
  switch (mode) {
    case StoppingMode::None: return "none";
    case StoppingMode::Epsilon: return "epsilon";
    case StoppingMode::MinDelta: return "min_delta";
  }
  return "?";
}

ClassifierKind parse_classifier(std::string_view name) {
  if (name == "mlr") return ClassifierKind::Mlr;
  if (name == "external") return ClassifierKind::External;
  throw Error(Errc::BadConfig, "unknown classifier '" + std::string(name) + "'");
}

std::string_view to_string(ClassifierKind kind) { return kind == ClassifierKind::Mlr ? "mlr" : "external"; }

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Criterion: return "criterion";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Aborted: return "aborted";
  }
  return "?";
}

void EcicConfig::validate() const {
  if (t_max < 1) throw Error(Errc::BadConfig, "t_max must be >= 1");
  if (!(p1 > 0.0 && p1 <= p2 && p2 <= 1.0)) throw Error(Errc::BadConfig, "need 0 < p1 <= p2 <= 1");
  if (stopping == StoppingMode::Epsilon && !(epsilon > 0.0)) throw Error(Errc::BadConfig, "epsilon must be > 0");
  outlier.validate();
  if (classifier == ClassifierKind::External) external.validate();
}

double delta(const Labeling& current, const Labeling& previous) {
  if (current.size() != previous.size()) throw Error(Errc::LengthMismatch, "delta needs labelings of equal length");
  if (current.size() == 0) throw Error(Errc::LengthMismatch, "delta of empty labelings");
  const int k = std::max(current.k, previous.k);
  std::vector<long long> now(static_cast<std::size_t>(k), 0), before(static_cast<std::size_t>(k), 0);
  for (int l : current.labels) ++now[static_cast<std::size_t>(l)];
  for (int l : previous.labels) ++before[static_cast<std::size_t>(l)];
  long long total = 0;
  for (int c = 0; c < k; ++c) total += std::llabs(now[static_cast<std::size_t>(c)] - before[static_cast<std::size_t>(c)]);
  return static_cast<double>(total) / static_cast<double>(current.size());
}

int cluster_cap(double p, int n, int k) {
  return std::max(1, static_cast<int>(std::ceil(p * n / k - 1e-9)));
}

TrainTestSplit split_train_test(const Labeling& labeling, const OutlierMask& mask, double p, std::uint64_t seed) {
  const int n = labeling.size();
  if (static_cast<int>(mask.is_outlier.size()) != n) throw Error(Errc::LengthMismatch, "outlier mask length differs");
  const int cap = cluster_cap(p, n, labeling.k);
  Rng rng(seed);

  std::vector<std::vector<int>> members(static_cast<std::size_t>(labeling.k));
  for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(labeling[i])].push_back(i);

  TrainTestSplit split;
  std::vector<bool> to_test(static_cast<std::size_t>(n), false);
  for (int c = 0; c < labeling.k; ++c) {
    const auto& ids = members[static_cast<std::size_t>(c)];
    if (ids.empty()) continue;
    std::vector<int> kept;
    for (int i : ids) {
      if (mask.is_outlier[static_cast<std::size_t>(i)]) {
        to_test[static_cast<std::size_t>(i)] = true;
      } else {
        kept.push_back(i);
      }
    }
    if (kept.empty()) {
      // Keep the member with the lowest anomaly score (NaN scores rank last).
      int best = ids.front();
      for (int i : ids) {
        const double s = mask.scores[static_cast<std::size_t>(i)];
        const double b = mask.scores[static_cast<std::size_t>(best)];
        if (!std::isnan(s) && (std::isnan(b) || s < b)) best = i;
      }
      to_test[static_cast<std::size_t>(best)] = false;
      split.warnings.push_back("cluster " + std::to_string(c) + " is all outliers; kept id " + std::to_string(best) +
                               " in train");
      continue;
    }
    const int excess = static_cast<int>(kept.size()) - cap;
    // Partial Fisher-Yates: the first `excess` positions become the removed set.
    for (int r = 0; r < excess; ++r) {
      const auto j = static_cast<std::size_t>(r) + rng.below(kept.size() - static_cast<std::size_t>(r));
      std::swap(kept[static_cast<std::size_t>(r)], kept[j]);
      to_test[static_cast<std::size_t>(kept[static_cast<std::size_t>(r)])] = true;
      ++split.capped;
    }
  }
  for (int i = 0; i < n; ++i) (to_test[static_cast<std::size_t>(i)] ? split.test_ids : split.train_ids).push_back(i);
  return split;
}

std::vector<int> MlrIterationClassifier::train_predict(const TrainTestSplit& split, const Labeling& current, int) {
  // Compact the classes present in train to 0..m-1.
  std::vector<int> to_compact(static_cast<std::size_t>(current.k), -1), to_label;
  for (int id : split.train_ids) {
    int& slot = to_compact[static_cast<std::size_t>(current[id])];
    if (slot < 0) slot = 0;
  }
  for (int c = 0; c < current.k; ++c) {
    if (to_compact[static_cast<std::size_t>(c)] >= 0) {
      to_compact[static_cast<std::size_t>(c)] = static_cast<int>(to_label.size());
      to_label.push_back(c);
    }
  }
  if (split.test_ids.empty()) return {};
  if (to_label.size() == 1) return std::vector<int>(split.test_ids.size(), to_label.front());

  RowMatrix train(static_cast<Eigen::Index>(split.train_ids.size()), x_.d());
  std::vector<int> y;
  y.reserve(split.train_ids.size());
  for (std::size_t r = 0; r < split.train_ids.size(); ++r) {
    train.row(static_cast<Eigen::Index>(r)) = x_.row(split.train_ids[r]);
    y.push_back(to_compact[static_cast<std::size_t>(current[split.train_ids[r]])]);
  }
  RowMatrix test(static_cast<Eigen::Index>(split.test_ids.size()), x_.d());
  for (std::size_t r = 0; r < split.test_ids.size(); ++r) test.row(static_cast<Eigen::Index>(r)) = x_.row(split.test_ids[r]);

  const MlrModel model = mlr_train(train, y, static_cast<int>(to_label.size()), options_);
  auto predicted = mlr_predict(model, test);
  for (int& p : predicted) p = to_label[static_cast<std::size_t>(p)];
  return predicted;
}

std::vector<int> ExternalIterationClassifier::train_predict(const TrainTestSplit& split, const Labeling& current,
                                                            int iteration) {
  std::vector<LabeledText> train;
  train.reserve(split.train_ids.size());
  for (int id : split.train_ids) train.push_back({id, corpus_[id].text, current[id]});
  std::vector<UnlabeledText> test;
  test.reserve(split.test_ids.size());
  for (int id : split.test_ids) test.push_back({id, corpus_[id].text});
  const auto predictions = worker_.train_predict(train, test, iteration);
  std::vector<int> labels;
  labels.reserve(predictions.size());
  for (const auto& p : predictions) labels.push_back(p.label);
  return labels;
}

EnhanceReport enhance(const Corpus& corpus, const EmbeddingMatrix& x, const Labeling& initial, const EcicConfig& cfg,
                      IterationClassifier& classifier) {
  cfg.validate();
  const int n = initial.size();
  if (n != x.n() || n != corpus.size()) throw Error(Errc::LengthMismatch, "corpus, embeddings and labeling sizes differ");

  std::optional<Labeling> gold;
  if (corpus.has_gold()) gold = Labeling(corpus.gold_labels(), std::max(2, corpus.gold_classes()));

  EnhanceReport report;
  report.initial = initial;
  report.seed = cfg.seed;
  if (gold) {
    report.initial_accuracy = hungarian_accuracy(initial, *gold);
    report.initial_nmi = nmi(initial, *gold);
  }

  Labeling current = initial;
  Labeling best = initial;  // labeling at the running minimum delta
  double best_delta = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  auto finish = [&](StopReason reason, const Labeling& final_labeling, int selected) {
    report.stop_reason = reason;
    report.final = final_labeling;
    report.selected_iteration = selected;
    if (gold) {
      report.final_accuracy = hungarian_accuracy(final_labeling, *gold);
      report.final_nmi = nmi(final_labeling, *gold);
    }
  };

  for (int t = 1; t <= cfg.t_max; ++t) {
    const auto step = static_cast<std::uint64_t>(t);
    Rng sampler(substream_seed(cfg.seed, "sample", step));
    IterationRecord rec;
    rec.iteration = t;
    rec.p_sampled = sampler.uniform(cfg.p1, cfg.p2);

    OutlierConfig ocfg = cfg.outlier;
    ocfg.seed = substream_seed(cfg.seed, "outlier", step);
    const OutlierMask mask = detect_outliers(x, current, ocfg);
    const TrainTestSplit split = split_train_test(current, mask, rec.p_sampled, substream_seed(cfg.seed, "split", step));

    std::vector<int> predicted;
    try {
      predicted = classifier.train_predict(split, current, t);
    } catch (const Error& e) {
      finish(StopReason::Aborted, current, t - 1);
      report.error = e.what();
      throw EnhanceAborted(e, std::move(report));
    }
    if (predicted.size() != split.test_ids.size()) {
      throw Error(Errc::IncompleteResponse, "classifier returned " + std::to_string(predicted.size()) +
                                                " predictions for " + std::to_string(split.test_ids.size()) + " test samples");
    }

    Labeling next = current;
    for (std::size_t r = 0; r < predicted.size(); ++r) {
      if (predicted[r] < 0 || predicted[r] >= current.k) throw Error(Errc::OutOfRange, "predicted label out of range");
      next.labels[static_cast<std::size_t>(split.test_ids[r])] = predicted[r];
    }

    rec.delta = delta(next, current);
    rec.cluster_sizes = next.cluster_sizes();
    rec.train_size = static_cast<int>(split.train_ids.size());
    rec.test_size = static_cast<int>(split.test_ids.size());
    rec.outliers = mask.count();
    rec.warnings = split.warnings;
    if (gold) {
      rec.accuracy = hungarian_accuracy(next, *gold);
      rec.nmi = nmi(next, *gold);
    }
    report.history.push_back(std::move(rec));
    current = std::move(next);
    const double d = report.history.back().delta;

    if (cfg.stopping == StoppingMode::Epsilon && d < cfg.epsilon) {
      finish(StopReason::Criterion, current, t);
      return report;
    }
    if (cfg.stopping == StoppingMode::MinDelta) {
      if (d > best_delta) {
        finish(StopReason::Criterion, best, best_iteration);
        return report;
      }
      best_delta = d;
      best = current;
      best_iteration = t;
    }
  }
  if (cfg.stopping == StoppingMode::MinDelta) {
    finish(StopReason::MaxIterations, best, best_iteration);
  } else {
    finish(StopReason::MaxIterations, current, cfg.t_max);
  }
  return report;
}

EnhanceReport enhance(const Corpus& corpus, const EmbeddingMatrix& x, const Labeling& initial, const EcicConfig& cfg) {
  cfg.validate();
  if (cfg.classifier == ClassifierKind::Mlr) {
    MlrIterationClassifier mlr(x, cfg.mlr);
    return enhance(corpus, x, initial, cfg, mlr);
  }
  std::optional<ExternalClassifier> worker;
  try {
    worker.emplace(cfg.external, initial.k);
  } catch (const Error& e) {
    EnhanceReport partial;
    partial.initial = initial;
    partial.final = initial;
    partial.seed = cfg.seed;
    partial.stop_reason = StopReason::Aborted;
    partial.error = e.what();
    throw EnhanceAborted(e, std::move(partial));
  }
  ExternalIterationClassifier external(corpus, *worker);
  EnhanceReport report = enhance(corpus, x, initial, cfg, external);
  worker->shutdown();
  return report;
}

}  // namespace stc
