#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stc/classifier.hpp"
#include "stc/corpus.hpp"
#include "stc/error.hpp"
#include "stc/labeling.hpp"
#include "stc/outlier.hpp"
#include "stc/worker.hpp"

namespace stc {

enum class StoppingMode { None, Epsilon, MinDelta };
enum class ClassifierKind { Mlr, External };

StoppingMode parse_stopping(std::string_view name);
std::string_view to_string(StoppingMode mode);
ClassifierKind parse_classifier(std::string_view name);
std::string_view to_string(ClassifierKind kind);

struct EcicConfig {
  int t_max = 50;
  double p1 = 0.75;
  double p2 = 0.95;
  StoppingMode stopping = StoppingMode::None;
  double epsilon = 0.05;
  OutlierConfig outlier;
  ClassifierKind classifier = ClassifierKind::Mlr;
  MlrOptions mlr;
  ExternalClassifierConfig external;
  std::uint64_t seed = 0;

  void validate() const;
};

// Mean absolute change of cluster sizes: (1/N) sum_i |c_i - c'_i|.
double delta(const Labeling& current, const Labeling& previous);

struct TrainTestSplit {
  std::vector<int> train_ids;  // ascending
  std::vector<int> test_ids;   // ascending
  int capped = 0;              // samples moved to test by the size cap
  std::vector<std::string> warnings;
};

// ceil(p * N / K) with a guard against representation error.
int cluster_cap(double p, int n, int k);

// Outliers go to test; clusters whose remaining size exceeds ceil(p N / K)
// lose uniformly random members to test until they hit the cap. A cluster
// made entirely of outliers keeps its most inlying member in train.
TrainTestSplit split_train_test(const Labeling& labeling, const OutlierMask& mask, double p, std::uint64_t seed);

// The classifier arm of one iteration: learn from the train ids under the
// current labels, predict the test ids.
class IterationClassifier {
 public:
  virtual ~IterationClassifier() = default;
  // Returns one label per split.test_ids entry, in the same order.
  virtual std::vector<int> train_predict(const TrainTestSplit& split, const Labeling& current, int iteration) = 0;
};

// MLR on embedding rows. Classes missing from the train set are dropped for
// that iteration and can only be re-entered by later predictions.
class MlrIterationClassifier : public IterationClassifier {
 public:
  MlrIterationClassifier(const EmbeddingMatrix& x, MlrOptions options) : x_(x), options_(options) {}
  std::vector<int> train_predict(const TrainTestSplit& split, const Labeling& current, int iteration) override;

 private:
  const EmbeddingMatrix& x_;
  MlrOptions options_;
};

// Raw texts through an external worker.
class ExternalIterationClassifier : public IterationClassifier {
 public:
  ExternalIterationClassifier(const Corpus& corpus, ExternalClassifier& worker) : corpus_(corpus), worker_(worker) {}
  std::vector<int> train_predict(const TrainTestSplit& split, const Labeling& current, int iteration) override;

 private:
  const Corpus& corpus_;
  ExternalClassifier& worker_;
};

struct IterationRecord {
  int iteration = 0;
  double p_sampled = 0.0;
  double delta = 0.0;
  std::vector<int> cluster_sizes;
  int train_size = 0;
  int test_size = 0;
  int outliers = 0;
  std::optional<double> accuracy;
  std::optional<double> nmi;
  std::vector<std::string> warnings;
};

enum class StopReason { Criterion, MaxIterations, Aborted };
std::string_view to_string(StopReason reason);

struct EnhanceReport {
  Labeling initial;
  Labeling final;
  std::vector<IterationRecord> history;
  StopReason stop_reason = StopReason::MaxIterations;
  // Iteration whose labeling is `final` (0 = the initial labeling).
  int selected_iteration = 0;
  std::optional<double> initial_accuracy, initial_nmi;
  std::optional<double> final_accuracy, final_nmi;
  std::uint64_t seed = 0;
  std::string error;  // set when aborted
};

// Thrown when the classifier fails mid-run; carries the history so far.
class EnhanceAborted : public Error {
 public:
  EnhanceAborted(const Error& cause, EnhanceReport partial)
      : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}
  const EnhanceReport& partial() const { return partial_; }

 private:
  EnhanceReport partial_;
};

// Runs the iterative outlier-removal / classification / relabeling loop.
EnhanceReport enhance(const Corpus& corpus, const EmbeddingMatrix& x, const Labeling& initial, const EcicConfig& cfg,
                      IterationClassifier& classifier);
// Builds the classifier from cfg (MLR, or a worker launched for this run).
EnhanceReport enhance(const Corpus& corpus, const EmbeddingMatrix& x, const Labeling& initial, const EcicConfig& cfg);

// Report as pretty-printed JSON; final_labeling_path is recorded verbatim.
std::string report_to_json(const EnhanceReport& report, const std::string& final_labeling_path = "");

}  // namespace stc
