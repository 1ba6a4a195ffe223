// In-process classifiers with known behavior for driving the loop.
#pragma once

#include <stdexcept>
#include <vector>

#include "stc/ecic.hpp"

namespace stc::testing {

// Returns the gold label of every test sample.
class OracleClassifier : public IterationClassifier {
 public:
  explicit OracleClassifier(std::vector<int> gold) : gold_(std::move(gold)) {}
  std::vector<int> train_predict(const TrainTestSplit& split, const Labeling&, int) override {
    std::vector<int> out;
    for (int id : split.test_ids) out.push_back(gold_[static_cast<std::size_t>(id)]);
    return out;
  }

 private:
  std::vector<int> gold_;
};

// Moves the first moves[t-1] test samples of cluster 0 into cluster 1, so
// iteration t has delta = 2 * moves[t-1] / N.
class ScriptedClassifier : public IterationClassifier {
 public:
  explicit ScriptedClassifier(std::vector<int> moves) : moves_(std::move(moves)) {}
  std::vector<int> train_predict(const TrainTestSplit& split, const Labeling& current, int iteration) override {
    int remaining = moves_.at(static_cast<std::size_t>(iteration - 1));
    std::vector<int> out;
    for (int id : split.test_ids) {
      int label = current[id];
      if (label == 0 && remaining > 0) {
        label = 1;
        --remaining;
      }
      out.push_back(label);
    }
    if (remaining != 0) throw std::logic_error("not enough cluster-0 test samples to move");
    return out;
  }

 private:
  std::vector<int> moves_;
};

// Echoes the current labels until iteration fail_at, then times out.
class FailingClassifier : public IterationClassifier {
 public:
  explicit FailingClassifier(int fail_at) : fail_at_(fail_at) {}
  std::vector<int> train_predict(const TrainTestSplit& split, const Labeling& current, int iteration) override {
    if (iteration == fail_at_) throw Error(Errc::WorkerTimeout, "worker did not answer");
    std::vector<int> out;
    for (int id : split.test_ids) out.push_back(current[id]);
    return out;
  }

 private:
  int fail_at_;
};

}  // namespace stc::testing
