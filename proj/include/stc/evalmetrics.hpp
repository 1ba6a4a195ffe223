#pragma once

#include <span>
#include <vector>

#include "stc/labeling.hpp"

namespace stc {

// counts(r, c) = |{i : pred(i) = r, gold(i) = c}|
struct ConfusionMatrix {
  int rows = 0;  // predicted clusters
  int cols = 0;  // gold classes
  long long n = 0;
  std::vector<long long> counts;

  long long operator()(int r, int c) const {
    return counts[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
  }
};

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> gold);

// Minimum-cost perfect matching on a square cost matrix (row-major, n x n);
// returns the column assigned to each row.
std::vector<int> linear_assignment(const std::vector<double>& cost, int n);

// Normalized mutual information with arithmetic-mean normalization, natural logs.
double nmi(std::span<const int> a, std::span<const int> b);
// Accuracy under the best one-to-one mapping of predicted clusters to gold classes.
double hungarian_accuracy(std::span<const int> pred, std::span<const int> gold);

inline double nmi(const Labeling& a, const Labeling& b) { return nmi(a.labels, b.labels); }
inline double hungarian_accuracy(const Labeling& pred, const Labeling& gold) {
  return hungarian_accuracy(pred.labels, gold.labels);
}

}  // namespace stc
