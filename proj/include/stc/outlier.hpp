#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/labeling.hpp"

namespace stc {

enum class OutlierMethod { IsolationForest, Lof };

OutlierMethod parse_outlier_method(std::string_view name);
std::string_view to_string(OutlierMethod method);

struct OutlierConfig {
  OutlierMethod method = OutlierMethod::IsolationForest;
  double contamination = 0.1;  // in (0, 0.5]
  int if_trees = 100;
  int if_subsample = 256;
  int lof_neighbors = 20;
  std::uint64_t seed = 0;

  void validate() const;
  // Clusters below this size are left without outliers.
  int min_cluster_size() const { return std::max(lof_neighbors + 1, 3); }
};

struct OutlierMask {
  std::vector<bool> is_outlier;
  // Anomaly score per sample (higher is more anomalous); NaN for samples of
  // clusters too small to score.
  std::vector<double> scores;

  int count() const;
};

// Average path length of an unsuccessful BST search over m points.
double average_path_length(double m);

// Isolation Forest scores 2^(-E[h(x)] / c(psi)) for the rows of one cluster.
std::vector<double> isolation_forest_scores(const RowMatrix& xc, const OutlierConfig& cfg);

// Local Outlier Factor with k = cfg.lof_neighbors; the k-distance
// neighborhood includes every point tied at the k-distance.
std::vector<double> lof_scores(const RowMatrix& xc, const OutlierConfig& cfg);

// Flags the ceil(contamination * |cluster|) highest-scoring members of each
// cluster, ties to the lower id. Cluster c is scored with seed
// substream(cfg.seed, "outlier", c).
OutlierMask detect_outliers(const EmbeddingMatrix& x, const Labeling& labeling, const OutlierConfig& cfg);

// ceil(contamination * size) with a guard against representation error.
int outlier_quota(double contamination, int size);

}  // namespace stc
