#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "stc/corpus.hpp"
#include "stc/labeling.hpp"
#include "stc/simgraph.hpp"

namespace stc {

// ---------------------------------------------------------------- k-means

struct KMeansOptions {
  int n_init = 10;
  int max_iter = 300;
  std::uint64_t seed = 0;
  // Restarts run on up to this many threads; the result does not depend on it.
  int threads = 1;
  // Keep the per-iteration inertia of every restart.
  bool record_trace = false;
};

struct KMeansResult {
  Labeling labeling;
  double inertia = 0.0;  // sum of squared distances to cluster means
  int best_restart = 0;
  RowMatrix centers;
  // traces[r][t] = inertia after the t-th assignment step of restart r.
  std::vector<std::vector<double>> traces;
};

// k-means++ seeding followed by Lloyd iterations, best of n_init restarts.
// Restart r draws from its own stream seeded with seed + r.
KMeansResult kmeans(const RowMatrix& x, int k, const KMeansOptions& options = {});
inline KMeansResult kmeans(const EmbeddingMatrix& x, int k, const KMeansOptions& options = {}) {
  return kmeans(x.data(), k, options);
}

// Sum of squared distances from each row to the mean of its cluster.
double inertia(const RowMatrix& x, const Labeling& labeling);

// ---------------------------------------------------------------- HAC

enum class Linkage { Single, Complete, Average, Ward };

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage linkage);

// Upper triangle of a symmetric distance matrix with zero diagonal.
class CondensedDistance {
 public:
  explicit CondensedDistance(int n = 0);

  int n() const { return n_; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  void set(int i, int j, double d) { values_[index(i, j)] = d; }

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j), m = static_cast<std::size_t>(n_);
    return a * m - a * (a + 1) / 2 + (b - a - 1);
  }

  int n_;
  std::vector<double> values_;
};

// d = 1 - s.
CondensedDistance distances_from(const SimMatrix& s);
// d = 1 - s for stored entries, 2.0 (the cosine-distance maximum) otherwise.
CondensedDistance distances_from(const SparseSimMatrix& s);

// One agglomeration step. Clusters are identified by their smallest member
// index, so a < b and the merged cluster keeps id a.
struct Merge {
  int a = 0;
  int b = 0;
  double height = 0.0;
  int size = 0;
};

// Lance-Williams agglomeration from singletons. Each step merges the closest
// pair; ties go to the lexicographically smallest (a, b). Stops after
// max_merges steps (negative: run to a single cluster).
std::vector<Merge> agglomerate(CondensedDistance d, Linkage linkage, int max_merges = -1);

// Applies the first n - k merges; cluster labels are numbered by ascending
// smallest member.
Labeling cut_dendrogram(int n, const std::vector<Merge>& merges, int k);

Labeling hac(const CondensedDistance& d, int k, Linkage linkage);
Labeling hac(const SimMatrix& s, int k, Linkage linkage);
Labeling hac(const SparseSimMatrix& s, int k, Linkage linkage);

// ---------------------------------------------------------------- spectral

// Symmetric-normalized spectral clustering on max(s, 0) without self loops:
// eigenvectors of the k smallest eigenvalues of I - D^-1/2 W D^-1/2, rows
// normalized, clustered by k-means with 10 restarts.
Labeling spectral(const SimMatrix& s, int k, std::uint64_t seed, int threads = 1);

}  // namespace stc
