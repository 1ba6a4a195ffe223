#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "stc/corpus.hpp"

namespace stc {

// Dense symmetric similarity matrix with unit diagonal.
class SimMatrix {
 public:
  SimMatrix() = default;
  // Takes arbitrary symmetric values (used for custom kernels); the diagonal
  // is forced to 1.
  explicit SimMatrix(RowMatrix values);

  int n() const { return static_cast<int>(values_.rows()); }
  double operator()(int i, int j) const { return values_(i, j); }
  const RowMatrix& values() const { return values_; }

 private:
  RowMatrix values_;
};

struct SimEntry {
  int col = 0;
  double sim = 0.0;
  friend bool operator==(const SimEntry&, const SimEntry&) = default;
};

// Row-sparsified similarity graph. rows[i] is sorted by column and never
// holds the diagonal.
struct SparseSimMatrix {
  int n = 0;
  int row_budget = 0;
  std::vector<std::vector<SimEntry>> rows;

  std::size_t nnz() const;
  // Similarity of (i, j) if stored.
  const SimEntry* find(int i, int j) const;
};

SimMatrix cosine_matrix(const EmbeddingMatrix& x);

// floor(N / K), at least 1 and at most N - 1.
int row_budget(int n, int k);

// Per-row selections before symmetrization: each row holds exactly
// min(L, n-1) column indices, sorted ascending.
std::vector<std::vector<int>> select_knn(const SimMatrix& s, int budget);
// Similarity-distribution selection: row i first takes columns j whose
// similarity exceeds both mu_i + sigma_i and mu_j + sigma_j (mean and standard
// deviation of each row's off-diagonal similarities), the largest L of them
// if there are more; short rows are filled with the next-largest remaining
// similarities.
std::vector<std::vector<int>> select_simdist(const SimMatrix& s, int budget);
// Per-row mu_i + sigma_i (population standard deviation over off-diagonal entries).
std::vector<double> simdist_thresholds(const SimMatrix& s);

// Union symmetrization of per-row selections.
SparseSimMatrix symmetrize(const SimMatrix& s, const std::vector<std::vector<int>>& selected, int budget);

SparseSimMatrix sparsify_knn(const SimMatrix& s, int budget);
SparseSimMatrix sparsify_simdist(const SimMatrix& s, int budget);

// TSV triples "i<TAB>j<TAB>sim", one per stored entry.
void dump_sparse(const SparseSimMatrix& m, const std::filesystem::path& path);

}  // namespace stc
