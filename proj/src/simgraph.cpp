#include "stc/simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>

#include "stc/error.hpp"

namespace stc {

SimMatrix::SimMatrix(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) throw Error(Errc::DimensionMismatch, "similarity matrix must be square");
  values_.diagonal().setOnes();
}

std::size_t SparseSimMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  return total;
}

const SimEntry* SparseSimMatrix::find(int i, int j) const {
  const auto& r = rows[static_cast<std::size_t>(i)];
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const SimEntry& e, int c) { return e.col < c; });
  return it != r.end() && it->col == j ? &*it : nullptr;
}

SimMatrix cosine_matrix(const EmbeddingMatrix& x) {
  const Eigen::VectorXd norms = x.data().rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) throw Error(Errc::ZeroRow, "zero-norm embedding row " + std::to_string(i));
  }
  RowMatrix unit = x.data().array().colwise() / norms.array();
  RowMatrix sims = unit * unit.transpose();
  // Exact symmetry regardless of GEMM summation order.
  for (Eigen::Index i = 0; i < sims.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < sims.cols(); ++j) {
      const double v = std::clamp(sims(i, j), -1.0, 1.0);
      sims(i, j) = v;
      sims(j, i) = v;
    }
  }
  return SimMatrix(std::move(sims));
}

int row_budget(int n, int k) {
  if (n < 2 || k < 1) throw Error(Errc::OutOfRange, "row budget needs n >= 2 and k >= 1");
  return std::clamp(n / k, 1, n - 1);
}

namespace {

void check_budget(const SimMatrix& s, int budget) {
  if (budget < 1 || budget > s.n() - 1) {
    throw Error(Errc::OutOfRange, "row budget " + std::to_string(budget) + " outside [1, " +
                                      std::to_string(s.n() - 1) + "]");
  }
}

// Strict total order: similarity descending, then lower column index.
struct RankOrder {
  const SimMatrix& s;
  int row;
  bool operator()(int a, int b) const {
    const double sa = s(row, a), sb = s(row, b);
    return sa != sb ? sa > sb : a < b;
  }
};

// The `count` best columns of `pool` for row i, sorted by column index.
std::vector<int> top_columns(const SimMatrix& s, int i, std::vector<int> pool, int count) {
  const auto mid = pool.begin() + std::min<std::ptrdiff_t>(count, static_cast<std::ptrdiff_t>(pool.size()));
  std::partial_sort(pool.begin(), mid, pool.end(), RankOrder{s, i});
  pool.erase(mid, pool.end());
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> off_diagonal(int n, int i) {
  std::vector<int> cols;
  cols.reserve(static_cast<std::size_t>(n - 1));
  for (int j = 0; j < n; ++j) {
    if (j != i) cols.push_back(j);
  }
  return cols;
}

}  // namespace

std::vector<std::vector<int>> select_knn(const SimMatrix& s, int budget) {
  check_budget(s, budget);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(s.n()));
  for (int i = 0; i < s.n(); ++i) out[static_cast<std::size_t>(i)] = top_columns(s, i, off_diagonal(s.n(), i), budget);
  return out;
}

std::vector<double> simdist_thresholds(const SimMatrix& s) {
  const int n = s.n();
  std::vector<double> thresholds(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) mean += s(i, j);
    }
    mean /= n - 1;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) var += (s(i, j) - mean) * (s(i, j) - mean);
    }
    thresholds[static_cast<std::size_t>(i)] = mean + std::sqrt(var / (n - 1));
  }
  return thresholds;
}

std::vector<std::vector<int>> select_simdist(const SimMatrix& s, int budget) {
  check_budget(s, budget);
  const int n = s.n();
  const auto thresholds = simdist_thresholds(s);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // A neighbor is a candidate when the pair stands out in both endpoints'
    // similarity distributions.
    std::vector<int> candidates, rest;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = s(i, j);
      if (v > thresholds[static_cast<std::size_t>(i)] && v > thresholds[static_cast<std::size_t>(j)]) {
        candidates.push_back(j);
      } else {
        rest.push_back(j);
      }
    }
    const int from_candidates = std::min<int>(budget, static_cast<int>(candidates.size()));
    auto kept = top_columns(s, i, std::move(candidates), from_candidates);
    if (from_candidates < budget) {
      auto fill = top_columns(s, i, std::move(rest), budget - from_candidates);
      kept.insert(kept.end(), fill.begin(), fill.end());
      std::sort(kept.begin(), kept.end());
    }
    out[static_cast<std::size_t>(i)] = std::move(kept);
  }
  return out;
}

SparseSimMatrix symmetrize(const SimMatrix& s, const std::vector<std::vector<int>>& selected, int budget) {
  const int n = s.n();
  SparseSimMatrix out;
  out.n = n;
  out.row_budget = budget;
  out.rows.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j : selected[static_cast<std::size_t>(i)]) {
      // (i, j) and (j, i) hold the same value once the input is symmetric;
      // take the max so a slightly asymmetric input still yields equal pairs.
      const double v = std::max(s(i, j), s(j, i));
      out.rows[static_cast<std::size_t>(i)].push_back({j, v});
      out.rows[static_cast<std::size_t>(j)].push_back({i, v});
    }
  }
  for (auto& row : out.rows) {
    std::sort(row.begin(), row.end(), [](const SimEntry& a, const SimEntry& b) { return a.col < b.col; });
    row.erase(std::unique(row.begin(), row.end(), [](const SimEntry& a, const SimEntry& b) { return a.col == b.col; }),
              row.end());
  }
  return out;
}

SparseSimMatrix sparsify_knn(const SimMatrix& s, int budget) { return symmetrize(s, select_knn(s, budget), budget); }

SparseSimMatrix sparsify_simdist(const SimMatrix& s, int budget) {
  return symmetrize(s, select_simdist(s, budget), budget);
}

void dump_sparse(const SparseSimMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  out << std::setprecision(17);
  for (int i = 0; i < m.n; ++i) {
    for (const auto& e : m.rows[static_cast<std::size_t>(i)]) out << i << '\t' << e.col << '\t' << e.sim << '\n';
  }
}

}  // namespace stc
