#include "stc/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stc/error.hpp"

namespace stc {

namespace {

void check_lengths(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, "labelings differ in length (" + std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error(Errc::LengthMismatch, "labelings are empty");
}

int label_span(std::span<const int> labels) {
  int top = -1;
  for (int l : labels) {
    if (l < 0) throw Error(Errc::OutOfRange, "negative label " + std::to_string(l));
    top = std::max(top, l);
  }
  return top + 1;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> gold) {
  check_lengths(pred, gold);
  ConfusionMatrix m;
  m.rows = label_span(pred);
  m.cols = label_span(gold);
  m.n = static_cast<long long>(pred.size());
  m.counts.assign(static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++m.counts[static_cast<std::size_t>(pred[i]) * static_cast<std::size_t>(m.cols) + static_cast<std::size_t>(gold[i])];
  }
  return m;
}

std::vector<int> linear_assignment(const std::vector<double>& cost, int n) {
  // Shortest augmenting path with potentials (Kuhn-Munkres), O(n^3).
  // 1-based internally; column 0 is the virtual source.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto at = [&](int r, int c) {
    return cost[static_cast<std::size_t>(r - 1) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c - 1)];
  };
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), kInf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(col0)] = true;
      const int r0 = match[static_cast<std::size_t>(col0)];
      double delta = kInf;
      int col1 = 0;
      for (int c = 1; c <= n; ++c) {
        if (used[static_cast<std::size_t>(c)]) continue;
        const double reduced = at(r0, c) - u[static_cast<std::size_t>(r0)] - v[static_cast<std::size_t>(c)];
        if (reduced < minv[static_cast<std::size_t>(c)]) {
          minv[static_cast<std::size_t>(c)] = reduced;
          way[static_cast<std::size_t>(c)] = col0;
        }
        if (minv[static_cast<std::size_t>(c)] < delta) {
          delta = minv[static_cast<std::size_t>(c)];
          col1 = c;
        }
      }
      for (int c = 0; c <= n; ++c) {
        if (used[static_cast<std::size_t>(c)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(c)])] += delta;
          v[static_cast<std::size_t>(c)] -= delta;
        } else {
          minv[static_cast<std::size_t>(c)] -= delta;
        }
      }
      col0 = col1;
    } while (match[static_cast<std::size_t>(col0)] != 0);
    do {
      const int col1 = way[static_cast<std::size_t>(col0)];
      match[static_cast<std::size_t>(col0)] = match[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int c = 1; c <= n; ++c) row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(c)] - 1)] = c - 1;
  return row_to_col;
}

double hungarian_accuracy(std::span<const int> pred, std::span<const int> gold) {
  const ConfusionMatrix m = confusion(pred, gold);
  const int size = std::max(m.rows, m.cols);
  // Zero-padded to square; maximizing matches = minimizing negated counts.
  std::vector<double> cost(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      cost[static_cast<std::size_t>(r) * static_cast<std::size_t>(size) + static_cast<std::size_t>(c)] =
          -static_cast<double>(m(r, c));
    }
  }
  const auto assignment = linear_assignment(cost, size);
  long long matched = 0;
  for (int r = 0; r < m.rows; ++r) {
    const int c = assignment[static_cast<std::size_t>(r)];
    if (c < m.cols) matched += m(r, c);
  }
  return static_cast<double>(matched) / static_cast<double>(m.n);
}

double nmi(std::span<const int> a, std::span<const int> b) {
  const ConfusionMatrix m = confusion(a, b);
  const double n = static_cast<double>(m.n);
  std::vector<double> row_sum(static_cast<std::size_t>(m.rows), 0.0), col_sum(static_cast<std::size_t>(m.cols), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      row_sum[static_cast<std::size_t>(r)] += static_cast<double>(m(r, c));
      col_sum[static_cast<std::size_t>(c)] += static_cast<double>(m(r, c));
    }
  }
  auto entropy = [n](const std::vector<double>& sums) {
    double h = 0.0;
    for (double s : sums) {
      if (s > 0.0) h -= (s / n) * std::log(s / n);
    }
    return h;
  };
  const double h_a = entropy(row_sum), h_b = entropy(col_sum);
  if (h_a == 0.0 && h_b == 0.0) return 1.0;
  if (h_a == 0.0 || h_b == 0.0) return 0.0;
  double mi = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const double joint = static_cast<double>(m(r, c));
      if (joint > 0.0) {
        mi += (joint / n) * std::log(n * joint / (row_sum[static_cast<std::size_t>(r)] * col_sum[static_cast<std::size_t>(c)]));
      }
    }
  }
  return std::clamp(mi / (0.5 * (h_a + h_b)), 0.0, 1.0);
}

}  // namespace stc
