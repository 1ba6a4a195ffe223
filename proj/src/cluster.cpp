#include "stc/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "stc/error.hpp"
#include "stc/rng.hpp"

namespace stc {

// ================================================================ k-means

namespace {

struct Restart {
  std::vector<int> labels;
  RowMatrix centers;
  double inertia = 0.0;
  std::vector<double> trace;
};

RowMatrix plus_plus_seeds(const RowMatrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  RowMatrix centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd closest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += closest(i);
        if (acc > target && closest(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = x.row(pick);
    closest = closest.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

// Nearest center per row (ties to the lower center index); returns the cost.
double assign(const RowMatrix& x, const Eigen::VectorXd& x_norms, const RowMatrix& centers,
              std::vector<int>& labels, Eigen::VectorXd& dist) {
  const Eigen::MatrixXd cross = x * centers.transpose();
  const Eigen::VectorXd c_norms = centers.rowwise().squaredNorm();
  double cost = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = x_norms(i) - 2.0 * cross(i, c) + c_norms(c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist(i) = std::max(0.0, best_d);
    cost += dist(i);
  }
  return cost;
}

// Moves the point farthest from its center into each empty cluster.
void fill_empty(const RowMatrix& x, const RowMatrix& centers, std::vector<int>& labels, int k) {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  for (int c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] != 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(l)] < 2) continue;
      const double d = (x.row(i) - centers.row(l)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
    labels[static_cast<std::size_t>(far)] = c;
    ++sizes[static_cast<std::size_t>(c)];
  }
}

RowMatrix cluster_means(const RowMatrix& x, const std::vector<int>& labels, int k) {
  RowMatrix means = RowMatrix::Zero(k, x.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    means.row(l) += x.row(i);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) means.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  return means;
}

double exact_cost(const RowMatrix& x, const std::vector<int>& labels, const RowMatrix& centers) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) cost += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return cost;
}

Restart run_restart(const RowMatrix& x, const Eigen::VectorXd& x_norms, int k, const KMeansOptions& opt,
                    std::uint64_t seed) {
  Rng rng(seed);
  Restart r;
  r.centers = plus_plus_seeds(x, k, rng);
  r.labels.assign(static_cast<std::size_t>(x.rows()), 0);
  Eigen::VectorXd dist(x.rows());
  double cost = assign(x, x_norms, r.centers, r.labels, dist);
  if (opt.record_trace) r.trace.push_back(cost);
  std::vector<int> next(r.labels.size());
  for (int it = 0; it < opt.max_iter; ++it) {
    fill_empty(x, r.centers, r.labels, k);
    r.centers = cluster_means(x, r.labels, k);
    cost = assign(x, x_norms, r.centers, next, dist);
    if (opt.record_trace) r.trace.push_back(cost);
    if (next == r.labels) break;
    std::swap(next, r.labels);
  }
  fill_empty(x, r.centers, r.labels, k);
  r.centers = cluster_means(x, r.labels, k);
  r.inertia = exact_cost(x, r.labels, r.centers);
  return r;
}

}  // namespace

double inertia(const RowMatrix& x, const Labeling& labeling) {
  if (labeling.size() != x.rows()) throw Error(Errc::LengthMismatch, "labeling length differs from row count");
  return exact_cost(x, labeling.labels, cluster_means(x, labeling.labels, labeling.k));
}

KMeansResult kmeans(const RowMatrix& x, int k, const KMeansOptions& options) {
  if (k < 2) throw Error(Errc::OutOfRange, "k-means needs k >= 2");
  if (k > x.rows()) throw Error(Errc::OutOfRange, "k-means k=" + std::to_string(k) + " exceeds n=" + std::to_string(x.rows()));
  if (options.n_init < 1) throw Error(Errc::OutOfRange, "n_init must be >= 1");

  const Eigen::VectorXd x_norms = x.rowwise().squaredNorm();
  std::vector<Restart> restarts(static_cast<std::size_t>(options.n_init));
  const int workers = std::clamp(options.threads, 1, options.n_init);
  auto work = [&](int w) {
    for (int r = w; r < options.n_init; r += workers) {
      restarts[static_cast<std::size_t>(r)] = run_restart(x, x_norms, k, options, options.seed + static_cast<std::uint64_t>(r));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  int best = 0;
  for (int r = 1; r < options.n_init; ++r) {
    if (restarts[static_cast<std::size_t>(r)].inertia < restarts[static_cast<std::size_t>(best)].inertia) best = r;
  }
  KMeansResult result;
  auto& winner = restarts[static_cast<std::size_t>(best)];
  result.labeling = Labeling(std::move(winner.labels), k);
  result.inertia = winner.inertia;
  result.best_restart = best;
  result.centers = std::move(winner.centers);
  if (options.record_trace) {
    for (auto& r : restarts) result.traces.push_back(std::move(r.trace));
  }
  return result;
}

// ================================================================ HAC

Linkage parse_linkage(std::string_view name) {
  if (name == "single") return Linkage::Single;
  if (name == "complete") return Linkage::Complete;
  if (name == "average") return Linkage::Average;
  if (name == "ward") return Linkage::Ward;
  throw Error(Errc::BadConfig, "unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
    case Linkage::Ward: return "ward";
  }
  return "?";
}

CondensedDistance::CondensedDistance(int n)
    : n_(n), values_(n > 1 ? static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2 : 0, 0.0) {}

CondensedDistance distances_from(const SimMatrix& s) {
  CondensedDistance d(s.n());
  for (int i = 0; i < s.n(); ++i) {
    for (int j = i + 1; j < s.n(); ++j) d.set(i, j, 1.0 - s(i, j));
  }
  return d;
}

CondensedDistance distances_from(const SparseSimMatrix& s) {
  CondensedDistance d(s.n);
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) d.set(i, j, 2.0);
  }
  for (int i = 0; i < s.n; ++i) {
    for (const auto& e : s.rows[static_cast<std::size_t>(i)]) {
      if (e.col > i) d.set(i, e.col, 1.0 - e.sim);
    }
  }
  return d;
}

namespace {

double lance_williams(Linkage linkage, double d_ik, double d_jk, double d_ij, int n_i, int n_j, int n_k) {
  switch (linkage) {
    case Linkage::Single: return std::min(d_ik, d_jk);
    case Linkage::Complete: return std::max(d_ik, d_jk);
    case Linkage::Average: return (n_i * d_ik + n_j * d_jk) / (n_i + n_j);
    case Linkage::Ward: {
      const double num = (n_i + n_k) * d_ik * d_ik + (n_j + n_k) * d_jk * d_jk - n_k * d_ij * d_ij;
      return std::sqrt(std::max(0.0, num / (n_i + n_j + n_k)));
    }
  }
  return 0.0;
}

}  // namespace

std::vector<Merge> agglomerate(CondensedDistance d, Linkage linkage, int max_merges) {
  const int n = d.n();
  const int steps = max_merges < 0 ? std::max(0, n - 1) : std::min(max_merges, std::max(0, n - 1));
  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(steps));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);

  // nn[i]: closest active j > i (ties to lower j); nn_d[i] its distance.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<int> nn(static_cast<std::size_t>(n), -1);
  std::vector<double> nn_d(static_cast<std::size_t>(n), kInf);
  auto rescan = [&](int i) {
    nn[static_cast<std::size_t>(i)] = -1;
    nn_d[static_cast<std::size_t>(i)] = kInf;
    for (int j = i + 1; j < n; ++j) {
      if (active[static_cast<std::size_t>(j)] && d(i, j) < nn_d[static_cast<std::size_t>(i)]) {
        nn_d[static_cast<std::size_t>(i)] = d(i, j);
        nn[static_cast<std::size_t>(i)] = j;
      }
    }
  };
  for (int i = 0; i < n; ++i) rescan(i);

  for (int step = 0; step < steps; ++step) {
    int a = -1;
    for (int i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)] && nn[static_cast<std::size_t>(i)] >= 0 &&
          (a < 0 || nn_d[static_cast<std::size_t>(i)] < nn_d[static_cast<std::size_t>(a)])) {
        a = i;
      }
    }
    const int b = nn[static_cast<std::size_t>(a)];
    const double d_ab = nn_d[static_cast<std::size_t>(a)];
    const int n_a = size[static_cast<std::size_t>(a)], n_b = size[static_cast<std::size_t>(b)];

    active[static_cast<std::size_t>(b)] = false;
    for (int c = 0; c < n; ++c) {
      if (!active[static_cast<std::size_t>(c)] || c == a) continue;
      d.set(a, c, lance_williams(linkage, d(a, c), d(b, c), d_ab, n_a, n_b, size[static_cast<std::size_t>(c)]));
    }
    size[static_cast<std::size_t>(a)] = n_a + n_b;
    merges.push_back({a, b, d_ab, n_a + n_b});

    rescan(a);
    for (int c = 0; c < a; ++c) {
      if (!active[static_cast<std::size_t>(c)]) continue;
      const int cur = nn[static_cast<std::size_t>(c)];
      if (cur == a || cur == b) {
        rescan(c);
      } else if (d(c, a) < nn_d[static_cast<std::size_t>(c)] ||
                 (d(c, a) == nn_d[static_cast<std::size_t>(c)] && a < cur)) {
        nn[static_cast<std::size_t>(c)] = a;
        nn_d[static_cast<std::size_t>(c)] = d(c, a);
      }
    }
    for (int c = a + 1; c < b; ++c) {
      if (active[static_cast<std::size_t>(c)] && nn[static_cast<std::size_t>(c)] == b) rescan(c);
    }
  }
  return merges;
}

Labeling cut_dendrogram(int n, const std::vector<Merge>& merges, int k) {
  if (k < 2 || k > n) throw Error(Errc::OutOfRange, "cannot cut " + std::to_string(n) + " points into k=" + std::to_string(k));
  const auto needed = static_cast<std::size_t>(n - k);
  if (merges.size() < needed) throw Error(Errc::OutOfRange, "dendrogram has too few merges for k=" + std::to_string(k));
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (std::size_t m = 0; m < needed; ++m) parent[static_cast<std::size_t>(root(merges[m].b))] = root(merges[m].a);
  std::vector<int> label_of_root(static_cast<std::size_t>(n), -1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int& l = label_of_root[static_cast<std::size_t>(root(i))];
    if (l < 0) l = next++;
    labels[static_cast<std::size_t>(i)] = l;
  }
  return Labeling(std::move(labels), k);
}

Labeling hac(const CondensedDistance& d, int k, Linkage linkage) {
  if (k < 2 || k > d.n()) throw Error(Errc::OutOfRange, "hac k=" + std::to_string(k) + " outside [2, n]");
  return cut_dendrogram(d.n(), agglomerate(d, linkage, d.n() - k), k);
}

Labeling hac(const SimMatrix& s, int k, Linkage linkage) { return hac(distances_from(s), k, linkage); }

Labeling hac(const SparseSimMatrix& s, int k, Linkage linkage) { return hac(distances_from(s), k, linkage); }

// ================================================================ spectral

Labeling spectral(const SimMatrix& s, int k, std::uint64_t seed, int threads) {
  const int n = s.n();
  if (k < 2 || k > n) throw Error(Errc::OutOfRange, "spectral k=" + std::to_string(k) + " outside [2, n]");
  Eigen::MatrixXd w = s.values().cwiseMax(0.0);
  w.diagonal().setZero();
  const Eigen::VectorXd degree = w.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    if (degree(i) <= 0.0) throw Error(Errc::IsolatedVertex, "vertex " + std::to_string(i) + " has no positive similarity");
  }
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd laplacian = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;
  laplacian = 0.5 * (laplacian + laplacian.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success) throw Error(Errc::EigenFailure, "eigensolver did not converge");
  RowMatrix embedding = solver.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }
  KMeansOptions opt;
  opt.n_init = 10;
  opt.seed = seed;
  opt.threads = threads;
  return kmeans(embedding, k, opt).labeling;
}

}  // namespace stc
