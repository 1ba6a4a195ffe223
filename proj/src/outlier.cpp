#include "stc/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "stc/error.hpp"
#include "stc/rng.hpp"

namespace stc {

OutlierMethod parse_outlier_method(std::string_view name) {
  if (name == "if" || name == "isolation_forest" || name == "isolation-forest") return OutlierMethod::IsolationForest;
  if (name == "lof") return OutlierMethod::Lof;
  throw Error(Errc::BadConfig, "unknown outlier method '" + std::string(name) + "'");
}

std::string_view to_string(OutlierMethod method) {
  return method == OutlierMethod::Lof ? "lof" : "isolation_forest";
}

void OutlierConfig::validate() const {
  if (!(contamination > 0.0 && contamination <= 0.5)) throw Error(Errc::BadConfig, "contamination must lie in (0, 0.5]");
  if (if_trees < 1) throw Error(Errc::BadConfig, "if_trees must be >= 1");
  if (if_subsample < 2) throw Error(Errc::BadConfig, "if_subsample must be >= 2");
  if (lof_neighbors < 1) throw Error(Errc::BadConfig, "lof_neighbors must be >= 1");
}

int OutlierMask::count() const { return static_cast<int>(std::count(is_outlier.begin(), is_outlier.end(), true)); }

double average_path_length(double m) {
  if (m <= 1.0) return 0.0;
  if (m == 2.0) return 1.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const double harmonic = std::log(m - 1.0) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (m - 1.0) / m;
}

// ---------------------------------------------------------------- isolation forest

namespace {

struct IsoNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int size = 0;  // samples reaching a leaf
};

class IsoTree {
 public:
  IsoTree(const RowMatrix& x, std::vector<int> sample, int height_limit, Rng& rng) {
    build(x, sample, 0, height_limit, rng);
  }

  double path_length(const Eigen::Ref<const Eigen::RowVectorXd>& point) const {
    int node = 0;
    int depth = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const auto& n = nodes_[static_cast<std::size_t>(node)];
      node = point(n.feature) < n.threshold ? n.left : n.right;
      ++depth;
    }
    return depth + average_path_length(nodes_[static_cast<std::size_t>(node)].size);
  }

 private:
  int build(const RowMatrix& x, std::vector<int>& sample, int depth, int height_limit, Rng& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.back().size = static_cast<int>(sample.size());
    if (depth >= height_limit || sample.size() <= 1) return id;

    // Only features with spread can split; a sample of identical points is a leaf.
    std::vector<int> splittable;
    std::vector<std::pair<double, double>> ranges;
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i : sample) {
        lo = std::min(lo, x(i, f));
        hi = std::max(hi, x(i, f));
      }
      if (hi > lo) {
        splittable.push_back(static_cast<int>(f));
        ranges.emplace_back(lo, hi);
      }
    }
    if (splittable.empty()) return id;
    const auto pick = rng.below(splittable.size());
    const int feature = splittable[pick];
    const auto [lo, hi] = ranges[pick];
    double threshold = rng.uniform(lo, hi);
    if (threshold <= lo) threshold = std::nextafter(lo, hi);

    std::vector<int> left, right;
    for (int i : sample) (x(i, feature) < threshold ? left : right).push_back(i);
    sample.clear();
    sample.shrink_to_fit();
    const int l = build(x, left, depth + 1, height_limit, rng);
    const int r = build(x, right, depth + 1, height_limit, rng);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = feature;
    node.threshold = threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<IsoNode> nodes_;
};

}  // namespace

std::vector<double> isolation_forest_scores(const RowMatrix& xc, const OutlierConfig& cfg) {
  const int m = static_cast<int>(xc.rows());
  if (m < 3) throw Error(Errc::OutOfRange, "isolation forest needs at least 3 points");
  const int psi = std::min(cfg.if_subsample, m);
  const int height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
  Rng rng(cfg.seed);
  std::vector<int> all(static_cast<std::size_t>(m));
  std::iota(all.begin(), all.end(), 0);

  std::vector<double> depth_sum(static_cast<std::size_t>(m), 0.0);
  for (int t = 0; t < cfg.if_trees; ++t) {
    // Subsample without replacement via a partial Fisher-Yates shuffle.
    std::vector<int> pool = all;
    for (int i = 0; i < psi; ++i) {
      const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(m - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(psi));
    const IsoTree tree(xc, std::move(pool), height_limit, rng);
    for (int i = 0; i < m; ++i) depth_sum[static_cast<std::size_t>(i)] += tree.path_length(xc.row(i));
  }
  const double norm = average_path_length(psi);
  std::vector<double> scores(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    scores[static_cast<std::size_t>(i)] = std::pow(2.0, -(depth_sum[static_cast<std::size_t>(i)] / cfg.if_trees) / norm);
  }
  return scores;
}

// ---------------------------------------------------------------- LOF

std::vector<double> lof_scores(const RowMatrix& xc, const OutlierConfig& cfg) {
  const int m = static_cast<int>(xc.rows());
  const int k = cfg.lof_neighbors;
  if (m < k + 1) throw Error(Errc::OutOfRange, "LOF needs at least lof_neighbors + 1 points");

  std::vector<std::vector<double>> dist(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double d = (xc.row(i) - xc.row(j)).norm();
      dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d;
      dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d;
    }
  }

  std::vector<double> k_distance(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& row = dist[static_cast<std::size_t>(i)];
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(m - 1));
    for (int j = 0; j < m; ++j) {
      if (j != i) order.push_back(j);
    }
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                     [&](int a, int b) { return row[static_cast<std::size_t>(a)] < row[static_cast<std::size_t>(b)]; });
    const double kd = row[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])];
    k_distance[static_cast<std::size_t>(i)] = kd;
    for (int j : order) {
      if (row[static_cast<std::size_t>(j)] <= kd) neighbors[static_cast<std::size_t>(i)].push_back(j);
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> lrd(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double reach = 0.0;
    for (int j : neighbors[static_cast<std::size_t>(i)]) {
      reach += std::max(k_distance[static_cast<std::size_t>(j)], dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
    // Zero total reachability only happens among exact duplicates.
    lrd[static_cast<std::size_t>(i)] = reach > 0.0 ? neighbors[static_cast<std::size_t>(i)].size() / reach : kInf;
  }

  std::vector<double> scores(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double own = lrd[static_cast<std::size_t>(i)];
    if (std::isinf(own)) {
      scores[static_cast<std::size_t>(i)] = 1.0;
      continue;
    }
    double ratio_sum = 0.0;
    for (int j : neighbors[static_cast<std::size_t>(i)]) ratio_sum += lrd[static_cast<std::size_t>(j)] / own;
    scores[static_cast<std::size_t>(i)] = ratio_sum / static_cast<double>(neighbors[static_cast<std::size_t>(i)].size());
  }
  return scores;
}

// ---------------------------------------------------------------- per-cluster detection

int outlier_quota(double contamination, int size) {
  return static_cast<int>(std::ceil(contamination * size - 1e-9));
}

OutlierMask detect_outliers(const EmbeddingMatrix& x, const Labeling& labeling, const OutlierConfig& cfg) {
  cfg.validate();
  if (labeling.size() != x.n()) throw Error(Errc::LengthMismatch, "labeling length differs from embedding rows");
  const int n = x.n();
  OutlierMask mask;
  mask.is_outlier.assign(static_cast<std::size_t>(n), false);
  mask.scores.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());

  std::vector<std::vector<int>> members(static_cast<std::size_t>(labeling.k));
  for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(labeling[i])].push_back(i);

  for (int c = 0; c < labeling.k; ++c) {
    const auto& ids = members[static_cast<std::size_t>(c)];
    const int size = static_cast<int>(ids.size());
    if (size < cfg.min_cluster_size()) continue;
    RowMatrix xc(size, x.d());
    for (int r = 0; r < size; ++r) xc.row(r) = x.row(ids[static_cast<std::size_t>(r)]);
    OutlierConfig local = cfg;
    local.seed = substream_seed(cfg.seed, "outlier", static_cast<std::uint64_t>(c));
    const auto scores = cfg.method == OutlierMethod::Lof ? lof_scores(xc, local) : isolation_forest_scores(xc, local);

    std::vector<int> order(static_cast<std::size_t>(size));
    std::iota(order.begin(), order.end(), 0);
    // ids are ascending, so position order doubles as id order for ties.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
    });
    const int quota = outlier_quota(cfg.contamination, size);
    for (int r = 0; r < size; ++r) mask.scores[static_cast<std::size_t>(ids[static_cast<std::size_t>(r)])] = scores[static_cast<std::size_t>(r)];
    for (int q = 0; q < quota; ++q) mask.is_outlier[static_cast<std::size_t>(ids[static_cast<std::size_t>(order[static_cast<std::size_t>(q)])])] = true;
  }
  return mask;
}

}  // namespace stc
