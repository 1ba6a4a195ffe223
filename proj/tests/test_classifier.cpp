#include <cmath>

#include "doctest.h"
#include "stc/classifier.hpp"
#include "stc/error.hpp"
#include "stc/rng.hpp"
#include "synth.hpp"

using namespace stc;

namespace {

struct Problem {
  RowMatrix x;
  std::vector<int> y;
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

Problem random_problem(int n, int d, int k, std::uint64_t seed) {
  Rng rng(seed);
  Problem p{RowMatrix(n, d), std::vector<int>(static_cast<std::size_t>(n)), Eigen::MatrixXd(k, d), Eigen::VectorXd(k)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) p.x(i, j) = rng.normal();
    p.y[static_cast<std::size_t>(i)] = i < k ? i : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  }
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) p.w(c, j) = 0.5 * rng.normal();
    p.b(c) = 0.5 * rng.normal();
  }
  return p;
}

// Central differences of the objective, one coordinate at a time.
double gradient_error(const Problem& p, double l2) {
  const double h = 1e-5;
  const auto g = mlr_objective(p.x, p.y, p.w, p.b, l2);
  double num = 0, den = 0;
  for (Eigen::Index c = 0; c < p.w.rows(); ++c) {
    for (Eigen::Index j = 0; j < p.w.cols(); ++j) {
      Eigen::MatrixXd plus = p.w, minus = p.w;
      plus(c, j) += h;
      minus(c, j) -= h;
      const double fd = (mlr_objective(p.x, p.y, plus, p.b, l2).loss - mlr_objective(p.x, p.y, minus, p.b, l2).loss) / (2 * h);
      num += std::pow(fd - g.d_weights(c, j), 2);
      den += std::pow(fd, 2) + std::pow(g.d_weights(c, j), 2);
    }
    Eigen::VectorXd plus = p.b, minus = p.b;
    plus(c) += h;
    minus(c) -= h;
    const double fd = (mlr_objective(p.x, p.y, p.w, plus, l2).loss - mlr_objective(p.x, p.y, p.w, minus, l2).loss) / (2 * h);
    num += std::pow(fd - g.d_bias(c), 2);
    den += std::pow(fd, 2) + std::pow(g.d_bias(c), 2);
  }
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace

TEST_CASE("objective at zero weights is log K") {
  const auto p = random_problem(10, 3, 4, 1);
  const auto g = mlr_objective(p.x, p.y, Eigen::MatrixXd::Zero(4, 3), Eigen::VectorXd::Zero(4), 0.1);
  CHECK(g.loss == doctest::Approx(std::log(4.0)));
}

TEST_CASE("analytic gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(5, 4, 3, seed);
    CHECK(gradient_error(p, 0.0) < 1e-4);
    CHECK(gradient_error(p, 0.3) < 1e-4);
  }
}

TEST_CASE("training loss never increases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = random_problem(40, 5, 3, 10 + seed);
    const auto model = mlr_train(p.x, p.y, 3, {.l2 = 1e-3, .max_epochs = 200});
    REQUIRE(model.loss_trace.size() >= 2);
    for (std::size_t t = 1; t < model.loss_trace.size(); ++t) CHECK(model.loss_trace[t] <= model.loss_trace[t - 1]);
    CHECK(model.loss_trace.back() < std::log(3.0));
  }
}

TEST_CASE("separable data is fitted perfectly") {
  const auto b = stc::testing::make_blobs(30, 3, 4, 0.3, 4.0, 6);
  const auto model = mlr_train(b.x, b.labels, 3);
  CHECK(mlr_predict(model, b.x) == b.labels);
}

TEST_CASE("training reaches the tolerance on a well-conditioned problem") {
  const auto p = random_problem(60, 3, 2, 42);
  const auto model = mlr_train(p.x, p.y, 2, {.l2 = 0.1, .max_epochs = 5000, .tol = 1e-7});
  CHECK(model.final_grad_norm < 1e-7);
  CHECK(model.epochs_run < 5000);
}

TEST_CASE("strong regularization shrinks weights") {
  const auto b = stc::testing::make_blobs(20, 2, 3, 0.5, 3.0, 3);
  const auto model = mlr_train(b.x, b.labels, 2, {.l2 = 1e6});
  CHECK(model.weights.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("zero weights predict class 0 and ties go to the lowest class") {
  MlrModel model;
  model.weights = Eigen::MatrixXd::Zero(3, 2);
  model.bias = Eigen::VectorXd::Zero(3);
  RowMatrix x = RowMatrix::Random(5, 2);
  CHECK(mlr_predict(model, x) == std::vector<int>(5, 0));
  model.bias << 0.0, 1.0, 1.0;
  CHECK(mlr_predict(model, x) == std::vector<int>(5, 1));
}

TEST_CASE("a common bias shift does not change predictions") {
  const auto p = random_problem(20, 3, 4, 8);
  MlrModel model;
  model.weights = p.w;
  model.bias = p.b;
  const auto before = mlr_predict(model, p.x);
  model.bias.array() += 3.5;
  CHECK(mlr_predict(model, p.x) == before);
}

TEST_CASE("nearest-centroid geometry is respected on symmetric data") {
  // Two classes mirrored across x = 0: the learned boundary is x = 0.
  RowMatrix x(4, 1);
  x << -2, -1, 1, 2;
  const std::vector<int> y{0, 0, 1, 1};
  const auto model = mlr_train(x, y, 2, {.l2 = 1e-2, .max_epochs = 2000});
  RowMatrix probe(4, 1);
  probe << -0.1, -5, 0.1, 5;
  CHECK(mlr_predict(model, probe) == std::vector<int>{0, 0, 1, 1});
  CHECK(std::abs(model.bias(0) - model.bias(1)) < 1e-3);
}

TEST_CASE("training and prediction errors") {
  RowMatrix x = RowMatrix::Random(4, 2);
  try {
    mlr_train(x, std::vector<int>{0, 0, 2, 2}, 3);
    FAIL("missing class accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingClass);
    CHECK(std::string(e.what()) == "MissingClass(1)");
  }
  CHECK_THROWS_AS(mlr_train(x, std::vector<int>{0, 1, 1}, 2), Error);
  const auto model = mlr_train(x, std::vector<int>{0, 1, 0, 1}, 2);
  try {
    mlr_predict(model, RowMatrix::Random(2, 3));
    FAIL("dimension mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionMismatch);
  }
}
