#pragma once

#include <span>
#include <string>
#include <vector>

#include "stc/corpus.hpp"

namespace stc {

struct MlrOptions {
  double l2 = 1e-4;
  int max_epochs = 500;
  double tol = 1e-5;  // stop when the gradient infinity-norm drops below this
};

struct MlrModel {
  Eigen::MatrixXd weights;  // K x D
  Eigen::VectorXd bias;     // K
  double l2 = 0.0;
  int epochs_run = 0;
  double final_grad_norm = 0.0;
  // Objective after each accepted step, starting with the initial value.
  std::vector<double> loss_trace;

  int k() const { return static_cast<int>(weights.rows()); }
  int d() const { return static_cast<int>(weights.cols()); }
};

struct MlrGradient {
  double loss = 0.0;
  Eigen::MatrixXd d_weights;
  Eigen::VectorXd d_bias;
};

// Mean softmax cross-entropy plus (l2 / 2) * ||W||^2 (bias unpenalized), and
// its gradient.
MlrGradient mlr_objective(const RowMatrix& x, std::span<const int> y, const Eigen::MatrixXd& weights,
                          const Eigen::VectorXd& bias, double l2);

// Full-batch gradient descent with Armijo backtracking from zero weights.
// Every class in [0, k) must occur in y.
MlrModel mlr_train(const RowMatrix& x, std::span<const int> y, int k, const MlrOptions& options = {});

// argmax of W x + b per row, ties to the lowest class.
std::vector<int> mlr_predict(const MlrModel& model, const RowMatrix& x);

}  // namespace stc
