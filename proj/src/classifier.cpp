#include "stc/classifier.hpp"

#include <cmath>
#include <string>

#include "stc/error.hpp"

namespace stc {

MlrGradient mlr_objective(const RowMatrix& x, std::span<const int> y, const Eigen::MatrixXd& weights,
                          const Eigen::VectorXd& bias, double l2) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd logits = x * weights.transpose();  // n x K
  logits.rowwise() += bias.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logits.row(i).maxCoeff();
    const Eigen::ArrayXXd row = logits.row(i).array() - top;
    const double log_z = std::log(row.exp().sum());
    loss -= row(y[static_cast<std::size_t>(i)]) - log_z;
    // Turn the row into softmax probabilities minus the one-hot target.
    logits.row(i) = (row - log_z).exp().matrix();
    logits(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  }
  MlrGradient g;
  g.loss = loss / static_cast<double>(n) + 0.5 * l2 * weights.squaredNorm();
  g.d_weights = logits.transpose() * x / static_cast<double>(n) + l2 * weights;
  g.d_bias = logits.colwise().sum().transpose() / static_cast<double>(n);
  return g;
}

MlrModel mlr_train(const RowMatrix& x, std::span<const int> y, int k, const MlrOptions& options) {
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw Error(Errc::LengthMismatch, "label count differs from rows");
  if (k < 2) throw Error(Errc::OutOfRange, "MLR needs k >= 2");
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int label : y) {
    if (label < 0 || label >= k) throw Error(Errc::OutOfRange, "training label " + std::to_string(label) + " outside [0, k)");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) throw Error(Errc::MissingClass, "MissingClass(" + std::to_string(c) + ")");
  }

  MlrModel model;
  model.l2 = options.l2;
  model.weights = Eigen::MatrixXd::Zero(k, x.cols());
  model.bias = Eigen::VectorXd::Zero(k);
  MlrGradient g = mlr_objective(x, y, model.weights, model.bias, options.l2);
  model.loss_trace.push_back(g.loss);

  double step = 1.0;
  auto grad_inf = [](const MlrGradient& gr) {
    return std::max(gr.d_weights.cwiseAbs().maxCoeff(), gr.d_bias.cwiseAbs().maxCoeff());
  };
  model.final_grad_norm = grad_inf(g);
  for (int epoch = 0; epoch < options.max_epochs && model.final_grad_norm >= options.tol; ++epoch) {
    const double g_sq = g.d_weights.squaredNorm() + g.d_bias.squaredNorm();
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd w = model.weights - step * g.d_weights;
      Eigen::VectorXd b = model.bias - step * g.d_bias;
      MlrGradient trial = mlr_objective(x, y, w, b, options.l2);
      if (trial.loss <= g.loss - 0.5 * step * g_sq) {
        model.weights = std::move(w);
        model.bias = std::move(b);
        g = std::move(trial);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent possible at machine precision
    model.loss_trace.push_back(g.loss);
    model.epochs_run = epoch + 1;
    model.final_grad_norm = grad_inf(g);
    step *= 2.0;
  }
  return model;
}

std::vector<int> mlr_predict(const MlrModel& model, const RowMatrix& x) {
  if (x.cols() != model.weights.cols()) {
    throw Error(Errc::DimensionMismatch, "model expects D=" + std::to_string(model.weights.cols()) + ", got " +
                                             std::to_string(x.cols()));
  }
  Eigen::MatrixXd logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace stc
