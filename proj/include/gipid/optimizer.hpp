#ifndef GIPID_OPTIMIZER_HPP_
#define GIPID_OPTIMIZER_HPP_

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gipid/common.hpp"

namespace gipid {

struct OptimizerConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 200;
  int batch_size = 0;  // 0 = full batch
  uint64_t seed = 0;

  void validate() const {
    require(learning_rate > 0, "learning rate must be positive");
    require(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1,
            "Adam moment decays must lie in (0, 1)");
    require(epsilon > 0, "epsilon must be positive");
    require(epochs >= 1, "need at least one epoch");
    require(batch_size >= 0, "batch size cannot be negative");
  }
};

/// One Adam update at a time; bias-corrected first/second moments.
class AdamStepper {
 public:
  AdamStepper(Eigen::Index dim, const OptimizerConfig& cfg)
      : cfg_(cfg), m_(Eigen::VectorXd::Zero(dim)), v_(Eigen::VectorXd::Zero(dim)) {}

  void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = cfg_.beta1 * m_ + (1 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1 - std::pow(cfg_.beta2, t_);
    theta -= (cfg_.learning_rate / bc1) * m_.cwiseQuotient(
                 ((v_ / bc2).cwiseSqrt().array() + cfg_.epsilon).matrix());
  }

 private:
  OptimizerConfig cfg_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

struct MinimizeResult {
  Eigen::VectorXd best_theta;
  double best_loss = 0;
  std::vector<double> trace;  // loss at every evaluation
};

/// Full-batch Adam on an arbitrary differentiable loss; returns the iterate
/// with the best observed loss.
inline MinimizeResult adam_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& loss,
    Eigen::VectorXd theta, const OptimizerConfig& cfg) {
  cfg.validate();
  AdamStepper stepper(theta.size(), cfg);
  MinimizeResult out;
  out.best_theta = theta;
  out.best_loss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad(theta.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    grad.setZero();
    const double l = loss(theta, grad);
    if (!std::isfinite(l))
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
    out.trace.push_back(l);
    if (l < out.best_loss) {
      out.best_loss = l;
      out.best_theta = theta;
    }
    stepper.step(theta, grad);
  }
  return out;
}

}  // namespace gipid

#endif  // GIPID_OPTIMIZER_HPP_
