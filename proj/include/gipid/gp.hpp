#ifndef GIPID_GP_HPP_
#define GIPID_GP_HPP_

#include <Eigen/Dense>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gipid/kernels.hpp"
#include "gipid/optimizer.hpp"

namespace gipid {

/// Exact per-joint GP: kernel + hyperparameters, noise variance, the stored
/// training inputs, the Cholesky factor of K + (noise + jitter) I, and the
/// weight vector alpha.
struct GpModel {
  KernelNode kernel;
  Eigen::VectorXd theta;
  double noise_var = 1e-2;
  KernelInput train;
  Eigen::VectorXd y;
  Eigen::MatrixXd chol_l;  // lower triangular
  Eigen::VectorXd alpha;
  double jitter = 0;

  bool trained() const { return alpha.size() > 0; }
};

namespace detail {

struct CholeskyResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0;
};

/// Cholesky with jitter escalation: no jitter, then 1e-10 * mean(diag K)
/// growing tenfold up to 1e-4 * mean(diag K).
inline CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& k, double noise_var) {
  const Eigen::Index n = k.rows();
  const double diag_mean = std::max(k.diagonal().mean(), 1e-300);
  std::vector<double> ladder = {0.0};
  for (double f = 1e-10; f <= 1e-4 * 1.0000001; f *= 10) ladder.push_back(f * diag_mean);
  Eigen::MatrixXd shifted;
  for (double j : ladder) {
    shifted = k;
    shifted.diagonal().array() += noise_var + j;
    CholeskyResult out;
    out.llt.compute(shifted);
    out.jitter = j;
    if (out.llt.info() == Eigen::Success) return out;
  }
  std::string msg = "Cholesky failed for a " + std::to_string(n) + "x" + std::to_string(n) +
                    " Gram matrix after jitter ladder {";
  for (double j : ladder) msg += std::to_string(j) + " ";
  msg += "} with noise variance " + std::to_string(noise_var);
  throw NumericalError(msg);
}

}  // namespace detail

inline GpModel gp_fit(const KernelNode& kernel, const Eigen::VectorXd& theta,
                      KernelInput train, Eigen::VectorXd y, double noise_var) {
  require(train.count() >= 1, "gp_fit needs at least one training sample");
  require(y.size() == train.count(), "gp_fit: target length must match sample count");
  require(noise_var > 0, "noise variance must be positive");
  GpModel m;
  m.kernel = kernel;
  m.theta = theta;
  m.noise_var = noise_var;
  m.train = std::move(train);
  m.y = std::move(y);
  const Eigen::MatrixXd k = kernel_gram(kernel, theta, m.train);
  auto chol = detail::cholesky_with_jitter(k, noise_var);
  m.jitter = chol.jitter;
  m.chol_l = chol.llt.matrixL();
  m.alpha = chol.llt.solve(m.y);
  return m;
}

struct GpPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // clamped at zero
};

inline GpPrediction gp_predict(const GpModel& model, const KernelInput& test) {
  require(model.trained(), "predict called on an untrained model");
  const Eigen::MatrixXd k_star = kernel_gram(model.kernel, model.theta, test, model.train);
  GpPrediction out;
  out.mean = k_star * model.alpha;
  const Eigen::MatrixXd v =
      model.chol_l.triangularView<Eigen::Lower>().solve(k_star.transpose());
  out.variance = (kernel_diagonal(model.kernel, model.theta, test) -
                  v.colwise().squaredNorm().transpose())
                     .cwiseMax(0.0);
  return out;
}

inline std::pair<double, double> gp_predict_one(const GpModel& model, const KernelInput& test,
                                                Eigen::Index row) {
  const GpPrediction p = gp_predict(model, test.rows({row}));
  return {p.mean[0], p.variance[0]};
}

/// Log marginal likelihood and its gradient with respect to every kernel
/// hyperparameter plus log noise variance (last entry).
struct MarginalLikelihood {
  double value = 0;
  Eigen::VectorXd gradient;
};

inline MarginalLikelihood log_marginal_likelihood(const GpModel& model) {
  require(model.trained(), "log_marginal_likelihood needs a fitted model");
  const Eigen::Index n = model.y.size();
  MarginalLikelihood out;
  out.value = -0.5 * model.y.dot(model.alpha) -
              model.chol_l.diagonal().array().log().sum() - 0.5 * n * std::log(2 * M_PI);

  // d logp / d theta_t = 1/2 tr((alpha alpha^T - Kinv) dK/dtheta_t)
  Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
  model.chol_l.triangularView<Eigen::Lower>().solveInPlace(kinv);
  model.chol_l.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
  const Eigen::MatrixXd w = model.alpha * model.alpha.transpose() - kinv;

  const Eigen::VectorXd kernel_grad =
      0.5 * weighted_gradient_sums(model.kernel, model.theta, model.train, w);
  out.gradient.resize(kernel_grad.size() + 1);
  out.gradient.head(kernel_grad.size()) = kernel_grad;
  out.gradient[kernel_grad.size()] = 0.5 * w.trace() * model.noise_var;
  return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter optimization (negative log marginal likelihood, Adam).

struct HyperOptResult {
  Eigen::VectorXd theta;
  double noise_var = 0;
  double best_loss = 0;
  std::vector<double> trace;
};

/// Maximizes the marginal likelihood over the trainable hyperparameters and
/// log noise variance. batch_size = 0 optimizes the exact full-data
/// likelihood; otherwise each epoch shuffles the data and takes one Adam step
/// per equally-sized batch (ragged tail dropped), a stochastic variant for
/// large sets. Returns the iterate with the best observed loss.
inline HyperOptResult optimize_hyperparameters(const KernelNode& kernel,
                                               const Eigen::VectorXd& theta0,
                                               double noise_var0, const KernelInput& train,
                                               const Eigen::VectorXd& y,
                                               const OptimizerConfig& cfg,
                                               const std::vector<bool>* trainable = nullptr) {
  cfg.validate();
  require(theta0.size() == hyper_count(kernel), "hyperparameter vector length mismatch");
  require(noise_var0 > 0, "initial noise variance must be positive");
  require(y.size() == train.count(), "target length must match sample count");
  const Eigen::Index n = y.size();

  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index i = 0; i < theta0.size(); ++i)
    if (!trainable || (*trainable)[static_cast<size_t>(i)]) free_idx.push_back(i);

  Eigen::VectorXd theta_full = theta0;
  Eigen::VectorXd psi(free_idx.size() + 1);
  for (size_t i = 0; i < free_idx.size(); ++i) psi[static_cast<Eigen::Index>(i)] = theta0[free_idx[i]];
  psi[psi.size() - 1] = std::log(noise_var0);

  auto unpack = [&](const Eigen::VectorXd& p, Eigen::VectorXd& theta, double& noise) {
    theta = theta_full;
    for (size_t i = 0; i < free_idx.size(); ++i) theta[free_idx[i]] = p[static_cast<Eigen::Index>(i)];
    noise = std::exp(p[p.size() - 1]);
  };

  auto batch_loss = [&](const Eigen::VectorXd& p, const KernelInput& bx,
                        const Eigen::VectorXd& by, Eigen::VectorXd& grad) {
    Eigen::VectorXd theta;
    double noise;
    unpack(p, theta, noise);
    const GpModel m = gp_fit(kernel, theta, bx, by, noise);
    const MarginalLikelihood ml = log_marginal_likelihood(m);
    grad.resize(p.size());
    for (size_t i = 0; i < free_idx.size(); ++i)
      grad[static_cast<Eigen::Index>(i)] = -ml.gradient[free_idx[i]];
    grad[grad.size() - 1] = -ml.gradient[ml.gradient.size() - 1];
    return -ml.value;
  };

  HyperOptResult out;
  out.best_loss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_psi = psi;
  AdamStepper stepper(psi.size(), cfg);
  Rng rng(cfg.seed);
  Eigen::VectorXd grad(psi.size());

  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (full_batch) {
      const double l = batch_loss(psi, train, y, grad);
      if (!std::isfinite(l))
        throw NumericalError("non-finite marginal likelihood at epoch " +
                             std::to_string(epoch));
      out.trace.push_back(l);
      if (l < out.best_loss) {
        out.best_loss = l;
        best_psi = psi;
      }
      stepper.step(psi, grad);
      continue;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    const Eigen::Index b = cfg.batch_size;
    const Eigen::Index batches = n / b;
    for (Eigen::Index k = 0; k < batches; ++k) {
      const std::vector<Eigen::Index> idx(perm.begin() + k * b, perm.begin() + (k + 1) * b);
      const KernelInput bx = train.rows(idx);
      const Eigen::VectorXd by = y(idx);
      const double l = batch_loss(psi, bx, by, grad);
      if (!std::isfinite(l))
        throw NumericalError("non-finite minibatch likelihood at epoch " +
                             std::to_string(epoch));
      out.trace.push_back(l);
      if (l < out.best_loss) {
        out.best_loss = l;
        best_psi = psi;
      }
      stepper.step(psi, grad);
    }
  }

  unpack(best_psi, out.theta, out.noise_var);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: binary-free JSON with full round-trip precision (nlohmann
// emits shortest-round-trip doubles).

inline nlohmann::json gp_model_to_json(const GpModel& model,
                                       const std::vector<JointType>& types,
                                       const RobotModel* nominal = nullptr) {
  std::string types_str;
  for (JointType t : types) types_str += t == JointType::Revolute ? 'R' : 'P';
  nlohmann::json j;
  j["kernel"] = model.kernel;
  j["theta"] = std::vector<double>(model.theta.data(), model.theta.data() + model.theta.size());
  j["noise_var"] = model.noise_var;
  j["joint_types"] = types_str;
  j["y"] = std::vector<double>(model.y.data(), model.y.data() + model.y.size());
  j["alpha"] =
      std::vector<double>(model.alpha.data(), model.alpha.data() + model.alpha.size());
  std::vector<std::vector<double>> raw(static_cast<size_t>(model.train.raw.rows()));
  for (Eigen::Index r = 0; r < model.train.raw.rows(); ++r)
    raw[static_cast<size_t>(r)] = std::vector<double>(
        model.train.raw.row(r).begin(), model.train.raw.row(r).end());
  j["train_raw"] = raw;
  if (nominal) j["robot"] = *nominal;
  return j;
}

/// Rebuilds a trained model from JSON: inputs are re-augmented, the Cholesky
/// factor re-derived, and alpha checked against the stored copy.
inline GpModel gp_model_from_json(const nlohmann::json& j) {
  KernelNode kernel = j.at("kernel").get<KernelNode>();
  std::vector<JointType> types;
  for (char c : j.at("joint_types").get<std::string>())
    types.push_back(c == 'P' ? JointType::Prismatic : JointType::Revolute);
  const auto raw = j.at("train_raw").get<std::vector<std::vector<double>>>();
  require(!raw.empty(), "trained model carries no inputs");
  const int n = static_cast<int>(types.size());
  std::vector<JointState> states(raw.size());
  for (size_t r = 0; r < raw.size(); ++r) {
    require(static_cast<int>(raw[r].size()) == 3 * n, "stored input width mismatch");
    const Eigen::Map<const Eigen::VectorXd> v(raw[r].data(), 3 * n);
    states[r] = JointState(v.head(n), v.segment(n, n), v.tail(n));
  }
  std::optional<RobotModel> nominal;
  if (j.contains("robot")) nominal = j.at("robot").get<RobotModel>();
  const KernelInput train =
      prepare_kernel_input(states, types, kernel, nominal ? &*nominal : nullptr);

  const auto yv = j.at("y").get<std::vector<double>>();
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(),
                                                              static_cast<Eigen::Index>(yv.size()));
  const auto tv = j.at("theta").get<std::vector<double>>();
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(
      tv.data(), static_cast<Eigen::Index>(tv.size()));
  GpModel m = gp_fit(kernel, theta, train, y, j.at("noise_var").get<double>());

  const auto av = j.at("alpha").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(av.size()) == m.alpha.size(),
          "stored alpha length mismatch");
  const Eigen::VectorXd alpha_stored =
      Eigen::Map<const Eigen::VectorXd>(av.data(), static_cast<Eigen::Index>(av.size()));
  if ((alpha_stored - m.alpha).cwiseAbs().maxCoeff() >
      1e-6 * (1 + alpha_stored.cwiseAbs().maxCoeff()))
    throw NumericalError("reloaded model alpha does not reproduce the stored weights");
  return m;
}

}  // namespace gipid

#endif  // GIPID_GP_HPP_
