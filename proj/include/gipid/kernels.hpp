#ifndef GIPID_KERNELS_HPP_
#define GIPID_KERNELS_HPP_

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gipid/feature_space.hpp"
#include "gipid/regressor.hpp"
#include "gipid/robot_model.hpp"

namespace gipid {

// ---------------------------------------------------------------------------
// Kernel composition trees.
//
// Leaves consume a slice of the per-sample input (raw x = [q, dq, ddq], the
// augmented x_bar, or a per-joint regressor row); Sum/Product nodes combine
// children elementwise. All variance-like hyperparameters live in log space,
// flattened into one vector in pre-order traversal.

enum class KernelKind { Rbf, Poly, Mpk, LinearPp, Sum, Product };
enum class InputDomain { Raw, Augmented, Regressor };

struct InputSlice {
  InputDomain domain = InputDomain::Raw;
  std::vector<Eigen::Index> indices;  // Raw/Augmented columns
  int joint = -1;                     // Regressor rows of this joint
};

struct KernelNode {
  KernelKind kind = KernelKind::Rbf;
  InputSlice slice;
  int degree = 1;  // Poly exponent / number of Mpk factors
  int pp_dim = 0;  // LinearPp prior width (N_par)
  std::vector<KernelNode> children;
};

inline int leaf_dim(const KernelNode& node) {
  return node.kind == KernelKind::LinearPp ? node.pp_dim
                                           : static_cast<int>(node.slice.indices.size());
}

inline int hyper_count(const KernelNode& node) {
  switch (node.kind) {
    case KernelKind::Rbf:
    case KernelKind::Poly:
      return 1 + leaf_dim(node);
    case KernelKind::Mpk:
      return node.degree * (1 + leaf_dim(node));
    case KernelKind::LinearPp:
      return node.pp_dim;
    case KernelKind::Sum:
    case KernelKind::Product: {
      int total = 0;
      for (const auto& c : node.children) total += hyper_count(c);
      return total;
    }
  }
  return 0;
}

inline void hyper_names_impl(const KernelNode& node, const std::string& prefix,
                             std::vector<std::string>& out) {
  switch (node.kind) {
    case KernelKind::Rbf:
      out.push_back(prefix + "rbf.log_lambda");
      for (int d = 0; d < leaf_dim(node); ++d)
        out.push_back(prefix + "rbf.log_lengthscale[" + std::to_string(d) + "]");
      break;
    case KernelKind::Poly:
      out.push_back(prefix + "poly.log_sigma2");
      for (int d = 0; d < leaf_dim(node); ++d)
        out.push_back(prefix + "poly.log_diag[" + std::to_string(d) + "]");
      break;
    case KernelKind::Mpk:
      for (int s = 0; s < node.degree; ++s) {
        out.push_back(prefix + "mpk[" + std::to_string(s) + "].log_sigma2");
        for (int d = 0; d < leaf_dim(node); ++d)
          out.push_back(prefix + "mpk[" + std::to_string(s) + "].log_diag[" +
                        std::to_string(d) + "]");
      }
      break;
    case KernelKind::LinearPp:
      for (int d = 0; d < node.pp_dim; ++d)
        out.push_back(prefix + "pp.log_w_prior[" + std::to_string(d) + "]");
      break;
    case KernelKind::Sum:
    case KernelKind::Product:
      for (size_t c = 0; c < node.children.size(); ++c)
        hyper_names_impl(node.children[c],
                         prefix + (node.kind == KernelKind::Sum ? "sum" : "prod") + "[" +
                             std::to_string(c) + "].",
                         out);
      break;
  }
}

inline std::vector<std::string> hyper_names(const KernelNode& node) {
  std::vector<std::string> out;
  hyper_names_impl(node, "", out);
  return out;
}

/// Log-space initialization, uniform in [-1, 1] with a fixed seed.
inline Eigen::VectorXd init_hyperparameters(const KernelNode& node, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd theta(hyper_count(node));
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = uniform(rng, -1.0, 1.0);
  return theta;
}

// ---------------------------------------------------------------------------
// Prepared per-sample inputs.

struct KernelInput {
  Eigen::MatrixXd raw;                        // N x 3n
  Eigen::MatrixXd aug;                        // N x gamma
  std::map<int, Eigen::MatrixXd> regressor;   // joint -> N x N_par

  Eigen::Index count() const { return raw.rows(); }

  KernelInput rows(const std::vector<Eigen::Index>& idx) const {
    KernelInput out;
    out.raw = raw(idx, Eigen::all);
    out.aug = aug(idx, Eigen::all);
    for (const auto& [joint, f] : regressor) out.regressor[joint] = f(idx, Eigen::all);
    return out;
  }
};

inline void collect_regressor_joints(const KernelNode& node, std::vector<int>& joints) {
  if (node.kind == KernelKind::LinearPp) joints.push_back(node.slice.joint);
  for (const auto& c : node.children) collect_regressor_joints(c, joints);
}

/// Builds the raw/augmented/regressor sample blocks a spec needs. A nominal
/// model is required only when the spec contains a LinearPp leaf.
inline KernelInput prepare_kernel_input(const std::vector<JointState>& states,
                                        const std::vector<JointType>& types,
                                        const KernelNode& spec,
                                        const RobotModel* nominal = nullptr) {
  require(!states.empty(), "kernel input needs at least one state");
  const int n = static_cast<int>(types.size());
  KernelInput in;
  in.raw.resize(static_cast<Eigen::Index>(states.size()), 3 * n);
  for (size_t s = 0; s < states.size(); ++s) in.raw.row(s) = states[s].flat();
  in.aug = augment_rows(states, types);

  std::vector<int> joints;
  collect_regressor_joints(spec, joints);
  if (!joints.empty()) {
    require(nominal != nullptr, "spec uses a regressor prior but no model was provided");
    std::sort(joints.begin(), joints.end());
    joints.erase(std::unique(joints.begin(), joints.end()), joints.end());
    for (int j : joints)
      in.regressor[j].resize(static_cast<Eigen::Index>(states.size()),
                             kParamsPerLink * nominal->dof());
    for (size_t s = 0; s < states.size(); ++s) {
      const Eigen::MatrixXd phi = regressor(*nominal, states[s]);
      for (int j : joints) in.regressor[j].row(s) = phi.row(j);
    }
  }
  return in;
}

namespace detail {

inline Eigen::MatrixXd leaf_matrix(const KernelNode& node, const KernelInput& in) {
  switch (node.slice.domain) {
    case InputDomain::Raw:
      for (Eigen::Index i : node.slice.indices)
        require(i >= 0 && i < in.raw.cols(), "raw input slice index out of range");
      return in.raw(Eigen::all, node.slice.indices);
    case InputDomain::Augmented:
      for (Eigen::Index i : node.slice.indices)
        require(i >= 0 && i < in.aug.cols(), "augmented input slice index out of range");
      return in.aug(Eigen::all, node.slice.indices);
    case InputDomain::Regressor: {
      auto it = in.regressor.find(node.slice.joint);
      require(it != in.regressor.end(), "missing regressor rows for joint " +
                                            std::to_string(node.slice.joint));
      require(it->second.cols() == node.pp_dim, "regressor width does not match pp_dim");
      return it->second;
    }
  }
  throw InvalidInputError("unreachable input domain");
}

// sigma2 + X diag(v) Y^T, the shared building block of Poly and Mpk.
inline Eigen::MatrixXd linear_factor(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                     double sigma2, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd f = (x * weights.asDiagonal()) * y.transpose();
  f.array() += sigma2;
  return f;
}

inline Eigen::MatrixXd symmetrized(Eigen::MatrixXd k, bool sym) {
  if (sym) k = (0.5 * (k + k.transpose())).eval();
  return k;
}

// `sym` marks a == b; leaf matrices are then symmetrized exactly so that the
// assembled Gram is bitwise symmetric despite blocked matrix products.
inline Eigen::MatrixXd gram_impl(const KernelNode& node, const Eigen::VectorXd& theta,
                                 int offset, const KernelInput& a, const KernelInput& b,
                                 bool sym) {
  switch (node.kind) {
    case KernelKind::Rbf: {
      const Eigen::MatrixXd x = leaf_matrix(node, a), y = leaf_matrix(node, b);
      const int d = leaf_dim(node);
      const double lambda = std::exp(theta[offset]);
      const Eigen::VectorXd w = (-theta.segment(offset + 1, d)).array().exp();
      const Eigen::VectorXd xs = (x.array().square().matrix() * w);
      const Eigen::VectorXd ys = (y.array().square().matrix() * w);
      Eigen::MatrixXd dist = xs * Eigen::RowVectorXd::Ones(y.rows()) +
                             Eigen::VectorXd::Ones(x.rows()) * ys.transpose() -
                             2.0 * (x * w.asDiagonal()) * y.transpose();
      dist = symmetrized(std::move(dist), sym).cwiseMax(0.0);
      return lambda * (-dist.array()).exp().matrix();
    }
    case KernelKind::Poly: {
      const Eigen::MatrixXd x = leaf_matrix(node, a), y = leaf_matrix(node, b);
      const int d = leaf_dim(node);
      const double sigma2 = std::exp(theta[offset]);
      const Eigen::VectorXd w = theta.segment(offset + 1, d).array().exp();
      const Eigen::MatrixXd base = symmetrized(linear_factor(x, y, sigma2, w), sym);
      Eigen::MatrixXd k = base;
      for (int p = 1; p < node.degree; ++p) k = k.cwiseProduct(base);
      return k;
    }
    case KernelKind::Mpk: {
      const Eigen::MatrixXd x = leaf_matrix(node, a), y = leaf_matrix(node, b);
      const int d = leaf_dim(node);
      Eigen::MatrixXd k;
      for (int s = 0; s < node.degree; ++s) {
        const int o = offset + s * (1 + d);
        const double sigma2 = std::exp(theta[o]);
        const Eigen::VectorXd w = theta.segment(o + 1, d).array().exp();
        const Eigen::MatrixXd f = symmetrized(linear_factor(x, y, sigma2, w), sym);
        k = s == 0 ? f : k.cwiseProduct(f);
      }
      return k;
    }
    case KernelKind::LinearPp: {
      const Eigen::MatrixXd x = leaf_matrix(node, a), y = leaf_matrix(node, b);
      const Eigen::VectorXd w = theta.segment(offset, node.pp_dim).array().exp();
      return symmetrized((x * w.asDiagonal()) * y.transpose(), sym);
    }
    case KernelKind::Sum: {
      Eigen::MatrixXd k = Eigen::MatrixXd::Zero(a.count(), b.count());
      int o = offset;
      for (const auto& c : node.children) {
        k += gram_impl(c, theta, o, a, b, sym);
        o += hyper_count(c);
      }
      return k;
    }
    case KernelKind::Product: {
      Eigen::MatrixXd k;
      int o = offset;
      for (size_t i = 0; i < node.children.size(); ++i) {
        const Eigen::MatrixXd f = gram_impl(node.children[i], theta, o, a, b, sym);
        k = i == 0 ? f : k.cwiseProduct(f);
        o += hyper_count(node.children[i]);
      }
      return k;
    }
  }
  throw InvalidInputError("unreachable kernel kind");
}

// Emits multiplier .* dK/dtheta_t for every hyperparameter below `node`.
// The multiplier carries both the product-rule weights of enclosing Product
// nodes and any caller-supplied weight matrix.
inline void weighted_gradients_impl(const KernelNode& node, const Eigen::VectorXd& theta,
                                    int offset, const KernelInput& a,
                                    const Eigen::MatrixXd& mult,
                                    const std::function<void(int, const Eigen::MatrixXd&)>& emit) {
  switch (node.kind) {
    case KernelKind::Rbf: {
      const Eigen::MatrixXd x = leaf_matrix(node, a);
      const int d = leaf_dim(node);
      const Eigen::MatrixXd k = gram_impl(node, theta, offset, a, a, true);
      emit(offset, mult.cwiseProduct(k));
      const Eigen::MatrixXd mk = mult.cwiseProduct(k);
      for (int dd = 0; dd < d; ++dd) {
        const double w = std::exp(-theta[offset + 1 + dd]);
        const Eigen::VectorXd xd = x.col(dd);
        const Eigen::MatrixXd sq =
            (xd.array().square().matrix() * Eigen::RowVectorXd::Ones(x.rows()) +
             Eigen::VectorXd::Ones(x.rows()) * xd.array().square().matrix().transpose() -
             2.0 * xd * xd.transpose());
        emit(offset + 1 + dd, (w * sq).cwiseProduct(mk));
      }
      break;
    }
    case KernelKind::Poly: {
      const Eigen::MatrixXd x = leaf_matrix(node, a);
      const int d = leaf_dim(node);
      const double sigma2 = std::exp(theta[offset]);
      const Eigen::VectorXd w = theta.segment(offset + 1, d).array().exp();
      const Eigen::MatrixXd base = linear_factor(x, x, sigma2, w);
      Eigen::MatrixXd powm1 = Eigen::MatrixXd::Ones(x.rows(), x.rows());
      for (int p = 1; p < node.degree; ++p) powm1 = powm1.cwiseProduct(base);
      const Eigen::MatrixXd common = static_cast<double>(node.degree) * powm1.cwiseProduct(mult);
      emit(offset, sigma2 * common);
      for (int dd = 0; dd < d; ++dd) {
        const Eigen::VectorXd xd = x.col(dd);
        emit(offset + 1 + dd, w[dd] * (xd * xd.transpose()).cwiseProduct(common));
      }
      break;
    }
    case KernelKind::Mpk: {
      const Eigen::MatrixXd x = leaf_matrix(node, a);
      const int d = leaf_dim(node);
      std::vector<Eigen::MatrixXd> factors(node.degree);
      for (int s = 0; s < node.degree; ++s) {
        const int o = offset + s * (1 + d);
        factors[s] = linear_factor(x, x, std::exp(theta[o]),
                                   theta.segment(o + 1, d).array().exp());
      }
      for (int s = 0; s < node.degree; ++s) {
        Eigen::MatrixXd others = mult;
        for (int t = 0; t < node.degree; ++t)
          if (t != s) others = others.cwiseProduct(factors[t]);
        const int o = offset + s * (1 + d);
        emit(o, std::exp(theta[o]) * others);
        for (int dd = 0; dd < d; ++dd) {
          const Eigen::VectorXd xd = x.col(dd);
          emit(o + 1 + dd,
               std::exp(theta[o + 1 + dd]) * (xd * xd.transpose()).cwiseProduct(others));
        }
      }
      break;
    }
    case KernelKind::LinearPp: {
      const Eigen::MatrixXd x = leaf_matrix(node, a);
      for (int dd = 0; dd < node.pp_dim; ++dd) {
        const Eigen::VectorXd xd = x.col(dd);
        emit(offset + dd,
             std::exp(theta[offset + dd]) * (xd * xd.transpose()).cwiseProduct(mult));
      }
      break;
    }
    case KernelKind::Sum: {
      int o = offset;
      for (const auto& c : node.children) {
        weighted_gradients_impl(c, theta, o, a, mult, emit);
        o += hyper_count(c);
      }
      break;
    }
    case KernelKind::Product: {
      const size_t nc = node.children.size();
      std::vector<Eigen::MatrixXd> grams(nc);
      std::vector<int> offsets(nc);
      int o = offset;
      for (size_t i = 0; i < nc; ++i) {
        offsets[i] = o;
        grams[i] = gram_impl(node.children[i], theta, o, a, a, true);
        o += hyper_count(node.children[i]);
      }
      // prefix[i] = product of grams[0..i), suffix analogous
      std::vector<Eigen::MatrixXd> suffix(nc + 1);
      suffix[nc] = Eigen::MatrixXd::Ones(a.count(), a.count());
      for (size_t i = nc; i-- > 0;) suffix[i] = suffix[i + 1].cwiseProduct(grams[i]);
      Eigen::MatrixXd prefix = Eigen::MatrixXd::Ones(a.count(), a.count());
      for (size_t i = 0; i < nc; ++i) {
        weighted_gradients_impl(node.children[i], theta, offsets[i], a,
                                mult.cwiseProduct(prefix).cwiseProduct(suffix[i + 1]), emit);
        prefix = prefix.cwiseProduct(grams[i]);
      }
      break;
    }
  }
}

}  // namespace detail

/// Gram matrix K(A, B) of a kernel spec.
inline Eigen::MatrixXd kernel_gram(const KernelNode& spec, const Eigen::VectorXd& theta,
                                   const KernelInput& a, const KernelInput& b) {
  require(theta.size() == hyper_count(spec), "hyperparameter vector length mismatch");
  require(theta.allFinite(), "hyperparameters must be finite");
  return detail::gram_impl(spec, theta, 0, a, b, false);
}

/// Gram on one sample set; exactly symmetric.
inline Eigen::MatrixXd kernel_gram(const KernelNode& spec, const Eigen::VectorXd& theta,
                                   const KernelInput& a) {
  require(theta.size() == hyper_count(spec), "hyperparameter vector length mismatch");
  require(theta.allFinite(), "hyperparameters must be finite");
  return detail::gram_impl(spec, theta, 0, a, a, true);
}

/// k(x_i, x_i) for every sample (prior variances).
inline Eigen::VectorXd kernel_diagonal(const KernelNode& spec, const Eigen::VectorXd& theta,
                                       const KernelInput& a) {
  Eigen::VectorXd diag(a.count());
  for (Eigen::Index i = 0; i < a.count(); ++i) {
    const KernelInput one = a.rows({i});
    diag[i] = kernel_gram(spec, theta, one, one)(0, 0);
  }
  return diag;
}

/// Scalar kernel between rows i of `a` and j of `b`.
inline double kernel_value(const KernelNode& spec, const Eigen::VectorXd& theta,
                           const KernelInput& a, Eigen::Index i, const KernelInput& b,
                           Eigen::Index j) {
  return kernel_gram(spec, theta, a.rows({i}), b.rows({j}))(0, 0);
}

/// Materialized dK/dtheta_t on the sample set, one matrix per hyperparameter.
inline std::vector<Eigen::MatrixXd> kernel_gradients(const KernelNode& spec,
                                                     const Eigen::VectorXd& theta,
                                                     const KernelInput& a) {
  require(theta.size() == hyper_count(spec), "hyperparameter vector length mismatch");
  std::vector<Eigen::MatrixXd> out(static_cast<size_t>(theta.size()));
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(a.count(), a.count());
  detail::weighted_gradients_impl(spec, theta, 0, a, ones,
                                  [&](int t, const Eigen::MatrixXd& d) { out[t] = d; });
  return out;
}

/// sum_ij W_ij dK_ij/dtheta_t for every t, without materializing the
/// per-hyperparameter matrices longer than one at a time.
inline Eigen::VectorXd weighted_gradient_sums(const KernelNode& spec,
                                              const Eigen::VectorXd& theta,
                                              const KernelInput& a, const Eigen::MatrixXd& w) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  detail::weighted_gradients_impl(spec, theta, 0, a, w,
                                  [&](int t, const Eigen::MatrixXd& d) { grad[t] += d.sum(); });
  return grad;
}

// ---------------------------------------------------------------------------
// Spec builders.

inline InputSlice raw_slice(int raw_dim) {
  InputSlice s;
  s.domain = InputDomain::Raw;
  s.indices.resize(raw_dim);
  for (int i = 0; i < raw_dim; ++i) s.indices[i] = i;
  return s;
}

inline InputSlice aug_slice(std::vector<Eigen::Index> indices) {
  InputSlice s;
  s.domain = InputDomain::Augmented;
  s.indices = std::move(indices);
  return s;
}

inline KernelNode make_rbf(InputSlice slice) {
  KernelNode n;
  n.kind = KernelKind::Rbf;
  n.slice = std::move(slice);
  return n;
}

inline KernelNode make_poly(InputSlice slice, int degree) {
  require(degree >= 1, "polynomial degree must be at least 1");
  KernelNode n;
  n.kind = KernelKind::Poly;
  n.slice = std::move(slice);
  n.degree = degree;
  return n;
}

inline KernelNode make_mpk(InputSlice slice, int degree) {
  require(degree >= 1, "MPK needs at least one factor");
  KernelNode n;
  n.kind = KernelKind::Mpk;
  n.slice = std::move(slice);
  n.degree = degree;
  return n;
}

inline KernelNode make_linear_pp(int joint, int pp_dim) {
  KernelNode n;
  n.kind = KernelKind::LinearPp;
  n.slice.domain = InputDomain::Regressor;
  n.slice.joint = joint;
  n.pp_dim = pp_dim;
  return n;
}

inline KernelNode make_sum(std::vector<KernelNode> children) {
  require(!children.empty(), "composite kernel needs children");
  KernelNode n;
  n.kind = KernelKind::Sum;
  n.children = std::move(children);
  return n;
}

inline KernelNode make_product(std::vector<KernelNode> children) {
  require(!children.empty(), "composite kernel needs children");
  KernelNode n;
  n.kind = KernelKind::Product;
  n.children = std::move(children);
  return n;
}

/// The GIP kernel: per revolute joint a degree-2 MPK on (cos q_b, sin q_b),
/// per prismatic joint a degree-2 MPK on the scalar q_b, and one degree-1 MPK
/// on q_av = [ddq, dq_v]. Empty blocks simply contribute no factor.
inline KernelNode make_gip(const std::vector<JointType>& types) {
  const AugmentedLayout lay = make_augmented_layout(types);
  std::vector<KernelNode> factors;
  for (int b = 0; b < lay.n_r; ++b)
    factors.push_back(make_mpk(
        aug_slice({lay.qc_offset() + b, lay.qs_offset() + b}), 2));
  for (int b = 0; b < lay.n_p; ++b)
    factors.push_back(make_mpk(aug_slice({lay.qp_offset() + b}), 2));
  std::vector<Eigen::Index> av;
  for (int i = 0; i < lay.n; ++i) av.push_back(lay.ddq_offset() + i);
  for (int i = 0; i < lay.dqv_size(); ++i) av.push_back(lay.dqv_offset() + i);
  factors.push_back(make_mpk(aug_slice(av), 1));
  return make_product(std::move(factors));
}

/// Semiparametric kernel: regressor prior plus an RBF on the raw input.
inline KernelNode make_semiparametric(int joint, int pp_dim, int raw_dim) {
  return make_sum({make_linear_pp(joint, pp_dim), make_rbf(raw_slice(raw_dim))});
}

// ---------------------------------------------------------------------------
// Scalar evaluation of the named kernels (thin wrappers over the tree).

namespace detail {
inline KernelInput single_raw(const Eigen::VectorXd& x) {
  KernelInput in;
  in.raw = x.transpose();
  in.aug.resize(1, 0);
  return in;
}
}  // namespace detail

inline double k_rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& theta) {
  require(x.size() == y.size(), "k_rbf: input dimension mismatch");
  const KernelNode spec = make_rbf(raw_slice(static_cast<int>(x.size())));
  return kernel_gram(spec, theta, detail::single_raw(x), detail::single_raw(y))(0, 0);
}

inline double k_poly(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                     const Eigen::VectorXd& theta) {
  require(x.size() == y.size(), "k_poly: input dimension mismatch");
  const KernelNode spec = make_poly(raw_slice(static_cast<int>(x.size())), degree);
  return kernel_gram(spec, theta, detail::single_raw(x), detail::single_raw(y))(0, 0);
}

inline double k_mpk(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree,
                    const Eigen::VectorXd& theta) {
  require(x.size() == y.size(), "k_mpk: input dimension mismatch");
  const KernelNode spec = make_mpk(raw_slice(static_cast<int>(x.size())), degree);
  return kernel_gram(spec, theta, detail::single_raw(x), detail::single_raw(y))(0, 0);
}

/// GIP kernel between two augmented inputs.
inline double k_gip(const AugmentedInput& xa, const AugmentedInput& xb,
                    const std::vector<JointType>& types, const Eigen::VectorXd& theta) {
  const KernelNode spec = make_gip(types);
  KernelInput a, b;
  a.raw.resize(1, 0);
  b.raw.resize(1, 0);
  a.aug = xa.flat().transpose();
  b.aug = xb.flat().transpose();
  require(a.aug.cols() == make_augmented_layout(types).gamma(),
          "k_gip: augmented layout mismatch");
  require(b.aug.cols() == a.aug.cols(), "k_gip: augmented layout mismatch");
  return kernel_gram(spec, theta, a, b)(0, 0);
}

/// Regressor-prior kernel phi_i(x) Sigma_w phi_i(x')^T for one joint.
inline double k_linear_pp(const RobotModel& nominal, int joint, const JointState& xa,
                          const JointState& xb, const Eigen::VectorXd& theta) {
  const KernelNode spec = make_linear_pp(joint, kParamsPerLink * nominal.dof());
  const KernelInput a =
      prepare_kernel_input({xa}, nominal.joint_types(), spec, &nominal);
  const KernelInput b =
      prepare_kernel_input({xb}, nominal.joint_types(), spec, &nominal);
  return kernel_gram(spec, theta, a, b)(0, 0);
}

inline double k_semiparametric(const RobotModel& nominal, int joint, const JointState& xa,
                               const JointState& xb, const Eigen::VectorXd& theta) {
  const KernelNode spec =
      make_semiparametric(joint, kParamsPerLink * nominal.dof(), 3 * nominal.dof());
  const KernelInput a =
      prepare_kernel_input({xa}, nominal.joint_types(), spec, &nominal);
  const KernelInput b =
      prepare_kernel_input({xb}, nominal.joint_types(), spec, &nominal);
  return kernel_gram(spec, theta, a, b)(0, 0);
}

// ---------------------------------------------------------------------------
// JSON serialization of kernel specs.

inline void to_json(nlohmann::json& j, const KernelNode& n) {
  static const char* kinds[] = {"rbf", "poly", "mpk", "linear_pp", "sum", "product"};
  j["kind"] = kinds[static_cast<int>(n.kind)];
  if (n.kind == KernelKind::Sum || n.kind == KernelKind::Product) {
    j["children"] = n.children;
    return;
  }
  if (n.kind == KernelKind::LinearPp) {
    j["joint"] = n.slice.joint;
    j["pp_dim"] = n.pp_dim;
    return;
  }
  j["domain"] = n.slice.domain == InputDomain::Raw ? "raw" : "aug";
  j["indices"] = n.slice.indices;
  if (n.kind != KernelKind::Rbf) j["degree"] = n.degree;
}

inline void from_json(const nlohmann::json& j, KernelNode& n) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sum" || kind == "product") {
    n.kind = kind == "sum" ? KernelKind::Sum : KernelKind::Product;
    n.children.clear();
    j.at("children").get_to(n.children);
    require(!n.children.empty(), "composite kernel needs children");
    return;
  }
  if (kind == "linear_pp") {
    n.kind = KernelKind::LinearPp;
    n.slice.domain = InputDomain::Regressor;
    n.slice.joint = j.at("joint").get<int>();
    n.pp_dim = j.at("pp_dim").get<int>();
    return;
  }
  if (kind == "rbf") {
    n.kind = KernelKind::Rbf;
  } else if (kind == "poly") {
    n.kind = KernelKind::Poly;
  } else if (kind == "mpk") {
    n.kind = KernelKind::Mpk;
  } else {
    throw ParseError("unknown kernel kind '" + kind + "'");
  }
  const std::string domain = j.at("domain").get<std::string>();
  n.slice.domain = domain == "raw" ? InputDomain::Raw : InputDomain::Augmented;
  n.slice.indices.clear();
  j.at("indices").get_to(n.slice.indices);
  n.degree = j.value("degree", 1);
}

}  // namespace gipid

#endif  // GIPID_KERNELS_HPP_
