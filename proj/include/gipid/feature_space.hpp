#ifndef GIPID_FEATURE_SPACE_HPP_
#define GIPID_FEATURE_SPACE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <lapacke.h>
#include <nlohmann/json.hpp>

#include "gipid/dynamics.hpp"
#include "gipid/robot_model.hpp"

namespace gipid {

/// Index bookkeeping for the augmented input
///   x_bar = [q_c, q_s, q_p, dq_v, ddq]
/// where q_c/q_s hold cos/sin of the revolute coordinates in joint order,
/// q_p the prismatic coordinates, and dq_v all pairwise velocity products
/// ordered (i, j) with i <= j, lexicographically.
struct AugmentedLayout {
  int n = 0, n_r = 0, n_p = 0;
  std::vector<int> revolute_joints, prismatic_joints;

  int dqv_size() const { return n * (n + 1) / 2; }
  int gamma() const { return 2 * n_r + n_p + dqv_size() + n; }
  int qc_offset() const { return 0; }
  int qs_offset() const { return n_r; }
  int qp_offset() const { return 2 * n_r; }
  int dqv_offset() const { return 2 * n_r + n_p; }
  int ddq_offset() const { return 2 * n_r + n_p + dqv_size(); }
};

inline AugmentedLayout make_augmented_layout(const std::vector<JointType>& types) {
  AugmentedLayout lay;
  lay.n = static_cast<int>(types.size());
  for (int i = 0; i < lay.n; ++i) {
    if (types[i] == JointType::Revolute) {
      lay.revolute_joints.push_back(i);
    } else {
      lay.prismatic_joints.push_back(i);
    }
  }
  lay.n_r = static_cast<int>(lay.revolute_joints.size());
  lay.n_p = static_cast<int>(lay.prismatic_joints.size());
  return lay;
}

struct AugmentedInput {
  Eigen::VectorXd q_c, q_s, q_p, dq_v, ddq;

  Eigen::VectorXd flat() const {
    Eigen::VectorXd x(q_c.size() + q_s.size() + q_p.size() + dq_v.size() + ddq.size());
    x << q_c, q_s, q_p, dq_v, ddq;
    return x;
  }
};

inline AugmentedInput augment(const JointState& state, const std::vector<JointType>& types) {
  const int n = static_cast<int>(types.size());
  state.check(n);
  const AugmentedLayout lay = make_augmented_layout(types);
  AugmentedInput a;
  a.q_c.resize(lay.n_r);
  a.q_s.resize(lay.n_r);
  a.q_p.resize(lay.n_p);
  for (int b = 0; b < lay.n_r; ++b) {
    a.q_c[b] = std::cos(state.q[lay.revolute_joints[b]]);
    a.q_s[b] = std::sin(state.q[lay.revolute_joints[b]]);
  }
  for (int b = 0; b < lay.n_p; ++b) a.q_p[b] = state.q[lay.prismatic_joints[b]];
  a.dq_v.resize(lay.dqv_size());
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.dq_v[k++] = state.dq[i] * state.dq[j];
  a.ddq = state.ddq;
  return a;
}

/// N x gamma matrix of augmented rows.
inline Eigen::MatrixXd augment_rows(const std::vector<JointState>& states,
                                    const std::vector<JointType>& types) {
  const AugmentedLayout lay = make_augmented_layout(types);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(states.size()), lay.gamma());
  for (size_t s = 0; s < states.size(); ++s) out.row(s) = augment(states[s], types).flat();
  return out;
}

/// The random-state distribution used for certification and spot checks:
/// q uniform in [-pi, pi] (revolute) or [-1, 1] m (prismatic), velocities and
/// accelerations uniform in [-vel, vel].
inline std::vector<JointState> sample_random_states(const std::vector<JointType>& types,
                                                    int count, uint64_t seed,
                                                    double vel = 2.0) {
  require(count > 0, "sample count must be positive");
  Rng rng(seed);
  const int n = static_cast<int>(types.size());
  std::vector<JointState> states(count);
  for (auto& s : states) {
    s.q.resize(n);
    s.dq.resize(n);
    s.ddq.resize(n);
    for (int i = 0; i < n; ++i) {
      s.q[i] = types[i] == JointType::Revolute ? uniform(rng, -M_PI, M_PI)
                                               : uniform(rng, -1.0, 1.0);
      s.dq[i] = uniform(rng, -vel, vel);
      s.ddq[i] = uniform(rng, -vel, vel);
    }
  }
  return states;
}

// ---------------------------------------------------------------------------
// Monomial sets over the augmented variables.

/// PropOne: per-variable caps (q_c, q_s, q_p up to degree 2; dq_v, ddq up to
/// degree 1), total degree at most 2n+1, and deg(q_c_b) + deg(q_s_b) <= 2 per
/// revolute joint. GipRkhs additionally allows at most one variable from the
/// [ddq, dq_v] block per monomial, matching the degree-1 acceleration factor
/// of the GIP kernel.
enum class MonomialConvention { PropOne, GipRkhs };

struct MonomialSet {
  MonomialConvention convention = MonomialConvention::GipRkhs;
  std::vector<JointType> joint_types;
  AugmentedLayout layout;
  std::vector<std::vector<std::uint8_t>> exponents;  // each of length gamma

  std::size_t size() const { return exponents.size(); }
};

namespace detail {

// Exponent options for one revolute joint's (cos, sin) pair.
inline const std::vector<std::pair<int, int>>& cs_pair_options() {
  static const std::vector<std::pair<int, int>> opts = {{0, 0}, {1, 0}, {0, 1},
                                                        {2, 0}, {1, 1}, {0, 2}};
  return opts;
}

inline void enumerate_av_block(const AugmentedLayout& lay, MonomialConvention conv,
                               int budget, std::vector<std::uint8_t>& mono,
                               std::vector<std::vector<std::uint8_t>>& out) {
  const int av_begin = lay.dqv_offset();
  const int av_end = lay.gamma();
  out.push_back(mono);  // no acceleration/velocity factor
  if (conv == MonomialConvention::GipRkhs) {
    if (budget < 1) return;
    for (int v = av_begin; v < av_end; ++v) {
      mono[v] = 1;
      out.push_back(mono);
      mono[v] = 0;
    }
    return;
  }
  // PropOne: all 0/1 subsets of the block within the remaining budget.
  auto recurse = [&](auto&& self, int start, int left) -> void {
    if (left == 0) return;
    for (int v = start; v < av_end; ++v) {
      mono[v] = 1;
      out.push_back(mono);
      self(self, v + 1, left - 1);
      mono[v] = 0;
    }
  };
  recurse(recurse, av_begin, budget);
}

}  // namespace detail

inline MonomialSet enumerate_monomials(int n, const std::vector<JointType>& types,
                                       MonomialConvention convention) {
  require(n >= 1, "monomial enumeration requires at least one joint");
  require(static_cast<int>(types.size()) == n, "joint type list must have length n");
  MonomialSet set;
  set.convention = convention;
  set.joint_types = types;
  set.layout = make_augmented_layout(types);
  const AugmentedLayout& lay = set.layout;
  const int cap = 2 * n + 1;

  std::vector<std::uint8_t> mono(lay.gamma(), 0);
  // Recurse over position blocks (revolute pairs first, then prismatic),
  // then attach the acceleration/velocity block.
  auto position = [&](auto&& self, int rev_idx, int pri_idx, int degree) -> void {
    if (rev_idx < lay.n_r) {
      for (const auto& [ec, es] : detail::cs_pair_options()) {
        if (degree + ec + es > cap) continue;
        mono[lay.qc_offset() + rev_idx] = static_cast<std::uint8_t>(ec);
        mono[lay.qs_offset() + rev_idx] = static_cast<std::uint8_t>(es);
        self(self, rev_idx + 1, pri_idx, degree + ec + es);
      }
      mono[lay.qc_offset() + rev_idx] = 0;
      mono[lay.qs_offset() + rev_idx] = 0;
      return;
    }
    if (pri_idx < lay.n_p) {
      for (int e = 0; e <= 2 && degree + e <= cap; ++e) {
        mono[lay.qp_offset() + pri_idx] = static_cast<std::uint8_t>(e);
        self(self, rev_idx, pri_idx + 1, degree + e);
      }
      mono[lay.qp_offset() + pri_idx] = 0;
      return;
    }
    detail::enumerate_av_block(lay, convention, cap - degree, mono, set.exponents);
  };
  position(position, 0, 0, 0);
  return set;
}

/// Monomial count by degree generating functions, without materializing the
/// set. Blocks multiply: revolute joint 1 + 2z + 3z^2, prismatic 1 + z + z^2,
/// acceleration/velocity block 1 + m*z (GipRkhs) or (1 + z)^m (PropOne);
/// the count sums coefficients of degree <= 2n+1.
inline std::uint64_t count_monomials(int n, const std::vector<JointType>& types,
                                     MonomialConvention convention) {
  require(n >= 1, "monomial counting requires at least one joint");
  require(static_cast<int>(types.size()) == n, "joint type list must have length n");
  const int cap = 2 * n + 1;
  std::vector<std::uint64_t> poly = {1};
  auto mul = [&](const std::vector<std::uint64_t>& factor) {
    std::vector<std::uint64_t> out(std::min<std::size_t>(poly.size() + factor.size() - 1,
                                                         static_cast<std::size_t>(cap) + 1),
                                   0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < factor.size() && i + j < out.size(); ++j)
        out[i + j] += poly[i] * factor[j];
    poly = std::move(out);
  };
  for (JointType t : types)
    mul(t == JointType::Revolute ? std::vector<std::uint64_t>{1, 2, 3}
                                 : std::vector<std::uint64_t>{1, 1, 1});
  const int m_av = n + n * (n + 1) / 2;
  if (convention == MonomialConvention::GipRkhs) {
    mul({1, static_cast<std::uint64_t>(m_av)});
  } else {
    for (int k = 0; k < m_av; ++k) mul({1, 1});
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : poly) total += c;
  return total;
}

inline Eigen::VectorXd evaluate_monomials(const AugmentedInput& x, const MonomialSet& set) {
  const Eigen::VectorXd v = x.flat();
  require(v.size() == set.layout.gamma(), "augmented input does not match monomial layout");
  Eigen::VectorXd f(static_cast<Eigen::Index>(set.size()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    double prod = 1.0;
    for (int d = 0; d < v.size(); ++d)
      for (int e = 0; e < set.exponents[k][d]; ++e) prod *= v[d];
    f[static_cast<Eigen::Index>(k)] = prod;
  }
  return f;
}

/// Batch evaluation: rows of `aug` are augmented inputs; returns m x p.
inline Eigen::MatrixXd evaluate_monomials(const Eigen::MatrixXd& aug, const MonomialSet& set) {
  require(aug.cols() == set.layout.gamma(), "augmented rows do not match monomial layout");
  const Eigen::Index m = aug.rows(), p = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Ones(m, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    for (int d = 0; d < aug.cols(); ++d) {
      const int e = set.exponents[static_cast<std::size_t>(k)][d];
      if (e == 1) {
        f.col(k) = f.col(k).cwiseProduct(aug.col(d));
      } else if (e >= 2) {
        for (int r = 0; r < e; ++r) f.col(k) = f.col(k).cwiseProduct(aug.col(d));
      }
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Rank-revealing least squares and the Proposition-1 certification.

namespace detail {
// Largest dictionary handled by Eigen's complete orthogonal decomposition;
// beyond it, a blocked LAPACK QR of [A y] yields the residual norm as the
// trailing diagonal entry without forming coefficients.
inline constexpr Eigen::Index kDirectLeastSquaresMaxCols = 2500;
}  // namespace detail

/// Relative residual min_c ||F c - y|| / ||y|| of a rank-deficient
/// least-squares fit. Columns are equilibrated first (this leaves the column
/// space, and therefore the residual, unchanged); small problems use a
/// rank-revealing decomposition with relative cutoff 1e-10.
inline double relative_fit_residual(const Eigen::MatrixXd& features, const Eigen::VectorXd& y) {
  require(features.rows() == y.size(), "feature rows must match target length");
  require(features.rows() > 0 && features.cols() > 0, "empty least-squares problem");
  const double ynorm = y.norm();
  if (ynorm == 0) return 0.0;
  const Eigen::Index m = features.rows(), p = features.cols();

  if (p <= detail::kDirectLeastSquaresMaxCols) {
    Eigen::MatrixXd f = features;
    for (Eigen::Index c = 0; c < p; ++c) {
      const double nrm = f.col(c).norm();
      if (nrm > 0) f.col(c) /= nrm;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(f);
    cod.setThreshold(1e-10);
    const Eigen::VectorXd c = cod.solve(y);
    return (f * c - y).norm() / ynorm;
  }

  require(m > p, "the blocked QR path needs an overdetermined system");
  Eigen::MatrixXd a(m, p + 1);
  a.leftCols(p) = features;
  for (Eigen::Index c = 0; c < p; ++c) {
    const double nrm = a.col(c).norm();
    if (nrm > 0) a.col(c) /= nrm;
  }
  a.col(p) = y;
  std::vector<double> tau(static_cast<std::size_t>(p) + 1);
  const lapack_int info =
      LAPACKE_dgeqrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(m),
                     static_cast<lapack_int>(p + 1), a.data(), static_cast<lapack_int>(m),
                     tau.data());
  if (info != 0) throw NumericalError("dgeqrf failed with info " + std::to_string(info));
  return std::abs(a(p, p)) / ynorm;
}

struct CertificationReport {
  double relative_residual = 0;
  Eigen::Index num_samples = 0;
  Eigen::Index num_monomials = 0;
  bool passed = false;
};

inline constexpr double kCertificationThreshold = 1e-8;

/// Fits noiseless joint torques onto the evaluated GipRkhs monomials and
/// reports the relative residual; passing certifies that the inverse dynamics
/// of the given joint is a polynomial of the stated class. The evaluated
/// dictionary is structurally rank-deficient on the torus (cos^2 + sin^2 = 1),
/// hence the rank-revealing solve.
inline CertificationReport certify_proposition1(const RobotModel& model,
                                                const std::vector<JointState>& samples,
                                                int joint_index,
                                                const MonomialSet* set_override = nullptr) {
  model.validate();
  const int n = model.dof();
  require(joint_index >= 0 && joint_index < n, "joint index out of range");
  const std::vector<JointType> types = model.joint_types();
  const MonomialSet set = set_override
                              ? *set_override
                              : enumerate_monomials(n, types, MonomialConvention::GipRkhs);
  require(samples.size() >= 2 * set.size(),
          "certification needs at least twice as many samples as monomials");

  const Eigen::MatrixXd aug = augment_rows(samples, types);
  const Eigen::MatrixXd features = evaluate_monomials(aug, set);
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  const auto params = barycentric_params(model);
  for (size_t s = 0; s < samples.size(); ++s)
    y[static_cast<Eigen::Index>(s)] = inverse_dynamics_params(model, samples[s], params)[joint_index];

  CertificationReport report;
  report.num_samples = static_cast<Eigen::Index>(samples.size());
  report.num_monomials = static_cast<Eigen::Index>(set.size());
  report.relative_residual = relative_fit_residual(features, y);
  report.passed = report.relative_residual < kCertificationThreshold;
  return report;
}

// ---------------------------------------------------------------------------
// JSON serialization of monomial sets (inspection and test fixtures).

inline void to_json(nlohmann::json& j, const MonomialSet& set) {
  std::string types;
  for (JointType t : set.joint_types) types += t == JointType::Revolute ? 'R' : 'P';
  j = nlohmann::json{
      {"convention", set.convention == MonomialConvention::PropOne ? "prop_one" : "gip_rkhs"},
      {"joint_types", types},
      {"exponents", set.exponents}};
}

inline void from_json(const nlohmann::json& j, MonomialSet& set) {
  const std::string conv = j.at("convention").get<std::string>();
  if (conv == "prop_one") {
    set.convention = MonomialConvention::PropOne;
  } else if (conv == "gip_rkhs") {
    set.convention = MonomialConvention::GipRkhs;
  } else {
    throw ParseError("unknown monomial convention '" + conv + "'");
  }
  set.joint_types.clear();
  for (char c : j.at("joint_types").get<std::string>())
    set.joint_types.push_back(c == 'P' ? JointType::Prismatic : JointType::Revolute);
  set.layout = make_augmented_layout(set.joint_types);
  set.exponents.clear();
  j.at("exponents").get_to(set.exponents);
  for (const auto& e : set.exponents)
    if (static_cast<int>(e.size()) != set.layout.gamma())
      throw ParseError("exponent vector length does not match layout");
}

}  // namespace gipid

#endif  // GIPID_FEATURE_SPACE_HPP_
