#ifndef GIPID_REGRESSOR_HPP_
#define GIPID_REGRESSOR_HPP_

#include <Eigen/Dense>
#include <vector>

#include "gipid/dynamics.hpp"

namespace gipid {

/// Canonical dynamics-parameter packing, 10 entries per link in link order:
///   (m, h_x, h_y, h_z, Ixx, Ixy, Ixz, Iyy, Iyz, Izz)
/// with h = m*com and the inertia tensor taken about the link-frame origin.
/// Joint torques are exactly linear in this vector.
inline constexpr int kParamsPerLink = 10;

inline Eigen::VectorXd pack_dynamics_params(const RobotModel& model) {
  const int n = model.dof();
  Eigen::VectorXd w(kParamsPerLink * n);
  for (int i = 0; i < n; ++i) {
    const BarycentricParams p = barycentric_from_link(model.links[i]);
    const Eigen::Matrix3d& io = p.inertia_origin;
    w.segment<kParamsPerLink>(kParamsPerLink * i) << p.m, p.h.x(), p.h.y(), p.h.z(), io(0, 0),
        io(0, 1), io(0, 2), io(1, 1), io(1, 2), io(2, 2);
  }
  return w;
}

inline std::vector<BarycentricParams> unpack_dynamics_params(
    const Eigen::Ref<const Eigen::VectorXd>& w) {
  require(w.size() > 0 && w.size() % kParamsPerLink == 0,
          "dynamics parameter vector length must be a positive multiple of 10");
  const int n = static_cast<int>(w.size()) / kParamsPerLink;
  std::vector<BarycentricParams> params(n);
  for (int i = 0; i < n; ++i) {
    const auto s = w.segment<kParamsPerLink>(kParamsPerLink * i);
    params[i].m = s[0];
    params[i].h = Eigen::Vector3d(s[1], s[2], s[3]);
    params[i].inertia_origin << s[4], s[5], s[6], s[5], s[7], s[8], s[6], s[8], s[9];
  }
  return params;
}

/// The n x 10n matrix Phi(x) with tau = Phi(x) w. Columns are built by
/// evaluating the (linear) dynamics at unit parameter vectors, sharing the
/// kinematics workspaces across columns.
inline Eigen::MatrixXd regressor(const RobotModel& model, const JointState& state) {
  model.validate();
  const int n = model.dof();
  state.check(n);
  const int npar = kParamsPerLink * n;

  const DynamicsWorkspace ws0 = make_dynamics_workspace(model, state.q);
  std::vector<DynamicsWorkspace> wsp(n), wsm(n);
  Eigen::VectorXd qk = state.q;
  for (int k = 0; k < n; ++k) {
    qk[k] = state.q[k] + detail::kInertiaFdStep;
    wsp[k] = make_dynamics_workspace(model, qk);
    qk[k] = state.q[k] - detail::kInertiaFdStep;
    wsm[k] = make_dynamics_workspace(model, qk);
    qk[k] = state.q[k];
  }

  Eigen::MatrixXd phi(n, npar);
  std::vector<Eigen::MatrixXd> db(n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(npar);
  for (int col = 0; col < npar; ++col) {
    unit[col] = 1;
    const std::vector<BarycentricParams> params = unpack_dynamics_params(unit);
    const Eigen::MatrixXd b = inertia_matrix_ws(ws0, params);
    for (int k = 0; k < n; ++k) {
      db[k] = (inertia_matrix_ws(wsp[k], params) - inertia_matrix_ws(wsm[k], params)) /
              (2 * detail::kInertiaFdStep);
    }
    const Eigen::MatrixXd c = detail::coriolis_from_partials(db, state.dq);
    const Eigen::VectorXd g = gravity_vector_ws(model, ws0, params);
    phi.col(col) = b * state.ddq + c * state.dq + g;
    unit[col] = 0;
  }
  return phi;
}

/// Row block per state: (N*n) x 10n stacked regressor.
inline Eigen::MatrixXd stacked_regressor(const RobotModel& model,
                                         const std::vector<JointState>& states) {
  require(!states.empty(), "stacked_regressor needs at least one state");
  const int n = model.dof();
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(states.size()) * n, kParamsPerLink * n);
  for (size_t s = 0; s < states.size(); ++s)
    phi.middleRows(static_cast<Eigen::Index>(s) * n, n) = regressor(model, states[s]);
  return phi;
}

/// Least-squares estimate of the dynamics parameters from stacked data.
/// Rank deficiency is generic (only base parameters are identifiable); the
/// rank-revealing solve returns the minimum-norm solution.
inline Eigen::VectorXd fisherian_identify(const Eigen::MatrixXd& phi_stack,
                                          const Eigen::VectorXd& tau_stack) {
  require(phi_stack.rows() > 0 && phi_stack.cols() > 0, "fisherian_identify: empty data");
  require(phi_stack.rows() == tau_stack.size(),
          "fisherian_identify: row count must match torque vector length");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(phi_stack);
  return cod.solve(tau_stack);
}

}  // namespace gipid

#endif  // GIPID_REGRESSOR_HPP_
