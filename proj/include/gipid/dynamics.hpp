#ifndef GIPID_DYNAMICS_HPP_
#define GIPID_DYNAMICS_HPP_

#include <Eigen/Dense>
#include <vector>

#include "gipid/kinematics.hpp"
#include "gipid/robot_model.hpp"

namespace gipid {

/// Link dynamics parameters in the form that keeps joint torques linear:
/// mass m, first moment h = m*com (link frame), and the inertia tensor about
/// the link-frame origin. Conversion from the LinkSpec (inertia about the
/// centre of mass) is the parallel-axis shift.
struct BarycentricParams {
  double m = 0;
  Eigen::Vector3d h = Eigen::Vector3d::Zero();
  Eigen::Matrix3d inertia_origin = Eigen::Matrix3d::Zero();
};

inline BarycentricParams barycentric_from_link(const LinkSpec& link) {
  BarycentricParams p;
  p.m = link.mass;
  p.h = link.mass * link.com;
  p.inertia_origin =
      link.inertia_tensor() +
      link.mass * (link.com.squaredNorm() * Eigen::Matrix3d::Identity() -
                   link.com * link.com.transpose());
  return p;
}

inline std::vector<BarycentricParams> barycentric_params(const RobotModel& model) {
  std::vector<BarycentricParams> out(model.links.size());
  for (size_t i = 0; i < model.links.size(); ++i) out[i] = barycentric_from_link(model.links[i]);
  return out;
}

/// Kinematic quantities at a fixed q, shared by every dynamics evaluation at
/// that configuration (and by all regressor columns).
struct DynamicsWorkspace {
  KinematicsCache kin;
  std::vector<Eigen::MatrixXd> jac_origin;   // per link, 3 x n, frame origin
  std::vector<Eigen::MatrixXd> jac_angular;  // per link, 3 x n
};

inline DynamicsWorkspace make_dynamics_workspace(const RobotModel& model,
                                                 const Eigen::Ref<const Eigen::VectorXd>& q) {
  DynamicsWorkspace ws;
  ws.kin = compute_kinematics(model, q);
  const int n = model.dof();
  ws.jac_origin.resize(n);
  ws.jac_angular.resize(n);
  for (int i = 0; i < n; ++i) {
    ws.jac_origin[i] = point_jacobian(model, ws.kin, i, ws.kin.o[i + 1]);
    ws.jac_angular[i] = angular_jacobian(model, ws.kin, i);
  }
  return ws;
}

/// Inertia matrix assembled from kinetic energy in barycentric form:
///   T_i = 1/2 m |v_o|^2 + v_o . (w x R h) + 1/2 w^T (R I_o R^T) w.
inline Eigen::MatrixXd inertia_matrix_ws(const DynamicsWorkspace& ws,
                                         const std::vector<BarycentricParams>& params) {
  const int n = static_cast<int>(params.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& jo = ws.jac_origin[i];
    const auto& jw = ws.jac_angular[i];
    const Eigen::Matrix3d& rot = ws.kin.R[i + 1];
    const Eigen::Vector3d rh = rot * params[i].h;
    const Eigen::Matrix3d cross = skew(rh);
    b.noalias() += params[i].m * jo.transpose() * jo;
    b.noalias() -= jo.transpose() * cross * jw;
    b.noalias() += jw.transpose() * cross * jo;
    b.noalias() += jw.transpose() * rot * params[i].inertia_origin * rot.transpose() * jw;
  }
  return b;
}

inline Eigen::VectorXd gravity_vector_ws(const RobotModel& model, const DynamicsWorkspace& ws,
                                         const std::vector<BarycentricParams>& params) {
  const int n = model.dof();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d weighted_com =
        params[j].m * ws.kin.o[j + 1] + ws.kin.R[j + 1] * params[j].h;
    for (int k = 0; k <= j; ++k) {
      const Eigen::Vector3d z = ws.kin.axis(k);
      Eigen::Vector3d d;  // d(m_j c_j)/dq_k
      if (model.links[k].joint_type == JointType::Revolute) {
        d = z.cross(weighted_com - params[j].m * ws.kin.o[k]);
      } else {
        d = params[j].m * z;
      }
      g[k] -= model.gravity.dot(d);
    }
  }
  return g;
}

/// Potential energy U = -sum_j g0 . (m_j c_j), the convention under which the
/// torque-side gravity term is g(q) = dU/dq.
inline double potential_energy_params(const RobotModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& q,
                                      const std::vector<BarycentricParams>& params) {
  const KinematicsCache kin = compute_kinematics(model, q);
  double u = 0;
  for (int j = 0; j < model.dof(); ++j) {
    const Eigen::Vector3d weighted_com = params[j].m * kin.o[j + 1] + kin.R[j + 1] * params[j].h;
    u -= model.gravity.dot(weighted_com);
  }
  return u;
}

inline double potential_energy(const RobotModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& q) {
  return potential_energy_params(model, q, barycentric_params(model));
}

namespace detail {
// Central finite-difference step for dB/dq_k.
inline constexpr double kInertiaFdStep = 1e-6;

inline std::vector<Eigen::MatrixXd> inertia_partials(
    const RobotModel& model, const Eigen::Ref<const Eigen::VectorXd>& q,
    const std::vector<BarycentricParams>& params) {
  const int n = model.dof();
  std::vector<Eigen::MatrixXd> db(n);
  Eigen::VectorXd qp = q, qm = q;
  for (int k = 0; k < n; ++k) {
    qp[k] = q[k] + kInertiaFdStep;
    qm[k] = q[k] - kInertiaFdStep;
    const Eigen::MatrixXd bp = inertia_matrix_ws(make_dynamics_workspace(model, qp), params);
    const Eigen::MatrixXd bm = inertia_matrix_ws(make_dynamics_workspace(model, qm), params);
    db[k] = (bp - bm) / (2 * kInertiaFdStep);
    qp[k] = q[k];
    qm[k] = q[k];
  }
  return db;
}

inline Eigen::MatrixXd coriolis_from_partials(const std::vector<Eigen::MatrixXd>& db,
                                              const Eigen::Ref<const Eigen::VectorXd>& dq) {
  const int n = static_cast<int>(dq.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double cij = 0;
      for (int k = 0; k < n; ++k) {
        // Christoffel symbols of the first kind from dB/dq.
        cij += 0.5 * (db[k](i, j) + db[j](i, k) - db[i](j, k)) * dq[k];
      }
      c(i, j) = cij;
    }
  return c;
}
}  // namespace detail

inline Eigen::MatrixXd coriolis_matrix_params(const RobotModel& model,
                                              const Eigen::Ref<const Eigen::VectorXd>& q,
                                              const Eigen::Ref<const Eigen::VectorXd>& dq,
                                              const std::vector<BarycentricParams>& params) {
  return detail::coriolis_from_partials(detail::inertia_partials(model, q, params), dq);
}

inline Eigen::VectorXd inverse_dynamics_params(const RobotModel& model, const JointState& state,
                                               const std::vector<BarycentricParams>& params) {
  const DynamicsWorkspace ws = make_dynamics_workspace(model, state.q);
  const Eigen::MatrixXd b = inertia_matrix_ws(ws, params);
  const Eigen::MatrixXd c = coriolis_matrix_params(model, state.q, state.dq, params);
  const Eigen::VectorXd g = gravity_vector_ws(model, ws, params);
  return b * state.ddq + c * state.dq + g;
}

// ---------------------------------------------------------------------------
// Model-level operations.

inline Eigen::MatrixXd inertia_matrix(const RobotModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& q) {
  model.validate();
  return inertia_matrix_ws(make_dynamics_workspace(model, q), barycentric_params(model));
}

inline Eigen::MatrixXd coriolis_matrix(const RobotModel& model,
                                       const Eigen::Ref<const Eigen::VectorXd>& q,
                                       const Eigen::Ref<const Eigen::VectorXd>& dq) {
  model.validate();
  require(dq.size() == model.dof() && dq.allFinite(), "dq must be finite and match model dof");
  return coriolis_matrix_params(model, q, dq, barycentric_params(model));
}

inline Eigen::VectorXd gravity_vector(const RobotModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& q) {
  model.validate();
  return gravity_vector_ws(model, make_dynamics_workspace(model, q), barycentric_params(model));
}

inline Eigen::VectorXd inverse_dynamics(const RobotModel& model, const JointState& state,
                                        bool with_actuator = false) {
  model.validate();
  state.check(model.dof());
  Eigen::VectorXd tau = inverse_dynamics_params(model, state, barycentric_params(model));
  if (with_actuator) {
    require(!model.actuator.empty(), "model carries no actuator description");
    for (int i = 0; i < model.dof(); ++i) {
      const auto& a = model.actuator[i];
      const double sgn = state.dq[i] > 0 ? 1.0 : (state.dq[i] < 0 ? -1.0 : 0.0);
      tau[i] += a.rotor_inertia_reflected * state.ddq[i] + a.viscous_friction * state.dq[i] +
                a.coulomb_friction * sgn;
    }
  }
  return tau;
}

}  // namespace gipid

#endif  // GIPID_DYNAMICS_HPP_
