#ifndef GIPID_KINEMATICS_HPP_
#define GIPID_KINEMATICS_HPP_

#include <Eigen/Dense>
#include <vector>

#include "gipid/robot_model.hpp"

namespace gipid {

struct Frame {
  Eigen::Matrix3d R;
  Eigen::Vector3d p;
};

/// Relative DH transform of link i given its joint coordinate:
///   R_i^{i-1} = Rz(theta_i) Rx(alpha_i),
///   l_i^{i-1} = [0, 0, d_i]^T + Rz(theta_i) [a_i, 0, 0]^T.
inline Frame dh_transform(const LinkSpec& link, double qi) {
  const double theta = link.joint_type == JointType::Revolute
                           ? link.dh_theta_offset + qi
                           : link.dh_theta_offset;
  const double d = link.joint_type == JointType::Prismatic
                       ? link.dh_d_offset + qi
                       : link.dh_d_offset;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(link.dh_alpha), sa = std::sin(link.dh_alpha);
  Frame f;
  f.R << ct, -st * ca, st * sa,
         st, ct * ca, -ct * sa,
         0, sa, ca;
  f.p = Eigen::Vector3d(link.dh_a * ct, link.dh_a * st, d);
  return f;
}

/// Base-frame pose of every link frame plus the joint axes, all computed once.
/// Index 0 is the base frame; frames 1..n are the link frames. Joint k
/// (0-based) acts along the z axis of frame k.
struct KinematicsCache {
  std::vector<Eigen::Matrix3d> R;  // R[i] = R_i^0, size n+1
  std::vector<Eigen::Vector3d> o;  // frame origins in base coords, size n+1

  Eigen::Vector3d axis(int joint) const { return R[joint].col(2); }
};

inline KinematicsCache compute_kinematics(const RobotModel& model,
                                          const Eigen::Ref<const Eigen::VectorXd>& q) {
  const int n = model.dof();
  require(q.size() == n, "q dimension does not match model dof");
  require(q.allFinite(), "q must be finite");
  KinematicsCache cache;
  cache.R.resize(n + 1);
  cache.o.resize(n + 1);
  cache.R[0].setIdentity();
  cache.o[0].setZero();
  for (int i = 0; i < n; ++i) {
    const Frame rel = dh_transform(model.links[i], q[i]);
    cache.R[i + 1] = cache.R[i] * rel.R;
    cache.o[i + 1] = cache.o[i] + cache.R[i] * rel.p;
  }
  return cache;
}

/// Frames 1..n in base coordinates (entry i-1 holds frame i).
inline std::vector<Frame> forward_kinematics(const RobotModel& model,
                                             const Eigen::Ref<const Eigen::VectorXd>& q) {
  const KinematicsCache cache = compute_kinematics(model, q);
  std::vector<Frame> frames(model.dof());
  for (int i = 0; i < model.dof(); ++i) frames[i] = {cache.R[i + 1], cache.o[i + 1]};
  return frames;
}

/// Geometric Jacobian of a world-space point rigidly attached to link
/// `link_index` (0-based). Columns past the link are zero.
inline Eigen::MatrixXd point_jacobian(const RobotModel& model, const KinematicsCache& cache,
                                      int link_index, const Eigen::Vector3d& point) {
  const int n = model.dof();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, n);
  for (int k = 0; k <= link_index; ++k) {
    const Eigen::Vector3d z = cache.axis(k);
    if (model.links[k].joint_type == JointType::Revolute) {
      jac.col(k) = z.cross(point - cache.o[k]);
    } else {
      jac.col(k) = z;
    }
  }
  return jac;
}

/// Angular Jacobian of link `link_index`; prismatic columns are zero.
inline Eigen::MatrixXd angular_jacobian(const RobotModel& model, const KinematicsCache& cache,
                                        int link_index) {
  const int n = model.dof();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, n);
  for (int k = 0; k <= link_index; ++k) {
    if (model.links[k].joint_type == JointType::Revolute) jac.col(k) = cache.axis(k);
  }
  return jac;
}

struct LinkComJacobians {
  Eigen::Vector3d com;      // centre of mass in base coords
  Eigen::MatrixXd lin;      // 3 x n, dcom/dt = lin * dq
  Eigen::MatrixXd ang;      // 3 x n, omega = ang * dq
};

inline std::vector<LinkComJacobians> com_positions_and_jacobians(
    const RobotModel& model, const Eigen::Ref<const Eigen::VectorXd>& q) {
  const KinematicsCache cache = compute_kinematics(model, q);
  std::vector<LinkComJacobians> out(model.dof());
  for (int i = 0; i < model.dof(); ++i) {
    out[i].com = cache.o[i + 1] + cache.R[i + 1] * model.links[i].com;
    out[i].lin = point_jacobian(model, cache, i, out[i].com);
    out[i].ang = angular_jacobian(model, cache, i);
  }
  return out;
}

}  // namespace gipid

#endif  // GIPID_KINEMATICS_HPP_
