#ifndef GIPID_TESTS_HELPERS_HPP_
#define GIPID_TESTS_HELPERS_HPP_

#include <vector>

#include "gipid/common.hpp"
#include "gipid/robot_model.hpp"

namespace helpers {

using namespace gipid;

/// Random serial chain with physically valid (PSD) link inertias.
inline RobotModel random_chain(const std::vector<JointType>& types, uint64_t seed) {
  Rng rng(seed);
  RobotModel m;
  m.name = "random-chain";
  m.gravity = Eigen::Vector3d(0, 0, -9.81);
  for (JointType t : types) {
    LinkSpec l;
    l.joint_type = t;
    l.dh_a = uniform(rng, 0.1, 0.6);
    l.dh_alpha = uniform(rng, -1.5, 1.5);
    l.dh_d_offset = uniform(rng, -0.3, 0.3);
    l.dh_theta_offset = uniform(rng, -1.5, 1.5);
    l.mass = uniform(rng, 0.5, 3.0);
    l.com = Eigen::Vector3d(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2),
                            uniform(rng, -0.2, 0.2));
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = uniform(rng, -1, 1);
    const Eigen::Matrix3d psd =
        0.01 * (a.transpose() * a) + 0.005 * Eigen::Matrix3d::Identity();
    l.inertia = {psd(0, 0), psd(0, 1), psd(0, 2), psd(1, 1), psd(1, 2), psd(2, 2)};
    m.links.push_back(l);
  }
  return m;
}

inline std::vector<JointType> parse_types(const std::string& s) {
  std::vector<JointType> t;
  for (char c : s) t.push_back(c == 'P' ? JointType::Prismatic : JointType::Revolute);
  return t;
}

/// Random states with q in [-pi, pi] (revolute) or [-1, 1] m (prismatic) and
/// velocities/accelerations in [-vel, vel].
inline std::vector<JointState> random_states(const std::vector<JointType>& types, int count,
                                             uint64_t seed, double vel = 2.0) {
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

/// Planar two-link arm in a vertical plane (gravity along -y), the classic
/// textbook configuration used as an independent closed-form oracle.
struct PlanarRR {
  double l1 = 1.0, l2 = 0.8;
  double lc1 = 0.5, lc2 = 0.4;  // CoM distance from each joint
  double m1 = 2.0, m2 = 1.5;
  double izz1 = 0.05, izz2 = 0.03;  // about the CoM
  double g = 9.81;

  RobotModel model() const {
    RobotModel m;
    m.name = "planar-rr";
    m.gravity = Eigen::Vector3d(0, -g, 0);
    LinkSpec a, b;
    a.joint_type = JointType::Revolute;
    a.dh_a = l1;
    a.mass = m1;
    a.com = Eigen::Vector3d(lc1 - l1, 0, 0);
    a.inertia = {0, 0, 0, 0, 0, izz1};
    b.joint_type = JointType::Revolute;
    b.dh_a = l2;
    b.mass = m2;
    b.com = Eigen::Vector3d(lc2 - l2, 0, 0);
    b.inertia = {0, 0, 0, 0, 0, izz2};
    m.links = {a, b};
    return m;
  }

  Eigen::Matrix2d inertia(double q2) const {
    const double c2 = std::cos(q2);
    Eigen::Matrix2d b;
    b(0, 0) = m1 * lc1 * lc1 + izz1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2) + izz2;
    b(0, 1) = b(1, 0) = m2 * (lc2 * lc2 + l1 * lc2 * c2) + izz2;
    b(1, 1) = m2 * lc2 * lc2 + izz2;
    return b;
  }

  Eigen::Matrix2d coriolis(double q2, double dq1, double dq2) const {
    const double h = -m2 * l1 * lc2 * std::sin(q2);
    Eigen::Matrix2d c;
    c << h * dq2, h * (dq1 + dq2), -h * dq1, 0;
    return c;
  }

  Eigen::Vector2d gravity(double q1, double q2) const {
    const double c1 = std::cos(q1), c12 = std::cos(q1 + q2);
    Eigen::Vector2d v;
    v[0] = g * (m1 * lc1 * c1 + m2 * (l1 * c1 + lc2 * c12));
    v[1] = g * m2 * lc2 * c12;
    return v;
  }
};

}  // namespace helpers

#endif  // GIPID_TESTS_HELPERS_HPP_
