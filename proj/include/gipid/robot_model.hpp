#ifndef GIPID_ROBOT_MODEL_HPP_
#define GIPID_ROBOT_MODEL_HPP_

#include <Eigen/Dense>
#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gipid/common.hpp"

namespace gipid {

enum class JointType { Revolute, Prismatic };

/// One link of a serial chain under the standard (distal) DH convention.
///
/// For a revolute joint, dh_d_offset is the full constant d_i and
/// dh_theta_offset is the constant part of theta_i = theta0_i + q_i.
/// For a prismatic joint, dh_theta_offset is the full constant theta_i and
/// dh_d_offset is the constant part of d_i = d0_i + q_i.
///
/// `inertia` is the link inertia tensor about the centre of mass, expressed
/// in the link frame, packed (xx, xy, xz, yy, yz, zz).
struct LinkSpec {
  JointType joint_type = JointType::Revolute;
  double dh_a = 0;
  double dh_alpha = 0;
  double dh_d_offset = 0;
  double dh_theta_offset = 0;
  double mass = 0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  std::array<double, 6> inertia = {0, 0, 0, 0, 0, 0};

  Eigen::Matrix3d inertia_tensor() const {
    Eigen::Matrix3d t;
    t << inertia[0], inertia[1], inertia[2],
         inertia[1], inertia[3], inertia[4],
         inertia[2], inertia[4], inertia[5];
    return t;
  }
};

/// Per-joint actuator description (rigid transmission).
struct ActuatorSpec {
  double rotor_inertia_reflected = 0;  // Kr^2 * Bm diagonal entry
  double viscous_friction = 0;         // Fv
  double coulomb_friction = 0;         // Fc
  double torque_gain = 1;              // K_eq diagonal entry, N*m per A
};

struct RobotModel {
  std::string name;
  std::vector<LinkSpec> links;
  Eigen::Vector3d gravity = Eigen::Vector3d(0, 0, -9.81);
  std::vector<ActuatorSpec> actuator;  // empty, or one entry per joint

  int dof() const { return static_cast<int>(links.size()); }

  std::vector<JointType> joint_types() const {
    std::vector<JointType> jt(links.size());
    for (size_t i = 0; i < links.size(); ++i) jt[i] = links[i].joint_type;
    return jt;
  }

  int num_revolute() const {
    int c = 0;
    for (const auto& l : links) c += l.joint_type == JointType::Revolute;
    return c;
  }
  int num_prismatic() const { return dof() - num_revolute(); }

  /// Throws ModelValidationError on non-physical parameters.
  void validate() const {
    if (links.empty()) throw ModelValidationError("robot model must have at least one link");
    if (!actuator.empty() && actuator.size() != links.size())
      throw ModelValidationError("actuator list must be empty or match the joint count");
    if (!gravity.allFinite()) throw ModelValidationError("gravity vector must be finite");
    for (size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      const std::string tag = "link " + std::to_string(i + 1) + ": ";
      if (!(l.mass >= 0) || !std::isfinite(l.mass))
        throw ModelValidationError(tag + "mass must be non-negative");
      if (!l.com.allFinite()) throw ModelValidationError(tag + "com must be finite");
      Eigen::Matrix3d it = l.inertia_tensor();
      if (!it.allFinite()) throw ModelValidationError(tag + "inertia must be finite");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(it);
      const double floor = -1e-12 * std::max(it.trace(), 1.0);
      if (es.eigenvalues().minCoeff() < floor)
        throw ModelValidationError(tag + "inertia tensor must be positive semidefinite");
    }
  }
};

/// Raw input location x = [q, dq, ddq].
struct JointState {
  Eigen::VectorXd q, dq, ddq;

  JointState() = default;
  JointState(Eigen::VectorXd q_, Eigen::VectorXd dq_, Eigen::VectorXd ddq_)
      : q(std::move(q_)), dq(std::move(dq_)), ddq(std::move(ddq_)) {}

  int dof() const { return static_cast<int>(q.size()); }

  Eigen::VectorXd flat() const {
    Eigen::VectorXd x(q.size() * 3);
    x << q, dq, ddq;
    return x;
  }

  void check(int n) const {
    require(q.size() == n && dq.size() == n && ddq.size() == n,
            "joint state dimension does not match model dof");
    require(q.allFinite() && dq.allFinite() && ddq.allFinite(),
            "joint state entries must be finite");
  }
};

// ---------------------------------------------------------------------------
// JSON serialization of robot model files (schema in docs/file-formats.md).

inline void to_json(nlohmann::json& j, const LinkSpec& l) {
  j = nlohmann::json{
      {"joint_type", l.joint_type == JointType::Revolute ? "revolute" : "prismatic"},
      {"dh_a", l.dh_a},
      {"dh_alpha", l.dh_alpha},
      {"dh_d_offset", l.dh_d_offset},
      {"dh_theta_offset", l.dh_theta_offset},
      {"mass", l.mass},
      {"com", {l.com.x(), l.com.y(), l.com.z()}},
      {"inertia", l.inertia}};
}

inline void from_json(const nlohmann::json& j, LinkSpec& l) {
  const std::string jt = j.at("joint_type").get<std::string>();
  if (jt == "revolute") {
    l.joint_type = JointType::Revolute;
  } else if (jt == "prismatic") {
    l.joint_type = JointType::Prismatic;
  } else {
    throw ParseError("unknown joint_type '" + jt + "'");
  }
  j.at("dh_a").get_to(l.dh_a);
  j.at("dh_alpha").get_to(l.dh_alpha);
  j.at("dh_d_offset").get_to(l.dh_d_offset);
  j.at("dh_theta_offset").get_to(l.dh_theta_offset);
  j.at("mass").get_to(l.mass);
  auto com = j.at("com");
  if (!com.is_array() || com.size() != 3) throw ParseError("com must be a 3-vector");
  l.com = Eigen::Vector3d(com[0].get<double>(), com[1].get<double>(), com[2].get<double>());
  auto in = j.at("inertia");
  if (!in.is_array() || in.size() != 6)
    throw ParseError("inertia must list 6 entries (xx, xy, xz, yy, yz, zz)");
  for (int k = 0; k < 6; ++k) l.inertia[k] = in[k].get<double>();
}

inline void to_json(nlohmann::json& j, const ActuatorSpec& a) {
  j = nlohmann::json{{"rotor_inertia_reflected", a.rotor_inertia_reflected},
                     {"viscous_friction", a.viscous_friction},
                     {"coulomb_friction", a.coulomb_friction},
                     {"torque_gain", a.torque_gain}};
}

inline void from_json(const nlohmann::json& j, ActuatorSpec& a) {
  j.at("rotor_inertia_reflected").get_to(a.rotor_inertia_reflected);
  j.at("viscous_friction").get_to(a.viscous_friction);
  j.at("coulomb_friction").get_to(a.coulomb_friction);
  j.at("torque_gain").get_to(a.torque_gain);
}

inline void to_json(nlohmann::json& j, const RobotModel& m) {
  j = nlohmann::json{{"links", m.links},
                     {"gravity", {m.gravity.x(), m.gravity.y(), m.gravity.z()}}};
  if (!m.name.empty()) j["name"] = m.name;
  if (!m.actuator.empty()) j["actuator"] = m.actuator;
}

inline void from_json(const nlohmann::json& j, RobotModel& m) {
  m.name = j.value("name", "");
  j.at("links").get_to(m.links);
  auto g = j.at("gravity");
  if (!g.is_array() || g.size() != 3) throw ParseError("gravity must be a 3-vector");
  m.gravity = Eigen::Vector3d(g[0].get<double>(), g[1].get<double>(), g[2].get<double>());
  m.actuator.clear();
  if (j.contains("actuator")) j.at("actuator").get_to(m.actuator);
}

inline RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open robot model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("robot model JSON: ") + e.what());
  }
  RobotModel m = j.get<RobotModel>();
  m.validate();
  return m;
}

inline void save_robot_model(const RobotModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write robot model file '" + path + "'");
  out << nlohmann::json(m).dump(2) << "\n";
}

}  // namespace gipid

#endif  // GIPID_ROBOT_MODEL_HPP_
