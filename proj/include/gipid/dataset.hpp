#ifndef GIPID_DATASET_HPP_
#define GIPID_DATASET_HPP_

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gipid/dynamics.hpp"
#include "gipid/trajectory.hpp"

namespace gipid {

enum class DatasetSource { Simulated, RealLog };

struct DatasetMeta {
  std::string robot;
  int n = 0;
  double noise_std = 0;
  uint64_t seed = 0;
  DatasetSource source = DatasetSource::Simulated;
  int downsample_step = 1;
};

/// Input-output sample table: states hold (q, dq, ddq) per row, torques one
/// column per joint. Written as CSV with a '#'-prefixed JSON meta line and
/// columns t, q1..qn, dq1..dqn, ddq1..ddqn, tau1..taun.
struct Dataset {
  DatasetMeta meta;
  Eigen::VectorXd timestamps;
  Eigen::MatrixXd states;   // N x 3n
  Eigen::MatrixXd torques;  // N x n

  Eigen::Index size() const { return states.rows(); }
  int dof() const { return meta.n; }

  JointState state(Eigen::Index row) const {
    const int n = meta.n;
    return JointState(states.row(row).segment(0, n), states.row(row).segment(n, n),
                      states.row(row).segment(2 * n, n));
  }

  std::vector<JointState> joint_states() const {
    std::vector<JointState> out(static_cast<size_t>(size()));
    for (Eigen::Index i = 0; i < size(); ++i) out[static_cast<size_t>(i)] = state(i);
    return out;
  }

  void check() const {
    require(meta.n >= 1, "dataset needs at least one joint");
    require(states.cols() == 3 * meta.n, "state width must be 3n");
    require(torques.rows() == states.rows() && torques.cols() == meta.n,
            "torque table must be N x n");
    require(timestamps.size() == states.rows(), "timestamp count must match rows");
    for (Eigen::Index i = 1; i < timestamps.size(); ++i)
      require(timestamps[i] > timestamps[i - 1], "timestamps must be strictly increasing");
  }
};

inline void to_json(nlohmann::json& j, const DatasetMeta& m) {
  j = nlohmann::json{{"robot", m.robot},
                     {"n", m.n},
                     {"noise_std", m.noise_std},
                     {"seed", m.seed},
                     {"source", m.source == DatasetSource::Simulated ? "Simulated" : "RealLog"},
                     {"downsample_step", m.downsample_step}};
}

inline void from_json(const nlohmann::json& j, DatasetMeta& m) {
  m.robot = j.value("robot", "");
  m.n = j.at("n").get<int>();
  m.noise_std = j.value("noise_std", 0.0);
  m.seed = j.value("seed", uint64_t{0});
  const std::string src = j.value("source", "Simulated");
  if (src == "Simulated") {
    m.source = DatasetSource::Simulated;
  } else if (src == "RealLog") {
    m.source = DatasetSource::RealLog;
  } else {
    throw ParseError("unknown dataset source '" + src + "'");
  }
  m.downsample_step = j.value("downsample_step", 1);
}

// ---------------------------------------------------------------------------
// Generation.

/// Evaluates the rigid-body torques for every state and adds i.i.d. Gaussian
/// noise, independently per joint.
inline Dataset label_with_dynamics(const RobotModel& model,
                                   const std::vector<JointState>& states,
                                   const Eigen::VectorXd& timestamps, double noise_std,
                                   uint64_t seed) {
  model.validate();
  require(noise_std >= 0, "noise level cannot be negative");
  require(!states.empty(), "cannot label an empty state list");
  require(timestamps.size() == static_cast<Eigen::Index>(states.size()),
          "timestamp count must match states");
  const int n = model.dof();
  Dataset ds;
  ds.meta.robot = model.name;
  ds.meta.n = n;
  ds.meta.noise_std = noise_std;
  ds.meta.seed = seed;
  ds.meta.source = DatasetSource::Simulated;
  ds.timestamps = timestamps;
  ds.states.resize(static_cast<Eigen::Index>(states.size()), 3 * n);
  ds.torques.resize(static_cast<Eigen::Index>(states.size()), n);
  const auto params = barycentric_params(model);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t s = 0; s < states.size(); ++s) {
    states[s].check(n);
    ds.states.row(static_cast<Eigen::Index>(s)) = states[s].flat();
    Eigen::VectorXd tau = inverse_dynamics_params(model, states[s], params);
    for (int j = 0; j < n; ++j) tau[j] += noise_std * gauss(rng);
    ds.torques.row(static_cast<Eigen::Index>(s)) = tau;
  }
  return ds;
}

inline Dataset label_with_dynamics(const RobotModel& model, const Trajectory& traj,
                                   double noise_std, uint64_t seed) {
  return label_with_dynamics(model, traj.states, traj.time, noise_std, seed);
}

/// Kinematic perturbation: lengths (dh_a, dh_d_offset) moved uniformly within
/// +-0.05 m, angles (dh_alpha, dh_theta_offset) within +-5 degrees. Dynamics
/// parameters are untouched.
inline RobotModel perturb_kinematics(const RobotModel& model, uint64_t seed) {
  model.validate();
  RobotModel out = model;
  Rng rng(seed);
  const double angle = 5.0 * M_PI / 180.0;
  for (auto& link : out.links) {
    link.dh_a += uniform(rng, -0.05, 0.05);
    link.dh_d_offset += uniform(rng, -0.05, 0.05);
    link.dh_alpha += uniform(rng, -angle, angle);
    link.dh_theta_offset += uniform(rng, -angle, angle);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Causal differentiation of sampled positions.

struct CausalDerivatives {
  Eigen::MatrixXd dq, ddq;
  int first_valid = 2;  // rows before this hold no valid derivatives
};

inline CausalDerivatives differentiate_causal(const Eigen::MatrixXd& q, double dt) {
  require(q.rows() >= 3, "causal differentiation needs at least three samples");
  require(dt > 0, "dt must be positive");
  CausalDerivatives out;
  out.dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  out.ddq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (Eigen::Index k = 1; k < q.rows(); ++k)
    out.dq.row(k) = (q.row(k) - q.row(k - 1)) / dt;
  for (Eigen::Index k = 2; k < q.rows(); ++k)
    out.ddq.row(k) = (out.dq.row(k) - out.dq.row(k - 1)) / dt;
  out.first_valid = 2;
  return out;
}

inline CausalDerivatives differentiate_causal(const Eigen::MatrixXd& q,
                                              const Eigen::VectorXd& t) {
  require(t.size() == q.rows(), "timestamp count must match rows");
  require(q.rows() >= 3, "causal differentiation needs at least three samples");
  const double mean_dt = (t[t.size() - 1] - t[0]) / static_cast<double>(t.size() - 1);
  require(mean_dt > 0, "timestamps must increase");
  for (Eigen::Index k = 1; k < t.size(); ++k) {
    const double step = t[k] - t[k - 1];
    if (std::abs(step - mean_dt) > 0.01 * mean_dt)
      throw InvalidInputError("non-uniform sampling: step " + std::to_string(step) +
                              " deviates more than 1% from mean " + std::to_string(mean_dt));
  }
  return differentiate_causal(q, mean_dt);
}

// ---------------------------------------------------------------------------
// File format.

inline void write_dataset(const Dataset& ds, const std::string& path) {
  ds.check();
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write dataset file '" + path + "'");
  out << "# " << nlohmann::json(ds.meta).dump() << "\n";
  const int n = ds.meta.n;
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    put(ds.timestamps[r]);
    for (int c = 0; c < 3 * n; ++c) {
      out << ",";
      put(ds.states(r, c));
    }
    for (int c = 0; c < n; ++c) {
      out << ",";
      put(ds.torques(r, c));
    }
    out << "\n";
  }
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#')
    throw ParseError("missing '#' meta header", 1);
  Dataset ds;
  try {
    ds.meta = nlohmann::json::parse(line.substr(1)).get<DatasetMeta>();
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("meta header: ") + e.what(), 1);
  }
  if (ds.meta.n < 1) throw ParseError("meta header must carry n >= 1", 1);
  const int cols = 1 + 4 * ds.meta.n;

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(cols);
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "'", line_no);
      }
    }
    if (static_cast<int>(row.size()) != cols)
      throw ParseError("expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(row.size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("dataset has no data rows");

  const int n = ds.meta.n;
  ds.timestamps.resize(static_cast<Eigen::Index>(rows.size()));
  ds.states.resize(static_cast<Eigen::Index>(rows.size()), 3 * n);
  ds.torques.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (size_t r = 0; r < rows.size(); ++r) {
    ds.timestamps[static_cast<Eigen::Index>(r)] = rows[r][0];
    for (int c = 0; c < 3 * n; ++c) ds.states(static_cast<Eigen::Index>(r), c) = rows[r][1 + c];
    for (int c = 0; c < n; ++c)
      ds.torques(static_cast<Eigen::Index>(r), c) = rows[r][1 + 3 * n + c];
  }
  ds.check();
  return ds;
}

inline Dataset downsample(const Dataset& ds, int step) {
  require(step >= 1, "downsampling step must be at least 1");
  if (step == 1) return ds;
  Dataset out;
  out.meta = ds.meta;
  out.meta.downsample_step = ds.meta.downsample_step * step;
  const Eigen::Index kept = (ds.size() + step - 1) / step;
  out.timestamps.resize(kept);
  out.states.resize(kept, ds.states.cols());
  out.torques.resize(kept, ds.torques.cols());
  for (Eigen::Index i = 0; i < kept; ++i) {
    out.timestamps[i] = ds.timestamps[i * step];
    out.states.row(i) = ds.states.row(i * step);
    out.torques.row(i) = ds.torques.row(i * step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Real-log ingestion (documented column mapping in docs/file-formats.md):
// raw CSV rows t, q1..qn, dq1..dqn, i1..in with motor currents; torques are
// K_eq * i from the model's actuator gains and accelerations come from causal
// differentiation of the velocities. The first row carries no acceleration
// and is dropped.

inline Dataset ingest_current_log(const std::string& path, const RobotModel& model) {
  model.validate();
  require(!model.actuator.empty(),
          "current-log ingestion needs actuator torque gains on the model");
  const int n = model.dof();

  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  const int cols = 1 + 3 * n;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell '" + cell + "'", line_no);
      }
    }
    if (static_cast<int>(row.size()) != cols)
      throw ParseError("expected " + std::to_string(cols) + " columns (t, q, dq, i), got " +
                           std::to_string(row.size()),
                       line_no);
    rows.push_back(std::move(row));
  }
  require(rows.size() >= 3, "log must carry at least three samples");

  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd t(m);
  Eigen::MatrixXd q(m, n), dq(m, n), cur(m, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    t[r] = rows[static_cast<size_t>(r)][0];
    for (int c = 0; c < n; ++c) {
      q(r, c) = rows[static_cast<size_t>(r)][1 + c];
      dq(r, c) = rows[static_cast<size_t>(r)][1 + n + c];
      cur(r, c) = rows[static_cast<size_t>(r)][1 + 2 * n + c];
    }
  }
  // Accelerations by causal differences of the measured velocities.
  const double mean_dt = (t[m - 1] - t[0]) / static_cast<double>(m - 1);
  require(mean_dt > 0, "timestamps must increase");
  for (Eigen::Index k = 1; k < m; ++k)
    if (std::abs(t[k] - t[k - 1] - mean_dt) > 0.01 * mean_dt)
      throw InvalidInputError("non-uniform log sampling beyond 1% jitter");
  Eigen::MatrixXd ddq = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index k = 1; k < m; ++k) ddq.row(k) = (dq.row(k) - dq.row(k - 1)) / mean_dt;

  Dataset ds;
  ds.meta.robot = model.name;
  ds.meta.n = n;
  ds.meta.source = DatasetSource::RealLog;
  const Eigen::Index kept = m - 1;  // drop the acceleration-less first row
  ds.timestamps = t.tail(kept);
  ds.states.resize(kept, 3 * n);
  ds.torques.resize(kept, n);
  for (Eigen::Index r = 0; r < kept; ++r) {
    ds.states.row(r).segment(0, n) = q.row(r + 1);
    ds.states.row(r).segment(n, n) = dq.row(r + 1);
    ds.states.row(r).segment(2 * n, n) = ddq.row(r + 1);
    for (int c = 0; c < n; ++c)
      ds.torques(r, c) = model.actuator[static_cast<size_t>(c)].torque_gain * cur(r + 1, c);
  }
  ds.check();
  return ds;
}

}  // namespace gipid

#endif  // GIPID_DATASET_HPP_
