#ifndef GIPID_TRAJECTORY_HPP_
#define GIPID_TRAJECTORY_HPP_

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "gipid/robot_model.hpp"

namespace gipid {

/// Excitation trajectories: per joint a sum of sinusoids with random
/// amplitudes, angular velocities and phases. Amplitudes are rescaled per
/// joint whenever the position would leave its clip range.
struct TrajectoryConfig {
  int n_sinusoids = 200;
  std::array<double, 2> omega_range = {-2.0, 2.0};      // rad/s
  std::array<double, 2> amplitude_range = {-1.0, 1.0};  // before rescaling
  double duration = 16.0;                               // s
  double dt = 8e-3;                                     // s
  uint64_t seed = 0;
  Eigen::VectorXd position_clip;  // per joint; empty = 1.0 for every joint

  void validate() const {
    require(n_sinusoids >= 1, "need at least one sinusoid");
    require(dt > 0, "dt must be positive");
    require(duration >= dt, "duration must cover at least one step");
    require(std::isfinite(omega_range[0]) && std::isfinite(omega_range[1]) &&
                omega_range[0] <= omega_range[1],
            "omega range must be finite and ordered");
    require(amplitude_range[0] <= amplitude_range[1], "amplitude range must be ordered");
  }
};

struct Trajectory {
  Eigen::VectorXd time;
  std::vector<JointState> states;
};

inline Trajectory generate_trajectory(int n, const TrajectoryConfig& cfg) {
  cfg.validate();
  require(n >= 1, "trajectory needs at least one joint");
  Eigen::VectorXd clip = cfg.position_clip;
  if (clip.size() == 0) clip = Eigen::VectorXd::Ones(n);
  require(clip.size() == n, "position clip must have one entry per joint");
  require((clip.array() > 0).all(), "position clips must be positive");

  const int steps = static_cast<int>(std::floor(cfg.duration / cfg.dt)) + 1;
  Trajectory out;
  out.time.resize(steps);
  for (int k = 0; k < steps; ++k) out.time[k] = k * cfg.dt;
  out.states.assign(steps, JointState(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                                      Eigen::VectorXd::Zero(n)));

  Rng rng(cfg.seed);
  Eigen::ArrayXd amp(cfg.n_sinusoids), omega(cfg.n_sinusoids), phase(cfg.n_sinusoids);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < cfg.n_sinusoids; ++k) {
      amp[k] = uniform(rng, cfg.amplitude_range[0], cfg.amplitude_range[1]);
      omega[k] = uniform(rng, cfg.omega_range[0], cfg.omega_range[1]);
      phase[k] = uniform(rng, 0.0, 2 * M_PI);
    }
    // First pass: peak position over the sampled grid.
    double peak = 0;
    for (int s = 0; s < steps; ++s) {
      const double q = (amp * (omega * out.time[s] + phase).sin()).sum();
      peak = std::max(peak, std::abs(q));
    }
    // Keep a margin below the clip so the continuous-time curve cannot hit it.
    const double limit = 0.98 * clip[j];
    const double scale = peak > limit ? limit / peak : 1.0;
    const Eigen::ArrayXd a = scale * amp;
    for (int s = 0; s < steps; ++s) {
      const Eigen::ArrayXd arg = omega * out.time[s] + phase;
      out.states[s].q[j] = (a * arg.sin()).sum();
      out.states[s].dq[j] = (a * omega * arg.cos()).sum();
      out.states[s].ddq[j] = -(a * omega.square() * arg.sin()).sum();
    }
  }
  return out;
}

}  // namespace gipid

#endif  // GIPID_TRAJECTORY_HPP_
