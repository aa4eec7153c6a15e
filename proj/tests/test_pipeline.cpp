#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "gipid/dataset.hpp"
#include "gipid/metrics.hpp"
#include "gipid/trajectory.hpp"
#include "helpers.hpp"

using namespace gipid;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/gipid_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("single sinusoid has exact analytic derivatives") {
  TrajectoryConfig cfg;
  cfg.n_sinusoids = 1;
  cfg.amplitude_range = {1.0, 1.0};
  cfg.omega_range = {1.0, 1.0};
  cfg.duration = 2.0;
  cfg.dt = 0.01;
  cfg.position_clip = Eigen::VectorXd::Constant(1, 10.0);  // no rescaling
  const Trajectory traj = generate_trajectory(1, cfg);
  // q = sin(t + phi) for a random phase; dq and ddq are its exact derivatives.
  for (size_t k = 0; k < traj.states.size(); k += 17) {
    const double t = traj.time[static_cast<Eigen::Index>(k)];
    const double q = traj.states[k].q[0];
    const double dq = traj.states[k].dq[0];
    const double ddq = traj.states[k].ddq[0];
    REQUIRE(dq * dq + q * q == Catch::Approx(1.0).margin(1e-12));  // A=1, w=1
    REQUIRE(ddq == Catch::Approx(-q).margin(1e-12));
    (void)t;
  }
}

TEST_CASE("trajectory derivatives pass the finite-difference check") {
  TrajectoryConfig cfg;
  cfg.seed = 5;
  cfg.duration = 4.0;
  cfg.dt = 1e-3;
  cfg.position_clip = Eigen::VectorXd::Constant(3, 2.0);
  const Trajectory traj = generate_trajectory(3, cfg);
  const auto& s = traj.states;
  for (size_t k = 50; k + 50 < s.size(); k += 111) {
    for (int j = 0; j < 3; ++j) {
      const double fd_dq = (s[k + 1].q[j] - s[k - 1].q[j]) / (2 * cfg.dt);
      REQUIRE(fd_dq == Catch::Approx(s[k].dq[j]).epsilon(1e-4).margin(1e-6));
      const double fd_ddq = (s[k + 1].dq[j] - s[k - 1].dq[j]) / (2 * cfg.dt);
      REQUIRE(fd_ddq == Catch::Approx(s[k].ddq[j]).epsilon(1e-4).margin(1e-6));
    }
  }
}

TEST_CASE("trajectories are deterministic and respect the clip") {
  TrajectoryConfig cfg;
  cfg.seed = 9;
  cfg.duration = 8.0;
  cfg.position_clip = (Eigen::VectorXd(2) << 2.5, 0.4).finished();
  const Trajectory a = generate_trajectory(2, cfg);
  const Trajectory b = generate_trajectory(2, cfg);
  REQUIRE(a.time == b.time);
  for (size_t k = 0; k < a.states.size(); ++k) {
    REQUIRE(a.states[k].q == b.states[k].q);
    REQUIRE(a.states[k].ddq == b.states[k].ddq);
    REQUIRE(std::abs(a.states[k].q[0]) <= 2.5);
    REQUIRE(std::abs(a.states[k].q[1]) <= 0.4);
  }
}

TEST_CASE("noiseless labels equal the inverse dynamics") {
  const auto types = helpers::parse_types("RRP");
  RobotModel m = helpers::random_chain(types, 11);
  TrajectoryConfig cfg;
  cfg.duration = 0.5;
  cfg.seed = 12;
  cfg.position_clip = Eigen::VectorXd::Constant(3, 1.5);
  const Trajectory traj = generate_trajectory(3, cfg);
  const Dataset ds = label_with_dynamics(m, traj, 0.0, 13);
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    const Eigen::VectorXd tau = inverse_dynamics(m, ds.state(r));
    REQUIRE((ds.torques.row(r).transpose() - tau).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("label noise has the configured scale and is independent across joints") {
  const auto types = helpers::parse_types("RR");
  RobotModel m = helpers::random_chain(types, 21);
  const auto states = helpers::random_states(types, 10000, 22);
  Eigen::VectorXd t(10000);
  for (int i = 0; i < 10000; ++i) t[i] = i * 1e-2;
  const Dataset noisy = label_with_dynamics(m, states, t, 0.01, 23);
  const Dataset clean = label_with_dynamics(m, states, t, 0.0, 23);
  const Eigen::MatrixXd eps = noisy.torques - clean.torques;
  for (int j = 0; j < 2; ++j) {
    const double sd = std::sqrt(eps.col(j).squaredNorm() / (eps.rows() - 1.0));
    REQUIRE(sd == Catch::Approx(0.01).epsilon(0.05));
  }
  const Eigen::VectorXd a = eps.col(0).array() - eps.col(0).mean();
  const Eigen::VectorXd b = eps.col(1).array() - eps.col(1).mean();
  const double corr = a.dot(b) / (a.norm() * b.norm());
  REQUIRE(std::abs(corr) < 0.05);
}

TEST_CASE("kinematic perturbation is bounded, reproducible, and matters") {
  const auto types = helpers::parse_types("RRPR");
  RobotModel m = helpers::random_chain(types, 31);
  const RobotModel p1 = perturb_kinematics(m, 32);
  const RobotModel p2 = perturb_kinematics(m, 32);
  const double deg5 = 5.0 * M_PI / 180.0;
  for (int i = 0; i < m.dof(); ++i) {
    REQUIRE(p1.links[i].dh_a == p2.links[i].dh_a);
    REQUIRE(std::abs(p1.links[i].dh_a - m.links[i].dh_a) <= 0.05);
    REQUIRE(std::abs(p1.links[i].dh_d_offset - m.links[i].dh_d_offset) <= 0.05);
    REQUIRE(std::abs(p1.links[i].dh_alpha - m.links[i].dh_alpha) <= deg5);
    REQUIRE(std::abs(p1.links[i].dh_theta_offset - m.links[i].dh_theta_offset) <= deg5);
    REQUIRE(p1.links[i].mass == m.links[i].mass);
    REQUIRE(p1.links[i].com == m.links[i].com);
  }
  const auto s = helpers::random_states(types, 1, 33)[0];
  REQUIRE((inverse_dynamics(p1, s) - inverse_dynamics(m, s)).norm() > 0);
}

TEST_CASE("causal differentiation is exact on polynomials") {
  const double dt = 0.1;
  Eigen::MatrixXd ramp(6, 1), parab(6, 1);
  for (int k = 0; k < 6; ++k) {
    ramp(k, 0) = k * dt;
    parab(k, 0) = (k * dt) * (k * dt);
  }
  const CausalDerivatives dr = differentiate_causal(ramp, dt);
  for (int k = 1; k < 6; ++k) REQUIRE(dr.dq(k, 0) == Catch::Approx(1.0).margin(1e-13));
  for (int k = 2; k < 6; ++k) REQUIRE(dr.ddq(k, 0) == Catch::Approx(0.0).margin(1e-12));
  const CausalDerivatives dp = differentiate_causal(parab, dt);
  for (int k = dp.first_valid; k < 6; ++k)
    REQUIRE(dp.ddq(k, 0) == Catch::Approx(2.0).margin(1e-10));
}

TEST_CASE("causal differentiation tracks a sinusoid at the logging rate") {
  const double dt = 8e-3;
  const int n = 500;
  Eigen::MatrixXd q(n, 1);
  for (int k = 0; k < n; ++k) q(k, 0) = std::sin(k * dt);
  const CausalDerivatives d = differentiate_causal(q, dt);
  double err2 = 0, truth2 = 0;
  for (int k = d.first_valid; k < n; ++k) {
    const double truth = std::cos(k * dt);
    err2 += (d.dq(k, 0) - truth) * (d.dq(k, 0) - truth);
    truth2 += truth * truth;
  }
  REQUIRE(std::sqrt(err2 / truth2) < 1e-2);
}

TEST_CASE("non-uniform timestamps are rejected") {
  Eigen::MatrixXd q(4, 1);
  q << 0, 1, 2, 3;
  Eigen::VectorXd t(4);
  t << 0.0, 0.1, 0.25, 0.3;  // 50% jitter
  REQUIRE_THROWS_AS(differentiate_causal(q, t), InvalidInputError);
}

TEST_CASE("dataset files round-trip bitwise") {
  const auto types = helpers::parse_types("RRPR");
  RobotModel m = helpers::random_chain(types, 41);
  m.name = "roundtrip";
  const auto states = helpers::random_states(types, 25, 42);
  Eigen::VectorXd t(25);
  for (int i = 0; i < 25; ++i) t[i] = 0.008 * i + 1.0 / 3.0;
  const Dataset ds = label_with_dynamics(m, states, t, 0.01, 43);
  TempFile f("roundtrip.csv");
  write_dataset(ds, f.path);
  const Dataset back = read_dataset(f.path);
  REQUIRE(back.meta.n == 4);
  REQUIRE(back.meta.noise_std == ds.meta.noise_std);
  REQUIRE(back.meta.robot == "roundtrip");
  REQUIRE(back.timestamps == ds.timestamps);
  REQUIRE(back.states == ds.states);
  REQUIRE(back.torques == ds.torques);
}

TEST_CASE("malformed dataset files raise parse errors with line numbers") {
  TempFile f("bad.csv");
  {
    std::ofstream out(f.path);
    out << "# {\"n\": 1, \"source\": \"Simulated\"}\n";
    out << "0.0,1,2,3,4\n";
    out << "0.1,1,2,3\n";  // missing a column
  }
  try {
    read_dataset(f.path);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    REQUIRE(e.line() == 3);
  }

  {
    std::ofstream out(f.path);
    out << "# {\"n\": 1}\n";
    out << "0.0,1,abc,3,4\n";
  }
  REQUIRE_THROWS_AS(read_dataset(f.path), ParseError);

  {
    std::ofstream out(f.path);
    out << "0.0,1,2,3,4\n";  // header missing entirely
  }
  REQUIRE_THROWS_AS(read_dataset(f.path), ParseError);
}

TEST_CASE("a 17-column file with n=4 is accepted") {
  TempFile f("n4.csv");
  {
    std::ofstream out(f.path);
    out << "# {\"n\": 4}\n";
    for (int r = 0; r < 3; ++r) {
      out << r * 0.1;
      for (int c = 0; c < 16; ++c) out << "," << c;
      out << "\n";
    }
  }
  const Dataset ds = read_dataset(f.path);
  REQUIRE(ds.size() == 3);
  REQUIRE(ds.states.cols() == 12);
  REQUIRE(ds.torques.cols() == 4);
}

TEST_CASE("downsampling keeps every step-th row") {
  Dataset ds;
  ds.meta.n = 1;
  const int n = 40000;
  ds.timestamps.setLinSpaced(n, 0.0, 320.0);
  ds.states = Eigen::MatrixXd::Random(n, 3);
  ds.torques = Eigen::MatrixXd::Random(n, 1);

  const Dataset same = downsample(ds, 1);
  REQUIRE(same.size() == n);

  const Dataset ten = downsample(ds, 10);
  REQUIRE(ten.size() == 4000);
  REQUIRE(ten.states.row(1) == ds.states.row(10));
  REQUIRE(ten.meta.downsample_step == 10);

  const Dataset one = downsample(ds, n + 5);
  REQUIRE(one.size() == 1);
}

TEST_CASE("metric definitions") {
  Eigen::VectorXd tau(5);
  tau << 1.0, 2.0, 0.5, -1.0, 3.0;
  REQUIRE(nmse(tau, tau) == 0.0);
  REQUIRE(mse(tau, tau) == 0.0);

  const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(5, tau.mean());
  // Constant-mean prediction: nMSE = (N-1)/N with the unbiased variance.
  REQUIRE(nmse(tau, mean_pred) == Catch::Approx(4.0 / 5.0).epsilon(1e-12));

  REQUIRE_THROWS_AS(nmse(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4)),
                    UndefinedMetricError);
  REQUIRE_THROWS_AS(nmse(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)),
                    InvalidInputError);

  Eigen::MatrixXd a(3, 2), b(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 1, 2, 3, 4, 5, 9;
  REQUIRE(gmse(a, b) == Catch::Approx(mse(a.col(0), b.col(0)) + mse(a.col(1), b.col(1))));
}

TEST_CASE("box statistics match a hand-worked example") {
  // values 1..9 plus an outlier at 100
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 100};
  const BoxStats b = box_stats(v);
  REQUIRE(b.q1 == Catch::Approx(3.25));
  REQUIRE(b.median == Catch::Approx(5.5));
  REQUIRE(b.q3 == Catch::Approx(7.75));
  REQUIRE(b.outliers == std::vector<double>{100});
  REQUIRE(b.whisker_low == 1);
  REQUIRE(b.whisker_high == 9);
}

TEST_CASE("current logs ingest through the documented column mapping") {
  const auto types = helpers::parse_types("RR");
  RobotModel m = helpers::random_chain(types, 51);
  m.actuator = {{0.1, 0.05, 0.02, 12.0}, {0.08, 0.04, 0.01, 9.0}};

  // Synthesize a log: smooth q, exact dq, currents i = tau / K_eq.
  TrajectoryConfig cfg;
  cfg.duration = 1.0;
  cfg.dt = 8e-3;
  cfg.seed = 52;
  cfg.position_clip = Eigen::VectorXd::Constant(2, 1.0);
  const Trajectory traj = generate_trajectory(2, cfg);
  TempFile f("log.csv");
  {
    std::ofstream out(f.path);
    out.precision(17);
    for (size_t k = 0; k < traj.states.size(); ++k) {
      const Eigen::VectorXd tau = inverse_dynamics(m, traj.states[k], true);
      out << traj.time[static_cast<Eigen::Index>(k)];
      for (int j = 0; j < 2; ++j) out << "," << traj.states[k].q[j];
      for (int j = 0; j < 2; ++j) out << "," << traj.states[k].dq[j];
      for (int j = 0; j < 2; ++j) out << "," << tau[j] / m.actuator[j].torque_gain;
      out << "\n";
    }
  }
  const Dataset ds = ingest_current_log(f.path, m);
  REQUIRE(ds.meta.source == DatasetSource::RealLog);
  REQUIRE(ds.size() == static_cast<Eigen::Index>(traj.states.size()) - 1);
  // Torques recover K_eq * i; accelerations approximate the true ones.
  const Eigen::VectorXd tau1 = inverse_dynamics(m, traj.states[1], true);
  REQUIRE((ds.torques.row(0).transpose() - tau1).cwiseAbs().maxCoeff() < 1e-12);
  double err = 0, scale = 0;
  for (Eigen::Index r = 5; r < ds.size(); ++r) {
    const JointState s = ds.state(r);
    err += (s.ddq - traj.states[static_cast<size_t>(r) + 1].ddq).cwiseAbs().maxCoeff();
    scale += traj.states[static_cast<size_t>(r) + 1].ddq.cwiseAbs().maxCoeff();
  }
  REQUIRE(err / scale < 0.05);

  RobotModel no_act = helpers::random_chain(types, 51);
  REQUIRE_THROWS_AS(ingest_current_log(f.path, no_act), InvalidInputError);
}
