#include "zonotube/experiments.hpp"

#include <stdexcept>

#include "zonotube/errors.hpp"
#include "zonotube/estimation.hpp"
#include "zonotube/riccati.hpp"

namespace zonotube {
namespace {

Eigen::VectorXd vecn(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

HPolytope box_rows(const Eigen::VectorXd& half_widths) {
  const int n = static_cast<int>(half_widths.size());
  HPolytope p;
  p.Q.resize(2 * n, n);
  p.Q.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  p.Q.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  p.q.resize(2 * n);
  p.q.head(n) = half_widths;
  p.q.tail(n) = half_widths;
  return p;
}

}  // namespace

ObserverExperiment two_state_observer_experiment(NoiseKind kind) {
  ObserverExperiment exp;
  exp.plant.A = 0.9 * Eigen::MatrixXd::Identity(2, 2);
  exp.plant.B.resize(2, 1);
  exp.plant.B << 0.5, 0.1;
  exp.plant.C.resize(1, 2);
  exp.plant.C << 1.0, 0.5;

  exp.error_set = ConstrainedZonotope::box(vecn({1.5, 1.5}), vecn({3.5, 3.5}));

  exp.noise.kind = kind;
  const double bias = (kind == NoiseKind::kTruncatedLaplace) ? 0.5 : 0.0;
  exp.noise.bounding = ConstrainedZonotope::box(vecn({bias}), vecn({0.5}));
  if (kind == NoiseKind::kGaussian) exp.noise.scale = 1.0;  // pre-clip std 0.5

  GainSynthesisOptions options;
  options.contraction = 0.95;
  const ConstrainedZonotope design_noise =
      ConstrainedZonotope::box(vecn({0.5}), vecn({0.5}));  // the biased bound
  const auto synth =
      synthesize_observer_gain(exp.plant, exp.error_set, design_noise, nullptr, options);
  if (!synth.feasible) {
    throw InfeasibleSynthesis("observer experiment: gain synthesis failed");
  }
  exp.L = synth.gain;

  exp.kalman = kalman_gain(exp.plant, 0.01 * Eigen::MatrixXd::Identity(2, 2),
                           Eigen::MatrixXd::Constant(1, 1, 0.25));

  exp.x0 = vecn({1.5, 1.5});
  exp.xhat0 = vecn({0.0, 0.0});
  exp.num_steps = 100;
  return exp;
}

RobotSynthesis synthesize_robot_pipeline() {
  RobotSynthesis s;
  s.plant = RobotModel{}.plant();
  s.noise_set =
      ConstrainedZonotope::box(vecn({0.0011, -0.0051, 0.0}), vecn({0.049, 0.0667, 0.0}));
  s.error_set = ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), vecn({0.1, 0.1, 0.0}));
  s.deviation_set = ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), vecn({0.2, 0.2, 0.0}));
  s.state_rows = box_rows(Eigen::VectorXd::Ones(3));
  s.input_rows = box_rows(Eigen::VectorXd::Ones(4));
  s.costs.terminal_cost =
      ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), 1e-4 * Eigen::VectorXd::Ones(3));
  s.costs.state_cost =
      ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), 20.0 * Eigen::VectorXd::Ones(3));
  s.costs.input_cost =
      ConstrainedZonotope::box(Eigen::VectorXd::Zero(4), 50.0 * Eigen::VectorXd::Ones(4));

  GainSynthesisOptions obs_opt;
  obs_opt.contraction = s.lambda_observer;
  const auto obs = synthesize_observer_gain(s.plant, s.error_set, s.noise_set, nullptr, obs_opt);
  if (!obs.feasible) throw InfeasibleSynthesis("robot pipeline: observer gain infeasible");
  s.L = obs.gain;
  s.observer_cert =
      certify_observer_gain(s.plant, s.error_set, s.noise_set, nullptr, s.L, s.lambda_observer);
  if (!s.observer_cert.contained) {
    throw InfeasibleSynthesis("robot pipeline: observer certificate failed its re-check");
  }

  GainSynthesisOptions fb_opt;
  fb_opt.contraction = s.lambda_feedback;
  const auto fb =
      synthesize_feedback_gain(s.plant, s.deviation_set, s.error_set, s.noise_set, s.L, fb_opt);
  if (!fb.feasible) throw InfeasibleSynthesis("robot pipeline: tube feedback infeasible");
  s.K = fb.gain;
  s.feedback_cert = certify_feedback_gain(s.plant, s.deviation_set, s.error_set, s.noise_set,
                                          s.K, s.L, s.lambda_feedback);
  if (!s.feedback_cert.contained) {
    throw InfeasibleSynthesis("robot pipeline: feedback certificate failed its re-check");
  }

  s.tightened =
      tighten_constraints(s.state_rows, s.input_rows, s.deviation_set, s.error_set, s.K);

  TerminalSynthesisOptions term_opt;
  term_opt.lambda_f = s.lambda_terminal;
  const TerminalIngredients terminal =
      synthesize_terminal(s.plant, s.tightened, s.costs, term_opt);
  s.K_f = terminal.K_f;
  s.P = terminal.P;
  s.terminal_set = terminal.set;
  s.lmi_margins = terminal.margins;
  s.terminal_cert = certify_terminal_gain(s.plant, s.costs, s.K_f);
  if (!s.terminal_cert.contained) {
    throw InfeasibleSynthesis("robot pipeline: terminal certificate failed its re-check");
  }
  return s;
}

LqrGains lqr_robot_gains(const PlantSpec& plant, double state_weight, double effort_weight) {
  const int n = plant.num_states();
  const int m = plant.num_inputs();
  const int ny = plant.num_outputs();
  const Eigen::MatrixXd Qx = state_weight * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ru = effort_weight * Eigen::MatrixXd::Identity(m, m);

  LqrGains gains;
  gains.K = -dlqr_gain(plant.A, plant.B, Qx, Ru);
  gains.K_f = gains.K;  // same weights, same horizon-free design
  gains.L = kalman_predictor_gain(plant.A, plant.C, Qx,
                                  effort_weight * Eigen::MatrixXd::Identity(ny, ny));
  return gains;
}

namespace {

RobotExperiment base_robot_experiment(const RobotSynthesis& s) {
  RobotExperiment exp;
  exp.robot = RobotModel{};
  exp.mpc.plant = s.plant;
  exp.mpc.horizon = 12;
  exp.mpc.costs = s.costs;
  exp.mpc.nominal_state_hrep = s.tightened.state_hrep;
  exp.mpc.nominal_input_hrep = s.tightened.input_hrep;
  exp.mpc.terminal_set = s.terminal_set;
  exp.mpc.deviation_set = s.deviation_set;
  exp.mpc.K = s.K;
  exp.mpc.L = s.L;
  exp.mpc.state_set = s.state_rows;
  exp.error_set = s.error_set;
  exp.noise.kind = NoiseKind::kTruncatedLaplace;
  exp.noise.bounding = s.noise_set;
  exp.x0 = vecn({0.75, 0.75, 0.0});
  exp.num_steps = 60;
  exp.state_rows = s.state_rows;
  exp.input_rows = s.input_rows;
  return exp;
}

}  // namespace

RobotExperiment perception_robot_experiment(const RobotSynthesis& s) {
  RobotExperiment exp = base_robot_experiment(s);
  exp.mpc.input_set = s.input_rows;  // hard tube guarantee on applied inputs
  exp.variant = "perception_mpc";
  return exp;
}

RobotExperiment gaussian_robot_experiment(const RobotSynthesis& s) {
  RobotExperiment exp = base_robot_experiment(s);
  const LqrGains gains = lqr_robot_gains(s.plant);
  exp.mpc.K = gains.K;
  exp.mpc.L = gains.L;
  // The swapped gains carry no tube certificate, so the baseline runs the
  // same anchored LP without premise enforcement; the harness still logs the
  // premise column honestly.
  exp.mpc.monitor_tube = false;
  exp.variant = "gaussian_mpc";
  return exp;
}

}  // namespace zonotube
