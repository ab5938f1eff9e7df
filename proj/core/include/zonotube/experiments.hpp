#pragma once

#include "zonotube/maxvol.hpp"
#include "zonotube/sim.hpp"

namespace zonotube {

/// Bundled two-state observer-comparison experiment: stable diagonal
/// dynamics, a single blended measurement carrying biased heavy-tailed
/// noise, the set-valued gain synthesized at contraction 0.95, and the
/// Kalman baseline assuming light-tailed noise.  The noise kind selects the
/// biased truncated-Laplace default, the zero-noise variant, or the
/// unbiased clipped-Gaussian control variant.
ObserverExperiment two_state_observer_experiment(
    NoiseKind kind = NoiseKind::kTruncatedLaplace);

/// Offline synthesis output for the robot experiment: gains with their
/// certificates plus everything the per-step controller LP needs.
struct RobotSynthesis {
  PlantSpec plant;
  ConstrainedZonotope noise_set;      ///< measurement-noise bound
  ConstrainedZonotope error_set;      ///< estimation-error tube seed
  ConstrainedZonotope deviation_set;  ///< estimate-minus-nominal tube seed
  HPolytope state_rows;               ///< original state box
  HPolytope input_rows;               ///< original input box
  CostSets costs;
  double lambda_observer = 0.85;
  double lambda_feedback = 0.9;
  double lambda_terminal = 0.95;

  Eigen::MatrixXd L;
  Eigen::MatrixXd K;
  Eigen::MatrixXd K_f;
  Eigen::MatrixXd P;  ///< terminal ellipsoid shape matrix
  ConstrainedZonotope terminal_set;
  TightenedSets tightened;

  ContainmentCertificate observer_cert;
  ContainmentCertificate feedback_cert;
  ContainmentCertificate terminal_cert;
  LmiMargins lmi_margins;
};

/// Full offline chain on the robot model with the bundled tube sets and
/// contraction ratios: observer gain, tube feedback, constraint tightening,
/// terminal gain/ellipsoid/set, and every certificate re-checked.  Throws
/// InfeasibleSynthesis when any stage fails.
RobotSynthesis synthesize_robot_pipeline();

/// Light-tailed baseline gains: infinite-horizon LQR feedback (sign
/// convention u = K x) and the steady-state predictor observer gain, both
/// with the bundled quadratic weights (state 10^2, input/measurement 0.1).
struct LqrGains {
  Eigen::MatrixXd L;
  Eigen::MatrixXd K;
  Eigen::MatrixXd K_f;
};
LqrGains lqr_robot_gains(const PlantSpec& plant, double state_weight = 100.0,
                         double effort_weight = 0.1);

/// Closed-loop experiment with the tube pipeline's own gains: shifted
/// nominal anchoring with the per-step tube premise enforced (the gains
/// carry containment certificates, so the premise is guaranteed).
RobotExperiment perception_robot_experiment(const RobotSynthesis& synthesis);

/// Baseline sharing the identical controller LP but driven by the
/// light-tailed-assumption gains.  Those gains carry no tube certificate,
/// so the premise is logged each step but not enforced.
RobotExperiment gaussian_robot_experiment(const RobotSynthesis& synthesis);

}  // namespace zonotube
