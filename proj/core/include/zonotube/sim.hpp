#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zonotube/estimation.hpp"
#include "zonotube/mpc.hpp"
#include "zonotube/sets.hpp"
#include "zonotube/synthesis.hpp"

namespace zonotube {

// ---------------------------------------------------------------------------
// Noise model.

enum class NoiseKind {
  kZero,              ///< always the bounding-set center
  kTruncatedLaplace,  ///< heavy-tailed, biased, clipped to the bounding set
  kGaussian,          ///< light-tailed control variant, same clipping
};

/// Declarative description of a measurement-noise source.  Samples are
/// v = c + G a with each coefficient drawn per `kind` and clipped to
/// [-1, 1], so every sample is a member of the bounding zonotope by
/// construction and the empirical bias approaches c.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kZero;
  ConstrainedZonotope bounding;  ///< plain zonotope <c, G>
  /// Pre-clip scale of each coefficient draw: the Laplace scale parameter
  /// (default 1/sqrt(2), i.e. unit-variance before clipping) or the normal
  /// standard deviation for the Gaussian kind.
  double scale = 0.70710678118654752;
};

/// Deterministic sampler: a fixed seed reproduces the exact draw sequence
/// bit for bit.  Uniforms come straight from the 64-bit engine (53-bit
/// mantissas); the shaping transforms are closed-form, so no
/// platform-dependent distribution code is involved.
class NoiseSampler {
 public:
  NoiseSampler(const NoiseSpec& spec, std::uint64_t seed);

  /// Next measurement-noise sample; always inside the bounding set.
  Eigen::VectorXd sample();

  const NoiseSpec& spec() const { return spec_; }

 private:
  double next_uniform();  // [0, 1)

  NoiseSpec spec_;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Robot model.

/// Planar omnidirectional (mecanum) platform, states (x, y, heading) in
/// meters/radians, four wheel-speed inputs, identity measurements.
struct RobotModel {
  double sample_time = 0.35;  ///< seconds per step
  double half_length = 0.135;
  double half_width = 0.085;

  double lever() const { return half_length + half_width; }

  /// Discrete kinematics: A = I, B mixes wheel speeds into body motion with
  /// entries +-sample_time*lever() (translation rows) and +-sample_time
  /// (heading row), C = I.
  PlantSpec plant() const;
};

// ---------------------------------------------------------------------------
// Trajectory logging.

struct StepRecord {
  int k = 0;
  Eigen::VectorXd x;     ///< true state
  Eigen::VectorXd xhat;  ///< estimate
  Eigen::VectorXd xbar;  ///< nominal anchor used by the controller
  Eigen::VectorXd u;     ///< applied input
  Eigen::VectorXd v;     ///< measurement noise drawn this step
  Eigen::VectorXd w;     ///< process noise (zero in shipped experiments)
  double stage_cost = 0.0;
  bool mem_e = true;     ///< estimation error inside its tube
  bool mem_xdev = true;  ///< estimate-minus-anchor inside the deviation tube
  bool mem_x = true;     ///< true state inside the state set
  bool mem_u = true;     ///< raw control inside the input set
  // Optional controller diagnostics (zero when no controller ran).
  double beta = 0.0;
  double terminal_gauge = 0.0;
  double objective = 0.0;
  double solve_ms = 0.0;
  int lp_rows = 0;
  int lp_cols = 0;
};

struct TrajectoryLog {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  Eigen::VectorXd final_state;
  double final_cost = 0.0;  ///< terminal gauge of the final true state
  double total_cost = 0.0;  ///< sum of stage costs plus final cost
};

/// Reported closed-loop cost: stage gauges on TRUE states and applied
/// inputs, plus the terminal gauge on the final state.  Recomputed from the
/// log alone; matches TrajectoryLog::total_cost to 1e-9 for logs produced by
/// the runners.
double compute_reported_cost(const TrajectoryLog& log, const CostSets& costs);

/// One row per step with the fixed column schema
///   k, x_*, xhat_*, xbar_*, u_*, v_*, stage_cost, mem_e, mem_xdev, mem_x,
///   mem_u
/// and full round-trip precision; bit-identical for identical logs.
std::string trajectory_csv(const TrajectoryLog& log);

/// Writes trajectory_csv to a file.  Throws std::runtime_error on I/O errors.
void write_trajectory_csv(const TrajectoryLog& log, const std::string& path);

// ---------------------------------------------------------------------------
// Experiment runners.

/// Paired observer comparison: the set-valued observer and the Kalman
/// baseline see the same plant, inputs, and noise realization.
struct ObserverExperiment {
  PlantSpec plant;
  ConstrainedZonotope error_set;  ///< invariant error tube (seed set)
  NoiseSpec noise;
  Eigen::MatrixXd L;  ///< certified set-valued observer gain
  KalmanBaseline kalman;
  Eigen::VectorXd x0;
  Eigen::VectorXd xhat0;
  int num_steps = 100;
};

struct ObserverComparisonResult {
  TrajectoryLog set_valued;
  TrajectoryLog kalman;
};

/// Runs both estimators over one shared noise realization.  The open-loop
/// input is the bundled sinusoid profile; logs carry per-step membership of
/// each estimator's error in the invariant tube.
ObserverComparisonResult run_observer_comparison(const ObserverExperiment& experiment,
                                                 std::uint64_t seed);

/// Closed-loop robot experiment: set-valued observer, tube controller, and
/// the per-step LP.  Baseline variants differ only through the gains inside
/// `mpc` and its monitor_tube flag; the loop itself is shared.
struct RobotExperiment {
  RobotModel robot;
  MpcConfig mpc;                  ///< LP data incl. gains K (tube) and L
  ConstrainedZonotope error_set;  ///< invariant estimation-error tube
  NoiseSpec noise;
  Eigen::VectorXd x0;
  int num_steps = 60;
  HPolytope state_rows;  ///< original state set, for the mem_x column
  HPolytope input_rows;  ///< original input set, for the mem_u column
  std::string variant = "perception_mpc";
};

/// Runs the closed loop for num_steps.  Throws RuntimeInfeasible (with the
/// step index) when the controller program fails; membership columns are
/// logged honestly every step.
TrajectoryLog run_robot_experiment(const RobotExperiment& experiment, std::uint64_t seed);

}  // namespace zonotube
