#pragma once

#include <Eigen/Dense>

#include "zonotube/lp.hpp"
#include "zonotube/sets.hpp"
#include "zonotube/synthesis.hpp"
#include "zonotube/tolerances.hpp"

namespace zonotube {

/// @brief Everything the per-step controller LP needs, fixed at load time.
///
/// The nominal trajectory is optimized inside the tightened sets; the tube
/// feedback K keeps the true state within the deviation tube around it.  The
/// terminal zonotope must sit inside the tightened state set — checked once
/// by validate(), not per solve.
struct MpcConfig {
  PlantSpec plant;
  int horizon = 1;                    ///< prediction steps N >= 1
  CostSets costs;                     ///< gauge unit balls (origin-centered)
  HPolytope nominal_state_hrep;       ///< tightened state rows
  HPolytope nominal_input_hrep;       ///< tightened input rows
  ConstrainedZonotope terminal_set;   ///< terminal constraint zonotope
  ConstrainedZonotope deviation_set;  ///< estimate-minus-nominal tube
  Eigen::MatrixXd K;                  ///< tube feedback (u = ubar + K dev)
  Eigen::MatrixXd L;                  ///< observer gain (carried for loaders)
  HPolytope state_set;                ///< original state rows (runtime checks);
                                      ///< may be empty
  HPolytope input_set;                ///< original input rows (runtime checks);
                                      ///< may be empty
  /// Enforce the per-step tube premise (estimate inside deviation_set around
  /// the anchor) before solving; solve_mpc throws RuntimeInfeasible when it
  /// fails.  The certified controller keeps this on.  A baseline whose gains
  /// carry no tube certificate runs with it off: the premise is then merely
  /// logged by the harness, never enforced.
  bool monitor_tube = true;
  Tolerances tol;

  /// Dimension checks, N >= 1, origin-centered cost sets, non-empty
  /// tightened sets, and terminal-set containment in the tightened state
  /// rows (support probe per row).  Throws std::invalid_argument.
  void validate() const;
};

/// The assembled per-step LP plus the variable layout needed to read a
/// solution back.  Gauge-coefficient variables (for non-box cost sets) sit
/// between tp_index and alpha_offset.
struct MpcProgram {
  LinearProgram lp;
  int x_offset = 0;      ///< nominal state j at x_offset + j*n
  int u_offset = 0;      ///< nominal input j at u_offset + j*m
  int beta_index = 0;    ///< shared stage-cost slack
  int tq_offset = 0;     ///< per-step state-gauge epigraph scalars
  int tr_offset = 0;     ///< per-step input-gauge epigraph scalars
  int tp_index = 0;      ///< terminal-gauge epigraph scalar
  int alpha_offset = 0;  ///< terminal membership coefficients
};

/// One solved step: the nominal plan, the cost split, and the LP verdict.
struct MpcSolution {
  Eigen::MatrixXd nominal_states;  ///< n x (N+1), columns are steps
  Eigen::MatrixXd nominal_inputs;  ///< m x N
  double beta = 0.0;               ///< shared slack over both gauge sums
  Eigen::VectorXd state_gauges;    ///< epigraph scalar per stage
  Eigen::VectorXd input_gauges;    ///< epigraph scalar per stage
  double terminal_gauge = 0.0;
  double objective = 0.0;          ///< beta + terminal gauge
  LpStatus status = LpStatus::kSolverFailure;
  int iterations = 0;
  int lp_rows = 0;
  int lp_cols = 0;
  /// Standard-form basis of the solved LP; feed it back as `warm_basis` on the
  /// next step's solve (the program shape is step-invariant) to skip most of
  /// the simplex work.
  std::vector<int> basis;
};

/// Assembles the step LP for estimate `xhat` anchored at nominal state
/// `anchor`:
///   minimize  beta + t_P
///   subject to  x(0) = anchor;  x(j+1) = A x(j) + B u(j);
///               tightened state rows on x(j) for 0 < j < N (the anchor is a
///               given constant), input rows on u(j) for j < N;
///               per-stage gauge epigraphs  x(j) in t_j^Q * Qset,
///               u(j) in t_j^R * Rset;  sum_j t_j^Q <= beta,
///               sum_j t_j^R <= beta;  x(N) in t_P * Pset;
///               x(N) in the terminal zonotope (explicit coefficients).
/// Throws RuntimeInfeasible when xhat - anchor leaves the deviation tube
/// (the per-step precondition), std::invalid_argument on dimension errors.
MpcProgram build_mpc_lp(const MpcConfig& config, const Eigen::VectorXd& xhat,
                        const Eigen::VectorXd& anchor);

/// Builds and solves the step LP; `step_index` only labels error messages.
/// A non-null `warm_basis` (typically the previous step's MpcSolution::basis)
/// warm-starts the solver; it silently falls back to a cold solve when the
/// basis no longer applies.  Throws RuntimeInfeasible when the LP is
/// infeasible or the solver fails.
MpcSolution solve_mpc(const MpcConfig& config, const Eigen::VectorXd& xhat,
                      const Eigen::VectorXd& anchor, int step_index = 0,
                      const std::vector<int>* warm_basis = nullptr);

/// Applied input  u = ubar*(0) + K (xhat - xbar*(0)).  When the config
/// carries original input rows the result is verified against them (throws
/// RuntimeInfeasible on violation — the tube guarantee failed).
Eigen::VectorXd control_law(const MpcSolution& solution, const Eigen::VectorXd& xhat,
                            const MpcConfig& config);

/// Next step's nominal anchor: the second state of the optimal plan.
Eigen::VectorXd advance_nominal(const MpcSolution& solution);

}  // namespace zonotube
