#pragma once

namespace zonotube {

/// @brief Central numeric tolerances used across the library.
///
/// One instance is threaded through set operations, certificate checks and the
/// simulation harness so that every feasibility/optimality comparison uses a
/// single, documented knob.  Environment overrides (see from_env) let a user
/// tighten or relax them without recompiling.
struct Tolerances {
  /// Constraint-satisfaction slack accepted when re-verifying certificates,
  /// checking memberships, and validating LP solutions.
  double feasibility = 1e-7;
  /// Minimum-eigenvalue slack accepted when checking matrix inequalities.
  double psd_margin = 1e-8;
  /// Slack used by sampling-based probe checks (membership of random draws).
  double probe_slack = 1e-8;
  /// Optimality slack for LP objective comparisons.
  double optimality = 1e-9;

  /// @brief Defaults overridden by ZONOTUBE_TOL_FEASIBILITY, ZONOTUBE_TOL_PSD,
  /// ZONOTUBE_TOL_PROBE and ZONOTUBE_TOL_OPTIMALITY when set.
  static Tolerances from_env();
};

}  // namespace zonotube
