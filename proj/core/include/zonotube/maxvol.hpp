#pragma once

#include <Eigen/Dense>

#include "zonotube/sets.hpp"

namespace zonotube {

/// Largest-volume ellipsoid shape search.  The decision variable is a
/// symmetric positive definite P maximizing log det P subject to
///   A P A'   <=  lambda P          (invariance under the closed-loop map)
///   Qx P Qx' <=  diag(qx)          (state rows)
///   Qu P Qu' <=  diag(qu)          (input rows, Qu already includes the gain)
/// with <= in the semidefinite order.  The certified ellipsoid is
/// { x : x' P^{-1} x <= 1 }.
struct MaxVolProblem {
  Eigen::MatrixXd A;
  double lambda = 1.0;
  Eigen::MatrixXd Qx;
  Eigen::VectorXd qx;
  Eigen::MatrixXd Qu;  ///< may have zero rows when no input rows apply
  Eigen::VectorXd qu;
};

struct MaxVolResult {
  bool success = false;
  Eigen::MatrixXd P;
  double log_det = 0.0;
  int newton_iterations = 0;
};

/// Minimum-eigenvalue margins of the three blocks plus P itself; all must be
/// nonnegative (within tolerance) for P to certify.
struct LmiMargins {
  double contraction = 0.0;
  double state = 0.0;
  double input = 0.0;
  double psd = 0.0;
  double min() const;
};

/// Interior-point (log-det barrier) solve with a Newton inner loop over the
/// symmetric coefficients of P and a final scaling polish.
MaxVolResult solve_maxvol(const MaxVolProblem& problem);

LmiMargins check_lmis(const MaxVolProblem& problem, const Eigen::MatrixXd& P);

/// Inscribed zonotope <0, n^{-1/2} P^{1/2}> of the certified ellipsoid.
ConstrainedZonotope ellipsoid_zonotope(const Eigen::MatrixXd& P);

}  // namespace zonotube
