#pragma once

#include <Eigen/Dense>

namespace zonotube {

/// Stabilizing solution of the discrete algebraic Riccati equation
///   P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q
/// by fixed-point iteration.  Throws std::runtime_error when the iteration
/// does not settle.
Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol = 1e-12, int max_iter = 20000);

/// Infinite-horizon LQR gain  K = (R + B'PB)^{-1} B'PA  (u = -K x).
Eigen::MatrixXd dlqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Steady-state predictor-form Kalman gain  L = A P C' (C P C' + Rn)^{-1}
/// for process covariance Qn and measurement covariance Rn; the error map is
/// A - L C.
Eigen::MatrixXd kalman_predictor_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                      const Eigen::MatrixXd& Qn, const Eigen::MatrixXd& Rn);

}  // namespace zonotube
