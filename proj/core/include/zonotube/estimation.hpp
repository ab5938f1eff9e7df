#pragma once

#include <Eigen/Dense>

#include "zonotube/sets.hpp"
#include "zonotube/synthesis.hpp"

namespace zonotube {

/// @brief Point estimate together with its guaranteed error enclosure.
///
/// The enclosure is the set the estimation error x - x̂ is proven to live in;
/// with a certified observer gain the fixed seed set is invariant, so the
/// harness checks membership against the seed instead of a growing recursion.
struct ObserverState {
  Eigen::VectorXd xhat;           ///< current estimate
  ConstrainedZonotope error_set;  ///< set containing x - xhat
  int step = 0;                   ///< number of updates applied

  /// Throws std::invalid_argument when the enclosure dimension disagrees
  /// with the estimate or the enclosure is empty.
  void validate() const;
};

/// One innovation update  x̂+ = A x̂ + B u + L (y - C x̂).  Pure: the input
/// state is untouched; the error enclosure is carried over unchanged (use
/// propagate_error_set for the set recursion).
ObserverState observer_step(const ObserverState& obs, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y, const PlantSpec& plant,
                            const Eigen::MatrixXd& L);

/// Error-set recursion for e+ = (A - L C) e - L v + w:
///   center      (A - L C) c_e - L c_v + c_w
///   generators  [(A - L C) G_e, -L G_v, G_w]
///   constraints block-diagonal, offsets stacked.
/// process_noise may be null (no w term).
ConstrainedZonotope propagate_error_set(const ConstrainedZonotope& error_set,
                                        const Eigen::MatrixXd& L, const PlantSpec& plant,
                                        const ConstrainedZonotope& measurement_noise,
                                        const ConstrainedZonotope* process_noise);

/// Deviation-set recursion for d+ = (A + B K) d + L C e + L v:
///   center      (A + B K) c_d + L C c_e + L c_v
///   generators  [(A + B K) G_d, L C G_e, L G_v]
///   constraints block-diagonal, offsets stacked.
ConstrainedZonotope propagate_deviation_set(const ConstrainedZonotope& deviation_set,
                                            const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                            const ConstrainedZonotope& error_set,
                                            const ConstrainedZonotope& measurement_noise,
                                            const PlantSpec& plant);

/// @brief Steady-state Kalman predictor used as the stochastic baseline.
struct KalmanBaseline {
  Eigen::MatrixXd gain;        ///< L_K = A P C' (C P C' + R)^-1
  Eigen::MatrixXd covariance;  ///< steady-state prediction covariance P
  Eigen::MatrixXd Q_cov;       ///< assumed process covariance
  Eigen::MatrixXd R_cov;       ///< assumed measurement covariance
  bool steady_state = false;   ///< Riccati fixed point reached
  double riccati_residual = 0.0;  ///< |P - riccati(P)|_max at termination
};

/// Iterates the predictor Riccati recursion
///   P+ = A P A' - A P C' (C P C' + R)^-1 C P A' + Q
/// to a 1e-12 fixed point and extracts the steady-state gain.  Throws
/// std::runtime_error when the recursion does not settle (undetectable pair).
KalmanBaseline kalman_gain(const PlantSpec& plant, const Eigen::MatrixXd& Q_cov,
                           const Eigen::MatrixXd& R_cov);

/// One Kalman predictor update: observer_step with the steady-state gain.
Eigen::VectorXd kalman_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y, const PlantSpec& plant,
                            const KalmanBaseline& baseline);

}  // namespace zonotube
