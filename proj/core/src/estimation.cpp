#include "zonotube/estimation.hpp"

#include <stdexcept>
#include <string>

namespace zonotube {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("estimation: " + message);
}

}  // namespace

void ObserverState::validate() const {
  require(error_set.dim() == static_cast<int>(xhat.size()),
          "error enclosure dimension does not match the estimate");
  require(!is_empty(error_set), "error enclosure is empty");
}

ObserverState observer_step(const ObserverState& obs, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y, const PlantSpec& plant,
                            const Eigen::MatrixXd& L) {
  const int n = plant.num_states();
  require(obs.xhat.size() == n, "estimate size does not match the plant");
  require(u.size() == plant.num_inputs(), "input size does not match the plant");
  require(y.size() == plant.num_outputs(), "measurement size does not match the plant");
  require(L.rows() == n && L.cols() == plant.num_outputs(),
          "observer gain block size does not match the plant");

  ObserverState next = obs;
  next.xhat = plant.A * obs.xhat + plant.B * u + L * (y - plant.C * obs.xhat);
  next.step = obs.step + 1;
  return next;
}

ConstrainedZonotope propagate_error_set(const ConstrainedZonotope& error_set,
                                        const Eigen::MatrixXd& L, const PlantSpec& plant,
                                        const ConstrainedZonotope& measurement_noise,
                                        const ConstrainedZonotope* process_noise) {
  const int n = plant.num_states();
  require(error_set.dim() == n, "error set dimension does not match the plant");
  require(measurement_noise.dim() == plant.num_outputs(),
          "measurement-noise set dimension does not match the plant");
  require(L.rows() == n && L.cols() == plant.num_outputs(),
          "observer gain block size does not match the plant");

  ConstrainedZonotope next = minkowski_sum(linear_map(plant.A - L * plant.C, error_set),
                                           linear_map(-L, measurement_noise));
  if (process_noise != nullptr) {
    require(process_noise->dim() == n, "process-noise set dimension does not match the plant");
    next = minkowski_sum(next, *process_noise);
  }
  return next;
}

ConstrainedZonotope propagate_deviation_set(const ConstrainedZonotope& deviation_set,
                                            const Eigen::MatrixXd& K, const Eigen::MatrixXd& L,
                                            const ConstrainedZonotope& error_set,
                                            const ConstrainedZonotope& measurement_noise,
                                            const PlantSpec& plant) {
  const int n = plant.num_states();
  require(deviation_set.dim() == n, "deviation set dimension does not match the plant");
  require(error_set.dim() == n, "error set dimension does not match the plant");
  require(measurement_noise.dim() == plant.num_outputs(),
          "measurement-noise set dimension does not match the plant");
  require(K.rows() == plant.num_inputs() && K.cols() == n,
          "feedback gain block size does not match the plant");
  require(L.rows() == n && L.cols() == plant.num_outputs(),
          "observer gain block size does not match the plant");

  return minkowski_sum(minkowski_sum(linear_map(plant.A + plant.B * K, deviation_set),
                                     linear_map(L * plant.C, error_set)),
                       linear_map(L, measurement_noise));
}

KalmanBaseline kalman_gain(const PlantSpec& plant, const Eigen::MatrixXd& Q_cov,
                           const Eigen::MatrixXd& R_cov) {
  const int n = plant.num_states();
  const int ny = plant.num_outputs();
  require(Q_cov.rows() == n && Q_cov.cols() == n, "process covariance must be n x n");
  require(R_cov.rows() == ny && R_cov.cols() == ny, "measurement covariance must be ny x ny");

  // Predictor Riccati fixed point; mirrors the control Riccati on (A', C').
  Eigen::MatrixXd P = Q_cov;
  const double tol = 1e-12;
  double residual = 0.0;
  bool settled = false;
  for (int iter = 0; iter < 20000; ++iter) {
    const Eigen::MatrixXd S = plant.C * P * plant.C.transpose() + R_cov;
    const Eigen::MatrixXd gain_t = S.ldlt().solve(plant.C * P * plant.A.transpose());
    const Eigen::MatrixXd next =
        plant.A * P * plant.A.transpose() - plant.A * P * plant.C.transpose() * gain_t + Q_cov;
    residual = (next - P).cwiseAbs().maxCoeff();
    P = 0.5 * (next + next.transpose()).eval();
    if (residual <= tol) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw std::runtime_error(
        "kalman_gain: Riccati recursion did not reach a fixed point (residual " +
        std::to_string(residual) + ")");
  }

  KalmanBaseline baseline;
  baseline.covariance = P;
  baseline.Q_cov = Q_cov;
  baseline.R_cov = R_cov;
  const Eigen::MatrixXd S = plant.C * P * plant.C.transpose() + R_cov;
  baseline.gain =
      (S.ldlt().solve(plant.C * P * plant.A.transpose())).transpose();  // A P C' S^-1
  baseline.steady_state = true;
  baseline.riccati_residual = residual;
  return baseline;
}

Eigen::VectorXd kalman_step(const Eigen::VectorXd& xhat, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& y, const PlantSpec& plant,
                            const KalmanBaseline& baseline) {
  ObserverState obs;
  obs.xhat = xhat;
  obs.error_set = ConstrainedZonotope::point(Eigen::VectorXd::Zero(xhat.size()));
  return observer_step(obs, u, y, plant, baseline.gain).xhat;
}

}  // namespace zonotube
