#include "zonotube/riccati.hpp"

#include <stdexcept>

namespace zonotube {

Eigen::MatrixXd solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol, int max_iter) {
  Eigen::MatrixXd P = Q;
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd S = R + BtP * B;
    const Eigen::MatrixXd K = S.ldlt().solve(BtP * A);
    const Eigen::MatrixXd next =
        A.transpose() * P * A - (A.transpose() * P * B) * K + Q;
    const double delta = (next - P).cwiseAbs().maxCoeff();
    P = 0.5 * (next + next.transpose());
    if (delta < tol) return P;
  }
  throw std::runtime_error("solve_dare: fixed-point iteration did not converge");
}

Eigen::MatrixXd dlqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd P = solve_dare(A, B, Q, R);
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return S.ldlt().solve(B.transpose() * P * A);
}

Eigen::MatrixXd kalman_predictor_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                      const Eigen::MatrixXd& Qn, const Eigen::MatrixXd& Rn) {
  // Dual Riccati: P = A P A' - A P C' (C P C' + Rn)^{-1} C P A' + Qn.
  const Eigen::MatrixXd P =
      solve_dare(A.transpose(), C.transpose(), Qn, Rn);
  const Eigen::MatrixXd S = C * P * C.transpose() + Rn;
  return (S.ldlt().solve(C * P * A.transpose())).transpose();
}

}  // namespace zonotube
