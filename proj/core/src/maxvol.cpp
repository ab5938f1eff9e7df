#include "zonotube/maxvol.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace zonotube {

namespace {

// Symmetric basis: diagonal units then unit pairs (i<j), unnormalized.
std::vector<Eigen::MatrixXd> symmetric_basis(int n) {
  std::vector<Eigen::MatrixXd> basis;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      basis.push_back(e);
    }
  }
  return basis;
}

double min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_pd(const Eigen::MatrixXd& m, double margin = 0.0) {
  return min_eig(m) > margin;
}

struct Blocks {
  Eigen::MatrixXd M1, M2, M3;  // contraction / state / input slacks
  bool all_pd() const {
    return is_pd(M1, 1e-14) && is_pd(M2, 1e-14) && (M3.rows() == 0 || is_pd(M3, 1e-14));
  }
};

Blocks eval_blocks(const MaxVolProblem& pb, const Eigen::MatrixXd& P) {
  Blocks b;
  b.M1 = pb.lambda * P - pb.A * P * pb.A.transpose();
  b.M2 = Eigen::MatrixXd(pb.qx.asDiagonal()) - pb.Qx * P * pb.Qx.transpose();
  if (pb.Qu.rows() > 0) {
    b.M3 = Eigen::MatrixXd(pb.qu.asDiagonal()) - pb.Qu * P * pb.Qu.transpose();
  } else {
    b.M3.resize(0, 0);
  }
  return b;
}

// Largest s with all cap blocks still PD for s*P (the contraction block is
// scale invariant); returns +inf when nothing caps the scale.
double max_scale(const MaxVolProblem& pb, const Eigen::MatrixXd& P) {
  double s = std::numeric_limits<double>::infinity();
  auto cap = [&](const Eigen::MatrixXd& Q, const Eigen::VectorXd& q) {
    if (Q.rows() == 0) return;
    const Eigen::MatrixXd D = q.cwiseSqrt().cwiseInverse().asDiagonal();
    const Eigen::MatrixXd W = D * Q * P * Q.transpose() * D;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top > 0.0) s = std::min(s, 1.0 / top);
  };
  cap(pb.Qx, pb.qx);
  cap(pb.Qu, pb.qu);
  return s;
}

}  // namespace

double LmiMargins::min() const {
  return std::min(std::min(contraction, state), std::min(input, psd));
}

LmiMargins check_lmis(const MaxVolProblem& pb, const Eigen::MatrixXd& P) {
  const Blocks b = eval_blocks(pb, P);
  LmiMargins m;
  m.contraction = min_eig(b.M1);
  m.state = min_eig(b.M2);
  m.input = b.M3.rows() > 0 ? min_eig(b.M3) : 0.0;
  m.psd = min_eig(P);
  return m;
}

ConstrainedZonotope ellipsoid_zonotope(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd sqrtP =
      es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return ConstrainedZonotope::zonotope(Eigen::VectorXd::Zero(n),
                                       sqrtP / std::sqrt(static_cast<double>(n)));
}

MaxVolResult solve_maxvol(const MaxVolProblem& pb) {
  MaxVolResult result;
  const int n = static_cast<int>(pb.A.rows());
  if (pb.A.cols() != n || pb.Qx.cols() != n || pb.qx.size() != pb.Qx.rows() ||
      (pb.Qu.rows() > 0 && (pb.Qu.cols() != n || pb.qu.size() != pb.Qu.rows()))) {
    throw std::invalid_argument("solve_maxvol: inconsistent dimensions");
  }
  if (pb.lambda <= 0.0) throw std::invalid_argument("solve_maxvol: lambda must be positive");
  if ((pb.qx.array() <= 0.0).any() || (pb.qu.size() > 0 && (pb.qu.array() <= 0.0).any())) {
    throw std::invalid_argument("solve_maxvol: row caps must be positive");
  }

  // Strictly feasible start: Lyapunov accumulation for A/sqrt(lambda), then a
  // scale-down to clear the cap blocks.
  const Eigen::MatrixXd Abar = pb.A / std::sqrt(pb.lambda);
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 500; ++k) {
    term = Abar * term * Abar.transpose();
    P += term;
    const double tn = term.norm();
    if (tn < 1e-14) break;
    if (tn > 1e12) return result;  // map not contractive at this lambda
  }
  if (term.norm() > 1e-8) return result;
  const double s0 = max_scale(pb, P);
  if (!std::isfinite(s0) || s0 <= 0.0) {
    P *= 1.0;  // nothing caps the scale; barrier still handles it
  } else {
    P *= 0.5 * s0;
  }
  if (!eval_blocks(pb, P).all_pd() || !is_pd(P)) return result;

  const std::vector<Eigen::MatrixXd> basis = symmetric_basis(n);
  const int dim = static_cast<int>(basis.size());

  // Path following: minimize  t * (-log det P) + barrier(blocks).
  double t = 1.0;
  const double t_final = 1e8;
  int newton_total = 0;
  while (t <= t_final) {
    for (int it = 0; it < 60; ++it) {
      const Blocks blk = eval_blocks(pb, P);
      const Eigen::MatrixXd Pinv = P.inverse();
      const Eigen::MatrixXd M1inv = blk.M1.inverse();
      const Eigen::MatrixXd M2inv = blk.M2.inverse();
      const Eigen::MatrixXd M3inv =
          blk.M3.rows() > 0 ? blk.M3.inverse() : Eigen::MatrixXd();

      // Directional derivatives of the blocks.
      std::vector<Eigen::MatrixXd> L1(dim), L2(dim), L3(dim);
      for (int i = 0; i < dim; ++i) {
        L1[i] = pb.lambda * basis[i] - pb.A * basis[i] * pb.A.transpose();
        L2[i] = -pb.Qx * basis[i] * pb.Qx.transpose();
        if (blk.M3.rows() > 0) L3[i] = -pb.Qu * basis[i] * pb.Qu.transpose();
      }

      Eigen::VectorXd g(dim);
      Eigen::MatrixXd H(dim, dim);
      for (int i = 0; i < dim; ++i) {
        double gi = -t * (Pinv * basis[i]).trace();
        gi -= (M1inv * L1[i]).trace();
        gi -= (M2inv * L2[i]).trace();
        if (blk.M3.rows() > 0) gi -= (M3inv * L3[i]).trace();
        g[i] = gi;
      }
      std::vector<Eigen::MatrixXd> PiP(dim), M1L(dim), M2L(dim), M3L(dim);
      for (int i = 0; i < dim; ++i) {
        PiP[i] = Pinv * basis[i];
        M1L[i] = M1inv * L1[i];
        M2L[i] = M2inv * L2[i];
        if (blk.M3.rows() > 0) M3L[i] = M3inv * L3[i];
      }
      for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
          double h = t * (PiP[i] * PiP[j]).trace();
          h += (M1L[i] * M1L[j]).trace();
          h += (M2L[i] * M2L[j]).trace();
          if (blk.M3.rows() > 0) h += (M3L[i] * M3L[j]).trace();
          H(i, j) = h;
          H(j, i) = h;
        }
      }

      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      Eigen::VectorXd step = -ldlt.solve(g);
      if (!step.allFinite()) break;
      const double decrement = -0.5 * g.dot(step);
      if (decrement < 1e-11) break;

      Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < dim; ++i) dir += step[i] * basis[i];

      // Backtracking line search keeping every block strictly PD.
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Eigen::MatrixXd Ptry = P + alpha * dir;
        if (is_pd(Ptry) && eval_blocks(pb, Ptry).all_pd()) {
          P = Ptry;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++newton_total;
      if (!moved) break;
    }
    t *= 3.0;
  }

  // Polish along the scaling ray: the contraction block is scale invariant,
  // so push P onto the tightest cap.
  const double s = max_scale(pb, P);
  if (std::isfinite(s) && s > 0.0) P *= s * (1.0 - 1e-12);

  if (!is_pd(P)) return result;
  const LmiMargins margins = check_lmis(pb, P);
  if (margins.min() < -1e-8) return result;

  result.success = true;
  result.P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(result.P, Eigen::EigenvaluesOnly);
  result.log_det = es.eigenvalues().array().log().sum();
  result.newton_iterations = newton_total;
  return result;
}

}  // namespace zonotube
