#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "zonotube/sets.hpp"

namespace zonotube {

namespace {

struct RowSystem {
  Eigen::MatrixXd A;  // rows x vars
  Eigen::VectorXd b;
};

// Drop duplicate / parallel-dominated rows and normalize scale.
void normalize_rows(RowSystem* sys, double tol = 1e-11) {
  std::vector<int> keep;
  const int rows = static_cast<int>(sys->A.rows());
  Eigen::MatrixXd A = sys->A;
  Eigen::VectorXd b = sys->b;
  for (int r = 0; r < rows; ++r) {
    const double scale = A.row(r).cwiseAbs().maxCoeff();
    if (scale < tol) {
      if (b[r] < -1e-9) {
        // Infeasible certificate row: keep it in normalized form.
        A.row(r).setZero();
        b[r] = -1.0;
        keep.push_back(r);
      }
      continue;  // trivially true row
    }
    A.row(r) /= scale;
    b[r] /= scale;
    keep.push_back(r);
  }
  // Parallel rows: keep the tightest rhs.
  std::vector<int> final_keep;
  for (size_t i = 0; i < keep.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < keep.size() && !dominated; ++j) {
      if (i == j) continue;
      const int ri = keep[i];
      const int rj = keep[j];
      if ((A.row(ri) - A.row(rj)).cwiseAbs().maxCoeff() < 1e-9) {
        if (b[rj] < b[ri] - 1e-12 || (std::abs(b[rj] - b[ri]) <= 1e-12 && j < i)) {
          dominated = true;
        }
      }
    }
    if (!dominated) final_keep.push_back(keep[i]);
  }
  RowSystem out;
  out.A.resize(static_cast<int>(final_keep.size()), sys->A.cols());
  out.b.resize(static_cast<int>(final_keep.size()));
  for (size_t i = 0; i < final_keep.size(); ++i) {
    out.A.row(static_cast<int>(i)) = A.row(final_keep[i]);
    out.b[static_cast<int>(i)] = b[final_keep[i]];
  }
  *sys = std::move(out);
}

// LP-based redundancy pruning: a row is dropped when its maximum over the
// remaining rows' region does not exceed its own rhs.
void prune_rows_lp(RowSystem* sys) {
  const int n = static_cast<int>(sys->A.cols());
  std::vector<char> alive(static_cast<size_t>(sys->A.rows()), 1);
  for (int r = 0; r < sys->A.rows(); ++r) {
    LpBuilder builder;
    builder.add_variables(n, 0.0);
    std::vector<int> all(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) all[static_cast<size_t>(j)] = j;
    for (int i = 0; i < sys->A.rows(); ++i) {
      if (i == r || !alive[static_cast<size_t>(i)]) continue;
      const Eigen::RowVectorXd row = sys->A.row(i);
      builder.add_inequality(all, std::vector<double>(row.data(), row.data() + n), sys->b[i]);
    }
    for (int j = 0; j < n; ++j) builder.set_cost(j, -sys->A(r, j));
    const LpSolution s = solve_lp(builder.build());
    if (s.status == LpStatus::kOptimal && -s.objective_value <= sys->b[r] + 1e-9) {
      alive[static_cast<size_t>(r)] = 0;
    }
  }
  std::vector<int> keep;
  for (int r = 0; r < sys->A.rows(); ++r) {
    if (alive[static_cast<size_t>(r)]) keep.push_back(r);
  }
  RowSystem out;
  out.A.resize(static_cast<int>(keep.size()), n);
  out.b.resize(static_cast<int>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) {
    out.A.row(static_cast<int>(i)) = sys->A.row(keep[i]);
    out.b[static_cast<int>(i)] = sys->b[keep[i]];
  }
  *sys = std::move(out);
}

// Eliminate the variable in column `col` by Fourier–Motzkin combination.
RowSystem eliminate_var(const RowSystem& sys, int col) {
  std::vector<int> pos, neg, zero;
  for (int r = 0; r < sys.A.rows(); ++r) {
    const double v = sys.A(r, col);
    if (v > 1e-11) pos.push_back(r);
    else if (v < -1e-11) neg.push_back(r);
    else zero.push_back(r);
  }
  const int n = static_cast<int>(sys.A.cols());
  const int out_rows = static_cast<int>(zero.size() + pos.size() * neg.size());
  RowSystem out;
  out.A.resize(out_rows, n);
  out.b.resize(out_rows);
  int w = 0;
  for (int r : zero) {
    out.A.row(w) = sys.A.row(r);
    out.b[w] = sys.b[r];
    ++w;
  }
  for (int p : pos) {
    for (int q : neg) {
      const double cp = sys.A(p, col);
      const double cq = -sys.A(q, col);
      out.A.row(w) = cq * sys.A.row(p) + cp * sys.A.row(q);
      out.A(w, col) = 0.0;
      out.b[w] = cq * sys.b[p] + cp * sys.b[q];
      ++w;
    }
  }
  return out;
}

}  // namespace

HPolytope to_hrep(const ConstrainedZonotope& z, int max_generators) {
  z.validate();
  const int n = z.dim();
  const int ng = z.num_generators();
  if (ng > max_generators) {
    throw std::invalid_argument(
        "to_hrep: generator count exceeds the elimination budget");
  }
  // Joint system over (x, a):  +-(x - G a) <= +-c,  +-(F a) <= +-theta,
  // |a_j| <= 1; then eliminate every a.
  const int vars = n + ng;
  const int rows = 2 * n + 2 * z.num_constraints() + 2 * ng;
  RowSystem sys;
  sys.A = Eigen::MatrixXd::Zero(rows, vars);
  sys.b.resize(rows);
  int w = 0;
  for (int i = 0; i < n; ++i) {
    sys.A(w, i) = 1.0;
    sys.A.row(w).segment(n, ng) = -z.G.row(i);
    sys.b[w++] = z.c[i];
    sys.A(w, i) = -1.0;
    sys.A.row(w).segment(n, ng) = z.G.row(i);
    sys.b[w++] = -z.c[i];
  }
  for (int r = 0; r < z.num_constraints(); ++r) {
    sys.A.row(w).segment(n, ng) = z.F.row(r);
    sys.b[w++] = z.theta[r];
    sys.A.row(w).segment(n, ng) = -z.F.row(r);
    sys.b[w++] = -z.theta[r];
  }
  for (int j = 0; j < ng; ++j) {
    sys.A(w, n + j) = 1.0;
    sys.b[w++] = 1.0;
    sys.A(w, n + j) = -1.0;
    sys.b[w++] = 1.0;
  }

  for (int j = ng - 1; j >= 0; --j) {
    sys = eliminate_var(sys, n + j);
    normalize_rows(&sys);
    if (sys.A.rows() > 40) prune_rows_lp(&sys);
  }
  prune_rows_lp(&sys);

  HPolytope p;
  p.Q = sys.A.leftCols(n);
  p.q = sys.b;
  return p;
}

ConstrainedZonotope from_hrep(const HPolytope& p) {
  const int n = p.dim();
  const int m = p.num_rows();
  std::vector<int> all(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) all[static_cast<size_t>(j)] = j;

  auto extreme = [&](int axis, double sign) {
    LpBuilder b;
    b.add_variables(n, 0.0);
    b.set_cost(axis, sign);
    for (int i = 0; i < m; ++i) {
      const Eigen::RowVectorXd row = p.Q.row(i);
      b.add_inequality(all, std::vector<double>(row.data(), row.data() + n), p.q[i]);
    }
    const LpSolution s = solve_lp(b.build());
    if (s.status == LpStatus::kInfeasible) {
      throw std::runtime_error("from_hrep: empty polytope");
    }
    if (s.status == LpStatus::kUnbounded) {
      throw std::runtime_error("from_hrep: unbounded polytope");
    }
    if (s.status != LpStatus::kOptimal) {
      throw std::runtime_error("from_hrep: bounding LP did not solve");
    }
    return s.objective_value;  // minimized value of sign * x_axis
  };

  Eigen::VectorXd lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = extreme(i, 1.0);
    hi[i] = -extreme(i, -1.0);
  }
  const Eigen::VectorXd c0 = 0.5 * (lo + hi);
  const Eigen::VectorXd d = (0.5 * (hi - lo)).cwiseMax(0.0);

  // Slack range per row over the bounding box.
  Eigen::VectorXd smax(m);
  for (int r = 0; r < m; ++r) {
    const double row_min = p.Q.row(r).dot(c0) - p.Q.row(r).cwiseAbs().dot(d);
    smax[r] = std::max(p.q[r] - row_min, 0.0);
  }
  const Eigen::VectorXd mid = 0.5 * smax;
  const Eigen::VectorXd rad = 0.5 * smax;

  ConstrainedZonotope z;
  z.c = c0;
  z.G = Eigen::MatrixXd::Zero(n, n + m);
  z.G.leftCols(n) = Eigen::MatrixXd(d.asDiagonal());
  z.F = Eigen::MatrixXd::Zero(m, n + m);
  z.F.leftCols(n) = p.Q * Eigen::MatrixXd(d.asDiagonal());
  z.F.rightCols(m) = Eigen::MatrixXd(rad.asDiagonal());
  z.theta = p.q - p.Q * c0 - mid;
  return z;
}

HPolytope erode(const HPolytope& p, const ConstrainedZonotope& subtrahend) {
  if (p.dim() != subtrahend.dim()) {
    throw std::invalid_argument("erode: dimension mismatch");
  }
  HPolytope out = p;
  for (int r = 0; r < p.num_rows(); ++r) {
    const Eigen::VectorXd dir = p.Q.row(r).transpose();
    out.q[r] = p.q[r] - support(subtrahend, dir);
  }
  return out;
}

ConstrainedZonotope pontryagin_difference(const ConstrainedZonotope& minuend,
                                          const ConstrainedZonotope& subtrahend,
                                          int max_generators) {
  const HPolytope p = to_hrep(minuend, max_generators);
  return from_hrep(erode(p, subtrahend));
}

}  // namespace zonotube
