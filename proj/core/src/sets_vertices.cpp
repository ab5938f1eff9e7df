#include <algorithm>
#include <stdexcept>
#include <vector>

#include "zonotube/sets.hpp"

namespace zonotube {

// Candidate vertices are solutions of n active rows; a candidate survives when
// it satisfies every row and its active set has full rank.
std::vector<Eigen::VectorXd> enumerate_vertices(const HPolytope& p, double tol) {
  const int n = p.dim();
  if (n < 1 || n > 3) {
    throw std::invalid_argument("enumerate_vertices: supported for dim 1..3");
  }
  const int m = p.num_rows();
  std::vector<Eigen::VectorXd> verts;

  std::vector<int> idx(static_cast<size_t>(n));
  auto consider = [&](const std::vector<int>& sel) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      M.row(i) = p.Q.row(sel[static_cast<size_t>(i)]);
      r[i] = p.q[sel[static_cast<size_t>(i)]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-9);
    if (lu.rank() < n) return;
    const Eigen::VectorXd x = lu.solve(r);
    if (!x.allFinite()) return;
    for (int i = 0; i < m; ++i) {
      if (p.Q.row(i).dot(x) - p.q[i] > tol) return;
    }
    for (const Eigen::VectorXd& v : verts) {
      if ((v - x).cwiseAbs().maxCoeff() < 10 * tol) return;
    }
    verts.push_back(x);
  };

  if (n == 1) {
    for (int i = 0; i < m; ++i) consider({i});
  } else if (n == 2) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) consider({i, j});
    }
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) consider({i, j, k});
      }
    }
  }

  std::sort(verts.begin(), verts.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (int i = 0; i < a.size(); ++i) {
      if (a[i] < b[i] - 1e-12) return true;
      if (a[i] > b[i] + 1e-12) return false;
    }
    return false;
  });
  return verts;
}

std::vector<Eigen::VectorXd> enumerate_vertices(const ConstrainedZonotope& z, double tol) {
  return enumerate_vertices(to_hrep(z), tol);
}

}  // namespace zonotube
