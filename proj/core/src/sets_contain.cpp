#include <stdexcept>
#include <vector>

#include "zonotube/sets.hpp"

namespace zonotube {

// Searches for (Pi, H, gamma) with
//   G_in = G_out Pi                      (n x ng_in rows)
//   H F_in = F_out Pi                    (nc_out x ng_in rows)
//   H theta_in = theta_out + F_out gamma (nc_out rows)
//   c_out - c_in = G_out gamma           (n rows)
//   |Pi| 1 + |gamma| <= 1                (ng_out rows)
// Pi and gamma enter through positive/negative splits so the row budget is
// linear; H is free.  Feasibility proves inner ⊆ outer.
ContainmentCertificate check_containment(const ConstrainedZonotope& inner,
                                         const ConstrainedZonotope& outer,
                                         double tol) {
  inner.validate();
  outer.validate();
  if (inner.dim() != outer.dim()) {
    throw std::invalid_argument("check_containment: dimension mismatch");
  }
  const int n = inner.dim();
  const int gi = inner.num_generators();
  const int go = outer.num_generators();
  const int ci = inner.num_constraints();
  const int co = outer.num_constraints();

  LpBuilder b;
  // Column-major blocks of Pi+ and Pi- (go x gi), then gamma+/-, then H row
  // by row (co x ci).
  const int pi_pos = b.add_variables(go * gi, 1.0, 0.0);
  const int pi_neg = b.add_variables(go * gi, 1.0, 0.0);
  const int gam_pos = b.add_variables(go, 1.0, 0.0);
  const int gam_neg = b.add_variables(go, 1.0, 0.0);
  const int h0 = b.add_variables(co * ci, 0.0);
  auto pi_p = [&](int r, int col) { return pi_pos + col * go + r; };
  auto pi_n = [&](int r, int col) { return pi_neg + col * go + r; };
  auto h_at = [&](int r, int col) { return h0 + r * ci + col; };

  // G_in = G_out (Pi+ - Pi-), column by column.
  for (int col = 0; col < gi; ++col) {
    for (int row = 0; row < n; ++row) {
      std::vector<int> vars;
      std::vector<double> coeffs;
      for (int k = 0; k < go; ++k) {
        const double g = outer.G(row, k);
        if (g != 0.0) {
          vars.push_back(pi_p(k, col));
          coeffs.push_back(g);
          vars.push_back(pi_n(k, col));
          coeffs.push_back(-g);
        }
      }
      b.add_equality(vars, coeffs, inner.G(row, col));
    }
  }
  // H F_in = F_out (Pi+ - Pi-).
  for (int col = 0; col < gi; ++col) {
    for (int row = 0; row < co; ++row) {
      std::vector<int> vars;
      std::vector<double> coeffs;
      for (int k = 0; k < ci; ++k) {
        const double f = inner.F(k, col);
        if (f != 0.0) {
          vars.push_back(h_at(row, k));
          coeffs.push_back(f);
        }
      }
      for (int k = 0; k < go; ++k) {
        const double f = outer.F(row, k);
        if (f != 0.0) {
          vars.push_back(pi_p(k, col));
          coeffs.push_back(-f);
          vars.push_back(pi_n(k, col));
          coeffs.push_back(f);
        }
      }
      b.add_equality(vars, coeffs, 0.0);
    }
  }
  // H theta_in - F_out (gamma+ - gamma-) = theta_out.
  for (int row = 0; row < co; ++row) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int k = 0; k < ci; ++k) {
      const double t = inner.theta[k];
      if (t != 0.0) {
        vars.push_back(h_at(row, k));
        coeffs.push_back(t);
      }
    }
    for (int k = 0; k < go; ++k) {
      const double f = outer.F(row, k);
      if (f != 0.0) {
        vars.push_back(gam_pos + k);
        coeffs.push_back(-f);
        vars.push_back(gam_neg + k);
        coeffs.push_back(f);
      }
    }
    b.add_equality(vars, coeffs, outer.theta[row]);
  }
  // G_out (gamma+ - gamma-) = c_out - c_in.
  for (int row = 0; row < n; ++row) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int k = 0; k < go; ++k) {
      const double g = outer.G(row, k);
      if (g != 0.0) {
        vars.push_back(gam_pos + k);
        coeffs.push_back(g);
        vars.push_back(gam_neg + k);
        coeffs.push_back(-g);
      }
    }
    b.add_equality(vars, coeffs, outer.c[row] - inner.c[row]);
  }
  // Row budgets: sum_col (Pi+ + Pi-) + gamma+ + gamma- <= 1.
  for (int k = 0; k < go; ++k) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int col = 0; col < gi; ++col) {
      vars.push_back(pi_p(k, col));
      coeffs.push_back(1.0);
      vars.push_back(pi_n(k, col));
      coeffs.push_back(1.0);
    }
    vars.push_back(gam_pos + k);
    coeffs.push_back(1.0);
    vars.push_back(gam_neg + k);
    coeffs.push_back(1.0);
    b.add_inequality(vars, coeffs, 1.0 - tol);
  }

  ContainmentCertificate cert;
  const LpSolution s = solve_lp(b.build());
  if (s.status != LpStatus::kOptimal) return cert;

  cert.contained = true;
  cert.Pi.resize(go, gi);
  for (int col = 0; col < gi; ++col) {
    for (int k = 0; k < go; ++k) {
      cert.Pi(k, col) = s.primal[pi_p(k, col)] - s.primal[pi_n(k, col)];
    }
  }
  cert.gamma.resize(go);
  for (int k = 0; k < go; ++k) {
    cert.gamma[k] = s.primal[gam_pos + k] - s.primal[gam_neg + k];
  }
  cert.H.resize(co, ci);
  for (int r = 0; r < co; ++r) {
    for (int k = 0; k < ci; ++k) cert.H(r, k) = s.primal[h_at(r, k)];
  }
  double min_slack = 1.0;
  for (int k = 0; k < go; ++k) {
    double used = std::abs(cert.gamma[k]);
    for (int col = 0; col < gi; ++col) used += std::abs(cert.Pi(k, col));
    min_slack = std::min(min_slack, 1.0 - used);
  }
  cert.budget_slack = min_slack;
  return cert;
}

}  // namespace zonotube
