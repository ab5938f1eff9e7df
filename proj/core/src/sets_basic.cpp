#include <cmath>
#include <limits>
#include <stdexcept>

#include "zonotube/sets.hpp"

namespace zonotube {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace

void ConstrainedZonotope::validate() const {
  require(G.rows() == c.size(), "constrained zonotope: G row count != dim");
  require(F.cols() == G.cols() || (F.rows() == 0 && F.cols() == 0),
          "constrained zonotope: F column count != generator count");
  require(theta.size() == F.rows(), "constrained zonotope: theta size != F row count");
}

ConstrainedZonotope ConstrainedZonotope::box(const Eigen::VectorXd& center,
                                             const Eigen::VectorXd& half_widths) {
  require(center.size() == half_widths.size(), "box: center/half_width size mismatch");
  ConstrainedZonotope z;
  z.c = center;
  z.G = half_widths.asDiagonal();
  z.F.resize(0, center.size());
  z.theta.resize(0);
  return z;
}

ConstrainedZonotope ConstrainedZonotope::zonotope(const Eigen::VectorXd& c,
                                                  const Eigen::MatrixXd& G) {
  require(G.rows() == c.size(), "zonotope: G row count != dim");
  ConstrainedZonotope z;
  z.c = c;
  z.G = G;
  z.F.resize(0, G.cols());
  z.theta.resize(0);
  return z;
}

ConstrainedZonotope ConstrainedZonotope::point(const Eigen::VectorXd& c) {
  ConstrainedZonotope z;
  z.c = c;
  z.G.resize(c.size(), 0);
  z.F.resize(0, 0);
  z.theta.resize(0);
  return z;
}

ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& a,
                                  const ConstrainedZonotope& b) {
  a.validate();
  b.validate();
  require(a.dim() == b.dim(), "minkowski_sum: dimension mismatch");
  const int na = a.num_generators();
  const int nb = b.num_generators();
  const int ca = a.num_constraints();
  const int cb = b.num_constraints();
  ConstrainedZonotope z;
  z.c = a.c + b.c;
  z.G.resize(a.dim(), na + nb);
  z.G << a.G, b.G;
  z.F = Eigen::MatrixXd::Zero(ca + cb, na + nb);
  z.F.topLeftCorner(ca, na) = a.F;
  z.F.bottomRightCorner(cb, nb) = b.F;
  z.theta.resize(ca + cb);
  z.theta << a.theta, b.theta;
  return z;
}

ConstrainedZonotope linear_map(const Eigen::MatrixXd& M, const ConstrainedZonotope& z) {
  z.validate();
  require(M.cols() == z.dim(), "linear_map: matrix column count != set dimension");
  ConstrainedZonotope out = z;
  out.c = M * z.c;
  out.G = M * z.G;
  return out;
}

ConstrainedZonotope translate(const ConstrainedZonotope& z, const Eigen::VectorXd& v) {
  require(v.size() == z.dim(), "translate: offset dimension mismatch");
  ConstrainedZonotope out = z;
  out.c += v;
  return out;
}

ConstrainedZonotope scaled(const ConstrainedZonotope& z, double s) {
  ConstrainedZonotope out = z;
  out.c *= s;
  out.G *= s;
  return out;
}

ConstrainedZonotope contract(const ConstrainedZonotope& z, double lambda) {
  ConstrainedZonotope out = z;
  out.G *= lambda;
  return out;
}

ConstrainedZonotope cartesian_product(const ConstrainedZonotope& a,
                                      const ConstrainedZonotope& b) {
  a.validate();
  b.validate();
  const int na = a.num_generators();
  const int nb = b.num_generators();
  const int ca = a.num_constraints();
  const int cb = b.num_constraints();
  ConstrainedZonotope z;
  z.c.resize(a.dim() + b.dim());
  z.c << a.c, b.c;
  z.G = Eigen::MatrixXd::Zero(a.dim() + b.dim(), na + nb);
  z.G.topLeftCorner(a.dim(), na) = a.G;
  z.G.bottomRightCorner(b.dim(), nb) = b.G;
  z.F = Eigen::MatrixXd::Zero(ca + cb, na + nb);
  z.F.topLeftCorner(ca, na) = a.F;
  z.F.bottomRightCorner(cb, nb) = b.F;
  z.theta.resize(ca + cb);
  z.theta << a.theta, b.theta;
  return z;
}

namespace {

// Adds the constraint rows F a = theta over generator variables [first,
// first+ng) of the builder.
void add_constraint_rows(LpBuilder* b, const Eigen::MatrixXd& F,
                         const Eigen::VectorXd& theta, int first) {
  for (int r = 0; r < F.rows(); ++r) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < F.cols(); ++j) {
      if (F(r, j) != 0.0) {
        vars.push_back(first + j);
        coeffs.push_back(F(r, j));
      }
    }
    b->add_equality(vars, coeffs, theta[r]);
  }
}

}  // namespace

double support(const ConstrainedZonotope& z, const Eigen::VectorXd& dir) {
  z.validate();
  require(dir.size() == z.dim(), "support: direction dimension mismatch");
  const int ng = z.num_generators();
  LpBuilder b;
  const Eigen::VectorXd w = z.G.transpose() * dir;
  for (int j = 0; j < ng; ++j) b.add_variable(-w[j], -1.0, 1.0);
  add_constraint_rows(&b, z.F, z.theta, 0);
  const LpSolution s = solve_lp(b.build());
  if (s.status == LpStatus::kInfeasible) {
    throw std::runtime_error("support: empty constrained zonotope");
  }
  if (s.status != LpStatus::kOptimal) {
    throw std::runtime_error("support: LP did not solve");
  }
  return dir.dot(z.c) - s.objective_value;
}

double gauge(const ConstrainedZonotope& z, const Eigen::VectorXd& x) {
  z.validate();
  require(x.size() == z.dim(), "gauge: point dimension mismatch");
  const int ng = z.num_generators();
  // min t  s.t.  G a + c t = x,  F a = theta t,  -t <= a_j <= t,  t >= 0.
  LpBuilder b;
  const int a0 = b.add_variables(ng, 0.0);
  const int t = b.add_variable(1.0, 0.0);
  for (int i = 0; i < z.dim(); ++i) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < ng; ++j) {
      if (z.G(i, j) != 0.0) {
        vars.push_back(a0 + j);
        coeffs.push_back(z.G(i, j));
      }
    }
    vars.push_back(t);
    coeffs.push_back(z.c[i]);
    b.add_equality(vars, coeffs, x[i]);
  }
  for (int r = 0; r < z.num_constraints(); ++r) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < ng; ++j) {
      if (z.F(r, j) != 0.0) {
        vars.push_back(a0 + j);
        coeffs.push_back(z.F(r, j));
      }
    }
    vars.push_back(t);
    coeffs.push_back(-z.theta[r]);
    b.add_equality(vars, coeffs, 0.0);
  }
  for (int j = 0; j < ng; ++j) {
    b.add_inequality({a0 + j, t}, {1.0, -1.0}, 0.0);
    b.add_inequality({a0 + j, t}, {-1.0, -1.0}, 0.0);
  }
  const LpSolution s = solve_lp(b.build());
  if (s.status == LpStatus::kInfeasible) return kInf;
  if (s.status != LpStatus::kOptimal) throw std::runtime_error("gauge: LP did not solve");
  return s.objective_value;
}

double membership_scale(const ConstrainedZonotope& z, const Eigen::VectorXd& x) {
  z.validate();
  require(x.size() == z.dim(), "membership_scale: point dimension mismatch");
  const int ng = z.num_generators();
  // min s  s.t.  G a = x - c,  F a = theta,  -s <= a_j <= s.
  LpBuilder b;
  const int a0 = b.add_variables(ng, 0.0);
  const int s_var = b.add_variable(1.0, 0.0);
  const Eigen::VectorXd rhs = x - z.c;
  for (int i = 0; i < z.dim(); ++i) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < ng; ++j) {
      if (z.G(i, j) != 0.0) {
        vars.push_back(a0 + j);
        coeffs.push_back(z.G(i, j));
      }
    }
    b.add_equality(vars, coeffs, rhs[i]);
  }
  add_constraint_rows(&b, z.F, z.theta, a0);
  for (int j = 0; j < ng; ++j) {
    b.add_inequality({a0 + j, s_var}, {1.0, -1.0}, 0.0);
    b.add_inequality({a0 + j, s_var}, {-1.0, -1.0}, 0.0);
  }
  const LpSolution s = solve_lp(b.build());
  if (s.status == LpStatus::kInfeasible) return kInf;
  if (s.status != LpStatus::kOptimal) {
    throw std::runtime_error("membership_scale: LP did not solve");
  }
  return s.objective_value;
}

bool contains_point(const ConstrainedZonotope& z, const Eigen::VectorXd& x, double tol) {
  return membership_scale(z, x) <= 1.0 + tol;
}

bool is_empty(const ConstrainedZonotope& z, double tol) {
  z.validate();
  if (z.num_constraints() == 0) return false;
  const int ng = z.num_generators();
  LpBuilder b;
  const int a0 = b.add_variables(ng, 0.0);
  const int s_var = b.add_variable(1.0, 0.0);
  add_constraint_rows(&b, z.F, z.theta, a0);
  for (int j = 0; j < ng; ++j) {
    b.add_inequality({a0 + j, s_var}, {1.0, -1.0}, 0.0);
    b.add_inequality({a0 + j, s_var}, {-1.0, -1.0}, 0.0);
  }
  const LpSolution s = solve_lp(b.build());
  if (s.status == LpStatus::kInfeasible) return true;  // theta outside range(F)
  if (s.status != LpStatus::kOptimal) throw std::runtime_error("is_empty: LP did not solve");
  return s.objective_value > 1.0 + tol;
}

void interval_hull(const ConstrainedZonotope& z, Eigen::VectorXd* lo, Eigen::VectorXd* hi) {
  lo->resize(z.dim());
  hi->resize(z.dim());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(z.dim());
  for (int i = 0; i < z.dim(); ++i) {
    e[i] = 1.0;
    (*hi)[i] = support(z, e);
    e[i] = -1.0;
    (*lo)[i] = -support(z, e);
    e[i] = 0.0;
  }
}

}  // namespace zonotube
