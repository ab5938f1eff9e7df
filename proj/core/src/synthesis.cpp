#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "zonotube/errors.hpp"
#include "zonotube/lp.hpp"
#include "zonotube/maxvol.hpp"
#include "zonotube/synthesis.hpp"

namespace zonotube {

namespace {

int complex_rank(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut) ++rank;
  }
  return rank;
}

// Stacks the fixed constraint blocks of several component sets into one
// block-diagonal F with concatenated theta (the Minkowski-sum layout).
void stack_constraints(const std::vector<const ConstrainedZonotope*>& parts,
                       Eigen::MatrixXd* F, Eigen::VectorXd* theta) {
  int rows = 0;
  int cols = 0;
  for (const auto* p : parts) {
    rows += p->num_constraints();
    cols += p->num_generators();
  }
  *F = Eigen::MatrixXd::Zero(rows, cols);
  theta->resize(rows);
  int r0 = 0;
  int c0 = 0;
  for (const auto* p : parts) {
    const int cr = p->num_constraints();
    const int cc = p->num_generators();
    if (cr > 0) {
      F->block(r0, c0, cr, cc) = p->F;
      theta->segment(r0, cr) = p->theta;
    }
    r0 += cr;
    c0 += cc;
  }
}

}  // namespace

void PlantSpec::validate() const {
  const int n = num_states();
  if (n == 0 || A.cols() != n) {
    throw std::invalid_argument("plant: A must be square and non-empty");
  }
  if (B.rows() != n) throw std::invalid_argument("plant: B row count != state count");
  if (C.cols() != n) throw std::invalid_argument("plant: C column count != state count");

  // Rank test at every eigenvalue on or outside the unit circle: [A - mu I, B]
  // must keep full row rank (stabilizability) and [A - mu I; C] full column
  // rank (detectability).
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<std::complex<double>>());
  if (es.info() != Eigen::Success) {
    throw std::invalid_argument("plant: eigenvalue computation failed");
  }
  const int nu = num_inputs();
  const int ny = num_outputs();
  for (int i = 0; i < n; ++i) {
    const std::complex<double> mu = es.eigenvalues()[i];
    if (std::abs(mu) < 1.0 - 1e-9) continue;
    Eigen::MatrixXcd shifted = A.cast<std::complex<double>>();
    shifted.diagonal().array() -= mu;
    Eigen::MatrixXcd ctrb(n, n + nu);
    ctrb << shifted, B.cast<std::complex<double>>();
    if (complex_rank(ctrb) < n) {
      throw std::invalid_argument("plant: (A, B) is not stabilizable");
    }
    Eigen::MatrixXcd obsv(n + ny, n);
    obsv << shifted, C.cast<std::complex<double>>();
    if (complex_rank(obsv) < n) {
      throw std::invalid_argument("plant: (A, C) is not detectable");
    }
  }
}

// ---------------------------------------------------------------------------
// Containment with affine inner parameterization.  The layout mirrors
// check_containment exactly, with two additions: the inner center/generator
// entries become affine expressions in the shared parameters, and the
// objective carries the parameter penalty plus optional absolute terms.

AffineContainmentResult solve_affine_containment(
    const std::vector<AffineContainmentBlock>& blocks, int num_params,
    double gain_penalty, double budget_tol,
    const std::vector<AbsObjectiveTerm>& extra_terms,
    const BalancePenalty& balance) {
  if (num_params < 0) throw std::invalid_argument("affine containment: negative parameter count");

  LpBuilder b;
  const int th_pos = b.add_variables(num_params, gain_penalty, 0.0);
  const int th_neg = b.add_variables(num_params, gain_penalty, 0.0);

  for (const auto& term : extra_terms) {
    if (term.coeffs.size() != num_params) {
      throw std::invalid_argument("affine containment: objective term size mismatch");
    }
    const int t = b.add_variable(term.weight, 0.0);
    // +- (constant + coeffs' theta) <= t
    for (const double sign : {1.0, -1.0}) {
      std::vector<int> vars{t};
      std::vector<double> coeffs{-1.0};
      for (int k = 0; k < num_params; ++k) {
        const double a = sign * term.coeffs[k];
        if (a != 0.0) {
          vars.push_back(th_pos + k);
          coeffs.push_back(a);
          vars.push_back(th_neg + k);
          coeffs.push_back(-a);
        }
      }
      b.add_inequality(vars, coeffs, -sign * term.constant);
    }
  }

  if (balance.weight > 0.0 && !balance.groups.empty()) {
    // cap >= sum_{k in group} |theta_k| for every group; cap is shared, so
    // its cost penalizes the heaviest group.
    const int cap = b.add_variable(balance.weight, 0.0);
    for (const auto& group : balance.groups) {
      std::vector<int> vars{cap};
      std::vector<double> coeffs{-1.0};
      for (const int k : group) {
        if (k < 0 || k >= num_params) {
          throw std::invalid_argument("affine containment: balance index out of range");
        }
        vars.push_back(th_pos + k);
        coeffs.push_back(1.0);
        vars.push_back(th_neg + k);
        coeffs.push_back(1.0);
      }
      b.add_inequality(vars, coeffs, 0.0);
    }
  }

  struct BlockVars {
    int pi_pos = 0, pi_neg = 0, gam_pos = 0, gam_neg = 0, h0 = 0;
  };
  std::vector<BlockVars> vars_of(blocks.size());

  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    const AffineContainmentBlock& blk = blocks[bi];
    const ConstrainedZonotope& outer = blk.outer;
    outer.validate();
    const int n = outer.dim();
    const int gi = static_cast<int>(blk.G0.cols());
    const int go = outer.num_generators();
    const int ci = static_cast<int>(blk.F_in.rows());
    const int co = outer.num_constraints();
    if (blk.c0.size() != n || blk.G0.rows() != n) {
      throw std::invalid_argument("affine containment: inner/outer dimension mismatch");
    }
    if (static_cast<int>(blk.c_coef.size()) != num_params ||
        static_cast<int>(blk.G_coef.size()) != num_params) {
      throw std::invalid_argument("affine containment: coefficient count != parameter count");
    }
    if (blk.theta_in.size() != ci || (ci > 0 && blk.F_in.cols() != gi)) {
      throw std::invalid_argument("affine containment: inner constraint shape mismatch");
    }

    BlockVars v;
    v.pi_pos = b.add_variables(go * gi, 1.0, 0.0);
    v.pi_neg = b.add_variables(go * gi, 1.0, 0.0);
    v.gam_pos = b.add_variables(go, 1.0, 0.0);
    v.gam_neg = b.add_variables(go, 1.0, 0.0);
    v.h0 = b.add_variables(co * ci, 0.0);
    vars_of[bi] = v;
    auto pi_p = [&](int r, int col) { return v.pi_pos + col * go + r; };
    auto pi_n = [&](int r, int col) { return v.pi_neg + col * go + r; };
    auto h_at = [&](int r, int col) { return v.h0 + r * ci + col; };

    // G_in(theta) = G_out (Pi+ - Pi-):
    //   sum_k theta_k G_coef[k](row, col) - (G_out Pi)(row, col) = -G0(row, col)
    for (int col = 0; col < gi; ++col) {
      for (int row = 0; row < n; ++row) {
        std::vector<int> vars;
        std::vector<double> coeffs;
        for (int k = 0; k < num_params; ++k) {
          const double a = blk.G_coef[k](row, col);
          if (a != 0.0) {
            vars.push_back(th_pos + k);
            coeffs.push_back(a);
            vars.push_back(th_neg + k);
            coeffs.push_back(-a);
          }
        }
        for (int k = 0; k < go; ++k) {
          const double g = outer.G(row, k);
          if (g != 0.0) {
            vars.push_back(pi_p(k, col));
            coeffs.push_back(-g);
            vars.push_back(pi_n(k, col));
            coeffs.push_back(g);
          }
        }
        b.add_equality(vars, coeffs, -blk.G0(row, col));
      }
    }
    // H F_in = F_out (Pi+ - Pi-).
    for (int col = 0; col < gi; ++col) {
      for (int row = 0; row < co; ++row) {
        std::vector<int> vars;
        std::vector<double> coeffs;
        for (int k = 0; k < ci; ++k) {
          const double f = blk.F_in(k, col);
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
        const double t = blk.theta_in[k];
        if (t != 0.0) {
          vars.push_back(h_at(row, k));
          coeffs.push_back(t);
        }
      }
      for (int k = 0; k < go; ++k) {
        const double f = outer.F(row, k);
        if (f != 0.0) {
          vars.push_back(v.gam_pos + k);
          coeffs.push_back(-f);
          vars.push_back(v.gam_neg + k);
          coeffs.push_back(f);
        }
      }
      b.add_equality(vars, coeffs, outer.theta[row]);
    }
    // G_out (gamma+ - gamma-) + c_in(theta) = c_out:
    //   G_out gamma + sum_k theta_k c_coef[k](row) = c_out(row) - c0(row)
    for (int row = 0; row < n; ++row) {
      std::vector<int> vars;
      std::vector<double> coeffs;
      for (int k = 0; k < go; ++k) {
        const double g = outer.G(row, k);
        if (g != 0.0) {
          vars.push_back(v.gam_pos + k);
          coeffs.push_back(g);
          vars.push_back(v.gam_neg + k);
          coeffs.push_back(-g);
        }
      }
      for (int k = 0; k < num_params; ++k) {
        const double a = blk.c_coef[k][row];
        if (a != 0.0) {
          vars.push_back(th_pos + k);
          coeffs.push_back(a);
          vars.push_back(th_neg + k);
          coeffs.push_back(-a);
        }
      }
      b.add_equality(vars, coeffs, outer.c[row] - blk.c0[row]);
    }
    // Row budgets: sum_col (Pi+ + Pi-) + gamma+ + gamma- <= 1 - tol.
    for (int k = 0; k < go; ++k) {
      std::vector<int> vars;
      std::vector<double> coeffs;
      for (int col = 0; col < gi; ++col) {
        vars.push_back(pi_p(k, col));
        coeffs.push_back(1.0);
        vars.push_back(pi_n(k, col));
        coeffs.push_back(1.0);
      }
      vars.push_back(v.gam_pos + k);
      coeffs.push_back(1.0);
      vars.push_back(v.gam_neg + k);
      coeffs.push_back(1.0);
      b.add_inequality(vars, coeffs, 1.0 - budget_tol);
    }
  }

  AffineContainmentResult result;
  const LpSolution s = solve_lp(b.build());
  result.status = s.status;
  result.iterations = s.iterations;
  if (s.status != LpStatus::kOptimal) return result;
  result.feasible = true;
  result.objective = s.objective_value;
  result.params.resize(num_params);
  for (int k = 0; k < num_params; ++k) {
    result.params[k] = s.primal[th_pos + k] - s.primal[th_neg + k];
  }
  return result;
}

// ---------------------------------------------------------------------------
// Observer gain.

namespace {

// Builds the containment block for the observer error recurrence
//   e+ = (A - L C) e + (-L) v + w,  parameters L(i, q) at index i * ny + q.
AffineContainmentBlock observer_block(const PlantSpec& plant,
                                      const ConstrainedZonotope& error_set,
                                      const ConstrainedZonotope& measurement_noise,
                                      const ConstrainedZonotope* process_noise,
                                      double lambda) {
  const int n = plant.num_states();
  const int ny = plant.num_outputs();
  const int ge = error_set.num_generators();
  const int gv = measurement_noise.num_generators();
  const int gw = process_noise ? process_noise->num_generators() : 0;

  AffineContainmentBlock blk;
  blk.outer = contract(error_set, lambda);

  blk.G0 = Eigen::MatrixXd::Zero(n, ge + gv + gw);
  blk.G0.leftCols(ge) = plant.A * error_set.G;
  if (process_noise && gw > 0) blk.G0.rightCols(gw) = process_noise->G;
  blk.c0 = plant.A * error_set.c;
  if (process_noise) blk.c0 += process_noise->c;

  const Eigen::MatrixXd W = plant.C * error_set.G;          // ny x ge
  const Eigen::VectorXd wc = plant.C * error_set.c + measurement_noise.c;

  blk.c_coef.resize(n * ny);
  blk.G_coef.resize(n * ny);
  for (int i = 0; i < n; ++i) {
    for (int q = 0; q < ny; ++q) {
      const int k = i * ny + q;
      Eigen::MatrixXd Gk = Eigen::MatrixXd::Zero(n, ge + gv + gw);
      Gk.block(i, 0, 1, ge) = -W.row(q);
      if (gv > 0) Gk.block(i, ge, 1, gv) = -measurement_noise.G.row(q);
      blk.G_coef[k] = std::move(Gk);
      Eigen::VectorXd ck = Eigen::VectorXd::Zero(n);
      ck[i] = -wc[q];
      blk.c_coef[k] = std::move(ck);
    }
  }

  std::vector<const ConstrainedZonotope*> parts{&error_set, &measurement_noise};
  if (process_noise) parts.push_back(process_noise);
  stack_constraints(parts, &blk.F_in, &blk.theta_in);
  return blk;
}

// Containment block for the deviation recurrence
//   d+ = (A + B K) d + (L C) e + L v,  parameters K(m, q) at index m * n + q.
AffineContainmentBlock feedback_block(const PlantSpec& plant,
                                      const ConstrainedZonotope& deviation_set,
                                      const ConstrainedZonotope& error_set,
                                      const ConstrainedZonotope& measurement_noise,
                                      const Eigen::MatrixXd& L, double lambda) {
  const int n = plant.num_states();
  const int nu = plant.num_inputs();
  const int gd = deviation_set.num_generators();
  const int ge = error_set.num_generators();
  const int gv = measurement_noise.num_generators();

  AffineContainmentBlock blk;
  blk.outer = contract(deviation_set, lambda);

  const Eigen::MatrixXd LC = L * plant.C;
  blk.G0 = Eigen::MatrixXd::Zero(n, gd + ge + gv);
  blk.G0.leftCols(gd) = plant.A * deviation_set.G;
  if (ge > 0) blk.G0.middleCols(gd, ge) = LC * error_set.G;
  if (gv > 0) blk.G0.rightCols(gv) = L * measurement_noise.G;
  blk.c0 = plant.A * deviation_set.c + LC * error_set.c + L * measurement_noise.c;

  blk.c_coef.resize(nu * n);
  blk.G_coef.resize(nu * n);
  for (int m = 0; m < nu; ++m) {
    for (int q = 0; q < n; ++q) {
      const int k = m * n + q;
      Eigen::MatrixXd Gk = Eigen::MatrixXd::Zero(n, gd + ge + gv);
      if (gd > 0) Gk.leftCols(gd) = plant.B.col(m) * deviation_set.G.row(q);
      blk.G_coef[k] = std::move(Gk);
      blk.c_coef[k] = plant.B.col(m) * deviation_set.c[q];
    }
  }

  std::vector<const ConstrainedZonotope*> parts{&deviation_set, &error_set,
                                                &measurement_noise};
  stack_constraints(parts, &blk.F_in, &blk.theta_in);
  return blk;
}

Eigen::MatrixXd reshape_rowmajor(const Eigen::VectorXd& params, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = params[i * cols + j];
  }
  return m;
}

}  // namespace

GainSynthesisResult synthesize_observer_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const ConstrainedZonotope* process_noise,
                                             const GainSynthesisOptions& options) {
  plant.validate();
  const int n = plant.num_states();
  const int ny = plant.num_outputs();
  const auto blk =
      observer_block(plant, error_set, measurement_noise, process_noise, options.contraction);
  const auto sol = solve_affine_containment({blk}, n * ny, options.gain_penalty);

  GainSynthesisResult result;
  if (!sol.feasible) return result;
  result.feasible = true;
  result.objective = sol.objective;
  result.gain = reshape_rowmajor(sol.params, n, ny);

  const Eigen::MatrixXd snapped = snap_entries(result.gain, options.snap_tol);
  if ((snapped.array() != result.gain.array()).any()) {
    const auto cert = certify_observer_gain(plant, error_set, measurement_noise,
                                            process_noise, snapped, options.contraction);
    if (cert.contained) result.gain = snapped;
  }
  return result;
}

ContainmentCertificate certify_observer_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const ConstrainedZonotope* process_noise,
                                             const Eigen::MatrixXd& L, double lambda) {
  ConstrainedZonotope inner = minkowski_sum(
      linear_map(plant.A - L * plant.C, error_set), linear_map(-L, measurement_noise));
  if (process_noise) inner = minkowski_sum(inner, *process_noise);
  return check_containment(inner, contract(error_set, lambda));
}

GainSynthesisResult synthesize_feedback_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& deviation_set,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const Eigen::MatrixXd& L,
                                             const GainSynthesisOptions& options) {
  plant.validate();
  const int n = plant.num_states();
  const int nu = plant.num_inputs();
  const auto blk = feedback_block(plant, deviation_set, error_set, measurement_noise, L,
                                  options.contraction);
  // Balance the mass across gain rows: each row later erodes the input set
  // by its own mass, so the heaviest row is the one that matters.
  BalancePenalty balance;
  balance.weight = options.row_balance_weight;
  for (int m = 0; m < nu; ++m) {
    std::vector<int> group(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) group[static_cast<size_t>(q)] = m * n + q;
    balance.groups.push_back(std::move(group));
  }
  const auto sol = solve_affine_containment({blk}, nu * n, options.gain_penalty,
                                            1e-9, {}, balance);

  GainSynthesisResult result;
  if (!sol.feasible) return result;
  result.feasible = true;
  result.objective = sol.objective;
  result.gain = reshape_rowmajor(sol.params, nu, n);

  const Eigen::MatrixXd snapped = snap_entries(result.gain, options.snap_tol);
  if ((snapped.array() != result.gain.array()).any()) {
    const auto cert = certify_feedback_gain(plant, deviation_set, error_set,
                                            measurement_noise, snapped, L, options.contraction);
    if (cert.contained) result.gain = snapped;
  }
  return result;
}

ContainmentCertificate certify_feedback_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& deviation_set,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const Eigen::MatrixXd& K,
                                             const Eigen::MatrixXd& L, double lambda) {
  const ConstrainedZonotope inner = minkowski_sum(
      minkowski_sum(linear_map(plant.A + plant.B * K, deviation_set),
                    linear_map(L * plant.C, error_set)),
      linear_map(L, measurement_noise));
  return check_containment(inner, contract(deviation_set, lambda));
}

double search_contraction(const std::function<bool(double)>& feasible_at, double lo,
                          double hi, double tol) {
  if (!feasible_at(hi)) return std::numeric_limits<double>::quiet_NaN();
  if (feasible_at(lo)) return lo;
  for (int iter = 0; iter < 80 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (feasible_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Constraint tightening.

TightenedSets tighten_constraints(const HPolytope& state_set, const HPolytope& input_set,
                                  const ConstrainedZonotope& deviation_set,
                                  const ConstrainedZonotope& error_set,
                                  const Eigen::MatrixXd& K) {
  TightenedSets out;
  out.state_hrep = erode(state_set, minkowski_sum(deviation_set, error_set));
  try {
    out.state = from_hrep(out.state_hrep);
  } catch (const std::runtime_error& e) {
    throw InfeasibleSynthesis(std::string("tightened state set: ") + e.what());
  }
  out.input_hrep = erode(input_set, linear_map(K, deviation_set));
  try {
    out.input = from_hrep(out.input_hrep);
  } catch (const std::runtime_error& e) {
    throw InfeasibleSynthesis(std::string("tightened input set: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polar machinery.

ConstrainedZonotope polar_of_zonotope(const ConstrainedZonotope& z, int max_generators) {
  z.validate();
  if (!z.is_zonotope()) {
    throw std::invalid_argument("polar_of_zonotope: set has generator constraints");
  }
  const int ng = z.num_generators();
  if (ng > max_generators) {
    throw std::invalid_argument("polar_of_zonotope: too many generators for sign enumeration");
  }
  const int n = z.dim();
  const int rows = 1 << ng;
  HPolytope p;
  p.Q.resize(rows, n);
  p.q = Eigen::VectorXd::Ones(rows);
  for (int mask = 0; mask < rows; ++mask) {
    Eigen::VectorXd x = z.c;
    for (int j = 0; j < ng; ++j) {
      x += ((mask >> j) & 1 ? 1.0 : -1.0) * z.G.col(j);
    }
    p.Q.row(mask) = x.transpose();
  }
  try {
    return from_hrep(p);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument(
        "polar_of_zonotope: polar is unbounded (0 must lie in the interior)");
  }
}

ConstrainedZonotope polar_of_hrep(const HPolytope& p) {
  const int m = static_cast<int>(p.q.size());
  const int n = static_cast<int>(p.Q.cols());
  if (p.Q.rows() != m || m == 0) {
    throw std::invalid_argument("polar_of_hrep: malformed polytope");
  }
  for (int i = 0; i < m; ++i) {
    if (!(p.q[i] > 0.0)) {
      throw std::invalid_argument("polar_of_hrep: 0 must lie in the interior (all q > 0)");
    }
  }
  // Polar of a bounded {Q x <= q} with q > 0: the convex hull of the scaled
  // rows v_i = Q_i / q_i, written with convex weights (1 + beta) / 2.
  Eigen::MatrixXd V(n, m);
  for (int i = 0; i < m; ++i) V.col(i) = p.Q.row(i).transpose() / p.q[i];
  ConstrainedZonotope z;
  z.c = 0.5 * V.rowwise().sum();
  z.G = 0.5 * V;
  z.F = Eigen::MatrixXd::Ones(1, m);
  z.theta.resize(1);
  z.theta[0] = 2.0 - m;
  return z;
}

// ---------------------------------------------------------------------------
// Terminal gain from the polar cost containment.

ConstrainedZonotope polar_of_set(const ConstrainedZonotope& z) {
  return polar_of_hrep(to_hrep(z));
}

namespace {

// The single containment block for
//   (A + B K_f)' Pp ⊕ Qp ⊕ K_f' Rp ⊆ Pp
// with K_f(m, q) as parameter m * n + q.  Pp/Qp live in state space, Rp in
// input space; the mapped inner set is their Minkowski sum.
AffineContainmentBlock terminal_cost_block(const PlantSpec& plant,
                                           const ConstrainedZonotope& Pp,
                                           const ConstrainedZonotope& Qp,
                                           const ConstrainedZonotope& Rp) {
  const int n = plant.num_states();
  const int nu = plant.num_inputs();
  const int gp = Pp.num_generators();
  const int gq = Qp.num_generators();
  const int gr = Rp.num_generators();
  const Eigen::MatrixXd BtG = plant.B.transpose() * Pp.G;   // nu x gp
  const Eigen::VectorXd Btc = plant.B.transpose() * Pp.c;   // nu

  AffineContainmentBlock blk;
  blk.outer = Pp;
  blk.G0 = Eigen::MatrixXd::Zero(n, gp + gq + gr);
  blk.G0.leftCols(gp) = plant.A.transpose() * Pp.G;
  if (gq > 0) blk.G0.middleCols(gp, gq) = Qp.G;
  blk.c0 = plant.A.transpose() * Pp.c + Qp.c;

  blk.c_coef.resize(nu * n);
  blk.G_coef.resize(nu * n);
  for (int m = 0; m < nu; ++m) {
    for (int q = 0; q < n; ++q) {
      const int k = m * n + q;
      Eigen::MatrixXd Gk = Eigen::MatrixXd::Zero(n, gp + gq + gr);
      Gk.block(q, 0, 1, gp) = BtG.row(m);
      if (gr > 0) Gk.block(q, gp + gq, 1, gr) = Rp.G.row(m);
      blk.G_coef[k] = std::move(Gk);
      Eigen::VectorXd ck = Eigen::VectorXd::Zero(n);
      ck[q] = Btc[m] + Rp.c[m];
      blk.c_coef[k] = std::move(ck);
    }
  }

  std::vector<const ConstrainedZonotope*> parts{&Pp, &Qp, &Rp};
  stack_constraints(parts, &blk.F_in, &blk.theta_in);
  return blk;
}

struct CostPolars {
  ConstrainedZonotope Pp, Qp, Rp;
};

CostPolars cost_polars(const PlantSpec& plant, const CostSets& costs) {
  if (costs.terminal_cost.dim() != plant.num_states() ||
      costs.state_cost.dim() != plant.num_states() ||
      costs.input_cost.dim() != plant.num_inputs()) {
    throw std::invalid_argument("terminal gain: cost set dimension mismatch");
  }
  return {polar_of_set(costs.terminal_cost), polar_of_set(costs.state_cost),
          polar_of_set(costs.input_cost)};
}

ConstrainedZonotope terminal_cost_inner(const PlantSpec& plant, const CostPolars& polars,
                                        const Eigen::MatrixXd& K_f) {
  const Eigen::MatrixXd Af = plant.A + plant.B * K_f;
  return minkowski_sum(minkowski_sum(linear_map(Af.transpose(), polars.Pp), polars.Qp),
                       linear_map(K_f.transpose(), polars.Rp));
}

}  // namespace

Eigen::MatrixXd synthesize_terminal_gain(const PlantSpec& plant, const CostSets& costs) {
  plant.validate();
  const int n = plant.num_states();
  const int nu = plant.num_inputs();
  const CostPolars polars = cost_polars(plant, costs);
  const auto blk = terminal_cost_block(plant, polars.Pp, polars.Qp, polars.Rp);

  // Objective: entry mass of the closed loop A + B K_f (affine in K_f), plus
  // a vanishing tie-break on the gain itself.
  std::vector<AbsObjectiveTerm> terms;
  terms.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      AbsObjectiveTerm t;
      t.constant = plant.A(i, j);
      t.coeffs = Eigen::VectorXd::Zero(nu * n);
      for (int m = 0; m < nu; ++m) t.coeffs[m * n + j] = plant.B(i, m);
      t.weight = 1.0;
      terms.push_back(std::move(t));
    }
  }

  const auto sol = solve_affine_containment({blk}, nu * n, /*gain_penalty=*/1e-6,
                                            /*budget_tol=*/1e-9, terms);
  if (!sol.feasible) {
    throw InfeasibleSynthesis("terminal gain: polar cost containment is infeasible");
  }
  Eigen::MatrixXd K_f = reshape_rowmajor(sol.params, nu, n);

  const Eigen::MatrixXd snapped = snap_entries(K_f, 1e-9);
  if ((snapped.array() != K_f.array()).any() &&
      check_containment(terminal_cost_inner(plant, polars, snapped), polars.Pp).contained) {
    K_f = snapped;
  } else if (!check_containment(terminal_cost_inner(plant, polars, K_f), polars.Pp).contained) {
    throw CertificateMismatch("terminal gain: fixed-gain re-certification failed");
  }
  return K_f;
}

ContainmentCertificate certify_terminal_gain(const PlantSpec& plant, const CostSets& costs,
                                             const Eigen::MatrixXd& K_f) {
  const CostPolars polars = cost_polars(plant, costs);
  return check_containment(terminal_cost_inner(plant, polars, K_f), polars.Pp);
}

// ---------------------------------------------------------------------------
// Terminal bundle.

TerminalIngredients synthesize_terminal(const PlantSpec& plant, const TightenedSets& tightened,
                                        const CostSets& costs,
                                        const TerminalSynthesisOptions& options) {
  plant.validate();
  TerminalIngredients out;
  out.K_f = synthesize_terminal_gain(plant, costs);
  out.A_f = plant.A + plant.B * out.K_f;

  // Row-normalized caps (q = 1) so the ellipsoid cap certificates imply the
  // per-row bounds  (Q_r P Q_r') <= q_r^2  exactly.
  const auto normalized_rows = [](const HPolytope& p) {
    Eigen::MatrixXd Q = p.Q;
    for (int r = 0; r < Q.rows(); ++r) {
      if (!(p.q[r] > 0.0)) {
        throw InfeasibleSynthesis("terminal ellipsoid: 0 is not interior to a tightened set");
      }
      Q.row(r) /= p.q[r];
    }
    return Q;
  };
  MaxVolProblem prob;
  prob.A = out.A_f;
  prob.lambda = options.lambda_f;
  prob.Qx = normalized_rows(tightened.state_hrep);
  prob.qx = Eigen::VectorXd::Ones(prob.Qx.rows());
  prob.Qu = normalized_rows(tightened.input_hrep) * out.K_f;
  prob.qu = Eigen::VectorXd::Ones(prob.Qu.rows());

  const MaxVolResult mv = solve_maxvol(prob);
  if (!mv.success) {
    throw InfeasibleSynthesis("terminal ellipsoid: max-volume synthesis failed");
  }
  out.P = mv.P;
  out.margins = check_lmis(prob, out.P);
  if (out.margins.min() < options.lmi_margin) {
    throw CertificateMismatch("terminal ellipsoid: certificate margins out of tolerance");
  }

  out.set = ellipsoid_zonotope(out.P);

  // Honest support re-checks of the inscribed zonotope against the original
  // (un-normalized) rows.
  for (int r = 0; r < tightened.state_hrep.Q.rows(); ++r) {
    if (support(out.set, tightened.state_hrep.Q.row(r).transpose()) >
        tightened.state_hrep.q[r] + 1e-7) {
      throw CertificateMismatch("terminal set: state row violated");
    }
  }
  const ConstrainedZonotope mapped = linear_map(out.K_f, out.set);
  for (int r = 0; r < tightened.input_hrep.Q.rows(); ++r) {
    if (support(mapped, tightened.input_hrep.Q.row(r).transpose()) >
        tightened.input_hrep.q[r] + 1e-7) {
      throw CertificateMismatch("terminal set: input row violated");
    }
  }
  return out;
}

Eigen::MatrixXd snap_entries(const Eigen::MatrixXd& m, double tol) {
  Eigen::MatrixXd out = m;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      if (std::abs(out(i, j)) < tol) out(i, j) = 0.0;
    }
  }
  return out;
}

}  // namespace zonotube
