#include "zonotube/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace zonotube {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int LpBuilder::add_variable(double cost, double lower, double upper) {
  if (lower > upper) {
    throw std::invalid_argument("LpBuilder: variable lower bound exceeds upper bound.");
  }
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return static_cast<int>(cost_.size()) - 1;
}

int LpBuilder::add_variables(int k, double cost, double lower, double upper) {
  if (k < 0) throw std::invalid_argument("LpBuilder: negative variable count.");
  const int first = num_vars();
  for (int i = 0; i < k; ++i) add_variable(cost, lower, upper);
  return first;
}

void LpBuilder::set_cost(int var, double cost) {
  if (var < 0 || var >= num_vars()) {
    throw std::invalid_argument("LpBuilder: variable index out of range.");
  }
  cost_[static_cast<size_t>(var)] = cost;
}

void LpBuilder::add_equality(const std::vector<int>& vars,
                             const std::vector<double>& coeffs, double rhs) {
  if (vars.size() != coeffs.size()) {
    throw std::invalid_argument("LpBuilder: vars/coeffs size mismatch.");
  }
  const int row = num_eq_rows();
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] < 0 || vars[i] >= num_vars()) {
      throw std::invalid_argument("LpBuilder: variable index out of range.");
    }
    if (coeffs[i] != 0.0) eq_trip_.emplace_back(row, vars[i], coeffs[i]);
  }
  eq_rhs_.push_back(rhs);
}

void LpBuilder::add_inequality(const std::vector<int>& vars,
                               const std::vector<double>& coeffs, double rhs) {
  if (vars.size() != coeffs.size()) {
    throw std::invalid_argument("LpBuilder: vars/coeffs size mismatch.");
  }
  const int row = num_in_rows();
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] < 0 || vars[i] >= num_vars()) {
      throw std::invalid_argument("LpBuilder: variable index out of range.");
    }
    if (coeffs[i] != 0.0) in_trip_.emplace_back(row, vars[i], coeffs[i]);
  }
  in_rhs_.push_back(rhs);
}

LinearProgram LpBuilder::build() const {
  LinearProgram lp;
  const int n = num_vars();
  lp.objective = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n);
  lp.lower = Eigen::Map<const Eigen::VectorXd>(lower_.data(), n);
  lp.upper = Eigen::Map<const Eigen::VectorXd>(upper_.data(), n);
  lp.eq_A.resize(num_eq_rows(), n);
  lp.eq_A.setFromTriplets(eq_trip_.begin(), eq_trip_.end());
  lp.eq_b = Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(), num_eq_rows());
  lp.in_A.resize(num_in_rows(), n);
  lp.in_A.setFromTriplets(in_trip_.begin(), in_trip_.end());
  lp.in_b = Eigen::Map<const Eigen::VectorXd>(in_rhs_.data(), num_in_rows());
  return lp;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kSolverFailure: return "solver_failure";
  }
  return "unknown";
}

namespace {

struct SparseCol {
  std::vector<int> idx;
  std::vector<double> val;
  void push(int i, double v) {
    if (v != 0.0) {
      idx.push_back(i);
      val.push_back(v);
    }
  }
};

// x_original = (pos >= 0 ? z[pos] : 0) - (neg >= 0 ? z[neg] : 0) + shift
struct VarMap {
  int pos = -1;
  int neg = -1;
  double shift = 0.0;
};

// Standard form: min cost'z s.t. Az = b, z >= 0.  Columns are laid out as
// [structural | slacks (one per inequality row) | artificials (one per row)]
// so that basis tokens stay valid across solves of same-shape programs.
struct StandardForm {
  int m = 0;
  int num_eq = 0;
  int first_slack = 0;
  int first_art = 0;
  int total = 0;
  std::vector<SparseCol> cols;
  Eigen::VectorXd b;
  Eigen::VectorXd cost;
  std::vector<VarMap> vmap;
};

StandardForm make_standard_form(const LinearProgram& lp) {
  const int n = lp.num_vars();
  const int neq = lp.num_eq();
  const int nin = lp.num_in();
  if (lp.lower.size() != n || lp.upper.size() != n ||
      lp.eq_A.cols() != n || lp.in_A.cols() != n ||
      lp.eq_A.rows() != neq || lp.in_A.rows() != nin) {
    throw std::invalid_argument("solve_lp: inconsistent program dimensions.");
  }

  // Gather each variable's combined sparse column over [eq rows; ineq rows].
  std::vector<SparseCol> base(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(lp.eq_A, j); it; ++it) {
      base[static_cast<size_t>(j)].push(static_cast<int>(it.row()), it.value());
    }
  }
  for (int j = 0; j < n; ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(lp.in_A, j); it; ++it) {
      base[static_cast<size_t>(j)].push(neq + static_cast<int>(it.row()), it.value());
    }
  }

  // Doubly-bounded variables contribute one extra inequality row each.
  std::vector<int> bound_var;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j])) {
      bound_var.push_back(j);
    }
  }
  const int nbound = static_cast<int>(bound_var.size());

  StandardForm sf;
  sf.m = neq + nin + nbound;
  sf.num_eq = neq;
  sf.b.resize(sf.m);
  sf.b.head(neq) = lp.eq_b;
  sf.b.segment(neq, nin) = lp.in_b;
  sf.vmap.resize(static_cast<size_t>(n));

  std::vector<SparseCol> cols;
  std::vector<double> cost;
  auto add_col = [&](SparseCol col, double c) {
    cols.push_back(std::move(col));
    cost.push_back(c);
    return static_cast<int>(cols.size()) - 1;
  };
  auto negate = [](const SparseCol& col) {
    SparseCol out = col;
    for (double& v : out.val) v = -v;
    return out;
  };

  int bound_row = neq + nin;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    const double c = lp.objective[j];
    VarMap& vm = sf.vmap[static_cast<size_t>(j)];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      vm.pos = add_col(base[static_cast<size_t>(j)], c);
      vm.neg = add_col(negate(base[static_cast<size_t>(j)]), -c);
    } else if (std::isfinite(lo) && !std::isfinite(hi)) {
      // x = z + lo
      vm.pos = add_col(base[static_cast<size_t>(j)], c);
      vm.shift = lo;
    } else if (!std::isfinite(lo) && std::isfinite(hi)) {
      // x = hi - z
      vm.neg = add_col(negate(base[static_cast<size_t>(j)]), -c);
      vm.shift = hi;
    } else {
      // x = z + lo with z <= hi - lo enforced by an extra row.
      SparseCol col = base[static_cast<size_t>(j)];
      col.push(bound_row, 1.0);
      vm.pos = add_col(std::move(col), c);
      vm.shift = lo;
      ++bound_row;
    }
    if (vm.shift != 0.0) {
      const SparseCol& bc = base[static_cast<size_t>(j)];
      for (size_t t = 0; t < bc.idx.size(); ++t) {
        sf.b[bc.idx[t]] -= bc.val[t] * vm.shift;
      }
    }
  }
  for (int t = 0; t < nbound; ++t) {
    const int j = bound_var[static_cast<size_t>(t)];
    sf.b[neq + nin + t] = lp.upper[j] - lp.lower[j];
  }

  sf.first_slack = static_cast<int>(cols.size());
  for (int r = neq; r < sf.m; ++r) {
    SparseCol s;
    s.push(r, 1.0);
    add_col(std::move(s), 0.0);
  }
  sf.first_art = static_cast<int>(cols.size());
  for (int r = 0; r < sf.m; ++r) {
    SparseCol a;
    a.push(r, sf.b[r] >= 0.0 ? 1.0 : -1.0);
    add_col(std::move(a), 0.0);
  }
  sf.total = static_cast<int>(cols.size());
  sf.cols = std::move(cols);
  sf.cost = Eigen::Map<const Eigen::VectorXd>(cost.data(), static_cast<long>(cost.size()));
  return sf;
}

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const LpOptions& opt)
      : sf_(sf), opt_(opt), m_(sf.m) {
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 2000 + 200 * m_;
    bland_ = (opt.pivot == LpOptions::Pivot::kBland);
    basis_.assign(static_cast<size_t>(m_), -1);
    in_basis_.assign(static_cast<size_t>(sf_.total), 0);
    Binv_.resize(m_, m_);
    xB_.resize(m_);
  }

  LpStatus run_cold() {
    // Crash basis: slacks on inequality rows with nonnegative rhs,
    // artificials elsewhere.
    for (int r = 0; r < m_; ++r) {
      int col = sf_.first_art + r;
      if (r >= sf_.num_eq && sf_.b[r] >= 0.0) {
        col = sf_.first_slack + (r - sf_.num_eq);
      }
      set_basic(r, col);
    }
    if (!refactorize()) return LpStatus::kSolverFailure;

    // Phase 1: minimize the artificial mass.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(sf_.total);
    for (int r = 0; r < m_; ++r) phase1[sf_.first_art + r] = 1.0;
    const LpStatus st1 = iterate(phase1, /*phase1=*/true);
    if (st1 != LpStatus::kOptimal) {
      return st1 == LpStatus::kUnbounded ? LpStatus::kSolverFailure : st1;
    }
    double art_mass = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<size_t>(r)] >= sf_.first_art) art_mass += std::max(xB_[r], 0.0);
    }
    if (art_mass > 1e-7) return LpStatus::kInfeasible;
    drive_out_artificials();
    const LpStatus st2 = iterate(sf_.cost, /*phase1=*/false);
    // Final refactorization drops the drift the rank-one updates accumulate,
    // so the reported point is exactly basis-consistent.
    if (st2 == LpStatus::kOptimal && !refactorize()) return LpStatus::kSolverFailure;
    return st2;
  }

  // Warm re-solve from a previous basis of a same-shape program; returns
  // false when the basis cannot be reused (caller then solves cold).
  bool run_warm(const std::vector<int>& warm, LpStatus* status) {
    if (static_cast<int>(warm.size()) != m_) return false;
    std::vector<char> seen(static_cast<size_t>(sf_.total), 0);
    for (int col : warm) {
      if (col < 0 || col >= sf_.total || seen[static_cast<size_t>(col)]) return false;
      seen[static_cast<size_t>(col)] = 1;
    }
    for (int r = 0; r < m_; ++r) set_basic(r, warm[static_cast<size_t>(r)]);
    if (!refactorize()) return false;
    // Dual feasibility check: reduced costs must be (near) nonnegative.
    Eigen::VectorXd y = dual_vector(sf_.cost);
    for (int j = 0; j < sf_.total; ++j) {
      if (in_basis_[static_cast<size_t>(j)] || j >= sf_.first_art) continue;
      if (reduced_cost(sf_.cost, y, j) < -1e-7) return false;
    }
    const LpStatus st = iterate_dual();
    if (st == LpStatus::kInfeasible) {
      *status = LpStatus::kInfeasible;
      return true;
    }
    if (st != LpStatus::kOptimal) return false;
    // Mop-up primal pass (usually zero pivots).
    *status = iterate(sf_.cost, /*phase1=*/false);
    if (*status == LpStatus::kOptimal && !refactorize()) {
      *status = LpStatus::kSolverFailure;
    }
    return true;
  }

  const std::vector<int>& basis() const { return basis_; }
  const Eigen::VectorXd& xB() const { return xB_; }
  int iterations() const { return iterations_; }

  Eigen::VectorXd dual_vector(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cB(m_);
    for (int r = 0; r < m_; ++r) cB[r] = cost[basis_[static_cast<size_t>(r)]];
    return Binv_.transpose() * cB;
  }

  // Standard-form primal point.
  Eigen::VectorXd primal_z() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(sf_.total);
    for (int r = 0; r < m_; ++r) z[basis_[static_cast<size_t>(r)]] = xB_[r];
    return z;
  }

 private:
  void set_basic(int row, int col) {
    basis_[static_cast<size_t>(row)] = col;
    in_basis_[static_cast<size_t>(col)] = 1;
  }

  bool refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int r = 0; r < m_; ++r) {
      const SparseCol& col = sf_.cols[static_cast<size_t>(basis_[static_cast<size_t>(r)])];
      for (size_t t = 0; t < col.idx.size(); ++t) B(col.idx[t], r) += col.val[t];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd diag = lu.matrixLU().diagonal().cwiseAbs();
    if (m_ > 0 && (!diag.allFinite() || diag.minCoeff() < 1e-13 * std::max(1.0, diag.maxCoeff()))) {
      failed_ = true;
      return false;
    }
    Binv_ = lu.inverse();
    xB_ = Binv_ * sf_.b;
    if (!Binv_.allFinite()) {
      failed_ = true;
      return false;
    }
    return true;
  }

  double reduced_cost(const Eigen::VectorXd& cost, const Eigen::VectorXd& y, int j) const {
    const SparseCol& col = sf_.cols[static_cast<size_t>(j)];
    double d = cost[j];
    for (size_t t = 0; t < col.idx.size(); ++t) d -= y[col.idx[t]] * col.val[t];
    return d;
  }

  Eigen::VectorXd apply_Binv(int j) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
    const SparseCol& col = sf_.cols[static_cast<size_t>(j)];
    for (size_t t = 0; t < col.idx.size(); ++t) w += col.val[t] * Binv_.col(col.idx[t]);
    return w;
  }

  void pivot(int row, int col, const Eigen::VectorXd& w, double theta) {
    in_basis_[static_cast<size_t>(basis_[static_cast<size_t>(row)])] = 0;
    set_basic(row, col);
    const double wp = w[row];
    Eigen::RowVectorXd prow = Binv_.row(row) / wp;
    Binv_.noalias() -= w * prow;
    Binv_.row(row) = prow;
    xB_.noalias() -= theta * w;
    xB_[row] = theta;
    ++iterations_;
    if (iterations_ % opt_.refactor_interval == 0) refactorize();
  }

  // One primal phase; returns kOptimal/kUnbounded/kSolverFailure.
  LpStatus iterate(const Eigen::VectorXd& cost, bool phase1) {
    // Columns priced out at the current basis because no acceptable pivot row
    // exists (cancellation leaves only noise entries).  Bans are local to a
    // basis and cleared after every pivot.
    std::vector<char> banned(static_cast<size_t>(sf_.first_art), 0);
    while (true) {
      if (iterations_ > max_iter_ || failed_) return LpStatus::kSolverFailure;
      const Eigen::VectorXd y = dual_vector(cost);
      int q = -1;
      double best = -opt_.optimality_tol;
      for (int j = 0; j < sf_.first_art; ++j) {
        if (in_basis_[static_cast<size_t>(j)] || banned[static_cast<size_t>(j)]) continue;
        const double d = reduced_cost(cost, y, j);
        if (d < best) {
          best = d;
          q = j;
          if (bland_) break;
        }
      }
      if (q < 0) return LpStatus::kOptimal;
      const Eigen::VectorXd w = apply_Binv(q);
      int row = -1;
      double best_ratio = kInf;
      // Threshold relative to the column's magnitude: an entry many orders
      // below the largest is cancellation noise, and pivoting on it collapses
      // the basis.
      const double wtol =
          std::max(opt_.pivot_tol, 1e-9 * w.cwiseAbs().maxCoeff());
      for (int i = 0; i < m_; ++i) {
        if (w[i] > wtol) {
          const double ratio = std::max(xB_[i], 0.0) / w[i];
          if (ratio < best_ratio - 1e-15 ||
              (ratio < best_ratio + 1e-15 && row >= 0 &&
               basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(row)])) {
            best_ratio = ratio;
            row = i;
          }
        }
      }
      if (row < 0) {
        // No usable pivot row.  A substantially improving column without one
        // means a genuine ray (phase 2 only); a marginal one is numerical
        // noise, so drop the column at this basis and re-price.
        if (!phase1 && best < -1e-6) return LpStatus::kUnbounded;
        banned[static_cast<size_t>(q)] = 1;
        continue;
      }
      if (best_ratio < 1e-11) {
        if (++degenerate_streak_ > 50 + m_ / 4) bland_ = true;
      } else {
        degenerate_streak_ = 0;
      }
      pivot(row, q, w, best_ratio);
      std::fill(banned.begin(), banned.end(), 0);
    }
  }

  // Dual simplex from a dual-feasible basis (used for warm re-solves).
  LpStatus iterate_dual() {
    while (true) {
      if (iterations_ > max_iter_ || failed_) return LpStatus::kSolverFailure;
      int row = -1;
      double most_neg = -opt_.feasibility_tol;
      for (int i = 0; i < m_; ++i) {
        if (xB_[i] < most_neg ||
            (row >= 0 && xB_[i] < most_neg + 1e-15 &&
             basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(row)])) {
          most_neg = xB_[i];
          row = i;
        }
      }
      if (row < 0) return LpStatus::kOptimal;
      const Eigen::VectorXd y = dual_vector(sf_.cost);
      const Eigen::RowVectorXd brow = Binv_.row(row);
      const double atol =
          std::max(opt_.pivot_tol, 1e-9 * brow.cwiseAbs().maxCoeff());
      int q = -1;
      double best_ratio = kInf;
      double alpha_q = 0.0;
      for (int j = 0; j < sf_.first_art; ++j) {
        if (in_basis_[static_cast<size_t>(j)]) continue;
        const SparseCol& col = sf_.cols[static_cast<size_t>(j)];
        double alpha = 0.0;
        for (size_t t = 0; t < col.idx.size(); ++t) alpha += brow[col.idx[t]] * col.val[t];
        if (alpha < -atol) {
          const double d = std::max(reduced_cost(sf_.cost, y, j), 0.0);
          const double ratio = d / (-alpha);
          if (ratio < best_ratio - 1e-15) {
            best_ratio = ratio;
            q = j;
            alpha_q = alpha;
          }
        }
      }
      if (q < 0) return LpStatus::kInfeasible;
      (void)alpha_q;
      const Eigen::VectorXd w = apply_Binv(q);
      pivot(row, q, w, xB_[row] / w[row]);
    }
  }

  const StandardForm& sf_;
  LpOptions opt_;
  int m_;
  int max_iter_ = 0;
  bool bland_ = false;
  bool failed_ = false;
  int degenerate_streak_ = 0;
  int iterations_ = 0;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  Eigen::MatrixXd Binv_;
  Eigen::VectorXd xB_;

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<size_t>(r)] < sf_.first_art) continue;
      const Eigen::RowVectorXd brow = Binv_.row(r);
      const double atol = 1e-8 * std::max(1.0, brow.cwiseAbs().maxCoeff());
      for (int j = 0; j < sf_.first_art; ++j) {
        if (in_basis_[static_cast<size_t>(j)]) continue;
        const SparseCol& col = sf_.cols[static_cast<size_t>(j)];
        double alpha = 0.0;
        for (size_t t = 0; t < col.idx.size(); ++t) alpha += brow[col.idx[t]] * col.val[t];
        if (std::abs(alpha) > atol) {
          const Eigen::VectorXd w = apply_Binv(j);
          pivot(r, j, w, std::max(xB_[r], 0.0) / w[r]);
          break;
        }
      }
      // A row whose artificial cannot be driven out is linearly dependent;
      // its artificial stays basic pinned at zero.
    }
  }
};

double bound_violation(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double v = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (std::isfinite(lp.lower[j])) v = std::max(v, lp.lower[j] - x[j]);
    if (std::isfinite(lp.upper[j])) v = std::max(v, x[j] - lp.upper[j]);
  }
  return v;
}

double residual(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double r = bound_violation(lp, x);
  if (lp.num_eq() > 0) {
    r = std::max(r, (lp.eq_A * x - lp.eq_b).cwiseAbs().maxCoeff());
  }
  if (lp.num_in() > 0) {
    r = std::max(r, (lp.in_A * x - lp.in_b).maxCoeff());
  }
  return std::max(r, 0.0);
}

LpSolution solve_trivial(const LinearProgram& lp) {
  // No constraint rows: minimize each variable independently over its bounds.
  LpSolution sol;
  const int n = lp.num_vars();
  sol.primal = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double c = lp.objective[j];
    if (c > 0.0) {
      if (!std::isfinite(lp.lower[j])) {
        sol.status = LpStatus::kUnbounded;
        return sol;
      }
      sol.primal[j] = lp.lower[j];
    } else if (c < 0.0) {
      if (!std::isfinite(lp.upper[j])) {
        sol.status = LpStatus::kUnbounded;
        return sol;
      }
      sol.primal[j] = lp.upper[j];
    } else {
      sol.primal[j] = std::isfinite(lp.lower[j])
                          ? std::max(lp.lower[j], std::min(0.0, lp.upper[j]))
                          : std::min(lp.upper[j], 0.0);
      if (!std::isfinite(sol.primal[j])) sol.primal[j] = 0.0;
    }
  }
  sol.status = LpStatus::kOptimal;
  sol.objective_value = lp.objective.dot(sol.primal);
  sol.max_residual = 0.0;
  return sol;
}

// ---------------------------------------------------------------------------
// Equilibration.  Ruiz max-norm scaling of the stacked constraint matrix,
// rounded to powers of two so every scaled coefficient is exactly
// representable (scaling itself introduces no rounding error).  The simplex
// then pivots on O(1) data regardless of the units the caller works in, which
// keeps its absolute pivot/feasibility tolerances meaningful.

struct Equilibration {
  bool active = false;
  Eigen::VectorXd row_scale;  // num_eq + num_in entries
  Eigen::VectorXd col_scale;  // num_vars entries
};

double pow2_near(double s) {
  if (!std::isfinite(s) || s <= 0.0) return 1.0;
  int e = 0;
  const double f = std::frexp(s, &e);  // s = f * 2^e with f in [0.5, 1)
  // Nearest power of two in log scale: mantissa above 1/sqrt(2) rounds up.
  return std::ldexp(1.0, f >= 0.70710678118654752 ? e : e - 1);
}

Equilibration compute_equilibration(const LinearProgram& lp) {
  const int me = lp.num_eq();
  const int mi = lp.num_in();
  const int nv = lp.num_vars();
  const int m = me + mi;
  Equilibration eq;
  eq.row_scale = Eigen::VectorXd::Ones(m);
  eq.col_scale = Eigen::VectorXd::Ones(nv);
  if (m == 0 || nv == 0) return eq;

  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> vals;
  const auto gather = [&](const Eigen::SparseMatrix<double>& A, int row0) {
    for (int k = 0; k < A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        if (it.value() == 0.0) continue;
        rows.push_back(static_cast<int>(it.row()) + row0);
        cols.push_back(static_cast<int>(it.col()));
        vals.push_back(it.value());
      }
    }
  };
  gather(lp.eq_A, 0);
  gather(lp.in_A, me);
  if (vals.empty()) return eq;

  Eigen::VectorXd& r = eq.row_scale;
  Eigen::VectorXd& d = eq.col_scale;
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m);
    for (size_t t = 0; t < vals.size(); ++t) {
      const double a = std::abs(vals[t]) * r[rows[t]] * d[cols[t]];
      rmax[rows[t]] = std::max(rmax[rows[t]], a);
    }
    for (int i = 0; i < m; ++i) {
      if (rmax[i] > 0.0) r[i] /= std::sqrt(rmax[i]);
    }
    Eigen::VectorXd cmax = Eigen::VectorXd::Zero(nv);
    for (size_t t = 0; t < vals.size(); ++t) {
      const double a = std::abs(vals[t]) * r[rows[t]] * d[cols[t]];
      cmax[cols[t]] = std::max(cmax[cols[t]], a);
    }
    for (int j = 0; j < nv; ++j) {
      if (cmax[j] > 0.0) d[j] /= std::sqrt(cmax[j]);
    }
  }
  for (int i = 0; i < m; ++i) {
    r[i] = pow2_near(r[i]);
    if (r[i] != 1.0) eq.active = true;
  }
  for (int j = 0; j < nv; ++j) {
    d[j] = pow2_near(d[j]);
    if (d[j] != 1.0) eq.active = true;
  }
  return eq;
}

LinearProgram apply_equilibration(const LinearProgram& lp, const Equilibration& eq) {
  LinearProgram out = lp;
  const int me = lp.num_eq();
  const int mi = lp.num_in();
  if (me > 0) {
    const Eigen::VectorXd re = eq.row_scale.head(me);
    out.eq_A = re.asDiagonal() * lp.eq_A * eq.col_scale.asDiagonal();
    out.eq_b = re.cwiseProduct(lp.eq_b);
  }
  if (mi > 0) {
    const Eigen::VectorXd ri = eq.row_scale.tail(mi);
    out.in_A = ri.asDiagonal() * lp.in_A * eq.col_scale.asDiagonal();
    out.in_b = ri.cwiseProduct(lp.in_b);
  }
  out.objective = lp.objective.cwiseProduct(eq.col_scale);
  out.lower = lp.lower.cwiseQuotient(eq.col_scale);
  out.upper = lp.upper.cwiseQuotient(eq.col_scale);
  return out;
}

LpSolution solve_lp_direct(const LinearProgram& lp, const LpOptions& options,
                           bool gate_residual) {
  if (lp.num_eq() + lp.num_in() == 0 && lp.num_vars() >= 0) {
    bool any_double_bound = false;
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j])) any_double_bound = true;
    }
    if (!any_double_bound) return solve_trivial(lp);
  }

  const StandardForm sf = make_standard_form(lp);
  LpSolution sol;

  auto extract = [&](const RevisedSimplex& simplex, LpStatus status) {
    sol.status = status;
    sol.iterations = simplex.iterations();
    if (status != LpStatus::kOptimal) return;
    const Eigen::VectorXd z = simplex.primal_z();
    sol.primal.resize(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
      const VarMap& vm = sf.vmap[static_cast<size_t>(j)];
      double x = vm.shift;
      if (vm.pos >= 0) x += z[vm.pos];
      if (vm.neg >= 0) x -= z[vm.neg];
      sol.primal[j] = x;
    }
    sol.objective_value = lp.objective.size() > 0 ? lp.objective.dot(sol.primal) : 0.0;
    sol.max_residual = residual(lp, sol.primal);
    const Eigen::VectorXd y = simplex.dual_vector(sf.cost);
    sol.row_duals.resize(lp.num_eq() + lp.num_in());
    sol.row_duals = y.head(lp.num_eq() + lp.num_in());
    sol.basis = simplex.basis();
    if (gate_residual && sol.max_residual > 1e-7) sol.status = LpStatus::kSolverFailure;
  };

  if (options.warm_basis != nullptr && !options.warm_basis->empty()) {
    RevisedSimplex warm(sf, options);
    LpStatus status = LpStatus::kSolverFailure;
    if (warm.run_warm(*options.warm_basis, &status)) {
      extract(warm, status);
      if (sol.status != LpStatus::kSolverFailure) return sol;
    }
  }

  RevisedSimplex cold(sf, options);
  extract(cold, cold.run_cold());
  return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  if (lp.num_eq() + lp.num_in() == 0) {
    return solve_lp_direct(lp, options, /*gate_residual=*/true);
  }
  const Equilibration eq = compute_equilibration(lp);
  if (!eq.active) return solve_lp_direct(lp, options, /*gate_residual=*/true);

  // The scaled solve skips the residual gate; the verdict belongs to the
  // caller's units, applied below after unscaling.
  LpSolution sol =
      solve_lp_direct(apply_equilibration(lp, eq), options, /*gate_residual=*/false);
  if (sol.status != LpStatus::kOptimal) return sol;
  // Map back to the caller's units and re-validate there: x = D x_scaled,
  // y = R y_scaled, and the residual gate applies to the original data.
  sol.primal = sol.primal.cwiseProduct(eq.col_scale);
  sol.row_duals = sol.row_duals.cwiseProduct(eq.row_scale);
  sol.objective_value = lp.objective.size() > 0 ? lp.objective.dot(sol.primal) : 0.0;
  sol.max_residual = residual(lp, sol.primal);
  if (sol.max_residual > 1e-7) sol.status = LpStatus::kSolverFailure;
  return sol;
}

std::string write_lp_text(const LinearProgram& lp, const std::string& name) {
  std::ostringstream os;
  os.precision(17);
  auto var = [](int j) { return "x" + std::to_string(j); };
  os << "\\ " << name << "\nMinimize\n obj:";
  bool first = true;
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double c = lp.objective[j];
    if (c == 0.0) continue;
    os << (c < 0 ? " - " : (first ? " " : " + ")) << std::abs(c) << " " << var(j);
    first = false;
  }
  if (first) os << " 0 " << (lp.num_vars() > 0 ? var(0) : "x0");
  os << "\nSubject To\n";
  auto write_row = [&](const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                       int row_offset, const char* rel) {
    // Row-wise emission from a column-major sparse matrix.
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(A.rows()));
    for (int j = 0; j < A.cols(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, j); it; ++it) {
        rows[static_cast<size_t>(it.row())].emplace_back(j, it.value());
      }
    }
    for (int r = 0; r < A.rows(); ++r) {
      os << " c" << (row_offset + r) << ":";
      bool f2 = true;
      for (const auto& [j, v] : rows[static_cast<size_t>(r)]) {
        os << (v < 0 ? " - " : (f2 ? " " : " + ")) << std::abs(v) << " " << var(j);
        f2 = false;
      }
      if (f2) os << " 0 " << var(0);
      os << " " << rel << " " << b[r] << "\n";
    }
  };
  write_row(lp.eq_A, lp.eq_b, 0, "=");
  write_row(lp.in_A, lp.in_b, lp.num_eq(), "<=");
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      os << " " << var(j) << " free\n";
    } else {
      if (std::isfinite(lo)) os << " " << var(j) << " >= " << lo << "\n";
      else os << " " << var(j) << " free\n";
      if (std::isfinite(hi)) os << " " << var(j) << " <= " << hi << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace zonotube
