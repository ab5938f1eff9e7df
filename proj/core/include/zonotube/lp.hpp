#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace zonotube {

/// @brief Linear program: minimize objective'x subject to eq_A x = eq_b,
/// in_A x <= in_b and per-variable bounds lower <= x <= upper.
///
/// Bounds use +/-infinity for "absent".  Constraint matrices are stored
/// sparse because the structured programs built by the toolkit (containment
/// certificates, tube MPC) are sparse by nature.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::SparseMatrix<double> eq_A;
  Eigen::VectorXd eq_b;
  Eigen::SparseMatrix<double> in_A;
  Eigen::VectorXd in_b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_eq() const { return static_cast<int>(eq_b.size()); }
  int num_in() const { return static_cast<int>(in_b.size()); }
};

/// @brief Incremental builder for LinearProgram.
///
/// Variables are added first (returning their indices), then equality and
/// inequality rows referencing those indices.  The builder validates indices
/// and assembles the sparse matrices once in build().
class LpBuilder {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  /// @brief Add one variable; returns its column index.
  int add_variable(double cost = 0.0, double lower = -kInf, double upper = kInf);
  /// @brief Add k variables with identical cost/bounds; returns first index.
  int add_variables(int k, double cost = 0.0, double lower = -kInf,
                    double upper = kInf);

  void set_cost(int var, double cost);

  /// @brief Add sum_i coeffs[i] * x[vars[i]] = rhs.
  void add_equality(const std::vector<int>& vars,
                    const std::vector<double>& coeffs, double rhs);
  /// @brief Add sum_i coeffs[i] * x[vars[i]] <= rhs.
  void add_inequality(const std::vector<int>& vars,
                      const std::vector<double>& coeffs, double rhs);

  int num_vars() const { return static_cast<int>(cost_.size()); }
  int num_eq_rows() const { return static_cast<int>(eq_rhs_.size()); }
  int num_in_rows() const { return static_cast<int>(in_rhs_.size()); }

  LinearProgram build() const;

 private:
  std::vector<double> cost_, lower_, upper_;
  std::vector<Eigen::Triplet<double>> eq_trip_, in_trip_;
  std::vector<double> eq_rhs_, in_rhs_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kSolverFailure };

/// @brief Human-readable status name.
const char* to_string(LpStatus status);

/// @brief Solve result.  When status is kOptimal the primal point satisfies
/// all constraints within max_residual and objective_value equals
/// objective'primal exactly (recomputed).
struct LpSolution {
  LpStatus status = LpStatus::kSolverFailure;
  Eigen::VectorXd primal;
  /// Row multipliers (equality rows then inequality rows) from the final
  /// basis; for programs without variable shifts they satisfy the usual
  /// strong-duality identity objective'primal = duals'rhs.
  Eigen::VectorXd row_duals;
  double objective_value = 0.0;
  double max_residual = 0.0;
  int iterations = 0;
  /// Standard-form basis token usable to warm-start a later solve of a
  /// structurally identical program (same shapes, same bound classes).
  std::vector<int> basis;
};

struct LpOptions {
  enum class Pivot {
    kDantzigBland,  ///< Dantzig pricing, permanent Bland fallback on stalling.
    kBland          ///< Bland's rule throughout (slow, cycle-proof).
  };
  Pivot pivot = Pivot::kDantzigBland;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  /// 0 means automatic (scales with problem size).
  int max_iterations = 0;
  int refactor_interval = 200;
  /// Optional basis from a previous solve of a same-shape program; the solver
  /// re-solves via the dual simplex when the basis is still dual feasible and
  /// silently falls back to a cold solve otherwise.
  const std::vector<int>* warm_basis = nullptr;
};

/// @brief Deterministic two-phase revised simplex.
///
/// The pivot and tie-break rules are fixed (lowest index), so repeated solves
/// of the same program yield bit-identical solutions; scaling the objective
/// by a positive constant leaves the argmin unchanged.  Badly scaled inputs
/// are equilibrated internally (Ruiz scaling rounded to powers of two, which
/// is exact in floating point); the solution, duals, objective value and
/// residual are always reported in the caller's original units.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// @brief Serialize a program in the conventional text LP format (debugging).
std::string write_lp_text(const LinearProgram& lp, const std::string& name = "lp");

}  // namespace zonotube
