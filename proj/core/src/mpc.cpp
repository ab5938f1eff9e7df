#include "zonotube/mpc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "zonotube/errors.hpp"

namespace zonotube {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("mpc: " + message);
}

bool is_axis_box(const ConstrainedZonotope& s) {
  if (!s.is_zonotope()) return false;
  if (s.G.cols() != s.G.rows()) return false;
  for (int i = 0; i < s.G.rows(); ++i) {
    for (int j = 0; j < s.G.cols(); ++j) {
      if (i != j && s.G(i, j) != 0.0) return false;
    }
  }
  return true;
}

/// Rows making point variables `xs` a member of t * S (S origin-centered).
/// Box sets need no extra variables; general sets add one coefficient
/// variable per generator.
void add_gauge_rows(LpBuilder& b, const ConstrainedZonotope& s, const std::vector<int>& xs,
                    int t_index) {
  const int n = s.dim();
  if (is_axis_box(s)) {
    for (int i = 0; i < n; ++i) {
      const double h = std::abs(s.G(i, i));
      if (h == 0.0) {
        b.add_equality({xs[i]}, {1.0}, 0.0);  // flat channel: x_i must vanish
        continue;
      }
      b.add_inequality({xs[i], t_index}, {1.0, -h}, 0.0);
      b.add_inequality({xs[i], t_index}, {-1.0, -h}, 0.0);
    }
    return;
  }

  const int ng = s.num_generators();
  const int xi0 = b.add_variables(ng, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> vars{xs[i]};
    std::vector<double> coeffs{1.0};
    for (int g = 0; g < ng; ++g) {
      if (s.G(i, g) == 0.0) continue;
      vars.push_back(xi0 + g);
      coeffs.push_back(-s.G(i, g));
    }
    b.add_equality(vars, coeffs, 0.0);
  }
  for (int r = 0; r < s.num_constraints(); ++r) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int g = 0; g < ng; ++g) {
      if (s.F(r, g) == 0.0) continue;
      vars.push_back(xi0 + g);
      coeffs.push_back(s.F(r, g));
    }
    vars.push_back(t_index);
    coeffs.push_back(-s.theta(r));
    b.add_equality(vars, coeffs, 0.0);
  }
  for (int g = 0; g < ng; ++g) {
    b.add_inequality({xi0 + g, t_index}, {1.0, -1.0}, 0.0);
    b.add_inequality({xi0 + g, t_index}, {-1.0, -1.0}, 0.0);
  }
}

void add_hrep_rows(LpBuilder& b, const HPolytope& p, const std::vector<int>& xs) {
  for (int r = 0; r < p.num_rows(); ++r) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < p.dim(); ++j) {
      if (p.Q(r, j) == 0.0) continue;
      vars.push_back(xs[j]);
      coeffs.push_back(p.Q(r, j));
    }
    if (vars.empty()) continue;
    b.add_inequality(vars, coeffs, p.q(r));
  }
}

void check_origin_centered(const ConstrainedZonotope& s, const char* what) {
  require(s.c.size() == 0 || s.c.cwiseAbs().maxCoeff() <= 1e-12,
          std::string(what) + " cost set must be origin-centered");
}

void check_tube_membership(const MpcConfig& config, const Eigen::VectorXd& xhat,
                           const Eigen::VectorXd& anchor, int step_index) {
  if (!config.monitor_tube) return;
  const double scale = membership_scale(config.deviation_set, xhat - anchor);
  if (!(scale <= 1.0 + config.tol.feasibility)) {
    throw RuntimeInfeasible(
        "mpc step " + std::to_string(step_index) +
        ": estimate left the deviation tube around the nominal anchor (membership scale " +
        std::to_string(scale) + ")");
  }
}

}  // namespace

void MpcConfig::validate() const {
  plant.validate();
  const int n = plant.num_states();
  const int m = plant.num_inputs();
  require(horizon >= 1, "horizon must be at least 1");
  require(costs.state_cost.dim() == n && costs.terminal_cost.dim() == n,
          "state/terminal cost set dimension does not match the plant");
  require(costs.input_cost.dim() == m, "input cost set dimension does not match the plant");
  check_origin_centered(costs.state_cost, "state");
  check_origin_centered(costs.input_cost, "input");
  check_origin_centered(costs.terminal_cost, "terminal");
  require(nominal_state_hrep.dim() == n && nominal_state_hrep.num_rows() > 0,
          "tightened state rows missing or of wrong dimension");
  require(nominal_input_hrep.dim() == m && nominal_input_hrep.num_rows() > 0,
          "tightened input rows missing or of wrong dimension");
  require(terminal_set.dim() == n, "terminal set dimension does not match the plant");
  require(!is_empty(terminal_set), "terminal set is empty");
  require(deviation_set.dim() == n, "deviation set dimension does not match the plant");
  require(!is_empty(deviation_set), "deviation set is empty");
  require(K.rows() == m && K.cols() == n, "tube feedback gain block size is wrong");
  if (L.size() > 0) {
    require(L.rows() == n && L.cols() == plant.num_outputs(),
            "observer gain block size is wrong");
  }
  if (state_set.num_rows() > 0) require(state_set.dim() == n, "state rows dimension is wrong");
  if (input_set.num_rows() > 0) require(input_set.dim() == m, "input rows dimension is wrong");

  // Terminal set inside the tightened state rows, one support probe per row.
  for (int r = 0; r < nominal_state_hrep.num_rows(); ++r) {
    const double h = support(terminal_set, nominal_state_hrep.Q.row(r).transpose());
    require(h <= nominal_state_hrep.q(r) + tol.feasibility,
            "terminal set leaves the tightened state rows (row " + std::to_string(r) + ")");
  }
}

MpcProgram build_mpc_lp(const MpcConfig& config, const Eigen::VectorXd& xhat,
                        const Eigen::VectorXd& anchor) {
  const int n = config.plant.num_states();
  const int m = config.plant.num_inputs();
  const int N = config.horizon;
  require(xhat.size() == n, "estimate size does not match the plant");
  require(anchor.size() == n, "anchor size does not match the plant");
  check_tube_membership(config, xhat, anchor, /*step_index=*/-1);

  LpBuilder b;
  MpcProgram prog;

  prog.x_offset = b.add_variables(n * (N + 1), 0.0);
  prog.u_offset = b.add_variables(m * N, 0.0);
  prog.beta_index = b.add_variable(1.0, 0.0);
  // The worst-stage objective leaves the plan's tail degenerate (many optimal
  // plans share beta), so the executed anchor sequence would depend on solver
  // tie-breaking and could hover without converging.  A tiny secondary cost on
  // every stage gauge selects the decisive plan among beta-ties; it perturbs
  // the LP value by O(1e-6 * sum of gauges), which reported objectives exclude.
  constexpr double kTieBreak = 1e-6;
  prog.tq_offset = b.add_variables(N, kTieBreak, 0.0);
  prog.tr_offset = b.add_variables(N, kTieBreak, 0.0);
  prog.tp_index = b.add_variable(1.0, 0.0);

  auto x_vars = [&](int j) {
    std::vector<int> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = prog.x_offset + j * n + i;
    return v;
  };
  auto u_vars = [&](int j) {
    std::vector<int> v(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) v[static_cast<size_t>(i)] = prog.u_offset + j * m + i;
    return v;
  };

  // Anchored first nominal state.
  for (int i = 0; i < n; ++i) b.add_equality({prog.x_offset + i}, {1.0}, anchor(i));

  // Dynamics equalities x(j+1) = A x(j) + B u(j).
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < n; ++i) {
      std::vector<int> vars{prog.x_offset + (j + 1) * n + i};
      std::vector<double> coeffs{1.0};
      for (int p = 0; p < n; ++p) {
        if (config.plant.A(i, p) == 0.0) continue;
        vars.push_back(prog.x_offset + j * n + p);
        coeffs.push_back(-config.plant.A(i, p));
      }
      for (int p = 0; p < m; ++p) {
        if (config.plant.B(i, p) == 0.0) continue;
        vars.push_back(prog.u_offset + j * m + p);
        coeffs.push_back(-config.plant.B(i, p));
      }
      b.add_equality(vars, coeffs, 0.0);
    }
  }

  // Tightened constraint rows on the predicted stages.  The anchored first
  // state is a given constant (the current step's true-state guarantee needs
  // no nominal backing), and the last state is covered by the terminal set
  // (validated to sit inside the state rows).
  for (int j = 1; j < N; ++j) add_hrep_rows(b, config.nominal_state_hrep, x_vars(j));
  for (int j = 0; j < N; ++j) add_hrep_rows(b, config.nominal_input_hrep, u_vars(j));

  // Stage gauge epigraphs and the shared slack.
  for (int j = 0; j < N; ++j) {
    add_gauge_rows(b, config.costs.state_cost, x_vars(j), prog.tq_offset + j);
    add_gauge_rows(b, config.costs.input_cost, u_vars(j), prog.tr_offset + j);
  }
  {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int j = 0; j < N; ++j) {
      vars.push_back(prog.tq_offset + j);
      coeffs.push_back(1.0);
    }
    vars.push_back(prog.beta_index);
    coeffs.push_back(-1.0);
    b.add_inequality(vars, coeffs, 0.0);
    for (int j = 0; j < N; ++j) vars[static_cast<size_t>(j)] = prog.tr_offset + j;
    b.add_inequality(vars, coeffs, 0.0);
  }

  // Terminal gauge epigraph.
  add_gauge_rows(b, config.costs.terminal_cost, x_vars(N), prog.tp_index);

  // Terminal membership with explicit coefficients.
  const ConstrainedZonotope& zf = config.terminal_set;
  prog.alpha_offset = b.add_variables(zf.num_generators(), 0.0, -1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> vars{prog.x_offset + N * n + i};
    std::vector<double> coeffs{1.0};
    for (int g = 0; g < zf.num_generators(); ++g) {
      if (zf.G(i, g) == 0.0) continue;
      vars.push_back(prog.alpha_offset + g);
      coeffs.push_back(-zf.G(i, g));
    }
    b.add_equality(vars, coeffs, zf.c(i));
  }
  for (int r = 0; r < zf.num_constraints(); ++r) {
    std::vector<int> vars;
    std::vector<double> coeffs;
    for (int g = 0; g < zf.num_generators(); ++g) {
      if (zf.F(r, g) == 0.0) continue;
      vars.push_back(prog.alpha_offset + g);
      coeffs.push_back(zf.F(r, g));
    }
    if (vars.empty()) continue;
    b.add_equality(vars, coeffs, zf.theta(r));
  }

  prog.lp = b.build();
  return prog;
}

MpcSolution solve_mpc(const MpcConfig& config, const Eigen::VectorXd& xhat,
                      const Eigen::VectorXd& anchor, int step_index,
                      const std::vector<int>* warm_basis) {
  check_tube_membership(config, xhat, anchor, step_index);
  const MpcProgram prog = build_mpc_lp(config, xhat, anchor);

  LpOptions options;
  options.warm_basis = warm_basis;
  const LpSolution lp_sol = solve_lp(prog.lp, options);
  if (lp_sol.status == LpStatus::kInfeasible) {
    throw RuntimeInfeasible("mpc step " + std::to_string(step_index) +
                            ": controller program is infeasible");
  }
  if (lp_sol.status != LpStatus::kOptimal) {
    throw RuntimeInfeasible("mpc step " + std::to_string(step_index) +
                            ": controller program did not solve to optimality");
  }

  const int n = config.plant.num_states();
  const int m = config.plant.num_inputs();
  const int N = config.horizon;

  MpcSolution sol;
  sol.status = lp_sol.status;
  sol.iterations = lp_sol.iterations;
  sol.lp_rows = static_cast<int>(prog.lp.num_eq() + prog.lp.num_in());
  sol.lp_cols = static_cast<int>(prog.lp.objective.size());
  sol.nominal_states.resize(n, N + 1);
  for (int j = 0; j <= N; ++j) {
    sol.nominal_states.col(j) = lp_sol.primal.segment(prog.x_offset + j * n, n);
  }
  sol.nominal_inputs.resize(m, N);
  for (int j = 0; j < N; ++j) {
    sol.nominal_inputs.col(j) = lp_sol.primal.segment(prog.u_offset + j * m, m);
  }
  sol.beta = lp_sol.primal(prog.beta_index);
  sol.state_gauges = lp_sol.primal.segment(prog.tq_offset, N);
  sol.input_gauges = lp_sol.primal.segment(prog.tr_offset, N);
  sol.terminal_gauge = lp_sol.primal(prog.tp_index);
  // Report the modelled cost (worst-stage slack plus terminal gauge); the LP
  // value additionally carries the tiny tie-break term.
  sol.objective = sol.beta + sol.terminal_gauge;
  sol.basis = lp_sol.basis;

  // Defensive plan checks (the solver already gates row residuals).
  for (int j = 0; j < N; ++j) {
    const Eigen::VectorXd gap = sol.nominal_states.col(j + 1) -
                                config.plant.A * sol.nominal_states.col(j) -
                                config.plant.B * sol.nominal_inputs.col(j);
    if (gap.cwiseAbs().maxCoeff() > config.tol.feasibility) {
      throw RuntimeInfeasible("mpc step " + std::to_string(step_index) +
                              ": returned plan violates the dynamics");
    }
  }
  return sol;
}

Eigen::VectorXd control_law(const MpcSolution& solution, const Eigen::VectorXd& xhat,
                            const MpcConfig& config) {
  require(solution.status == LpStatus::kOptimal, "control law needs an optimal solution");
  const Eigen::VectorXd u = solution.nominal_inputs.col(0) +
                            config.K * (xhat - solution.nominal_states.col(0));
  if (config.input_set.num_rows() > 0) {
    const Eigen::VectorXd slack = config.input_set.Q * u - config.input_set.q;
    if (slack.maxCoeff() > config.tol.feasibility) {
      throw RuntimeInfeasible(
          "applied input left the input set (violation " + std::to_string(slack.maxCoeff()) +
          ") — the tube guarantee failed");
    }
  }
  return u;
}

Eigen::VectorXd advance_nominal(const MpcSolution& solution) {
  require(solution.status == LpStatus::kOptimal, "nominal advance needs an optimal solution");
  require(solution.nominal_states.cols() >= 2, "plan has no second stage");
  return solution.nominal_states.col(1);
}

}  // namespace zonotube
