#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "zonotube/errors.hpp"
#include "zonotube/mpc.hpp"
#include "zonotube/sets.hpp"
#include "zonotube/synthesis.hpp"

using zonotube::advance_nominal;
using zonotube::build_mpc_lp;
using zonotube::ConstrainedZonotope;
using zonotube::contains_point;
using zonotube::control_law;
using zonotube::CostSets;
using zonotube::gauge;
using zonotube::GainSynthesisOptions;
using zonotube::HPolytope;
using zonotube::LpStatus;
using zonotube::membership_scale;
using zonotube::MpcConfig;
using zonotube::MpcProgram;
using zonotube::MpcSolution;
using zonotube::PlantSpec;
using zonotube::RuntimeInfeasible;
using zonotube::solve_mpc;
using zonotube::synthesize_feedback_gain;
using zonotube::synthesize_observer_gain;
using zonotube::synthesize_terminal;
using zonotube::TerminalSynthesisOptions;
using zonotube::tighten_constraints;
using zonotube::TightenedSets;

namespace {

Eigen::VectorXd vecn(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

HPolytope box_hrep(const Eigen::VectorXd& half_widths) {
  const int n = static_cast<int>(half_widths.size());
  HPolytope p;
  p.Q.resize(2 * n, n);
  p.Q.topRows(n) = Eigen::MatrixXd::Identity(n, n);
  p.Q.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  p.q.resize(2 * n);
  p.q.head(n) = half_widths;
  p.q.tail(n) = half_widths;
  return p;
}

// Scalar plant used for the hand-checkable programs.
MpcConfig scalar_config(double a, double b, int horizon) {
  MpcConfig cfg;
  cfg.plant.A = Eigen::MatrixXd::Constant(1, 1, a);
  cfg.plant.B = Eigen::MatrixXd::Constant(1, 1, b);
  cfg.plant.C = Eigen::MatrixXd::Identity(1, 1);
  cfg.horizon = horizon;
  cfg.costs.state_cost = ConstrainedZonotope::box(vecn({0.0}), vecn({0.5}));
  cfg.costs.input_cost = ConstrainedZonotope::box(vecn({0.0}), vecn({1.0}));
  cfg.costs.terminal_cost = ConstrainedZonotope::box(vecn({0.0}), vecn({0.1}));
  cfg.nominal_state_hrep = box_hrep(vecn({1.0}));
  cfg.nominal_input_hrep = box_hrep(vecn({1.0}));
  cfg.terminal_set = ConstrainedZonotope::box(vecn({0.0}), vecn({0.1}));
  cfg.deviation_set = ConstrainedZonotope::box(vecn({0.0}), vecn({0.5}));
  cfg.K = Eigen::MatrixXd::Zero(1, 1);
  return cfg;
}

// Planar omnidirectional platform with the full synthesis chain: observer
// and feedback tubes, constraint tightening, and terminal ingredients.
struct MecanumFixture {
  PlantSpec plant;
  MpcConfig cfg;
  Eigen::MatrixXd K_f;
};

const MecanumFixture& mecanum_fixture() {
  static const MecanumFixture fixture = [] {
    MecanumFixture f;
    const double ts = 0.35;
    const double tl = ts * 0.22;
    f.plant.A = Eigen::MatrixXd::Identity(3, 3);
    f.plant.B.resize(3, 4);
    f.plant.B << tl, tl, tl, tl,
                 tl, -tl, tl, -tl,
                 ts, -ts, -ts, ts;
    f.plant.C = Eigen::MatrixXd::Identity(3, 3);

    const ConstrainedZonotope Zv = ConstrainedZonotope::box(
        vecn({0.0011, -0.0051, 0.0}), vecn({0.049, 0.0667, 0.0}));
    const ConstrainedZonotope Ze =
        ConstrainedZonotope::box(vecn({0.0, 0.0, 0.0}), vecn({0.1, 0.1, 0.0}));
    const ConstrainedZonotope Zd =
        ConstrainedZonotope::box(vecn({0.0, 0.0, 0.0}), vecn({0.2, 0.2, 0.0}));

    GainSynthesisOptions obs_opt;
    obs_opt.contraction = 0.85;
    const auto obs = synthesize_observer_gain(f.plant, Ze, Zv, nullptr, obs_opt);
    REQUIRE(obs.feasible);

    GainSynthesisOptions fb_opt;
    fb_opt.contraction = 0.9;
    const auto fb = synthesize_feedback_gain(f.plant, Zd, Ze, Zv, obs.gain, fb_opt);
    REQUIRE(fb.feasible);

    const TightenedSets tight = tighten_constraints(
        box_hrep(vecn({1.0, 1.0, 1.0})), box_hrep(vecn({1.0, 1.0, 1.0, 1.0})), Zd, Ze, fb.gain);

    CostSets costs;
    costs.terminal_cost =
        ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), 1e-4 * Eigen::VectorXd::Ones(3));
    costs.state_cost =
        ConstrainedZonotope::box(Eigen::VectorXd::Zero(3), 20.0 * Eigen::VectorXd::Ones(3));
    costs.input_cost =
        ConstrainedZonotope::box(Eigen::VectorXd::Zero(4), 50.0 * Eigen::VectorXd::Ones(4));

    TerminalSynthesisOptions term_opt;
    term_opt.lambda_f = 0.95;
    const auto terminal = synthesize_terminal(f.plant, tight, costs, term_opt);

    f.cfg.plant = f.plant;
    f.cfg.horizon = 12;
    f.cfg.costs = costs;
    f.cfg.nominal_state_hrep = tight.state_hrep;
    f.cfg.nominal_input_hrep = tight.input_hrep;
    f.cfg.terminal_set = terminal.set;
    f.cfg.deviation_set = Zd;
    f.cfg.K = fb.gain;
    f.cfg.L = obs.gain;
    f.cfg.state_set = box_hrep(vecn({1.0, 1.0, 1.0}));
    f.cfg.input_set = box_hrep(vecn({1.0, 1.0, 1.0, 1.0}));
    f.cfg.validate();
    f.K_f = terminal.K_f;
    return f;
  }();
  return fixture;
}

}  // namespace

TEST_CASE("symmetric one-step program parks at the origin for free") {
  MpcConfig cfg = scalar_config(0.5, 1.0, 1);
  cfg.validate();
  const Eigen::VectorXd zero = vecn({0.0});
  const MpcSolution sol = solve_mpc(cfg, zero, zero);
  CHECK(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(sol.beta) < 1e-9);
  CHECK(std::abs(sol.nominal_inputs(0, 0)) < 1e-9);
  CHECK(std::abs(sol.terminal_gauge) < 1e-9);
}

TEST_CASE("two-step scalar program matches an exhaustive input grid") {
  MpcConfig cfg = scalar_config(0.8, 0.5, 2);
  cfg.validate();
  const double x0 = 0.6;
  const Eigen::VectorXd anchor = vecn({x0});
  const MpcSolution sol = solve_mpc(cfg, anchor, anchor);
  CHECK(sol.status == LpStatus::kOptimal);

  // Brute-force oracle over both inputs: coarse sweep then a local refine.
  const auto cost_at = [&](double u0, double u1, double* ok) {
    const double x1 = 0.8 * x0 + 0.5 * u0;
    const double x2 = 0.8 * x1 + 0.5 * u1;
    *ok = (std::abs(x1) <= 1.0 && std::abs(x2) <= 0.1) ? 1.0 : 0.0;
    const double gq = (std::abs(x0) + std::abs(x1)) / 0.5;
    const double gr = std::abs(u0) + std::abs(u1);
    const double gp = std::abs(x2) / 0.1;
    return std::max(gq, gr) + gp;
  };
  double best = 1e100, bu0 = 0.0, bu1 = 0.0;
  for (double u0 = -1.0; u0 <= 1.0; u0 += 1e-3) {
    for (double u1 = -1.0; u1 <= 1.0; u1 += 1e-3) {
      double ok = 0.0;
      const double c = cost_at(u0, u1, &ok);
      if (ok != 0.0 && c < best) {
        best = c;
        bu0 = u0;
        bu1 = u1;
      }
    }
  }
  for (double u0 = bu0 - 2e-3; u0 <= bu0 + 2e-3; u0 += 4e-6) {
    for (double u1 = bu1 - 2e-3; u1 <= bu1 + 2e-3; u1 += 4e-6) {
      double ok = 0.0;
      const double c = cost_at(std::clamp(u0, -1.0, 1.0), std::clamp(u1, -1.0, 1.0), &ok);
      if (ok != 0.0 && c < best) best = c;
    }
  }
  CHECK(std::abs(sol.objective - best) < 1e-4);
}

TEST_CASE("shared slack really bounds both recomputed gauge sums") {
  MpcConfig cfg = scalar_config(0.8, 0.5, 2);
  const Eigen::VectorXd anchor = vecn({0.6});
  const MpcSolution sol = solve_mpc(cfg, anchor, anchor);

  double sum_q = 0.0, sum_r = 0.0;
  for (int j = 0; j < cfg.horizon; ++j) {
    sum_q += gauge(cfg.costs.state_cost, sol.nominal_states.col(j));
    sum_r += gauge(cfg.costs.input_cost, sol.nominal_inputs.col(j));
  }
  CHECK(sum_q <= sol.beta + 1e-6);
  CHECK(sum_r <= sol.beta + 1e-6);
  // beta is tight at the larger of the two sums (it is minimized).
  CHECK(sol.beta <= std::max(sum_q, sum_r) + 1e-6);
}

TEST_CASE("anchor outside the deviation tube is rejected with a step label") {
  MpcConfig cfg = scalar_config(0.5, 1.0, 1);
  const Eigen::VectorXd xhat = vecn({0.8});
  const Eigen::VectorXd anchor = vecn({0.0});  // deviation 0.8 > tube radius 0.5
  CHECK_THROWS_AS(solve_mpc(cfg, xhat, anchor, 7), RuntimeInfeasible);
  try {
    solve_mpc(cfg, xhat, anchor, 7);
  } catch (const RuntimeInfeasible& err) {
    CHECK(std::string(err.what()).find("step 7") != std::string::npos);
  }
}

TEST_CASE("control law reduces to the nominal input when the estimate matches") {
  MpcConfig cfg = scalar_config(0.8, 0.5, 2);
  cfg.K = Eigen::MatrixXd::Constant(1, 1, -0.4);
  const Eigen::VectorXd anchor = vecn({0.6});
  const MpcSolution sol = solve_mpc(cfg, anchor, anchor);

  // Estimate equals the anchored nominal state: pure feedforward.
  const Eigen::VectorXd u_match = control_law(sol, anchor, cfg);
  CHECK(std::abs(u_match(0) - sol.nominal_inputs(0, 0)) < 1e-12);

  // Zero gain: feedforward regardless of the estimate.
  MpcConfig cfg0 = cfg;
  cfg0.K.setZero();
  const Eigen::VectorXd u_zero = control_law(sol, vecn({0.9}), cfg0);
  CHECK(std::abs(u_zero(0) - sol.nominal_inputs(0, 0)) < 1e-12);

  // Nonzero gain shifts by K times the deviation.
  const Eigen::VectorXd u_fb = control_law(sol, vecn({0.9}), cfg);
  CHECK(std::abs(u_fb(0) - (sol.nominal_inputs(0, 0) - 0.4 * (0.9 - 0.6))) < 1e-12);
}

TEST_CASE("nominal advance shifts the plan and stays put at the origin") {
  MpcConfig cfg = scalar_config(0.5, 1.0, 2);
  const Eigen::VectorXd zero = vecn({0.0});
  const MpcSolution at_origin = solve_mpc(cfg, zero, zero);
  CHECK(std::abs(advance_nominal(at_origin)(0)) < 1e-9);

  // Two-step rollout against hand arithmetic: the next anchor must be the
  // second stage of the plan, and re-solving from it stays feasible.
  const Eigen::VectorXd start = vecn({0.6});
  const MpcSolution first = solve_mpc(cfg, start, start);
  const Eigen::VectorXd anchor1 = advance_nominal(first);
  const double by_hand = 0.5 * 0.6 + 1.0 * first.nominal_inputs(0, 0);
  CHECK(std::abs(anchor1(0) - by_hand) < 1e-9);
  const Eigen::VectorXd xhat1 = anchor1;  // noiseless: estimate tracks exactly
  const MpcSolution second = solve_mpc(cfg, xhat1, anchor1, 1);
  CHECK(second.status == LpStatus::kOptimal);
}

TEST_CASE("mecanum platform: twelve-step program is feasible from the corner") {
  const MecanumFixture& f = mecanum_fixture();
  const Eigen::VectorXd x0 = vecn({0.75, 0.75, 0.0});
  const MpcSolution sol = solve_mpc(f.cfg, x0, x0);
  CHECK(sol.status == LpStatus::kOptimal);

  const int N = f.cfg.horizon;
  // Plan invariants: dynamics, tightened rows (predicted stages only — the
  // anchored start sits outside the tightened box by design), terminal
  // membership.
  for (int j = 0; j < N; ++j) {
    const Eigen::VectorXd gap = sol.nominal_states.col(j + 1) -
                                f.plant.A * sol.nominal_states.col(j) -
                                f.plant.B * sol.nominal_inputs.col(j);
    CHECK(gap.cwiseAbs().maxCoeff() <= 1e-7);
    if (j >= 1) {
      CHECK((f.cfg.nominal_state_hrep.Q * sol.nominal_states.col(j) -
             f.cfg.nominal_state_hrep.q).maxCoeff() <= 1e-7);
    }
    CHECK((f.cfg.nominal_input_hrep.Q * sol.nominal_inputs.col(j) -
           f.cfg.nominal_input_hrep.q).maxCoeff() <= 1e-7);
  }
  CHECK(membership_scale(f.cfg.terminal_set, sol.nominal_states.col(N)) <= 1.0 + 1e-7);

  // Shared-slack bounds recomputed from scratch.
  double sum_q = 0.0, sum_r = 0.0;
  for (int j = 0; j < N; ++j) {
    sum_q += gauge(f.cfg.costs.state_cost, sol.nominal_states.col(j));
    sum_r += gauge(f.cfg.costs.input_cost, sol.nominal_inputs.col(j));
  }
  CHECK(sum_q <= sol.beta + 1e-6);
  CHECK(sum_r <= sol.beta + 1e-6);

  // The applied input respects the original input box.
  const Eigen::VectorXd u = control_law(sol, x0, f.cfg);
  CHECK(u.cwiseAbs().maxCoeff() <= 1.0 + 1e-7);
}

TEST_CASE("mecanum platform: terminal controller decreases the terminal cost") {
  const MecanumFixture& f = mecanum_fixture();
  const ConstrainedZonotope& zf = f.cfg.terminal_set;

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd alpha(zf.num_generators());
    for (int i = 0; i < alpha.size(); ++i) alpha(i) = unit(rng);
    Eigen::VectorXd x = zf.c + zf.G * alpha;
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd u = f.K_f * x;
      const Eigen::VectorXd x_next = f.plant.A * x + f.plant.B * u;
      const double lhs = gauge(f.cfg.costs.terminal_cost, x_next) +
                         gauge(f.cfg.costs.state_cost, x) +
                         gauge(f.cfg.costs.input_cost, u);
      CHECK(lhs <= gauge(f.cfg.costs.terminal_cost, x) + 1e-6);
      x = x_next;
    }
  }
}

TEST_CASE("program layout exposes the documented variable blocks") {
  MpcConfig cfg = scalar_config(0.8, 0.5, 3);
  const Eigen::VectorXd anchor = vecn({0.2});
  const MpcProgram prog = build_mpc_lp(cfg, anchor, anchor);
  const int n = 1, m = 1, N = 3;
  CHECK(prog.u_offset == prog.x_offset + n * (N + 1));
  CHECK(prog.beta_index == prog.u_offset + m * N);
  CHECK(prog.tq_offset == prog.beta_index + 1);
  CHECK(prog.tr_offset == prog.tq_offset + N);
  CHECK(prog.tp_index == prog.tr_offset + N);
  CHECK(prog.alpha_offset > prog.tp_index);
  CHECK(prog.lp.objective.size() == prog.alpha_offset + cfg.terminal_set.num_generators());
  // Objective weights beta and the terminal gauge at 1, puts only the tiny
  // plan-selection tie-break on the stage gauges, and nothing elsewhere.
  for (int j = 0; j < prog.lp.objective.size(); ++j) {
    double expected = 0.0;
    if (j == prog.beta_index || j == prog.tp_index) expected = 1.0;
    if ((j >= prog.tq_offset && j < prog.tq_offset + N) ||
        (j >= prog.tr_offset && j < prog.tr_offset + N)) {
      expected = 1e-6;
    }
    CHECK(prog.lp.objective(j) == expected);
  }
}
