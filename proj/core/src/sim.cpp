#include "zonotube/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "zonotube/errors.hpp"

namespace zonotube {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void append_fields(std::string* out, const char* prefix, int count) {
  char buf[32];
  for (int i = 1; i <= count; ++i) {
    std::snprintf(buf, sizeof buf, ",%s_%d", prefix, i);
    *out += buf;
  }
}

void append_value(std::string* out, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, ",%.17g", value);
  *out += buf;
}

bool inside_rows(const HPolytope& rows, const Eigen::VectorXd& point, double tol) {
  if (rows.num_rows() == 0) return true;
  return (rows.Q * point - rows.q).maxCoeff() <= tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Noise sampling.

NoiseSampler::NoiseSampler(const NoiseSpec& spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {
  if (!spec_.bounding.is_zonotope()) {
    throw std::invalid_argument("noise: bounding set must be a plain zonotope");
  }
  if (!(spec_.scale > 0.0)) {
    throw std::invalid_argument("noise: coefficient scale must be positive");
  }
}

double NoiseSampler::next_uniform() {
  // 53 uniform mantissa bits straight from the engine.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

Eigen::VectorXd NoiseSampler::sample() {
  const ConstrainedZonotope& z = spec_.bounding;
  if (spec_.kind == NoiseKind::kZero) return z.c;

  Eigen::VectorXd alpha(z.num_generators());
  for (int i = 0; i < alpha.size(); ++i) {
    double a = 0.0;
    if (spec_.kind == NoiseKind::kTruncatedLaplace) {
      const double p = next_uniform() - 0.5;
      const double mag = -spec_.scale * std::log(1.0 - 2.0 * std::abs(p));
      a = (p < 0.0) ? -mag : mag;
    } else {  // kGaussian
      const double u1 = next_uniform();
      const double u2 = next_uniform();
      a = spec_.scale * std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(kTwoPi * u2);
    }
    alpha(i) = std::clamp(a, -1.0, 1.0);
  }
  return z.c + z.G * alpha;
}

// ---------------------------------------------------------------------------
// Robot model.

PlantSpec RobotModel::plant() const {
  const double ts = sample_time;
  const double tl = sample_time * lever();
  PlantSpec p;
  p.A = Eigen::MatrixXd::Identity(3, 3);
  p.B.resize(3, 4);
  p.B << tl, tl, tl, tl,
         tl, -tl, tl, -tl,
         ts, -ts, -ts, ts;
  p.C = Eigen::MatrixXd::Identity(3, 3);
  return p;
}

// ---------------------------------------------------------------------------
// Logging and reported cost.

double compute_reported_cost(const TrajectoryLog& log, const CostSets& costs) {
  double total = 0.0;
  for (const StepRecord& s : log.steps) {
    total += gauge(costs.state_cost, s.x) + gauge(costs.input_cost, s.u);
  }
  total += gauge(costs.terminal_cost, log.final_state);
  return total;
}

std::string trajectory_csv(const TrajectoryLog& log) {
  if (log.steps.empty()) throw std::invalid_argument("trajectory_csv: empty log");
  const StepRecord& first = log.steps.front();

  std::string out = "k";
  append_fields(&out, "x", static_cast<int>(first.x.size()));
  append_fields(&out, "xhat", static_cast<int>(first.xhat.size()));
  append_fields(&out, "xbar", static_cast<int>(first.xbar.size()));
  append_fields(&out, "u", static_cast<int>(first.u.size()));
  append_fields(&out, "v", static_cast<int>(first.v.size()));
  out += ",stage_cost,mem_e,mem_xdev,mem_x,mem_u\n";

  char buf[32];
  for (const StepRecord& s : log.steps) {
    std::snprintf(buf, sizeof buf, "%d", s.k);
    out += buf;
    for (const Eigen::VectorXd* vec : {&s.x, &s.xhat, &s.xbar, &s.u, &s.v}) {
      for (int i = 0; i < vec->size(); ++i) append_value(&out, (*vec)(i));
    }
    append_value(&out, s.stage_cost);
    for (bool m : {s.mem_e, s.mem_xdev, s.mem_x, s.mem_u}) {
      out += m ? ",1" : ",0";
    }
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("trajectory_csv: cannot open " + path);
  const std::string text = trajectory_csv(log);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw std::runtime_error("trajectory_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Observer comparison.

ObserverComparisonResult run_observer_comparison(const ObserverExperiment& experiment,
                                                 std::uint64_t seed) {
  const PlantSpec& plant = experiment.plant;
  const int n = plant.num_states();
  if (experiment.x0.size() != n || experiment.xhat0.size() != n) {
    throw std::invalid_argument("observer experiment: initial state sizes are wrong");
  }

  NoiseSampler sampler(experiment.noise, seed);
  ObserverComparisonResult result;
  result.set_valued.variant = "set_valued";
  result.kalman.variant = "kalman";
  result.set_valued.seed = seed;
  result.kalman.seed = seed;

  Eigen::VectorXd x = experiment.x0;
  Eigen::VectorXd xhat_sv = experiment.xhat0;
  Eigen::VectorXd xhat_kf = experiment.xhat0;
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(n);

  for (int k = 0; k < experiment.num_steps; ++k) {
    // Bundled open-loop profile: slow sinusoid around a constant offset.
    Eigen::VectorXd u(plant.num_inputs());
    u.setConstant(0.5 + 0.3 * std::sin(kTwoPi * k / experiment.num_steps));

    const Eigen::VectorXd v = sampler.sample();
    const Eigen::VectorXd y = plant.C * x + v;

    for (auto [log, xhat] : {std::pair{&result.set_valued, &xhat_sv},
                             std::pair{&result.kalman, &xhat_kf}}) {
      StepRecord rec;
      rec.k = k;
      rec.x = x;
      rec.xhat = *xhat;
      rec.xbar = *xhat;  // no nominal plan in this experiment
      rec.u = u;
      rec.v = v;
      rec.w = w;
      rec.mem_e = contains_point(experiment.error_set, x - *xhat, 1e-7);
      log->steps.push_back(std::move(rec));
    }

    ObserverState obs;
    obs.xhat = xhat_sv;
    obs.error_set = experiment.error_set;
    xhat_sv = observer_step(obs, u, y, plant, experiment.L).xhat;
    xhat_kf = kalman_step(xhat_kf, u, y, plant, experiment.kalman);
    x = plant.A * x + plant.B * u;  // no process disturbance
  }

  result.set_valued.final_state = x;
  result.kalman.final_state = x;
  return result;
}

// ---------------------------------------------------------------------------
// Closed-loop robot experiment.

TrajectoryLog run_robot_experiment(const RobotExperiment& experiment, std::uint64_t seed) {
  const MpcConfig& cfg = experiment.mpc;
  const PlantSpec& plant = cfg.plant;
  const int n = plant.num_states();
  if (experiment.x0.size() != n) {
    throw std::invalid_argument("robot experiment: initial state size is wrong");
  }

  NoiseSampler sampler(experiment.noise, seed);
  TrajectoryLog log;
  log.variant = experiment.variant;
  log.seed = seed;

  Eigen::VectorXd x = experiment.x0;
  Eigen::VectorXd xhat = experiment.x0;  // the estimate starts at the state
  Eigen::VectorXd anchor = xhat;
  const Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  const double tol = cfg.tol.feasibility;
  std::vector<int> warm_basis;

  for (int k = 0; k < experiment.num_steps; ++k) {
    // The premise is logged every step; whether it is also ENFORCED (a tube
    // exit aborts the run) is cfg.monitor_tube — on for the certified
    // controller, off for an uncertified baseline.
    const bool tube_ok =
        membership_scale(cfg.deviation_set, xhat - anchor) <= 1.0 + tol;

    const auto t0 = std::chrono::steady_clock::now();
    const MpcSolution sol = solve_mpc(cfg, xhat, anchor, k,
                                      warm_basis.empty() ? nullptr : &warm_basis);
    const auto t1 = std::chrono::steady_clock::now();
    warm_basis = sol.basis;

    const Eigen::VectorXd u = control_law(sol, xhat, cfg);

    const Eigen::VectorXd v = sampler.sample();
    const Eigen::VectorXd y = plant.C * x + v;

    StepRecord rec;
    rec.k = k;
    rec.x = x;
    rec.xhat = xhat;
    rec.xbar = anchor;
    rec.u = u;
    rec.v = v;
    rec.w = w;
    rec.stage_cost = gauge(cfg.costs.state_cost, x) + gauge(cfg.costs.input_cost, u);
    rec.mem_e = contains_point(experiment.error_set, x - xhat, tol);
    rec.mem_xdev = tube_ok;  // premise as found, before any recovery re-anchor
    rec.mem_x = inside_rows(experiment.state_rows, x, tol);
    rec.mem_u = inside_rows(experiment.input_rows, u, tol);
    rec.beta = sol.beta;
    rec.terminal_gauge = sol.terminal_gauge;
    rec.objective = sol.objective;
    rec.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.lp_rows = sol.lp_rows;
    rec.lp_cols = sol.lp_cols;
    log.steps.push_back(std::move(rec));

    x = plant.A * x + plant.B * u;  // no process disturbance
    ObserverState obs;
    obs.xhat = xhat;
    obs.error_set = experiment.error_set;
    xhat = observer_step(obs, u, y, plant, cfg.L).xhat;
    anchor = advance_nominal(sol);
  }

  log.final_state = x;
  log.final_cost = gauge(cfg.costs.terminal_cost, x);
  double total = log.final_cost;
  for (const StepRecord& s : log.steps) total += s.stage_cost;
  log.total_cost = total;
  return log;
}

}  // namespace zonotube
