#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "zonotube/lp.hpp"

using zonotube::LinearProgram;
using zonotube::LpBuilder;
using zonotube::LpOptions;
using zonotube::LpSolution;
using zonotube::LpStatus;
using zonotube::solve_lp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent oracle: enumerate candidate vertices of
//   { x : A_eq x = b_eq, A_in x <= b_in, lo <= x <= hi }
// by solving every n-subset of active constraints, keep feasible ones, and
// minimize c'x over them.  Valid for boxed (hence pointed, bounded) regions.
struct DenseLp {
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd c, lo, hi;
  int n() const { return static_cast<int>(c.size()); }
};

bool oracle_feasible(const DenseLp& lp, const Eigen::VectorXd& x, double tol = 1e-8) {
  for (int i = 0; i < lp.A_eq.rows(); ++i) {
    if (std::abs(lp.A_eq.row(i).dot(x) - lp.b_eq[i]) > tol) return false;
  }
  for (int i = 0; i < lp.A_in.rows(); ++i) {
    if (lp.A_in.row(i).dot(x) - lp.b_in[i] > tol) return false;
  }
  for (int j = 0; j < lp.n(); ++j) {
    if (x[j] < lp.lo[j] - tol || x[j] > lp.hi[j] + tol) return false;
  }
  return true;
}

bool oracle_min(const DenseLp& lp, double* best_obj) {
  const int n = lp.n();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < lp.A_in.rows(); ++i) {
    rows.push_back(lp.A_in.row(i));
    rhs.push_back(lp.b_in[i]);
  }
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(lp.lo[j]);
    rows.push_back(e);
    rhs.push_back(lp.hi[j]);
  }
  const int neq = static_cast<int>(lp.A_eq.rows());
  const int k = n - neq;
  const int total = static_cast<int>(rows.size());
  if (k < 0) return false;

  bool found = false;
  double best = kInf;
  std::vector<int> pick(static_cast<size_t>(k));
  // Iterate over all k-subsets of the inequality/bound rows.
  std::vector<int> idx(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<size_t>(i)] = i;
  auto advance = [&]() {
    int i = k - 1;
    while (i >= 0 && idx[static_cast<size_t>(i)] == total - k + i) --i;
    if (i < 0) return false;
    ++idx[static_cast<size_t>(i)];
    for (int t = i + 1; t < k; ++t) idx[static_cast<size_t>(t)] = idx[static_cast<size_t>(t - 1)] + 1;
    return true;
  };
  if (k > total) return false;
  bool more = true;
  while (more) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd r(n);
    for (int i = 0; i < neq; ++i) {
      M.row(i) = lp.A_eq.row(i);
      r[i] = lp.b_eq[i];
    }
    for (int i = 0; i < k; ++i) {
      M.row(neq + i) = rows[static_cast<size_t>(idx[static_cast<size_t>(i)])];
      r[neq + i] = rhs[static_cast<size_t>(idx[static_cast<size_t>(i)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-9);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(r);
      if (x.allFinite() && oracle_feasible(lp, x)) {
        found = true;
        best = std::min(best, lp.c.dot(x));
      }
    }
    more = k > 0 && advance();
    if (k == 0) break;
  }
  if (found) *best_obj = best;
  return found;
}

LinearProgram to_program(const DenseLp& lp) {
  LpBuilder b;
  for (int j = 0; j < lp.n(); ++j) b.add_variable(lp.c[j], lp.lo[j], lp.hi[j]);
  std::vector<int> all(static_cast<size_t>(lp.n()));
  for (int j = 0; j < lp.n(); ++j) all[static_cast<size_t>(j)] = j;
  for (int i = 0; i < lp.A_eq.rows(); ++i) {
    const Eigen::RowVectorXd row = lp.A_eq.row(i);
    b.add_equality(all, std::vector<double>(row.data(), row.data() + lp.n()), lp.b_eq[i]);
  }
  for (int i = 0; i < lp.A_in.rows(); ++i) {
    const Eigen::RowVectorXd row = lp.A_in.row(i);
    b.add_inequality(all, std::vector<double>(row.data(), row.data() + lp.n()), lp.b_in[i]);
  }
  return b.build();
}

}  // namespace

TEST_CASE("lp: builder accumulates duplicate coefficients") {
  LpBuilder b;
  const int x = b.add_variable(1.0, 0.0);
  b.add_inequality({x, x}, {2.0, 3.0}, 10.0);
  const LinearProgram lp = b.build();
  CHECK(lp.in_A.coeff(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("lp: hand-checked optima") {
  SUBCASE("simplex corner") {
    LpBuilder b;
    const int x = b.add_variable(-1.0, 0.0);
    const int y = b.add_variable(-1.0, 0.0);
    b.add_inequality({x, y}, {1.0, 1.0}, 1.0);
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective_value == doctest::Approx(-1.0));
    CHECK(s.max_residual <= 1e-7);
  }
  SUBCASE("equality pinned free variables") {
    LpBuilder b;
    const int x = b.add_variable(2.0);
    const int y = b.add_variable(-1.0);
    b.add_equality({x, y}, {1.0, 1.0}, 3.0);
    b.add_inequality({y}, {1.0}, 2.0);
    // y <= 2, x = 3 - y, minimize 2(3-y) - y = 6 - 3y -> y = 2, x = 1.
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.primal[x] == doctest::Approx(1.0));
    CHECK(s.primal[y] == doctest::Approx(2.0));
    CHECK(s.objective_value == doctest::Approx(0.0));
  }
  SUBCASE("doubly bounded variables") {
    LpBuilder b;
    const int x = b.add_variable(1.0, -1.0, 2.0);
    const int y = b.add_variable(1.0, 0.5, 3.0);
    b.add_inequality({x, y}, {-1.0, -1.0}, 0.6);  // x + y >= -0.6 (slack at the corner)
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.objective_value == doctest::Approx(-0.5));  // box corner (-1, 0.5)
  }
  SUBCASE("fixed variable") {
    LpBuilder b;
    const int x = b.add_variable(5.0, 1.5, 1.5);
    const int y = b.add_variable(1.0, 0.0);
    b.add_inequality({x, y}, {-1.0, -1.0}, -2.0);  // x + y >= 2
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.primal[x] == doctest::Approx(1.5));
    CHECK(s.primal[y] == doctest::Approx(0.5));
  }
  SUBCASE("upper-bounded-only variable") {
    LpBuilder b;
    const int x = b.add_variable(-1.0, -kInf, 4.0);
    b.add_inequality({x}, {-1.0}, 10.0);  // x >= -10
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.primal[x] == doctest::Approx(4.0));
  }
}

TEST_CASE("lp: infeasible and unbounded detection") {
  SUBCASE("contradictory inequalities") {
    LpBuilder b;
    const int x = b.add_variable(1.0);
    b.add_inequality({x}, {1.0}, 0.0);    // x <= 0
    b.add_inequality({x}, {-1.0}, -1.0);  // x >= 1
    CHECK(solve_lp(b.build()).status == LpStatus::kInfeasible);
  }
  SUBCASE("contradictory equalities") {
    LpBuilder b;
    const int x = b.add_variable(0.0, 0.0);
    const int y = b.add_variable(0.0, 0.0);
    b.add_equality({x, y}, {1.0, 1.0}, 1.0);
    b.add_equality({x, y}, {2.0, 2.0}, 3.0);
    CHECK(solve_lp(b.build()).status == LpStatus::kInfeasible);
  }
  SUBCASE("zero row with negative rhs") {
    LpBuilder b;
    const int x = b.add_variable(1.0, 0.0);
    b.add_inequality({x}, {0.0}, -1.0);
    CHECK(solve_lp(b.build()).status == LpStatus::kInfeasible);
  }
  SUBCASE("unbounded below on a ray") {
    LpBuilder b;
    const int x = b.add_variable(-1.0, 0.0);
    b.add_inequality({x}, {-1.0}, 0.0);  // x >= 0 (redundant)
    CHECK(solve_lp(b.build()).status == LpStatus::kUnbounded);
  }
  SUBCASE("unbounded free variable with one-sided row") {
    LpBuilder b;
    const int x = b.add_variable(1.0);
    b.add_inequality({x}, {1.0}, 5.0);  // x <= 5, minimize x -> -inf
    CHECK(solve_lp(b.build()).status == LpStatus::kUnbounded);
  }
}

TEST_CASE("lp: redundant rows keep artificials pinned") {
  LpBuilder b;
  const int x = b.add_variable(1.0, 0.0);
  const int y = b.add_variable(2.0, 0.0);
  b.add_equality({x, y}, {1.0, 1.0}, 2.0);
  b.add_equality({x, y}, {2.0, 2.0}, 4.0);  // dependent duplicate
  const LpSolution s = solve_lp(b.build());
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective_value == doctest::Approx(2.0));
  CHECK(s.max_residual <= 1e-7);
}

TEST_CASE("lp: classic degenerate cycling instance terminates at the optimum") {
  // Beale's example; the optimum value is -1/20.
  LpBuilder b;
  const int x1 = b.add_variable(-0.75, 0.0);
  const int x2 = b.add_variable(150.0, 0.0);
  const int x3 = b.add_variable(-0.02, 0.0);
  const int x4 = b.add_variable(6.0, 0.0);
  b.add_inequality({x1, x2, x3, x4}, {0.25, -60.0, -1.0 / 25.0, 9.0}, 0.0);
  b.add_inequality({x1, x2, x3, x4}, {0.5, -90.0, -1.0 / 50.0, 3.0}, 0.0);
  b.add_inequality({x3}, {1.0}, 1.0);
  const LpSolution s = solve_lp(b.build());
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective_value == doctest::Approx(-0.05));
}

TEST_CASE("lp: oracle agreement on randomized boxed programs") {
  std::mt19937 rng(42);
  auto coin = [&](int k) { return static_cast<int>(rng() % static_cast<unsigned>(k)); };
  auto coeff = [&]() { return static_cast<double>(coin(7) - 3); };

  int optimal_cases = 0;
  int infeasible_cases = 0;
  for (int trial = 0; trial < 250; ++trial) {
    DenseLp d;
    const int n = 1 + coin(3);
    const int nin = coin(6);
    const int neq = (n >= 2) ? coin(2) : 0;
    d.c.resize(n);
    d.lo.resize(n);
    d.hi.resize(n);
    for (int j = 0; j < n; ++j) {
      d.c[j] = coeff();
      d.lo[j] = -2.0 - coin(3);
      d.hi[j] = d.lo[j] + 1 + coin(6);
    }
    d.A_in.resize(nin, n);
    d.b_in.resize(nin);
    for (int i = 0; i < nin; ++i) {
      for (int j = 0; j < n; ++j) d.A_in(i, j) = coeff();
      d.b_in[i] = coeff();
    }
    d.A_eq.resize(neq, n);
    d.b_eq.resize(neq);
    for (int i = 0; i < neq; ++i) {
      for (int j = 0; j < n; ++j) d.A_eq(i, j) = coeff();
      d.b_eq[i] = coeff();
    }

    double oracle_obj = 0.0;
    const bool feasible = oracle_min(d, &oracle_obj);
    const LpSolution s = solve_lp(to_program(d));
    INFO("trial ", trial, " n=", n, " nin=", nin, " neq=", neq);
    if (feasible) {
      ++optimal_cases;
      REQUIRE(s.status == LpStatus::kOptimal);
      CHECK(s.objective_value ==
            doctest::Approx(oracle_obj).epsilon(1e-6).scale(std::max(1.0, std::abs(oracle_obj))));
      CHECK(s.max_residual <= 1e-7);
    } else {
      ++infeasible_cases;
      REQUIRE(s.status == LpStatus::kInfeasible);
    }
  }
  // The generator must exercise both outcomes.
  CHECK(optimal_cases > 50);
  CHECK(infeasible_cases > 20);
}

TEST_CASE("lp: deterministic repeat solves and objective-scaling invariance") {
  LpBuilder b;
  const int x = b.add_variable(1.0, 0.0);
  const int y = b.add_variable(1.0, 0.0);
  const int z = b.add_variable(1.0, 0.0);
  b.add_inequality({x, y, z}, {-1.0, -2.0, -1.0}, -4.0);
  b.add_inequality({x, y, z}, {-2.0, -1.0, -3.0}, -6.0);
  const LinearProgram lp = b.build();

  const LpSolution s1 = solve_lp(lp);
  const LpSolution s2 = solve_lp(lp);
  REQUIRE(s1.status == LpStatus::kOptimal);
  REQUIRE(s2.status == LpStatus::kOptimal);
  CHECK(s1.primal == s2.primal);  // bit-identical
  CHECK(s1.iterations == s2.iterations);

  LinearProgram scaled = lp;
  scaled.objective *= 7.5;
  const LpSolution s3 = solve_lp(scaled);
  REQUIRE(s3.status == LpStatus::kOptimal);
  CHECK(s3.primal == s1.primal);
}

TEST_CASE("lp: strong duality on shift-free programs") {
  std::mt19937 rng(7);
  auto coeff = [&]() { return static_cast<double>(static_cast<int>(rng() % 7u) - 3); };
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    LpBuilder b;
    const int n = 2 + static_cast<int>(rng() % 2u);
    for (int j = 0; j < n; ++j) b.add_variable(1.0 + (trial % 3) + j, 0.0);
    std::vector<int> all(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) all[static_cast<size_t>(j)] = j;
    std::vector<double> row(static_cast<size_t>(n));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = -std::abs(coeff()) - 1.0;
      b.add_inequality(all, row, -(1.0 + std::abs(coeff())));  // sum a_j x_j >= r
    }
    const LinearProgram lp = b.build();
    const LpSolution s = solve_lp(lp);
    if (s.status != LpStatus::kOptimal) continue;
    ++checked;
    double dual_obj = 0.0;
    for (int i = 0; i < lp.num_in(); ++i) {
      CHECK(s.row_duals[i] <= 1e-9);  // <=-row duals are nonpositive
      dual_obj += s.row_duals[i] * lp.in_b[i];
    }
    CHECK(s.objective_value == doctest::Approx(dual_obj).epsilon(1e-8));
  }
  CHECK(checked >= 40);
}

TEST_CASE("lp: warm restart matches cold solve after rhs perturbation") {
  auto make = [](double load) {
    LpBuilder b;
    const int x = b.add_variable(3.0, 0.0);
    const int y = b.add_variable(2.0, 0.0);
    const int z = b.add_variable(4.0, 0.0);
    b.add_inequality({x, y}, {-1.0, -1.0}, -load);
    b.add_inequality({y, z}, {-1.0, -1.0}, -(load * 0.5));
    b.add_inequality({x, z}, {-2.0, -1.0}, -(load * 0.25));
    return b.build();
  };
  const LpSolution base = solve_lp(make(4.0));
  REQUIRE(base.status == LpStatus::kOptimal);
  REQUIRE_FALSE(base.basis.empty());

  LpOptions warm_opts;
  warm_opts.warm_basis = &base.basis;
  const LpSolution warm = solve_lp(make(4.2), warm_opts);
  const LpSolution cold = solve_lp(make(4.2));
  REQUIRE(warm.status == LpStatus::kOptimal);
  REQUIRE(cold.status == LpStatus::kOptimal);
  CHECK(warm.objective_value == doctest::Approx(cold.objective_value));
  CHECK(warm.iterations <= cold.iterations);

  // An incompatible warm basis silently falls back to a cold solve.
  std::vector<int> junk{0};
  LpOptions bad;
  bad.warm_basis = &junk;
  const LpSolution fallback = solve_lp(make(4.2), bad);
  REQUIRE(fallback.status == LpStatus::kOptimal);
  CHECK(fallback.objective_value == doctest::Approx(cold.objective_value));
}

TEST_CASE("lp: warm restart detects newly infeasible rhs") {
  auto make = [](double cap) {
    LpBuilder b;
    const int x = b.add_variable(1.0, 0.0, 1.0);
    const int y = b.add_variable(1.0, 0.0, 1.0);
    b.add_inequality({x, y}, {-1.0, -1.0}, -cap);  // x + y >= cap
    return b.build();
  };
  const LpSolution base = solve_lp(make(1.0));
  REQUIRE(base.status == LpStatus::kOptimal);
  LpOptions warm_opts;
  warm_opts.warm_basis = &base.basis;
  CHECK(solve_lp(make(3.0), warm_opts).status == LpStatus::kInfeasible);
}

TEST_CASE("lp: programs without constraint rows") {
  SUBCASE("bounded minimum at the box corner") {
    LpBuilder b;
    b.add_variable(1.0, -2.0);
    b.add_variable(-1.0, -kInf, 3.5);
    b.add_variable(0.0, 1.0);
    const LpSolution s = solve_lp(b.build());
    REQUIRE(s.status == LpStatus::kOptimal);
    CHECK(s.primal[0] == doctest::Approx(-2.0));
    CHECK(s.primal[1] == doctest::Approx(3.5));
    CHECK(s.primal[2] == doctest::Approx(1.0));
  }
  SUBCASE("unbounded without a finite bound") {
    LpBuilder b;
    b.add_variable(1.0);
    CHECK(solve_lp(b.build()).status == LpStatus::kUnbounded);
  }
}

TEST_CASE("lp: text export is readable") {
  LpBuilder b;
  const int x = b.add_variable(1.0, 0.0);
  b.add_inequality({x}, {2.0}, 3.0);
  const std::string text = zonotube::write_lp_text(b.build(), "probe");
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("probe") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
