#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "zonotube/sets.hpp"

using zonotube::check_containment;
using zonotube::ConstrainedZonotope;
using zonotube::contains_point;
using zonotube::contract;
using zonotube::enumerate_vertices;
using zonotube::erode;
using zonotube::from_hrep;
using zonotube::gauge;
using zonotube::HPolytope;
using zonotube::interval_hull;
using zonotube::is_empty;
using zonotube::linear_map;
using zonotube::membership_scale;
using zonotube::minkowski_sum;
using zonotube::pontryagin_difference;
using zonotube::support;
using zonotube::to_hrep;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

Eigen::VectorXd random_dir(std::mt19937& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = gauss(rng);
  const double norm = d.norm();
  return norm > 1e-12 ? Eigen::VectorXd(d / norm) : Eigen::VectorXd::Unit(n, 0);
}

ConstrainedZonotope random_zonotope(std::mt19937& rng, int n, int ng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd c(n);
  Eigen::MatrixXd G(n, ng);
  for (int i = 0; i < n; ++i) c[i] = u(rng);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ng; ++j) G(i, j) = u(rng);
  }
  return ConstrainedZonotope::zonotope(c, G);
}

// Random constrained zonotope guaranteed nonempty (theta = F * feasible alpha).
ConstrainedZonotope random_czonotope(std::mt19937& rng, int n, int ng, int nc) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ConstrainedZonotope z = random_zonotope(rng, n, ng);
  Eigen::MatrixXd F(nc, ng);
  Eigen::VectorXd alpha(ng);
  for (int j = 0; j < ng; ++j) alpha[j] = 0.5 * u(rng);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < ng; ++j) F(i, j) = u(rng);
  }
  z.F = F;
  z.theta = F * alpha;
  return z;
}

double box_support(const Eigen::VectorXd& c, const Eigen::VectorXd& r,
                   const Eigen::VectorXd& d) {
  return d.dot(c) + d.cwiseAbs().dot(r);
}

}  // namespace

TEST_CASE("sets: constructors and validation") {
  const ConstrainedZonotope b = ConstrainedZonotope::box(vec2(1.0, -1.0), vec2(2.0, 0.5));
  CHECK(b.dim() == 2);
  CHECK(b.num_generators() == 2);
  CHECK(b.is_zonotope());
  b.validate();

  ConstrainedZonotope bad = b;
  bad.theta.resize(1);
  bad.theta << 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const ConstrainedZonotope pt = ConstrainedZonotope::point(vec3(1, 2, 3));
  CHECK(pt.num_generators() == 0);
  pt.validate();
}

TEST_CASE("sets: box support matches the closed form") {
  std::mt19937 rng(11);
  const Eigen::VectorXd c = vec3(0.3, -0.7, 2.0);
  const Eigen::VectorXd r = vec3(1.5, 0.0, 0.25);  // one flat axis
  const ConstrainedZonotope z = ConstrainedZonotope::box(c, r);
  for (int t = 0; t < 25; ++t) {
    const Eigen::VectorXd d = random_dir(rng, 3);
    CHECK(support(z, d) == doctest::Approx(box_support(c, r, d)).epsilon(1e-9));
  }
}

TEST_CASE("sets: support is additive under Minkowski sum") {
  std::mt19937 rng(12);
  for (int t = 0; t < 10; ++t) {
    const ConstrainedZonotope a = random_czonotope(rng, 2, 4, 1);
    const ConstrainedZonotope b = random_zonotope(rng, 2, 3);
    const ConstrainedZonotope s = minkowski_sum(a, b);
    CHECK(s.num_generators() == 7);
    CHECK(s.num_constraints() == 1);
    for (int k = 0; k < 8; ++k) {
      const Eigen::VectorXd d = random_dir(rng, 2);
      CHECK(support(s, d) ==
            doctest::Approx(support(a, d) + support(b, d)).epsilon(1e-8));
    }
  }
}

TEST_CASE("sets: linear map support adjoint identity") {
  std::mt19937 rng(13);
  Eigen::MatrixXd M(2, 3);
  M << 1.0, 0.5, -0.25, 0.0, 2.0, 1.0;
  for (int t = 0; t < 8; ++t) {
    const ConstrainedZonotope z = random_czonotope(rng, 3, 5, 2);
    const ConstrainedZonotope mz = linear_map(M, z);
    for (int k = 0; k < 8; ++k) {
      const Eigen::VectorXd d = random_dir(rng, 2);
      CHECK(support(mz, d) ==
            doctest::Approx(support(z, M.transpose() * d)).epsilon(1e-8));
    }
  }
}

TEST_CASE("sets: contraction scales the centered support gap") {
  std::mt19937 rng(14);
  const double lambda = 0.65;
  for (int t = 0; t < 6; ++t) {
    const ConstrainedZonotope z = random_czonotope(rng, 2, 4, 1);
    const ConstrainedZonotope zc = contract(z, lambda);
    CHECK(zc.c == z.c);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_dir(rng, 2);
      const double gap = support(z, d) - d.dot(z.c);
      CHECK(support(zc, d) == doctest::Approx(d.dot(z.c) + lambda * gap).epsilon(1e-8));
    }
  }
}

TEST_CASE("sets: gauge closed forms") {
  SUBCASE("invertible generator matrix without constraints") {
    std::mt19937 rng(15);
    Eigen::MatrixXd G(2, 2);
    G << 1.0, 1.0, 1.0, -1.0;
    const ConstrainedZonotope z =
        ConstrainedZonotope::zonotope(Eigen::VectorXd::Zero(2), G);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = vec2(u(rng), u(rng));
      const double expected = (G.inverse() * x).cwiseAbs().maxCoeff();
      CHECK(gauge(z, x) == doctest::Approx(expected).epsilon(1e-8));
    }
  }
  SUBCASE("positive homogeneity") {
    std::mt19937 rng(16);
    const ConstrainedZonotope z = random_czonotope(rng, 2, 4, 1);
    ConstrainedZonotope centered = z;
    centered.c.setZero();
    const Eigen::VectorXd x = vec2(0.4, -0.2);
    const double g1 = gauge(centered, x);
    const double g3 = gauge(centered, 3.0 * x);
    if (std::isfinite(g1)) CHECK(g3 == doctest::Approx(3.0 * g1).epsilon(1e-7));
  }
  SUBCASE("off-center set scales as a whole") {
    Eigen::VectorXd c(1), r(1);
    c << 2.0;
    r << 1.0;
    const ConstrainedZonotope z = ConstrainedZonotope::box(c, r);
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(gauge(z, x) == doctest::Approx(1.0));
    x << 1.0;
    CHECK(gauge(z, x) == doctest::Approx(1.0 / 3.0));
    x << 0.0;
    CHECK(gauge(z, x) == doctest::Approx(0.0));
  }
}

TEST_CASE("sets: membership scale and point containment") {
  const ConstrainedZonotope z = ConstrainedZonotope::box(vec2(1.0, 0.0), vec2(2.0, 0.0));
  CHECK(membership_scale(z, vec2(2.0, 0.0)) == doctest::Approx(0.5));
  CHECK(contains_point(z, vec2(3.0, 0.0)));
  CHECK_FALSE(contains_point(z, vec2(3.1, 0.0)));
  // Off the flat axis: outside the affine hull.
  CHECK(membership_scale(z, vec2(1.0, 0.1)) ==
        std::numeric_limits<double>::infinity());

  // Constrained segment: unit box sliced by a1 + a2 = 1.
  ConstrainedZonotope seg = ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1));
  seg.F.resize(1, 2);
  seg.F << 1.0, 1.0;
  seg.theta.resize(1);
  seg.theta << 1.0;
  CHECK(contains_point(seg, vec2(0.5, 0.5)));
  CHECK(contains_point(seg, vec2(1.0, 0.0)));
  CHECK_FALSE(contains_point(seg, vec2(0.4, 0.5)));
}

TEST_CASE("sets: emptiness probes") {
  CHECK_FALSE(is_empty(ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1))));

  ConstrainedZonotope z = ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1));
  z.F.resize(1, 2);
  z.F << 1.0, 1.0;
  z.theta.resize(1);
  z.theta << 3.0;  // unreachable within the unit box
  CHECK(is_empty(z));

  z.F << 0.0, 0.0;
  z.theta << 1.0;  // 0 = 1
  CHECK(is_empty(z));

  z.theta << 0.0;
  CHECK_FALSE(is_empty(z));
}

TEST_CASE("sets: interval hull") {
  const ConstrainedZonotope z = ConstrainedZonotope::box(vec2(1.0, -2.0), vec2(0.5, 3.0));
  Eigen::VectorXd lo, hi;
  interval_hull(z, &lo, &hi);
  CHECK(lo[0] == doctest::Approx(0.5));
  CHECK(hi[0] == doctest::Approx(1.5));
  CHECK(lo[1] == doctest::Approx(-5.0));
  CHECK(hi[1] == doctest::Approx(1.0));
}

TEST_CASE("sets: halfspace conversion preserves the support function") {
  std::mt19937 rng(17);
  auto check_hrep = [&](const ConstrainedZonotope& z, int dirs) {
    const HPolytope p = to_hrep(z);
    // Every halfspace evaluation of a member stays inside.
    for (int t = 0; t < dirs; ++t) {
      const Eigen::VectorXd d = random_dir(rng, z.dim());
      // Support of the polytope via LP over its rows.
      zonotube::LpBuilder b;
      b.add_variables(z.dim(), 0.0);
      std::vector<int> all(static_cast<size_t>(z.dim()));
      for (int j = 0; j < z.dim(); ++j) {
        all[static_cast<size_t>(j)] = j;
        b.set_cost(j, -d[j]);
      }
      for (int i = 0; i < p.num_rows(); ++i) {
        const Eigen::RowVectorXd row = p.Q.row(i);
        b.add_inequality(all, std::vector<double>(row.data(), row.data() + z.dim()),
                         p.q[i]);
      }
      const zonotube::LpSolution s = zonotube::solve_lp(b.build());
      REQUIRE(s.status == zonotube::LpStatus::kOptimal);
      CHECK(-s.objective_value == doctest::Approx(support(z, d)).epsilon(2e-7).scale(1.0));
    }
  };

  check_hrep(ConstrainedZonotope::box(vec2(0.5, -0.5), vec2(1.0, 2.0)), 12);
  check_hrep(random_zonotope(rng, 2, 3), 16);
  check_hrep(random_czonotope(rng, 2, 4, 1), 16);
  check_hrep(ConstrainedZonotope::box(vec3(0, 0, 0), vec3(1, 2, 0)), 10);  // flat 3D
}

TEST_CASE("sets: halfspace lift round trip") {
  std::mt19937 rng(18);
  auto round_trip = [&](const ConstrainedZonotope& z) {
    const ConstrainedZonotope back = from_hrep(to_hrep(z));
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd d = random_dir(rng, z.dim());
      CHECK(support(back, d) == doctest::Approx(support(z, d)).epsilon(5e-7).scale(1.0));
    }
  };
  round_trip(ConstrainedZonotope::box(vec2(1.0, 2.0), vec2(0.5, 1.5)));
  round_trip(random_zonotope(rng, 2, 4));
  round_trip(random_czonotope(rng, 3, 4, 1));
}

TEST_CASE("sets: from_hrep rejects empty and unbounded input") {
  HPolytope empty;
  empty.Q.resize(2, 1);
  empty.Q << 1.0, -1.0;
  empty.q.resize(2);
  empty.q << -1.0, -1.0;  // x <= -1 and x >= 1
  CHECK_THROWS_AS(from_hrep(empty), std::runtime_error);

  HPolytope half;
  half.Q.resize(1, 2);
  half.Q << 1.0, 0.0;
  half.q.resize(1);
  half.q << 1.0;
  CHECK_THROWS_AS(from_hrep(half), std::runtime_error);
}

TEST_CASE("sets: vertex enumeration") {
  SUBCASE("square") {
    const auto verts = enumerate_vertices(ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1)));
    REQUIRE(verts.size() == 4);
    CHECK(verts.front() == vec2(-1, -1));
    CHECK(verts.back() == vec2(1, 1));
  }
  SUBCASE("octagon from square plus diamond") {
    Eigen::MatrixXd Gd(2, 2);
    Gd << 0.5, 0.5, 0.5, -0.5;
    const ConstrainedZonotope oct = minkowski_sum(
        ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1)),
        ConstrainedZonotope::zonotope(Eigen::VectorXd::Zero(2), Gd));
    CHECK(enumerate_vertices(oct).size() == 8);
  }
  SUBCASE("3d box") {
    const auto verts =
        enumerate_vertices(ConstrainedZonotope::box(vec3(0, 0, 0), vec3(1, 2, 3)));
    CHECK(verts.size() == 8);
  }
  SUBCASE("constrained segment") {
    ConstrainedZonotope seg = ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1));
    seg.F.resize(1, 2);
    seg.F << 1.0, 1.0;
    seg.theta.resize(1);
    seg.theta << 1.0;
    const auto verts = enumerate_vertices(seg);
    REQUIRE(verts.size() == 2);
    CHECK((verts[0] - vec2(0, 1)).norm() == doctest::Approx(0.0).epsilon(1e-6));
    CHECK((verts[1] - vec2(1, 0)).norm() == doctest::Approx(0.0).epsilon(1e-6));
  }
}

TEST_CASE("sets: erosion and Pontryagin difference") {
  SUBCASE("box minus box is the shrunk box") {
    std::mt19937 rng(19);
    const ConstrainedZonotope diff = pontryagin_difference(
        ConstrainedZonotope::box(vec2(0, 0), vec2(2, 3)),
        ConstrainedZonotope::box(vec2(0.1, -0.1), vec2(0.5, 1.0)));
    for (int t = 0; t < 16; ++t) {
      const Eigen::VectorXd d = random_dir(rng, 2);
      const double expected = box_support(vec2(-0.1, 0.1), vec2(1.5, 2.0), d);
      CHECK(support(diff, d) == doctest::Approx(expected).epsilon(1e-7));
    }
  }
  SUBCASE("difference vertex plus subtrahend vertex stays in the minuend") {
    std::mt19937 rng(20);
    const ConstrainedZonotope minuend = random_zonotope(rng, 2, 4);
    const ConstrainedZonotope sub =
        zonotube::scaled(random_zonotope(rng, 2, 2), 0.2);
    const HPolytope er = erode(to_hrep(minuend), sub);
    int checked = 0;
    for (const Eigen::VectorXd& v : enumerate_vertices(er)) {
      for (const Eigen::VectorXd& sv : enumerate_vertices(sub)) {
        CHECK(contains_point(minuend, v + sv, 1e-6));
        ++checked;
      }
    }
    CHECK(checked >= 8);
  }
  SUBCASE("oversized subtrahend empties the difference") {
    CHECK_THROWS_AS(
        pontryagin_difference(ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1)),
                              ConstrainedZonotope::box(vec2(0, 0), vec2(2, 2))),
        std::runtime_error);
  }
}

TEST_CASE("sets: containment certificates are sound") {
  std::mt19937 rng(21);
  int positives = 0;
  for (int t = 0; t < 30; ++t) {
    const ConstrainedZonotope inner =
        zonotube::scaled(random_czonotope(rng, 2, 3, 1), 0.35);
    const ConstrainedZonotope outer = random_zonotope(rng, 2, 4);
    const auto cert = check_containment(inner, outer);
    if (!cert.contained) continue;
    ++positives;
    for (int k = 0; k < 40; ++k) {
      const Eigen::VectorXd d = random_dir(rng, 2);
      CHECK(support(inner, d) <= support(outer, d) + 1e-6);
    }
  }
  INFO("certified cases: ", positives);
  CHECK(positives >= 3);  // the sweep must exercise the positive branch
}

TEST_CASE("sets: containment certificates on known pairs") {
  const ConstrainedZonotope unit = ConstrainedZonotope::box(vec2(0, 0), vec2(1, 1));
  const ConstrainedZonotope bigger = ConstrainedZonotope::box(vec2(0, 0), vec2(1.05, 1.05));
  Eigen::MatrixXd Gd(2, 2);
  Gd << 0.5, 0.5, 0.5, -0.5;
  const ConstrainedZonotope diamond =
      ConstrainedZonotope::zonotope(Eigen::VectorXd::Zero(2), Gd);

  CHECK(check_containment(unit, bigger).contained);
  CHECK(check_containment(bigger, unit).contained == false);
  CHECK(check_containment(diamond, unit).contained);
  CHECK_FALSE(check_containment(unit, diamond).contained);

  // Shifted but still inside.
  const ConstrainedZonotope small_shifted =
      ConstrainedZonotope::box(vec2(0.4, -0.4), vec2(0.5, 0.5));
  const auto cert = check_containment(small_shifted, unit);
  CHECK(cert.contained);
  CHECK(cert.budget_slack >= -1e-9);

  // Invariance-style check: 0.5 Z ⊕ w ⊆ 0.85 Z for the unit box and w small.
  const ConstrainedZonotope lhs = minkowski_sum(
      zonotube::scaled(unit, 0.5), ConstrainedZonotope::box(vec2(0, 0), vec2(0.3, 0.3)));
  CHECK(check_containment(lhs, zonotube::scaled(unit, 0.85)).contained);
  CHECK_FALSE(check_containment(lhs, zonotube::scaled(unit, 0.75)).contained);
}
