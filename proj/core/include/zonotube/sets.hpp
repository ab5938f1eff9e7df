#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "zonotube/lp.hpp"

namespace zonotube {

/// Constrained zonotope  Z = { c + G a : |a|_inf <= 1, F a = theta }.
///
/// The plain zonotope case is F and theta empty.  Generators may be rank
/// deficient (flat sets are first-class citizens: several shipped models keep
/// a state channel exactly degenerate).
struct ConstrainedZonotope {
  Eigen::VectorXd c;      ///< center, size n
  Eigen::MatrixXd G;      ///< generator matrix, n x ng
  Eigen::MatrixXd F;      ///< constraint matrix, nc x ng
  Eigen::VectorXd theta;  ///< constraint offset, size nc

  int dim() const { return static_cast<int>(c.size()); }
  int num_generators() const { return static_cast<int>(G.cols()); }
  int num_constraints() const { return static_cast<int>(F.rows()); }
  bool is_zonotope() const { return F.rows() == 0; }

  /// Throws std::invalid_argument when the block dimensions disagree.
  void validate() const;

  /// Axis-aligned box: center +- half_widths (entries may be zero).
  static ConstrainedZonotope box(const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& half_widths);
  /// Plain zonotope <c, G>.
  static ConstrainedZonotope zonotope(const Eigen::VectorXd& c,
                                      const Eigen::MatrixXd& G);
  /// Singleton {c}.
  static ConstrainedZonotope point(const Eigen::VectorXd& c);
};

/// Halfspace intersection { x : Q x <= q }.
struct HPolytope {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  int dim() const { return static_cast<int>(Q.cols()); }
  int num_rows() const { return static_cast<int>(Q.rows()); }
};

// ---------------------------------------------------------------------------
// Exact set arithmetic.

/// Minkowski sum (generator concatenation, block-diagonal constraints).
ConstrainedZonotope minkowski_sum(const ConstrainedZonotope& a,
                                  const ConstrainedZonotope& b);

/// Image M Z (maps center and generators).
ConstrainedZonotope linear_map(const Eigen::MatrixXd& M, const ConstrainedZonotope& z);

/// Z + v.
ConstrainedZonotope translate(const ConstrainedZonotope& z, const Eigen::VectorXd& v);

/// The set s Z = { s x : x in Z } (scales center and generators).
ConstrainedZonotope scaled(const ConstrainedZonotope& z, double s);

/// Contraction about the center: generators scale by lambda, the center and
/// the constraint data stay put.
ConstrainedZonotope contract(const ConstrainedZonotope& z, double lambda);

/// Cartesian product (block stacking).
ConstrainedZonotope cartesian_product(const ConstrainedZonotope& a,
                                      const ConstrainedZonotope& b);

// ---------------------------------------------------------------------------
// Scalar probes (each solves one small LP).

/// Support value  h_Z(d) = max { d'x : x in Z }.  Throws on an empty set.
double support(const ConstrainedZonotope& z, const Eigen::VectorXd& dir);

/// Minkowski gauge  g_Z(x) = min { t >= 0 : x in t Z }  where t Z scales the
/// whole set (center included).  Returns +inf when no scaling captures x.
/// Finite and positively homogeneous whenever Z contains the origin.
double gauge(const ConstrainedZonotope& z, const Eigen::VectorXd& x);

/// Smallest s with  x = c + G a, F a = theta, |a|_inf <= s; +inf when x is
/// outside the affine hull.  Membership in Z is s <= 1 (+ tolerance).
double membership_scale(const ConstrainedZonotope& z, const Eigen::VectorXd& x);

/// Membership probe with additive tolerance on the generator box.
bool contains_point(const ConstrainedZonotope& z, const Eigen::VectorXd& x,
                    double tol = 1e-7);

/// True when { a : F a = theta, |a|_inf <= 1 } has no point (tolerance on the
/// box radius).
bool is_empty(const ConstrainedZonotope& z, double tol = 1e-7);

/// Per-axis interval hull [lo, hi] via support probes.  Throws on empty sets.
void interval_hull(const ConstrainedZonotope& z, Eigen::VectorXd* lo,
                   Eigen::VectorXd* hi);

// ---------------------------------------------------------------------------
// Halfspace conversions.

/// Exact projection to halfspace form by Fourier–Motzkin elimination of the
/// generator variables, with LP-based pruning of redundant rows.  Guarded by
/// max_generators (the row count is worst-case exponential in it).
HPolytope to_hrep(const ConstrainedZonotope& z, int max_generators = 12);

/// Lift a bounded nonempty polytope to constrained-zonotope form (bounding
/// box plus one slack generator per row).  Throws std::runtime_error when the
/// polytope is empty or unbounded.
ConstrainedZonotope from_hrep(const HPolytope& p);

/// Support-tightened rows: { x : Q x <= q - h_S(Q_i') }.  The result is the
/// erosion (Pontryagin difference) P - S when P is the halfspace set.
HPolytope erode(const HPolytope& p, const ConstrainedZonotope& subtrahend);

/// Pontryagin difference minuend - subtrahend through halfspace form.
/// Throws std::runtime_error when the difference is empty.
ConstrainedZonotope pontryagin_difference(const ConstrainedZonotope& minuend,
                                          const ConstrainedZonotope& subtrahend,
                                          int max_generators = 12);

// ---------------------------------------------------------------------------
// Containment.

/// Linear containment certificate for  inner ⊆ outer:
///   G_in = G_out Pi,   H F_in = F_out Pi,
///   H theta_in = theta_out + F_out gamma,
///   c_out - c_in = G_out gamma,   rowsum |Pi| + |gamma| <= 1.
/// The test is sufficient: `contained == true` is a proof, `false` only means
/// no certificate of this linear form exists.
struct ContainmentCertificate {
  bool contained = false;
  Eigen::MatrixXd Pi;     // ng_out x ng_in
  Eigen::MatrixXd H;      // nc_out x nc_in
  Eigen::VectorXd gamma;  // ng_out
  double budget_slack = 0.0;  // min over rows of 1 - (|Pi| 1 + |gamma|)_i
};

ContainmentCertificate check_containment(const ConstrainedZonotope& inner,
                                         const ConstrainedZonotope& outer,
                                         double tol = 1e-9);

// ---------------------------------------------------------------------------
// Vertex enumeration (low dimension; used by oracles, plots, and reports).

/// All vertices of a bounded polytope, deduplicated and lexicographically
/// sorted.  Guarded to dim <= 3.
std::vector<Eigen::VectorXd> enumerate_vertices(const HPolytope& p, double tol = 1e-7);

/// Vertices of a constrained zonotope via its halfspace form.  dim <= 3.
std::vector<Eigen::VectorXd> enumerate_vertices(const ConstrainedZonotope& z,
                                                double tol = 1e-7);

}  // namespace zonotube
