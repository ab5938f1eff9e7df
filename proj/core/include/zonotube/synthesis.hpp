#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "zonotube/lp.hpp"
#include "zonotube/maxvol.hpp"
#include "zonotube/sets.hpp"

namespace zonotube {

/// Discrete-time LTI plant  x+ = A x + B u,  y = C x.
struct PlantSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;

  int num_states() const { return static_cast<int>(A.rows()); }
  int num_inputs() const { return static_cast<int>(B.cols()); }
  int num_outputs() const { return static_cast<int>(C.rows()); }

  /// Checks block dimensions and that the pair (A, B) is stabilizable and
  /// (A, C) detectable (eigenvalue rank test at every |eig| >= 1).  Throws
  /// std::invalid_argument.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Shared machinery: containment with an affinely parameterized inner set.

/// One containment block  inner(params) ⊆ outer  where the inner center and
/// generator matrix depend affinely on shared parameters:
///   c_in = c0 + sum_k params[k] * c_coef[k]
///   G_in = G0 + sum_k params[k] * G_coef[k]
/// and F_in/theta_in are fixed.  Used with gain entries as the parameters.
struct AffineContainmentBlock {
  Eigen::VectorXd c0;
  std::vector<Eigen::VectorXd> c_coef;
  Eigen::MatrixXd G0;
  std::vector<Eigen::MatrixXd> G_coef;
  Eigen::MatrixXd F_in;
  Eigen::VectorXd theta_in;
  ConstrainedZonotope outer;
};

struct AffineContainmentResult {
  bool feasible = false;
  Eigen::VectorXd params;
  double objective = 0.0;
  LpStatus status = LpStatus::kSolverFailure;  ///< raw solver verdict
  int iterations = 0;
};

/// Extra objective term  weight * |constant + coeffs' params|  (encoded with
/// one bound variable).  Lets callers penalize affine images of the
/// parameters, e.g. the entries of a closed-loop map.
struct AbsObjectiveTerm {
  double constant = 0.0;
  Eigen::VectorXd coeffs;
  double weight = 1.0;
};

/// Optional max-group penalty: one shared bound variable sits above the
/// parameter mass of every listed group and its weight joins the objective.
/// With the rows of a gain as the groups this spreads mass evenly across
/// otherwise equivalent solutions — the min-mass optimum is typically a
/// whole face, and an arbitrary vertex of it can load one actuator row so
/// heavily that later constraint tightening empties the input set.
struct BalancePenalty {
  std::vector<std::vector<int>> groups;
  double weight = 0.0;
};

/// One LP over all blocks (shared parameters; per-block certificates).  The
/// objective is the total certificate mass plus gain_penalty * |params|_1
/// plus the extra terms; the penalty keeps gains small instead of letting the
/// mass-only objective drift toward aggressive near-deadbeat solutions.
AffineContainmentResult solve_affine_containment(
    const std::vector<AffineContainmentBlock>& blocks, int num_params,
    double gain_penalty = 1.0, double budget_tol = 1e-9,
    const std::vector<AbsObjectiveTerm>& extra_terms = {},
    const BalancePenalty& balance = {});

// ---------------------------------------------------------------------------
// Observer and feedback gain synthesis.

struct GainSynthesisOptions {
  double contraction = 0.95;   ///< lambda of the contracted outer set
  double gain_penalty = 1.0;   ///< weight on the gain entry mass
  /// Weight on the largest per-row gain mass (feedback synthesis only);
  /// breaks ties between equal-mass gains toward balanced actuator use.
  double row_balance_weight = 1.0;
  double snap_tol = 1e-9;      ///< |entry| below this snaps to exact zero
};

struct GainSynthesisResult {
  bool feasible = false;
  Eigen::MatrixXd gain;
  double objective = 0.0;
};

/// Observer gain L with invariance of the estimation-error set:
///   (A - L C) Ze  ⊕  (-L) Zv  [⊕ Zw]  ⊆  contract(Ze, lambda).
/// process_noise may be null.  Small entries are snapped to zero and the
/// snapped gain re-certified; snapping is rolled back when the re-check fails.
GainSynthesisResult synthesize_observer_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const ConstrainedZonotope* process_noise,
                                             const GainSynthesisOptions& options);

/// Fixed-gain re-check of the observer invariance; returns the certificate.
ContainmentCertificate certify_observer_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const ConstrainedZonotope* process_noise,
                                             const Eigen::MatrixXd& L, double lambda);

/// Deviation feedback gain K with invariance of the deviation set:
///   (A + B K) Zd  ⊕  (L C) Ze  ⊕  L Zv  ⊆  contract(Zd, lambda).
GainSynthesisResult synthesize_feedback_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& deviation_set,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const Eigen::MatrixXd& L,
                                             const GainSynthesisOptions& options);

ContainmentCertificate certify_feedback_gain(const PlantSpec& plant,
                                             const ConstrainedZonotope& deviation_set,
                                             const ConstrainedZonotope& error_set,
                                             const ConstrainedZonotope& measurement_noise,
                                             const Eigen::MatrixXd& K,
                                             const Eigen::MatrixXd& L, double lambda);

/// Smallest contraction in (lo, hi] accepted by `feasible_at`, located by
/// bisection to within `tol`; returns hi when only hi is feasible and NaN
/// when even hi fails.  `feasible_at` must be monotone (easier at larger
/// contraction values).
double search_contraction(const std::function<bool(double)>& feasible_at,
                          double lo = 0.0, double hi = 1.0, double tol = 1e-3);

// ---------------------------------------------------------------------------
// Constraint tightening.

struct TightenedSets {
  HPolytope state_hrep;        ///< nominal-state rows
  ConstrainedZonotope state;   ///< same set, lifted
  HPolytope input_hrep;        ///< nominal-input rows
  ConstrainedZonotope input;
};

/// Nominal-set tightening:
///   state: S_x  ⊖ (Zd ⊕ Ze)     input: S_u ⊖ K Zd.
/// Throws InfeasibleSynthesis when a tightened set is empty.
TightenedSets tighten_constraints(const HPolytope& state_set, const HPolytope& input_set,
                                  const ConstrainedZonotope& deviation_set,
                                  const ConstrainedZonotope& error_set,
                                  const Eigen::MatrixXd& K);

// ---------------------------------------------------------------------------
// Polar machinery (terminal gain synthesis).

/// Polar { y : y'x <= 1 for all x in Z } of a plain zonotope, assembled by
/// sign enumeration of the generators (2^ng rows, guarded) and lifted back to
/// constrained-zonotope form.
ConstrainedZonotope polar_of_zonotope(const ConstrainedZonotope& z, int max_generators = 10);

/// Polar of a bounded polytope with 0 in its interior: the convex hull of the
/// scaled rows Q_i / q_i in constrained-zonotope form.
ConstrainedZonotope polar_of_hrep(const HPolytope& p);

/// Unit balls of the gauge costs: stage cost g(state_cost, x) +
/// g(input_cost, u), terminal cost g(terminal_cost, x).  All proper C-sets
/// (bounded, 0 in the interior).
struct CostSets {
  ConstrainedZonotope terminal_cost;
  ConstrainedZonotope state_cost;
  ConstrainedZonotope input_cost;
};

/// Polar of a proper C-set in constrained-zonotope form (via its H-rep).
ConstrainedZonotope polar_of_set(const ConstrainedZonotope& z);

/// Terminal feedback K_f from the polar cost containment
///   (A + B K_f)' P° ⊕ Q° ⊕ K_f' R° ⊆ P°
/// (P/Q/R the terminal/state/input cost balls), which makes the decrease
/// condition  g(P, (A+BK_f)x) + g(Q, x) + g(R, K_f x) <= g(P, x)  hold for
/// every x.  The entry mass of A + B K_f is minimized among feasible gains.
/// Throws InfeasibleSynthesis.
Eigen::MatrixXd synthesize_terminal_gain(const PlantSpec& plant, const CostSets& costs);

/// Fixed-gain re-check of the polar cost containment for K_f.
ContainmentCertificate certify_terminal_gain(const PlantSpec& plant, const CostSets& costs,
                                             const Eigen::MatrixXd& K_f);

// ---------------------------------------------------------------------------
// Terminal ingredients bundle.

struct TerminalSynthesisOptions {
  double lambda_f = 0.95;      ///< ellipsoid contraction factor
  double lmi_margin = -1e-8;   ///< accepted minimum eigenvalue
};

struct TerminalIngredients {
  Eigen::MatrixXd K_f;       ///< terminal feedback (u = K_f x)
  Eigen::MatrixXd A_f;       ///< A + B K_f
  Eigen::MatrixXd P;         ///< ellipsoid shape matrix
  ConstrainedZonotope set;   ///< terminal constraint set (inscribed zonotope)
  LmiMargins margins;
};

/// Full terminal pipeline: K_f from the polar cost containment, the ellipsoid
/// shape P from the max-volume program under the row caps of the tightened
/// sets, and the inscribed zonotope as the terminal constraint set.  Throws
/// InfeasibleSynthesis when any stage fails.
TerminalIngredients synthesize_terminal(const PlantSpec& plant, const TightenedSets& tightened,
                                        const CostSets& costs,
                                        const TerminalSynthesisOptions& options);

/// Snap |entries| below tol to exact zero (flat channels stay exactly flat).
Eigen::MatrixXd snap_entries(const Eigen::MatrixXd& m, double tol = 1e-9);

}  // namespace zonotube
