#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "lipext/convex_body.hpp"

namespace lipext {

struct BallSet {
  Vec center;
  double radius = 0.0;
};

struct HalfspaceSet {
  Vec normal; // {y : <normal, y> >= offset}
  double offset = 0.0;
};

struct HullSet {
  PointSet generators; // columns
};

using ShiftedSet = ShiftedBody;

using ConstraintSet = std::variant<BallSet, HalfspaceSet, HullSet, ShiftedSet>;

Vec project(const ConstraintSet& set, const Vec& p, const Tolerances& tol);
double distance(const ConstraintSet& set, const Vec& p, const Tolerances& tol);
Eigen::Index dimension(const ConstraintSet& set);

struct ConstraintSystem {
  std::vector<ConstraintSet> sets;
  Eigen::Index dimension = 0;

  void validate() const;
  /// Mean of ball centers and hull generators (each generator counted once);
  /// the origin when the system has neither.
  Vec default_start() const;
  /// max_i dist(p, S_i)
  double residual(const Vec& p, const Tolerances& tol) const;
};

enum class FeasibilityStatus { Feasible, Infeasible, Unknown };

const char* to_string(FeasibilityStatus s);

struct InfeasibilityProbe {
  double residual_lb = 0.0; // max_i dist(witness, S_i) at the probe's fixed point
  double rms_bound = 0.0;   // sqrt(sum_i dist^2 / count) at the witness
  Vec witness;
  long iterations = 0;
  bool converged = false;
};

struct FeasibilityOutcome {
  FeasibilityStatus status = FeasibilityStatus::Unknown;
  Vec point;
  double residual = 0.0;
  long iterations = 0;
  std::optional<InfeasibilityProbe> probe; // attached when Dykstra did not certify
};

/// Dykstra's cyclic best-approximation iteration from `start`. Feasible when
/// the final residual is within feas_tol, otherwise Unknown.
FeasibilityOutcome dykstra_solve(const ConstraintSystem& sys, const Vec& start, const Tolerances& tol);

/// Averaged projections, i.e. gradient descent on sum_i dist(y, S_i)^2.
InfeasibilityProbe infeasibility_probe(const ConstraintSystem& sys, const Vec& start,
                                       const Tolerances& tol);

/// dykstra_solve, then a Gauss-Newton refinement over the nearly active
/// constraints, then infeasibility_probe when both are inconclusive.
/// A converged probe with residual_lb > feas_tol upgrades Unknown to
/// Infeasible.
FeasibilityOutcome solve(const ConstraintSystem& sys, const Vec& start, const Tolerances& tol);
FeasibilityOutcome solve(const ConstraintSystem& sys, const Tolerances& tol);

} // namespace lipext
