#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lipext/conditions.hpp"
#include "lipext/convex_body.hpp"
#include "lipext/feasibility.hpp"

namespace lipext {

enum class ExtensionMode { Lipschitz, Monotone, Strain };

std::string to_string(ExtensionMode mode);

/// Extend u from A (a_mask) to every sample point while keeping the offset
/// u(x) - v(x) inside the body K.
struct ExtensionProblem {
  VectorFieldSample sample;
  std::vector<bool> a_mask;
  PointSet u_partial; // value_dim x N; columns outside A are ignored
  ConvexBody body = ConvexBody::whole_space(1);
  ExtensionMode mode = ExtensionMode::Lipschitz;

  std::vector<Eigen::Index> a_indices() const;
  /// sup over A of |u - v|
  double sup_offset_on_a() const;
  /// Shapes, K-membership of the offsets on A, and the pairwise mode
  /// inequality on A.
  void validate(const Tolerances& tol) const;
};

struct OrderStrategy {
  enum class Kind { InputOrder, NearestToProcessedFirst, FarthestToProcessedFirst, Seeded };
  Kind kind = Kind::NearestToProcessedFirst;
  std::uint64_t seed = 0;

  static OrderStrategy input() { return {Kind::InputOrder, 0}; }
  static OrderStrategy nearest() { return {Kind::NearestToProcessedFirst, 0}; }
  static OrderStrategy farthest() { return {Kind::FarthestToProcessedFirst, 0}; }
  static OrderStrategy seeded(std::uint64_t seed) { return {Kind::Seeded, seed}; }
};

std::string to_string(const OrderStrategy& order);

/// Order in which the points outside A are processed.
std::vector<Eigen::Index> processing_order(const PointSet& domain, const std::vector<bool>& a_mask,
                                           const OrderStrategy& order);

struct PointLogEntry {
  Eigen::Index index = 0;
  FeasibilityOutcome outcome;
  Vec hull_weights; // offset as a convex combination of the offsets on A
};

struct ExtensionResult {
  PointSet u_full;
  std::vector<PointLogEntry> per_point_log;
  double sup_dist_a = 0.0;
  double sup_dist_x = 0.0;
};

/// Raised when a per-point feasibility problem could not be solved. Under the
/// averaged condition on v this does not happen, so the payload points at the
/// matching condition check.
class FeasibilityFailed : public Error {
public:
  FeasibilityFailed(Eigen::Index index, FeasibilityOutcome outcome, ExtensionResult partial,
                    const std::string& hint);

  Eigen::Index index() const { return index_; }
  const FeasibilityOutcome& outcome() const { return outcome_; }
  const ExtensionResult& partial() const { return partial_; }

private:
  Eigen::Index index_;
  FeasibilityOutcome outcome_;
  ExtensionResult partial_;
};

ExtensionResult extend_lipschitz(const ExtensionProblem& p, const OrderStrategy& order,
                                 const Tolerances& tol);
ExtensionResult extend_monotone(const ExtensionProblem& p, const OrderStrategy& order,
                                const Tolerances& tol);
ExtensionResult extend_strain(const ExtensionProblem& p, const OrderStrategy& order,
                              const Tolerances& tol);
/// Dispatch on p.mode.
ExtensionResult extend(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol);

/// Classical 1-Lipschitz extension: v = 0 and K = Ball(0, sup_A |u|), so all
/// values stay in Conv u(A).
ExtensionResult kirszbraun_extend(const PointSet& domain, const std::vector<bool>& a_mask,
                                  const PointSet& u_partial, const OrderStrategy& order,
                                  const Tolerances& tol);

struct PairFinding {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double residual = 0.0;
};

struct VerificationReport {
  ExtensionMode mode = ExtensionMode::Lipschitz;
  double max_a_deviation = 0.0;     // max |u_full - u_partial| on A
  double max_pair_residual = 0.0;   // positive = mode inequality violated
  std::vector<PairFinding> violating_pairs;
  double max_body_distance = 0.0;   // distance of the worst offset outside K
  std::vector<Eigen::Index> offsets_outside_body;
  double sup_dist_a = 0.0;
  double sup_dist_x = 0.0;
  bool ball_body = false;
  double ball_radius = 0.0;
  bool uniform_bound_holds = true;  // sup_X |u - v| <= radius + feas_tol for ball K

  bool passed() const {
    return max_a_deviation == 0.0 && violating_pairs.empty() && offsets_outside_body.empty() &&
           uniform_bound_holds;
  }
};

/// Pairwise residual of the mode inequality:
///   Lipschitz |du| - |dx|, Monotone -<du, dx>, Strain <du, dx> - |dx|^2.
double pair_residual(ExtensionMode mode, const Vec& dx, const Vec& du);

/// Exhaustive re-check of an extension; all findings are listed.
VerificationReport verify_extension(const ExtensionResult& result, const ExtensionProblem& problem,
                                    const Tolerances& tol);

} // namespace lipext
