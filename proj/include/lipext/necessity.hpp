#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipext/conditions.hpp"
#include "lipext/feasibility.hpp"

namespace lipext {

/// 8 d^2 + 3C + ((8 d^2 + 2C) / gap)^2: above this value no offset isometry
/// aligned against the averaged gap direction can admit an extension that
/// stays within sqrt(delta + C) of v.
double delta_threshold(double diam_a, double c, double gap);

/// Isometric copy u of the m <= 3 points (columns of `points`) such that
/// u(x_1) = v(x_1) + sqrt(delta) w and <u(x_i) - v(x_i), w> = sqrt(delta) for
/// every i. Consequently |u(x) - v(x)|^2 lies in [delta, delta + 4 diam^2].
///
/// Each new point sits on a circle (sphere) of isometric positions; the
/// inner-product constraint picks a point on it in closed form. If the
/// required value falls outside the reachable range the data violates the
/// construction's hypotheses and GeometryInconsistency is thrown.
PointSet construct_offset_isometry(const PointSet& points, const PointSet& v_values, const Vec& w, double delta,
                                   const Tolerances& tol = {});

struct NecessityProbeInput {
  VectorFieldSample sample;
  std::vector<Eigen::Index> base_indices; // x_1..x_m, m <= 3
  Eigen::Index extra_index = 0;           // x_{m+1}
  Vec t;                                  // simplex weights, length m
  double c = 1.0;
  double delta_margin = 0.01;             // delta = threshold * (1 + margin)
};

enum class NecessityVerdict { ViolationConfirmed, NoViolationDetected, Inconclusive };

std::string to_string(NecessityVerdict v);

struct NecessityReport {
  NecessityVerdict verdict = NecessityVerdict::NoViolationDetected;
  double gap = 0.0;          // |dv| - |dx|
  Vec delta_v;               // v(x_{m+1}) - sum t_i v(x_i)
  Vec delta_x;               // x_{m+1} - sum t_i x_i
  double delta_x_norm = 0.0;
  double diam = 0.0;
  double c_used = 0.0;       // max(c, 4 diam^2)
  double threshold = 0.0;
  double delta_used = 0.0;
  Vec w;
  PointSet isometry;         // u(x_1..x_m)
  std::optional<FeasibilityOutcome> extension_outcome;
  std::string diagnostics;
};

/// Builds the aligned offset isometry for a tuple with positive gap and asks
/// whether a 1-Lipschitz value at x_{m+1} within sqrt(delta + C) of
/// v(x_{m+1}) exists. An infeasible system confirms a violation.
NecessityReport necessity_probe(const NecessityProbeInput& in, const Tolerances& tol);

struct AffinityTriple {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  Eigen::Index mid = 0; // x_mid = (x_i + x_j) / 2
};

struct AffinityReport {
  std::vector<double> defects; // |v(x_mid) - (v(x_i) + v(x_j)) / 2|
  ConditionReport pairwise;
  bool consistent = false;     // all defects within feas_tol and pairwise 1-Lipschitz
};

AffinityReport affinity_probe(const VectorFieldSample& s, std::span<const AffinityTriple> triples,
                              const Tolerances& tol);

struct OffsetBoundReport {
  double diam = 0.0;
  double bound = 0.0;        // 8 diam^2 + 3C
  double max_observed = 0.0; // exact max over the simplex of | |sum t_i (u_i - v_i)|^2 - delta |
  double grid_max = 0.0;
  bool holds = false;
};

/// Checks | |sum t_i (u(x_i) - v(x_i))|^2 - delta | <= 8 diam^2 + 3C over the
/// simplex, given the pointwise bound | |u - v|^2 - delta | <= C.
OffsetBoundReport averaged_offset_bound_check(const PointSet& u_values, const PointSet& v_values,
                                              const PointSet& points, double delta, double c);

struct SquareObstruction {
  double c = 0.0;
  // Interval chain for an isometric u with |<u(x) - v(x), w> - delta| <= C
  // and u(a_1) - v(a_1) = delta w: the deviation at a_4 is at least
  // lower_bound and at most upper_bound = C.
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool forbidden_by_chain = false;
  // Numerical search over rigid placements in R^4.
  double search_min_deviation = 0.0;
  bool embedding_found = false;
};

struct SquareDemoReport {
  VectorFieldSample sample; // unit-square vertices into R^3
  ConditionReport lipschitz_check;
  std::vector<double> vertex_hull_distances;
  double hull_distance = 0.0;       // min over vertices of dist to the hull of the others
  AffinityReport affinity;
  double affinity_defect = 0.0;     // diagonal midpoint mismatch
  double forbidden_c_threshold = 0.0;
  double parallelogram_residual = 0.0;
  std::vector<SquareObstruction> obstructions;
};

SquareDemoReport square_demo(const Tolerances& tol, std::vector<double> c_values = {0.1, 0.2});

} // namespace lipext
