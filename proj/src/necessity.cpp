#include "lipext/necessity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipext {

std::string to_string(NecessityVerdict v) {
  switch (v) {
  case NecessityVerdict::ViolationConfirmed:
    return "violation_confirmed";
  case NecessityVerdict::NoViolationDetected:
    return "no_violation_detected";
  case NecessityVerdict::Inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

double delta_threshold(double diam_a, double c, double gap) {
  if (!(diam_a >= 0.0) || !(c > 0.0))
    throw PreconditionError("delta_threshold: need diam >= 0 and C > 0");
  if (!(gap > 0.0))
    throw PreconditionError("delta_threshold: gap must be positive");
  const double d2 = diam_a * diam_a;
  const double ratio = (8.0 * d2 + 2.0 * c) / gap;
  return 8.0 * d2 + 3.0 * c + ratio * ratio;
}

namespace {

// Unit vector orthogonal to every column of `basis` (orthonormal columns),
// preferring the direction of `hint`.
Vec orthogonal_unit(const Mat& basis, const Vec& hint) {
  auto residual = [&](Vec v) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c)
      v -= basis.col(c).dot(v) * basis.col(c);
    return v;
  };
  const Vec h = residual(hint);
  if (h.norm() > 1e-9 * std::max(1.0, hint.norm()))
    return h.normalized();
  Vec best;
  double best_norm = -1.0;
  for (Eigen::Index k = 0; k < basis.rows(); ++k) {
    const Vec r = residual(Vec::Unit(basis.rows(), k));
    if (r.norm() > best_norm) {
      best_norm = r.norm();
      best = r;
    }
  }
  if (best_norm < 1e-6)
    throw DimensionError("no direction orthogonal to the current frame; value dimension too small");
  return best.normalized();
}

// Solve <z, w> = gamma for a unit z orthogonal to `frame`, preferring `hint`.
Vec unit_with_projection(const Mat& frame, const Vec& w, double gamma, const Vec& hint, double slack) {
  Vec wp = w;
  for (Eigen::Index c = 0; c < frame.cols(); ++c)
    wp -= frame.col(c).dot(wp) * frame.col(c);
  const double reach = wp.norm();
  if (std::abs(gamma) > reach + slack)
    throw GeometryInconsistency("no isometric position meets the offset constraint (needs " +
                                std::to_string(gamma) + ", reachable " + std::to_string(reach) +
                                "); v probably violates the averaged condition on these points");
  if (reach <= slack) {
    Mat basis = frame;
    return orthogonal_unit(basis, hint);
  }
  const Vec dir = wp / reach;
  const double cosine = std::clamp(gamma / reach, -1.0, 1.0);
  Mat basis(frame.rows(), frame.cols() + 1);
  basis.leftCols(frame.cols()) = frame;
  basis.col(frame.cols()) = dir;
  const double sine = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  if (sine == 0.0)
    return dir;
  return cosine * dir + sine * orthogonal_unit(basis, hint);
}

} // namespace

PointSet construct_offset_isometry(const PointSet& points, const PointSet& v_values, const Vec& w, double delta,
                                   const Tolerances& tol) {
  const Eigen::Index m = points.cols();
  const Eigen::Index dim = v_values.rows();
  if (v_values.cols() != m || w.size() != dim)
    throw DimensionError("construct_offset_isometry: inconsistent shapes");
  if (m < 1 || m > std::min<Eigen::Index>(dim, 3))
    throw DimensionError("construct_offset_isometry: need 1 <= m <= min(value dimension, 3)");
  if (std::abs(w.norm() - 1.0) > 1e-9)
    throw PreconditionError("construct_offset_isometry: w must be a unit vector");
  if (!(delta > 0.0))
    throw PreconditionError("construct_offset_isometry: delta must be positive");
  require_finite(points, "construct_offset_isometry points");
  require_finite(v_values, "construct_offset_isometry values");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double dx = (points.col(i) - points.col(j)).norm();
      if (dx == 0.0)
        throw PreconditionError("construct_offset_isometry: points must be distinct");
      if ((v_values.col(i) - v_values.col(j)).norm() > dx + tol.feas_tol)
        throw PreconditionError("construct_offset_isometry: v is not 1-Lipschitz on the points");
    }

  const double root = std::sqrt(delta);
  const double scale = std::max(1.0, diameter(points));
  const double slack = 1e-9 * scale;
  PointSet u(dim, m);
  u.col(0) = v_values.col(0) + root * w;
  if (m == 1)
    return u;

  // Second point: on the sphere of radius |x1 - x2| about u1 with
  // <u2 - v2, w> = sqrt(delta), i.e. w-component of u2 - u1 fixed.
  const double d12 = (points.col(0) - points.col(1)).norm();
  const Mat none(dim, 0);
  {
    const double gamma = (v_values.col(1) - v_values.col(0)).dot(w) / d12;
    const Vec z = unit_with_projection(none, w, gamma, v_values.col(1) - v_values.col(0), slack / d12);
    u.col(1) = u.col(0) + d12 * z;
  }
  if (m == 2)
    return u;

  // Third point: on the circle of isometric positions around the axis u1u2.
  const double d13 = (points.col(0) - points.col(2)).norm();
  const double d23 = (points.col(1) - points.col(2)).norm();
  const Vec axis = (u.col(1) - u.col(0)) / d12;
  const double along = (d13 * d13 - d23 * d23 + d12 * d12) / (2.0 * d12);
  const double rho = std::sqrt(std::max(0.0, d13 * d13 - along * along));
  const Vec centre = u.col(0) + along * axis;
  const double target = root + v_values.col(2).dot(w);
  const double need = target - centre.dot(w);
  if (rho <= slack) {
    if (std::abs(need) > slack)
      throw GeometryInconsistency("collinear points: the isometric position misses the offset constraint by " +
                                  std::to_string(need));
    u.col(2) = centre;
    return u;
  }
  Mat frame(dim, 1);
  frame.col(0) = axis;
  const Vec z = unit_with_projection(frame, w, need / rho, v_values.col(2) - u.col(0), slack / rho);
  u.col(2) = centre + rho * z;
  return u;
}

NecessityReport necessity_probe(const NecessityProbeInput& in, const Tolerances& tol) {
  const VectorFieldSample& s = in.sample;
  s.validate();
  tol.validate();
  const auto m = static_cast<Eigen::Index>(in.base_indices.size());
  if (m < 1 || m > 3)
    throw PreconditionError("necessity_probe: need 1 <= m <= 3 base points");
  if (m > s.value_dim())
    throw DimensionError("necessity_probe: m exceeds the value dimension");
  if (in.t.size() != m || !on_simplex(in.t, 1e-12))
    throw PreconditionError("necessity_probe: t must be simplex weights of length m");
  if (!(in.c > 0.0))
    throw PreconditionError("necessity_probe: C must be positive");
  auto check_index = [&](Eigen::Index i) {
    if (i < 0 || i >= s.size())
      throw PreconditionError("necessity_probe: index out of range");
  };
  check_index(in.extra_index);
  PointSet points(s.domain_dim(), m), values(s.value_dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index idx = in.base_indices[static_cast<std::size_t>(i)];
    check_index(idx);
    points.col(i) = s.domain.col(idx);
    values.col(i) = s.values.col(idx);
  }

  NecessityReport rep;
  rep.delta_v = s.values.col(in.extra_index) - values * in.t;
  rep.delta_x = s.domain.col(in.extra_index) - points * in.t;
  rep.delta_x_norm = rep.delta_x.norm();
  rep.gap = rep.delta_v.norm() - rep.delta_x_norm;
  rep.diam = diameter(points);
  if (rep.gap <= tol.feas_tol) {
    rep.verdict = NecessityVerdict::NoViolationDetected;
    rep.diagnostics = "gap is not positive; this tuple does not witness a violation";
    return rep;
  }

  rep.w = -rep.delta_v.normalized();
  rep.c_used = std::max(in.c, 4.0 * rep.diam * rep.diam);
  rep.threshold = delta_threshold(rep.diam, rep.c_used, rep.gap);
  rep.delta_used = rep.threshold * (1.0 + in.delta_margin);
  rep.isometry = construct_offset_isometry(points, values, rep.w, rep.delta_used, tol);

  ConstraintSystem sys;
  sys.dimension = s.value_dim();
  for (Eigen::Index i = 0; i < m; ++i)
    sys.sets.push_back(BallSet{rep.isometry.col(i), (s.domain.col(in.extra_index) - points.col(i)).norm()});
  sys.sets.push_back(BallSet{s.values.col(in.extra_index), std::sqrt(rep.delta_used + rep.c_used)});
  rep.extension_outcome = solve(sys, tol);

  switch (rep.extension_outcome->status) {
  case FeasibilityStatus::Infeasible:
    rep.verdict = NecessityVerdict::ViolationConfirmed;
    rep.diagnostics = "no 1-Lipschitz value at the extra point stays within sqrt(delta + C) of v";
    break;
  case FeasibilityStatus::Feasible:
    rep.verdict = NecessityVerdict::Inconclusive;
    rep.diagnostics = "WARNING: feasible value found above the delta threshold; this contradicts the "
                      "threshold bound and indicates a numerical tolerance conflict";
    break;
  case FeasibilityStatus::Unknown:
    rep.verdict = NecessityVerdict::Inconclusive;
    rep.diagnostics = "feasibility solver did not reach a verdict";
    break;
  }
  return rep;
}

AffinityReport affinity_probe(const VectorFieldSample& s, std::span<const AffinityTriple> triples,
                              const Tolerances& tol) {
  s.validate();
  AffinityReport rep;
  bool small = true;
  for (const auto& tr : triples) {
    for (Eigen::Index idx : {tr.i, tr.j, tr.mid})
      if (idx < 0 || idx >= s.size())
        throw PreconditionError("affinity_probe: index out of range");
    const Vec mid = (s.domain.col(tr.i) + s.domain.col(tr.j)) / 2.0;
    if ((s.domain.col(tr.mid) - mid).norm() > 1e-12)
      throw PreconditionError("affinity_probe: point " + std::to_string(tr.mid) + " is not the midpoint of " +
                              std::to_string(tr.i) + " and " + std::to_string(tr.j));
    const double defect = (s.values.col(tr.mid) - (s.values.col(tr.i) + s.values.col(tr.j)) / 2.0).norm();
    rep.defects.push_back(defect);
    small = small && defect <= tol.feas_tol;
  }
  rep.pairwise = check_pairwise_lipschitz(s, tol);
  rep.consistent = small && rep.pairwise.satisfied();
  return rep;
}

OffsetBoundReport averaged_offset_bound_check(const PointSet& u_values, const PointSet& v_values,
                                              const PointSet& points, double delta, double c) {
  const Eigen::Index k = points.cols();
  if (k < 1 || u_values.cols() != k || v_values.cols() != k || u_values.rows() != v_values.rows())
    throw DimensionError("averaged_offset_bound_check: inconsistent shapes");
  const PointSet offsets = u_values - v_values;
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(offsets.col(i).squaredNorm() - delta) > c * (1.0 + 1e-12) + 1e-12)
      throw PreconditionError("averaged_offset_bound_check: | |u - v|^2 - delta | exceeds C at point " +
                              std::to_string(i));

  OffsetBoundReport rep;
  rep.diam = diameter(points);
  rep.bound = 8.0 * rep.diam * rep.diam + 3.0 * c;
  const SimplexQuadratic q(offsets.transpose() * offsets, Vec::Zero(k), -delta);
  const double hi = maximize_over_simplex(q).value;
  const double lo = minimize_over_simplex(q).value;
  rep.max_observed = std::max(std::abs(hi), std::abs(lo));
  if (k <= 6) {
    const SimplexQuadratic neg(-q.Q, -q.b, -q.c);
    rep.grid_max = std::max(std::abs(brute_force_over_simplex(q, 20)), std::abs(brute_force_over_simplex(neg, 20)));
  }
  rep.holds = rep.max_observed <= rep.bound * (1.0 + 1e-12) + 1e-12;
  return rep;
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Isometric placement of the unit square in R^4 with u(a_1) = delta w (w = e_1)
// whose edge vectors have w-components alpha (towards (1,0)) and beta
// (towards (0,1)).
PointSet place_square(double alpha, double beta, double delta) {
  const double s1 = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double c2 = s1 > 0.0 ? -alpha * beta / s1 : 0.0;
  const double d2 = std::sqrt(std::max(0.0, 1.0 - beta * beta - c2 * c2));
  Vec ex(4), ey(4);
  ex << alpha, s1, 0.0, 0.0;
  ey << beta, c2, d2, 0.0;
  if (s1 == 0.0)
    ey << beta, 0.0, std::sqrt(std::max(0.0, 1.0 - beta * beta)), 0.0;
  PointSet u(4, 4);
  const Vec base = delta * Vec::Unit(4, 0);
  u.col(0) = base;      // (0,0)
  u.col(1) = base + ey; // (0,1)
  u.col(2) = base + ex; // (1,0)
  u.col(3) = base + ex + ey;
  return u;
}

double square_deviation(const PointSet& u, double delta) {
  PointSet v = PointSet::Zero(4, 4);
  v(0, 3) = kInvSqrt2;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i)
    worst = std::max(worst, std::abs((u.col(i) - v.col(i))(0) - delta));
  return worst;
}

double search_square_embedding(double delta) {
  auto dev = [&](double a, double b) {
    if (a * a + b * b > 1.0)
      return 1e300;
    return square_deviation(place_square(a, b, delta), delta);
  };
  double best_a = 0.0, best_b = 0.0, best = dev(0.0, 0.0);
  constexpr int steps = 100;
  for (int i = -steps; i <= steps; ++i)
    for (int j = -steps; j <= steps; ++j) {
      const double a = static_cast<double>(i) / steps, b = static_cast<double>(j) / steps;
      const double d = dev(a, b);
      if (d < best) {
        best = d;
        best_a = a;
        best_b = b;
      }
    }
  // Compass polish including diagonals.
  const double dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  for (double step = 1.0 / steps; step > 1e-13;) {
    bool moved = false;
    for (const auto& d : dirs) {
      const double a = best_a + step * d[0], b = best_b + step * d[1];
      const double val = dev(a, b);
      if (val < best) {
        best = val;
        best_a = a;
        best_b = b;
        moved = true;
      }
    }
    if (!moved)
      step /= 2.0;
  }
  return best;
}

} // namespace

SquareDemoReport square_demo(const Tolerances& tol, std::vector<double> c_values) {
  SquareDemoReport rep;
  PointSet x(2, 4);
  x << 0, 0, 1, 1, //
      0, 1, 0, 1;
  PointSet v = PointSet::Zero(3, 4);
  const Vec w = Vec::Unit(3, 0);
  v.col(3) = w * kInvSqrt2;
  rep.sample = {x, v};

  EnumerationPolicy policy;
  policy.m_max = 3;
  rep.lipschitz_check = check_lipschitz_condition(rep.sample, policy, tol);

  rep.hull_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < 4; ++i) {
    PointSet others(2, 3);
    for (Eigen::Index j = 0, c = 0; j < 4; ++j)
      if (j != i)
        others.col(c++) = x.col(j);
    const double d = (project_hull(x.col(i), others).point - x.col(i)).norm();
    rep.vertex_hull_distances.push_back(d);
    rep.hull_distance = std::min(rep.hull_distance, d);
  }

  // The diagonals share the centre; give it the midpoint value of the
  // (0,1)-(1,0) diagonal and compare with the other diagonal.
  PointSet xc(2, 5);
  xc << x, Vec::Constant(2, 0.5);
  PointSet vc(3, 5);
  vc << v, (v.col(1) + v.col(2)) / 2.0;
  const AffinityTriple triples[] = {{0, 3, 4}, {1, 2, 4}};
  rep.affinity = affinity_probe({xc, vc}, triples, tol);
  rep.affinity_defect = *std::max_element(rep.affinity.defects.begin(), rep.affinity.defects.end());

  rep.forbidden_c_threshold = 1.0 / (5.0 * std::sqrt(2.0));

  Mat dist(4, 4);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      dist(i, j) = (x.col(i) - x.col(j)).norm();
  const PointSet placed = rigid_embed(dist, 4, tol.feas_tol);
  rep.parallelogram_residual = (placed.col(3) - (placed.col(1) + placed.col(2) - placed.col(0))).norm();

  const double delta = 1.0;
  const double search = search_square_embedding(delta);
  for (double c : c_values) {
    SquareObstruction ob;
    ob.c = c;
    ob.lower_bound = kInvSqrt2 - 4.0 * c;
    ob.upper_bound = c;
    ob.forbidden_by_chain = ob.lower_bound > ob.upper_bound;
    ob.search_min_deviation = search;
    ob.embedding_found = search <= c;
    rep.obstructions.push_back(ob);
  }
  return rep;
}

} // namespace lipext
