#include "lipext/extension.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace lipext {

std::string to_string(ExtensionMode mode) {
  switch (mode) {
  case ExtensionMode::Lipschitz:
    return "lipschitz";
  case ExtensionMode::Monotone:
    return "monotone";
  case ExtensionMode::Strain:
    return "strain";
  }
  return "unknown";
}

std::string to_string(const OrderStrategy& order) {
  switch (order.kind) {
  case OrderStrategy::Kind::InputOrder:
    return "input";
  case OrderStrategy::Kind::NearestToProcessedFirst:
    return "nearest";
  case OrderStrategy::Kind::FarthestToProcessedFirst:
    return "farthest";
  case OrderStrategy::Kind::Seeded:
    return "seeded";
  }
  return "unknown";
}

double pair_residual(ExtensionMode mode, const Vec& dx, const Vec& du) {
  switch (mode) {
  case ExtensionMode::Lipschitz:
    return du.norm() - dx.norm();
  case ExtensionMode::Monotone:
    return -du.dot(dx);
  case ExtensionMode::Strain:
    return du.dot(dx) - dx.squaredNorm();
  }
  return 0.0;
}

std::vector<Eigen::Index> ExtensionProblem::a_indices() const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < a_mask.size(); ++i)
    if (a_mask[i])
      out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

double ExtensionProblem::sup_offset_on_a() const {
  double sup = 0.0;
  for (Eigen::Index i : a_indices())
    sup = std::max(sup, (u_partial.col(i) - sample.values.col(i)).norm());
  return sup;
}

void ExtensionProblem::validate(const Tolerances& tol) const {
  sample.validate();
  tol.validate();
  const Eigen::Index n = sample.size();
  if (static_cast<Eigen::Index>(a_mask.size()) != n)
    throw DimensionError("extension problem: mask length differs from sample size");
  if (u_partial.cols() != n || u_partial.rows() != sample.value_dim())
    throw DimensionError("extension problem: u_partial must be value_dim x sample size");
  if (body.dimension() != sample.value_dim())
    throw DimensionError("extension problem: body dimension differs from value dimension");
  if (mode != ExtensionMode::Lipschitz && sample.domain_dim() != sample.value_dim())
    throw DimensionError("extension problem: monotone and strain modes need equal dimensions");

  const auto a = a_indices();
  if (a.empty())
    throw PreconditionError("extension problem: A is empty");
  for (Eigen::Index i : a) {
    require_finite(u_partial.col(i), "u_partial");
    if (!body.contains(u_partial.col(i) - sample.values.col(i), tol.feas_tol))
      throw PreconditionError("extension problem: offset u - v at index " + std::to_string(i) +
                              " is outside K");
  }
  for (std::size_t p = 0; p < a.size(); ++p)
    for (std::size_t q = p + 1; q < a.size(); ++q) {
      const Vec dx = sample.domain.col(a[p]) - sample.domain.col(a[q]);
      const Vec du = u_partial.col(a[p]) - u_partial.col(a[q]);
      if (pair_residual(mode, dx, du) > tol.feas_tol)
        throw PreconditionError("extension problem: u is not " + to_string(mode) + " on the pair (" +
                                std::to_string(a[p]) + ", " + std::to_string(a[q]) + ")");
    }
}

FeasibilityFailed::FeasibilityFailed(Eigen::Index index, FeasibilityOutcome outcome, ExtensionResult partial,
                                     const std::string& hint)
    : Error("no admissible value at point " + std::to_string(index) + " (solver status " +
            to_string(outcome.status) + ", residual " + std::to_string(outcome.residual) + "); " + hint),
      index_(index), outcome_(std::move(outcome)), partial_(std::move(partial)) {}

std::vector<Eigen::Index> processing_order(const PointSet& domain, const std::vector<bool>& a_mask,
                                           const OrderStrategy& order) {
  const Eigen::Index n = domain.cols();
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!a_mask[static_cast<std::size_t>(i)])
      rest.push_back(i);

  switch (order.kind) {
  case OrderStrategy::Kind::InputOrder:
    return rest;
  case OrderStrategy::Kind::Seeded: {
    std::mt19937_64 rng(order.seed);
    for (std::size_t i = rest.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(rest[i - 1], rest[pick(rng)]);
    }
    return rest;
  }
  case OrderStrategy::Kind::NearestToProcessedFirst:
  case OrderStrategy::Kind::FarthestToProcessedFirst:
    break;
  }

  const bool nearest = order.kind == OrderStrategy::Kind::NearestToProcessedFirst;
  std::vector<double> gap(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> done(a_mask);
  auto absorb = [&](Eigen::Index j) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (!done[static_cast<std::size_t>(i)])
        gap[static_cast<std::size_t>(i)] =
            std::min(gap[static_cast<std::size_t>(i)], (domain.col(i) - domain.col(j)).norm());
  };
  for (Eigen::Index j = 0; j < n; ++j)
    if (a_mask[static_cast<std::size_t>(j)])
      absorb(j);

  std::vector<Eigen::Index> out;
  out.reserve(rest.size());
  while (out.size() < rest.size()) {
    Eigen::Index pick = -1;
    for (Eigen::Index i : rest) {
      if (done[static_cast<std::size_t>(i)])
        continue;
      const double g = gap[static_cast<std::size_t>(i)];
      if (pick < 0 || (nearest ? g < gap[static_cast<std::size_t>(pick)] : g > gap[static_cast<std::size_t>(pick)]))
        pick = i;
    }
    done[static_cast<std::size_t>(pick)] = true;
    out.push_back(pick);
    absorb(pick);
  }
  return out;
}

namespace {

double sup_distance(const PointSet& u, const PointSet& v, const std::vector<bool>* mask) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    if (!mask || (*mask)[static_cast<std::size_t>(i)])
      sup = std::max(sup, (u.col(i) - v.col(i)).norm());
  return sup;
}

// Shared greedy loop. `constraints_for` appends the per-point sets coming
// from the already processed points; the hull of the offsets on A is always
// added, which keeps every new offset inside K.
template <typename MakeSets>
ExtensionResult greedy_extend(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol,
                              MakeSets constraints_for, const char* hint) {
  p.validate(tol);
  const VectorFieldSample& s = p.sample;
  const auto a = p.a_indices();

  PointSet offsets(s.value_dim(), static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    offsets.col(static_cast<Eigen::Index>(i)) = p.u_partial.col(a[i]) - s.values.col(a[i]);

  ExtensionResult result;
  result.u_full = PointSet::Zero(s.value_dim(), s.size());
  for (Eigen::Index i : a)
    result.u_full.col(i) = p.u_partial.col(i);

  std::vector<Eigen::Index> processed(a.begin(), a.end());
  for (Eigen::Index x : processing_order(s.domain, p.a_mask, order)) {
    ConstraintSystem sys;
    sys.dimension = s.value_dim();
    constraints_for(x, processed, result.u_full, sys.sets);
    sys.sets.push_back(HullSet{offsets});

    FeasibilityOutcome outcome = solve(sys, tol);
    if (outcome.status != FeasibilityStatus::Feasible) {
      result.sup_dist_a = sup_distance(result.u_full, s.values, &p.a_mask);
      throw FeasibilityFailed(x, std::move(outcome), std::move(result), hint);
    }
    const Vec y = outcome.point;
    if (!p.body.contains(y, tol.feas_tol))
      throw FeasibilityFailed(x, std::move(outcome), std::move(result),
                              "offset left K; the body is probably not convex or tolerances are inconsistent");
    result.u_full.col(x) = s.values.col(x) + y;
    result.per_point_log.push_back({x, std::move(outcome), project_hull(y, offsets).weights});
    processed.push_back(x);
  }
  result.sup_dist_a = sup_distance(result.u_full, s.values, &p.a_mask);
  result.sup_dist_x = sup_distance(result.u_full, s.values, nullptr);
  return result;
}

} // namespace

ExtensionResult extend_lipschitz(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol) {
  if (p.mode != ExtensionMode::Lipschitz)
    throw PreconditionError("extend_lipschitz: problem mode is " + to_string(p.mode));
  const VectorFieldSample& s = p.sample;
  // Offset y admissible iff |v(x) + y - u(x_i)| <= |x - x_i| for processed x_i.
  auto balls = [&](Eigen::Index x, const std::vector<Eigen::Index>& processed, const PointSet& u,
                   std::vector<ConstraintSet>& sets) {
    for (Eigen::Index i : processed)
      sets.push_back(BallSet{u.col(i) - s.values.col(x), (s.domain.col(x) - s.domain.col(i)).norm()});
  };
  return greedy_extend(p, order, tol, balls,
                       "v may violate the averaged Lipschitz condition; run check_lipschitz_condition");
}

ExtensionResult extend_monotone(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol) {
  if (p.mode != ExtensionMode::Monotone)
    throw PreconditionError("extend_monotone: problem mode is " + to_string(p.mode));
  if (!p.body.is_bounded())
    throw PreconditionError("extend_monotone: K must be bounded");
  const VectorFieldSample& s = p.sample;
  // Offset y admissible iff <v(x) + y - u(x_i), x - x_i> >= 0.
  auto halfspaces = [&](Eigen::Index x, const std::vector<Eigen::Index>& processed, const PointSet& u,
                        std::vector<ConstraintSet>& sets) {
    for (Eigen::Index i : processed) {
      const Vec normal = s.domain.col(x) - s.domain.col(i);
      if (normal.squaredNorm() == 0.0)
        continue;
      sets.push_back(HalfspaceSet{normal, (u.col(i) - s.values.col(x)).dot(normal)});
    }
  };
  return greedy_extend(p, order, tol, halfspaces,
                       "v may violate the averaged monotone condition; run check_monotone_condition");
}

ExtensionResult extend_strain(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol) {
  if (p.mode != ExtensionMode::Strain)
    throw PreconditionError("extend_strain: problem mode is " + to_string(p.mode));
  if (p.sample.domain_dim() != p.sample.value_dim())
    throw DimensionError("extend_strain: domain and value dimensions differ");
  if (static_cast<Eigen::Index>(p.a_mask.size()) != p.sample.size() || p.u_partial.cols() != p.sample.size())
    throw DimensionError("extend_strain: mask or u_partial size differs from sample size");

  // u is of 1-semi-bounded strain iff id - u is monotone; offsets flip sign.
  ExtensionProblem mono{identity_minus(p.sample), p.a_mask, PointSet(p.sample.domain - p.u_partial),
                        p.body.negated(), ExtensionMode::Monotone};
  ExtensionResult r;
  try {
    r = extend_monotone(mono, order, tol);
  } catch (const FeasibilityFailed& e) {
    ExtensionResult partial = e.partial();
    partial.u_full = p.sample.domain - partial.u_full;
    throw FeasibilityFailed(e.index(), e.outcome(), std::move(partial),
                            "v may violate the averaged strain condition; run check_strain_condition");
  } catch (const PreconditionError& e) {
    throw PreconditionError(std::string("extend_strain: ") + e.what());
  }
  r.u_full = p.sample.domain - r.u_full;
  return r;
}

ExtensionResult extend(const ExtensionProblem& p, const OrderStrategy& order, const Tolerances& tol) {
  switch (p.mode) {
  case ExtensionMode::Lipschitz:
    return extend_lipschitz(p, order, tol);
  case ExtensionMode::Monotone:
    return extend_monotone(p, order, tol);
  case ExtensionMode::Strain:
    return extend_strain(p, order, tol);
  }
  throw PreconditionError("unknown extension mode");
}

ExtensionResult kirszbraun_extend(const PointSet& domain, const std::vector<bool>& a_mask,
                                  const PointSet& u_partial, const OrderStrategy& order, const Tolerances& tol) {
  if (static_cast<Eigen::Index>(a_mask.size()) != domain.cols() || u_partial.cols() != domain.cols())
    throw DimensionError("kirszbraun_extend: mask or u_partial size differs from domain size");
  double radius = 0.0;
  for (Eigen::Index i = 0; i < domain.cols(); ++i)
    if (a_mask[static_cast<std::size_t>(i)])
      radius = std::max(radius, u_partial.col(i).norm());
  ExtensionProblem p{{domain, PointSet::Zero(u_partial.rows(), domain.cols())},
                     a_mask,
                     u_partial,
                     ConvexBody::ball(Vec::Zero(u_partial.rows()), radius),
                     ExtensionMode::Lipschitz};
  try {
    return extend_lipschitz(p, order, tol);
  } catch (const FeasibilityFailed& e) {
    throw FeasibilityFailed(e.index(), e.outcome(), e.partial(),
                            "Kirszbraun systems are always feasible; this indicates a solver or tolerance problem");
  }
}

VerificationReport verify_extension(const ExtensionResult& result, const ExtensionProblem& problem,
                                    const Tolerances& tol) {
  const VectorFieldSample& s = problem.sample;
  if (result.u_full.cols() != s.size() || result.u_full.rows() != s.value_dim())
    throw DimensionError("verify_extension: result shape differs from problem");

  VerificationReport rep;
  rep.mode = problem.mode;
  for (Eigen::Index i : problem.a_indices())
    rep.max_a_deviation = std::max(rep.max_a_deviation, (result.u_full.col(i) - problem.u_partial.col(i)).norm());

  rep.max_pair_residual = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = i + 1; j < s.size(); ++j) {
      const double r = pair_residual(problem.mode, s.domain.col(i) - s.domain.col(j),
                                     result.u_full.col(i) - result.u_full.col(j));
      rep.max_pair_residual = std::max(rep.max_pair_residual, r);
      if (r > tol.feas_tol)
        rep.violating_pairs.push_back({i, j, r});
    }
  if (s.size() < 2)
    rep.max_pair_residual = 0.0;

  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const Vec offset = result.u_full.col(i) - s.values.col(i);
    double d = 0.0;
    if (const auto* b = std::get_if<Ball>(&problem.body.variant())) {
      d = std::max(0.0, (offset - b->center).norm() - b->radius);
    } else if (const auto* h = std::get_if<HalfspaceIntersection>(&problem.body.variant())) {
      for (const auto& c : h->constraints)
        d = std::max(d, (c.offset - c.normal.dot(offset)) / c.normal.norm());
    }
    rep.max_body_distance = std::max(rep.max_body_distance, d);
    if (!problem.body.contains(offset, tol.feas_tol))
      rep.offsets_outside_body.push_back(i);
  }

  rep.sup_dist_a = sup_distance(result.u_full, s.values, &problem.a_mask);
  rep.sup_dist_x = sup_distance(result.u_full, s.values, nullptr);
  if (const auto* b = std::get_if<Ball>(&problem.body.variant())) {
    rep.ball_body = true;
    rep.ball_radius = b->radius;
    // The uniform bound only speaks about |u - v| for balls centred at 0.
    if (b->center.norm() == 0.0)
      rep.uniform_bound_holds = rep.sup_dist_x <= b->radius + tol.feas_tol;
  }
  return rep;
}

} // namespace lipext
