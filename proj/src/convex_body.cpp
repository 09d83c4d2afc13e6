#include "lipext/convex_body.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace lipext {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_dim(Eigen::Index expected, const Vec& p, const char* what) {
  if (p.size() != expected)
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(p.size()));
}

} // namespace

ConvexBody ConvexBody::ball(Vec center, double radius) {
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw PreconditionError("ball: radius must be finite and nonnegative");
  return ConvexBody(Ball{std::move(center), radius});
}

ConvexBody ConvexBody::halfspaces(std::vector<Halfspace> constraints, Eigen::Index dimension) {
  if (dimension < 1)
    throw DimensionError("halfspaces: dimension must be positive");
  for (const auto& h : constraints) {
    check_dim(dimension, h.normal, "halfspaces");
    require_finite(h.normal, "halfspace normal");
    if (!std::isfinite(h.offset))
      throw PreconditionError("halfspace offset must be finite");
    if (!(h.normal.squaredNorm() > 0.0))
      throw PreconditionError("halfspaces: zero normal");
  }
  return ConvexBody(HalfspaceIntersection{std::move(constraints), dimension});
}

ConvexBody ConvexBody::whole_space(Eigen::Index dimension) {
  if (dimension < 1)
    throw DimensionError("whole_space: dimension must be positive");
  return ConvexBody(WholeSpace{dimension});
}

Eigen::Index ConvexBody::dimension() const {
  return std::visit(overloaded{[](const Ball& b) { return b.center.size(); },
                               [](const HalfspaceIntersection& h) { return h.dimension; },
                               [](const WholeSpace& w) { return w.dimension; }},
                    body_);
}

bool ConvexBody::contains(const Vec& p, double tol) const {
  check_dim(dimension(), p, "contains");
  return std::visit(overloaded{[&](const Ball& b) { return (p - b.center).norm() <= b.radius + tol; },
                               [&](const HalfspaceIntersection& h) {
                                 for (const auto& c : h.constraints)
                                   if ((c.normal.dot(p) - c.offset) / c.normal.norm() < -tol)
                                     return false;
                                 return true;
                               },
                               [](const WholeSpace&) { return true; }},
                    body_);
}

Vec ConvexBody::project(const Vec& p, const Tolerances& tol) const {
  check_dim(dimension(), p, "project");
  return std::visit(overloaded{[&](const Ball& b) { return project_ball(p, b.center, b.radius); },
                               [&](const HalfspaceIntersection& h) {
                                 return project_halfspace_intersection(p, h.constraints, tol);
                               },
                               [&](const WholeSpace&) { return Vec(p); }},
                    body_);
}

ConvexBody ConvexBody::negated() const {
  return std::visit(overloaded{[](const Ball& b) { return ConvexBody::ball(-b.center, b.radius); },
                               [](const HalfspaceIntersection& h) {
                                 std::vector<Halfspace> flipped;
                                 flipped.reserve(h.constraints.size());
                                 for (const auto& c : h.constraints)
                                   flipped.push_back({-c.normal, c.offset});
                                 return ConvexBody::halfspaces(std::move(flipped), h.dimension);
                               },
                               [](const WholeSpace& w) { return ConvexBody::whole_space(w.dimension); }},
                    body_);
}

bool ConvexBody::is_bounded() const {
  return std::visit(
      overloaded{[](const Ball&) { return true; },
                 [](const WholeSpace&) { return false; },
                 [](const HalfspaceIntersection& h) {
                   // Recession cone {d : <n_i, d> >= 0} is trivial iff the
                   // normals positively span, i.e. 0 is interior to the hull
                   // of the unit normals. Test with a small cross-polytope.
                   const Eigen::Index n = h.dimension;
                   if (h.constraints.empty())
                     return false;
                   Mat normals(n, static_cast<Eigen::Index>(h.constraints.size()));
                   for (std::size_t i = 0; i < h.constraints.size(); ++i)
                     normals.col(static_cast<Eigen::Index>(i)) = h.constraints[i].normal.normalized();
                   constexpr double radius = 1e-6;
                   for (Eigen::Index k = 0; k < n; ++k)
                     for (double sign : {1.0, -1.0}) {
                       Vec probe = Vec::Zero(n);
                       probe(k) = sign * radius;
                       if ((project_hull(probe, normals).point - probe).norm() > 1e-12)
                         return false;
                     }
                   return true;
                 }},
      body_);
}

Vec project_halfspace_intersection(const Vec& p, const std::vector<Halfspace>& constraints,
                                   const Tolerances& tol) {
  if (constraints.empty())
    return p;
  if (constraints.size() == 1)
    return project_halfspace(p, constraints.front().normal, constraints.front().offset);

  Vec x = p;
  std::vector<Vec> increments(constraints.size(), Vec::Zero(p.size()));
  std::vector<Vec> inner(constraints.size(), Vec::Constant(p.size(), std::numeric_limits<double>::infinity()));
  for (long cycle = 0; cycle < tol.max_iter; ++cycle) {
    double change = 0.0;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const Vec y = x + increments[i];
      const Vec prev = x;
      x = project_halfspace(y, constraints[i].normal, constraints[i].offset);
      increments[i] = y - x;
      change = std::max({change, (x - inner[i]).norm(), (x - prev).norm()});
      inner[i] = x;
    }
    if (change < tol.solve_tol) {
      // Iterates also settle on inconsistent systems; only a feasible limit counts.
      for (const auto& c : constraints)
        if ((c.offset - c.normal.dot(x)) / c.normal.norm() > tol.feas_tol)
          throw PossiblyEmptyBody("half-space intersection appears to be empty");
      return x;
    }
  }
  throw PossiblyEmptyBody("half-space projection did not converge within max_iter cycles");
}

} // namespace lipext
