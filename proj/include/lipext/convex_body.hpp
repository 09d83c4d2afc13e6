#pragma once

#include <variant>
#include <vector>

#include "lipext/geometry.hpp"

namespace lipext {

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// {y : <normal, y> >= offset}
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

struct HalfspaceIntersection {
  std::vector<Halfspace> constraints;
  Eigen::Index dimension = 0;
};

struct WholeSpace {
  Eigen::Index dimension = 0;
};

/// The offset body K. Kept to balls, polyhedra given by half-spaces, and the
/// whole space so that projections stay exact or certifiable.
class ConvexBody {
public:
  using Variant = std::variant<Ball, HalfspaceIntersection, WholeSpace>;

  static ConvexBody ball(Vec center, double radius);
  static ConvexBody halfspaces(std::vector<Halfspace> constraints, Eigen::Index dimension);
  static ConvexBody whole_space(Eigen::Index dimension);

  Eigen::Index dimension() const;
  const Variant& variant() const { return body_; }

  /// True when p lies within `tol` of the body (per-constraint slack for
  /// half-spaces).
  bool contains(const Vec& p, double tol) const;

  /// Nearest point. Half-space intersections use an inner Dykstra loop and
  /// throw PossiblyEmptyBody if it does not settle within max_iter cycles.
  Vec project(const Vec& p, const Tolerances& tol) const;

  /// -K.
  ConvexBody negated() const;

  /// True when the body is bounded: balls always, whole space never (unless
  /// zero-dimensional), half-space intersections when their normals
  /// positively span the space.
  bool is_bounded() const;

private:
  explicit ConvexBody(Variant v) : body_(std::move(v)) {}
  Variant body_;
};

inline bool contains(const ConvexBody& b, const Vec& p, double tol) { return b.contains(p, tol); }
inline Vec project(const ConvexBody& b, const Vec& p, const Tolerances& tol) {
  return b.project(p, tol);
}

/// shift + body
struct ShiftedBody {
  ConvexBody body;
  Vec shift;

  bool contains(const Vec& p, double tol) const { return body.contains(p - shift, tol); }
  Vec project(const Vec& p, const Tolerances& tol) const {
    return shift + body.project(p - shift, tol);
  }
};

/// Nearest point of an intersection of half-spaces via Dykstra's method.
Vec project_halfspace_intersection(const Vec& p, const std::vector<Halfspace>& constraints,
                                   const Tolerances& tol);

} // namespace lipext
