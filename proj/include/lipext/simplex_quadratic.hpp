#pragma once

#include <vector>

#include "lipext/geometry.hpp"

namespace lipext {

/// q(t) = t'Qt + b't + c on the standard simplex.
struct SimplexQuadratic {
  Mat Q;
  Vec b;
  double c = 0.0;

  SimplexQuadratic() = default;
  SimplexQuadratic(Mat q, Vec lin, double constant);
  /// Pure quadratic form t'Qt.
  explicit SimplexQuadratic(Mat q);

  Eigen::Index size() const { return Q.rows(); }
  double operator()(const Vec& t) const { return t.dot(Q * t) + b.dot(t) + c; }
};

/// An optimizer of q over the simplex together with the face it was found on.
struct StationaryWitness {
  std::vector<Eigen::Index> face; // sorted indices of the support face
  Vec t;
  double value = 0.0;
};

/// Largest simplex dimension handled by face enumeration.
inline constexpr Eigen::Index kMaxSimplexSize = 24;

/// Global maximum of q over the simplex. Every nonempty face is visited; on
/// each one the stationarity system of the restriction is solved and
/// candidates with nonnegative weights are kept. Faces whose system is
/// singular are skipped since their maxima are attained on sub-faces.
StationaryWitness maximize_over_simplex(const SimplexQuadratic& q);

/// Global minimum of q over the simplex.
StationaryWitness minimize_over_simplex(const SimplexQuadratic& q);

/// Maximum of q over the grid points of the simplex with denominator
/// `resolution`.
double brute_force_over_simplex(const SimplexQuadratic& q, int resolution);

/// Checks t_i >= -tol and |sum t - 1| <= tol.
bool on_simplex(const Vec& t, double tol = 1e-12);

} // namespace lipext
