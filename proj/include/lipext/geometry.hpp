#pragma once

// Dense vector helpers, elementary projections, hull projection, and
// embedding of finite metric configurations. Everything here is templated on
// the scalar type and accepts arbitrary Eigen expressions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lipext/errors.hpp"

namespace lipext {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = Vector<double>;
using Mat = Matrix<double>;

/// Points are stored column-wise: column j is point j.
template <typename Scalar>
using PointSetT = Matrix<Scalar>;
using PointSet = PointSetT<double>;

struct Tolerances {
  double feas_tol = 1e-7;
  double solve_tol = 1e-10;
  long max_iter = 100000;

  void validate() const {
    if (!(solve_tol > 0.0) || !(feas_tol >= solve_tol) || max_iter < 1)
      throw PreconditionError("tolerances: need feas_tol >= solve_tol > 0 and max_iter >= 1");
  }
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite())
    throw PreconditionError(std::string(what) + ": non-finite entry");
}

template <typename A, typename B>
void require_same_rows(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                       const char* what) {
  if (a.rows() != b.rows())
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
}

/// Nearest point of the closed ball B(center, radius).
template <typename DP, typename DC>
Vector<typename DP::Scalar> project_ball(const Eigen::MatrixBase<DP>& p,
                                         const Eigen::MatrixBase<DC>& center,
                                         typename DP::Scalar radius) {
  using Scalar = typename DP::Scalar;
  require_same_rows(p, center, "project_ball");
  if (!(radius >= Scalar(0)))
    throw PreconditionError("project_ball: negative radius");
  Vector<Scalar> d = p - center;
  const Scalar norm = d.norm();
  if (norm <= radius)
    return p;
  return center + d * (radius / norm);
}

/// Nearest point of {y : <normal, y> >= offset}.
template <typename DP, typename DN>
Vector<typename DP::Scalar> project_halfspace(const Eigen::MatrixBase<DP>& p,
                                              const Eigen::MatrixBase<DN>& normal,
                                              typename DP::Scalar offset) {
  using Scalar = typename DP::Scalar;
  require_same_rows(p, normal, "project_halfspace");
  const Scalar nn = normal.squaredNorm();
  if (!(nn > Scalar(0)))
    throw PreconditionError("project_halfspace: zero normal");
  const Scalar slack = normal.dot(p) - offset;
  if (slack >= Scalar(0))
    return p;
  return p - normal * (slack / nn);
}

template <typename Scalar>
struct HullProjection {
  Vector<Scalar> point;
  Vector<Scalar> weights; // on the simplex, one entry per generator
};

namespace detail {

// Minimizer of |Q a| over the affine hull of the columns of Q (sum a = 1).
// Rank-deficient corrals resolve to the minimum-norm least-squares solution.
template <typename Scalar>
Vector<Scalar> affine_minimizer(const Matrix<Scalar>& q) {
  const Eigen::Index s = q.cols();
  Vector<Scalar> alpha = Vector<Scalar>::Zero(s);
  if (s == 1) {
    alpha(0) = 1;
    return alpha;
  }
  Matrix<Scalar> diffs = q.rightCols(s - 1).colwise() - q.col(0);
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(diffs);
  Vector<Scalar> beta = cod.solve(Vector<Scalar>(-q.col(0)));
  alpha(0) = Scalar(1) - beta.sum();
  alpha.tail(s - 1) = beta;
  return alpha;
}

} // namespace detail

/// Nearest point of Conv(generators) to p, with simplex weights realizing it.
/// Wolfe's minimum-norm-point active-set method on the translated generators.
template <typename DP, typename DG>
HullProjection<typename DP::Scalar> project_hull(const Eigen::MatrixBase<DP>& p,
                                                 const Eigen::MatrixBase<DG>& generators) {
  using Scalar = typename DP::Scalar;
  const Eigen::Index k = generators.cols();
  if (k == 0)
    throw PreconditionError("project_hull: empty generator list");
  require_same_rows(p, generators, "project_hull");

  const Matrix<Scalar> q = generators.colwise() - p;
  const Vector<Scalar> sq = q.colwise().squaredNorm().transpose();
  const Scalar scale = std::max(sq.maxCoeff(), std::numeric_limits<Scalar>::min());
  const Scalar eps = Scalar(64) * std::numeric_limits<Scalar>::epsilon();

  std::vector<Eigen::Index> corral;
  Eigen::Index first = 0;
  sq.minCoeff(&first);
  corral.push_back(first);
  Vector<Scalar> lambda = Vector<Scalar>::Zero(k);
  lambda(first) = 1;
  Vector<Scalar> x = q.col(first);

  const long max_major = 20 * (k + p.rows()) + 100;
  for (long major = 0; major < max_major; ++major) {
    Eigen::Index j = 0;
    const Vector<Scalar> proj = q.transpose() * x;
    proj.minCoeff(&j);
    if (x.squaredNorm() - proj(j) <= eps * scale)
      break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end())
      break;
    corral.push_back(j);

    for (long minor = 0; minor <= k; ++minor) {
      Matrix<Scalar> qs(q.rows(), static_cast<Eigen::Index>(corral.size()));
      for (std::size_t c = 0; c < corral.size(); ++c)
        qs.col(static_cast<Eigen::Index>(c)) = q.col(corral[c]);
      const Vector<Scalar> alpha = detail::affine_minimizer(qs);
      if ((alpha.array() > Scalar(0)).all()) {
        lambda.setZero();
        for (std::size_t c = 0; c < corral.size(); ++c)
          lambda(corral[c]) = alpha(static_cast<Eigen::Index>(c));
        x = qs * alpha;
        break;
      }
      // Step from the current weights towards alpha until one weight vanishes.
      Scalar theta = 1;
      for (std::size_t c = 0; c < corral.size(); ++c) {
        const Scalar a = alpha(static_cast<Eigen::Index>(c));
        const Scalar l = lambda(corral[c]);
        if (a <= Scalar(0) && l - a > Scalar(0))
          theta = std::min(theta, l / (l - a));
      }
      std::vector<Eigen::Index> kept;
      for (std::size_t c = 0; c < corral.size(); ++c) {
        const Eigen::Index idx = corral[c];
        const Scalar nl = theta * alpha(static_cast<Eigen::Index>(c)) + (1 - theta) * lambda(idx);
        lambda(idx) = nl > eps ? nl : Scalar(0);
        if (lambda(idx) > Scalar(0))
          kept.push_back(idx);
      }
      if (kept.empty()) {
        kept.push_back(corral.back());
        lambda(corral.back()) = 1;
      }
      lambda /= lambda.sum();
      corral = kept;
      x = q * lambda;
    }
  }

  lambda = lambda.cwiseMax(Scalar(0));
  lambda /= lambda.sum();
  return {generators * lambda, lambda};
}

/// Coordinates of k points in R^target_dim realizing a Euclidean distance
/// matrix. The first point is placed at the origin.
template <typename DD>
PointSetT<typename DD::Scalar> rigid_embed(const Eigen::MatrixBase<DD>& distances,
                                           Eigen::Index target_dim,
                                           typename DD::Scalar feas_tol = 1e-7) {
  using Scalar = typename DD::Scalar;
  const Eigen::Index k = distances.rows();
  if (distances.cols() != k || k == 0)
    throw DimensionError("rigid_embed: distance matrix must be square and nonempty");
  if (target_dim < 1)
    throw DimensionError("rigid_embed: target_dim must be positive");
  require_finite(distances, "rigid_embed");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(distances(i, i)) > feas_tol)
      throw NonEuclideanError("rigid_embed: nonzero diagonal");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (distances(i, j) < Scalar(0) || std::abs(distances(i, j) - distances(j, i)) > feas_tol)
        throw NonEuclideanError("rigid_embed: distances must be symmetric and nonnegative");
    }
  }
  PointSetT<Scalar> out = PointSetT<Scalar>::Zero(target_dim, k);
  if (k == 1)
    return out;

  const Eigen::Index r = k - 1;
  Matrix<Scalar> gram(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      const Scalar a = distances(0, i + 1), b = distances(0, j + 1), c = distances(i + 1, j + 1);
      gram(i, j) = (a * a + b * b - c * c) / Scalar(2);
    }
  gram = (gram + gram.transpose()).eval() / Scalar(2);

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram);
  const Vector<Scalar>& vals = eig.eigenvalues(); // ascending
  if (vals(0) < -feas_tol)
    throw NonEuclideanError("rigid_embed: Gram matrix has eigenvalue " + std::to_string(vals(0)));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < r; ++i)
    if (vals(i) > feas_tol)
      ++rank;
  if (rank > target_dim)
    throw DimensionError("rigid_embed: configuration needs dimension " + std::to_string(rank));

  const Eigen::Index used = std::min(r, target_dim);
  for (Eigen::Index c = 0; c < used; ++c) {
    const Eigen::Index e = r - 1 - c; // largest first
    const Scalar s = std::sqrt(std::max(vals(e), Scalar(0)));
    out.row(c).tail(r) = eig.eigenvectors().col(e).transpose() * s;
  }
  return out;
}

struct FarthestPair {
  double distance = 0.0;
  Eigen::Index first = 0;
  Eigen::Index second = 0;
};

/// Max pairwise distance; the lexicographically first pair wins ties.
template <typename DS>
FarthestPair farthest_pair(const Eigen::MatrixBase<DS>& s) {
  if (s.cols() == 0)
    throw PreconditionError("diameter: empty point set");
  FarthestPair best;
  double best_sq = 0.0;
  for (Eigen::Index i = 0; i < s.cols(); ++i)
    for (Eigen::Index j = i + 1; j < s.cols(); ++j) {
      const double d = static_cast<double>((s.col(i) - s.col(j)).squaredNorm());
      if (d > best_sq) {
        best_sq = d;
        best = {0.0, i, j};
      }
    }
  best.distance = std::sqrt(best_sq);
  return best;
}

template <typename DS>
double diameter(const Eigen::MatrixBase<DS>& s) {
  return farthest_pair(s).distance;
}

} // namespace lipext
