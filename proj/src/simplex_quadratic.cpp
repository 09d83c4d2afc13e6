#include "lipext/simplex_quadratic.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace lipext {

namespace {

void validate(const SimplexQuadratic& q) {
  const Eigen::Index k = q.Q.rows();
  if (k < 1 || q.Q.cols() != k || q.b.size() != k)
    throw DimensionError("simplex quadratic: inconsistent dimensions");
  if (k > kMaxSimplexSize)
    throw DimensionError("simplex quadratic: size " + std::to_string(k) + " exceeds cap " +
                         std::to_string(kMaxSimplexSize));
  require_finite(q.Q, "simplex quadratic Q");
  require_finite(q.b, "simplex quadratic b");
  const double scale = 1.0 + q.Q.cwiseAbs().maxCoeff();
  if ((q.Q - q.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("simplex quadratic: Q is not symmetric");
}

bool lexicographically_less(const std::vector<Eigen::Index>& a, const std::vector<Eigen::Index>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

} // namespace

SimplexQuadratic::SimplexQuadratic(Mat q, Vec lin, double constant)
    : Q(std::move(q)), b(std::move(lin)), c(constant) {
  if (Q.rows() != Q.cols() || b.size() != Q.rows())
    throw DimensionError("SimplexQuadratic: Q must be square and b must match it");
}

SimplexQuadratic::SimplexQuadratic(Mat q) : Q(std::move(q)), b(Vec::Zero(Q.rows())), c(0.0) {
  if (Q.rows() != Q.cols())
    throw DimensionError("SimplexQuadratic: Q must be square");
}

StationaryWitness maximize_over_simplex(const SimplexQuadratic& q) {
  validate(q);
  const Eigen::Index k = q.size();
  const double scale = 1.0 + q.Q.cwiseAbs().maxCoeff() + q.b.cwiseAbs().maxCoeff();
  const double tie = 1e-14 * (scale + std::abs(q.c));

  StationaryWitness best;
  best.value = -std::numeric_limits<double>::infinity();

  const std::uint32_t faces = (std::uint32_t{1} << k) - 1;
  std::vector<Eigen::Index> face;
  face.reserve(static_cast<std::size_t>(k));
  for (std::uint32_t mask = 1; mask <= faces; ++mask) {
    face.clear();
    for (Eigen::Index i = 0; i < k; ++i)
      if (mask & (std::uint32_t{1} << i))
        face.push_back(i);
    const auto s = static_cast<Eigen::Index>(face.size());

    // Stationarity of the restriction: 2 Q_FF t - mu 1 = -b_F, 1't = 1.
    Mat kkt = Mat::Zero(s + 1, s + 1);
    Vec rhs(s + 1);
    for (Eigen::Index r = 0; r < s; ++r) {
      for (Eigen::Index c = 0; c < s; ++c)
        kkt(r, c) = 2.0 * q.Q(face[r], face[c]);
      kkt(r, s) = -1.0;
      kkt(s, r) = 1.0;
      rhs(r) = -q.b(face[r]);
    }
    rhs(s) = 1.0;

    Vec t = Vec::Zero(k);
    if (s == 1) {
      t(face[0]) = 1.0;
    } else {
      Eigen::FullPivLU<Mat> lu(kkt);
      lu.setThreshold(1e-11);
      if (!lu.isInvertible())
        continue;
      const Vec sol = lu.solve(rhs);
      const Vec tf = sol.head(s);
      if ((tf.array() < -1e-12).any())
        continue;
      for (Eigen::Index r = 0; r < s; ++r)
        t(face[r]) = std::max(tf(r), 0.0);
      t /= t.sum();
    }

    const double value = q(t);
    const bool better = value > best.value + tie;
    const bool tied = std::abs(value - best.value) <= tie && lexicographically_less(face, best.face);
    if (better || tied) {
      best.value = value;
      best.face = face;
      best.t = t;
    }
  }
  best.value = q(best.t);
  return best;
}

StationaryWitness minimize_over_simplex(const SimplexQuadratic& q) {
  StationaryWitness w = maximize_over_simplex(SimplexQuadratic(-q.Q, -q.b, -q.c));
  w.value = q(w.t);
  return w;
}

double brute_force_over_simplex(const SimplexQuadratic& q, int resolution) {
  validate(q);
  if (resolution < 1)
    throw PreconditionError("brute_force_over_simplex: resolution must be positive");
  const Eigen::Index k = q.size();
  Vec t = Vec::Zero(k);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  // Enumerate compositions of `resolution` into k nonnegative parts.
  std::function<void(Eigen::Index, int)> rec = [&](Eigen::Index i, int left) {
    if (i == k - 1) {
      counts[static_cast<std::size_t>(i)] = left;
      for (Eigen::Index j = 0; j < k; ++j)
        t(j) = static_cast<double>(counts[static_cast<std::size_t>(j)]) / resolution;
      best = std::max(best, q(t));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[static_cast<std::size_t>(i)] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, resolution);
  return best;
}

bool on_simplex(const Vec& t, double tol) {
  return t.size() > 0 && (t.array() >= -tol).all() && std::abs(t.sum() - 1.0) <= tol;
}

} // namespace lipext
