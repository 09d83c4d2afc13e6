#include <random>

#include <doctest.h>

#include "lipext/geometry.hpp"
#include "oracles.hpp"

using namespace lipext;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

PointSet cols(std::initializer_list<Vec> pts) {
  PointSet s(pts.begin()->size(), static_cast<Eigen::Index>(pts.size()));
  Eigen::Index j = 0;
  for (const auto& p : pts)
    s.col(j++) = p;
  return s;
}

Mat distance_matrix(const PointSet& s) {
  Mat d(s.cols(), s.cols());
  for (Eigen::Index i = 0; i < s.cols(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      d(i, j) = (s.col(i) - s.col(j)).norm();
  return d;
}

} // namespace

TEST_CASE("ball projection") {
  CHECK((project_ball(v2(3, 0), v2(0, 0), 1.0) - v2(1, 0)).norm() == doctest::Approx(0.0));
  CHECK(project_ball(v2(0.2, 0.1), v2(0, 0), 1.0) == v2(0.2, 0.1));
  CHECK((project_ball(v2(6, 8), v2(0, 0), 5.0) - v2(3, 4)).norm() < 1e-15);
  CHECK_THROWS_AS(project_ball(v2(1, 0), v2(0, 0), -1.0), Error);
  CHECK_THROWS_AS(project_ball(Vec::Zero(3), v2(0, 0), 1.0), DimensionError);
}

TEST_CASE("halfspace projection") {
  CHECK(project_halfspace(v2(0, -2), v2(0, 1), 0.0) == v2(0, 0));
  CHECK(project_halfspace(v2(5, 3), v2(0, 1), 0.0) == v2(5, 3));
  // argmin |y - (1,1)| s.t. y1 + y2 = 4 by hand: y = (2,2)
  CHECK((project_halfspace(v2(1, 1), v2(1, 1), 4.0) - v2(2, 2)).norm() < 1e-15);
  CHECK_THROWS(project_halfspace(v2(1, 1), v2(0, 0), 1.0));
}

TEST_CASE("hull projection examples") {
  const PointSet seg = cols({v2(0, 0), v2(1, 0)});
  auto h = project_hull(v2(2, 0), seg);
  CHECK((h.point - v2(1, 0)).norm() < 1e-12);
  CHECK(h.weights(0) == doctest::Approx(0.0));
  CHECK(h.weights(1) == doctest::Approx(1.0));

  h = project_hull(v2(0.25, 0), seg);
  CHECK((h.point - v2(0.25, 0)).norm() < 1e-12);
  CHECK(h.weights(0) == doctest::Approx(0.75));
  CHECK(h.weights(1) == doctest::Approx(0.25));

  const PointSet tri = cols({v2(0, 0), v2(2, 0), v2(0, 2)});
  h = project_hull(v2(1, 1), tri);
  CHECK((h.point - v2(1, 1)).norm() < 1e-12);
  CHECK(h.weights(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h.weights(1) == doctest::Approx(0.5));
  CHECK(h.weights(2) == doctest::Approx(0.5));

  // grid oracle at step 1e-3 over the weights
  double best = INFINITY;
  for (int a = 0; a <= 1000; ++a)
    for (int b = 0; a + b <= 1000; ++b) {
      const Vec t = (Vec(3) << a / 1000.0, b / 1000.0, (1000 - a - b) / 1000.0).finished();
      best = std::min(best, (tri * t - v2(1, 1)).norm());
    }
  CHECK(best < 1e-12);
}

TEST_CASE("hull projection matches the grid oracle on random data") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const PointSet g = oracle::random_matrix(rng, 2, 3);
    const Vec p = oracle::random_matrix(rng, 2, 1, 2.0).col(0);
    const auto h = project_hull(p, g);
    CHECK((h.weights.array() >= -1e-12).all());
    CHECK(std::abs(h.weights.sum() - 1.0) <= 1e-12);
    CHECK((g * h.weights - h.point).norm() <= 1e-10);
    // the optimum of |G t - p|^2 is the max of -|G t - p|^2
    const Mat Q = -(g.transpose() * g);
    const Vec b = 2.0 * g.transpose() * p;
    Vec arg;
    oracle::grid_max(Q, b, -p.squaredNorm(), 60, &arg);
    const Vec t = oracle::polish_max(Q, b, -p.squaredNorm(), arg);
    CHECK((h.point - p).norm() <= (g * t - p).norm() + 1e-8);
  }
}

TEST_CASE("projections are idempotent and nonexpansive") {
  std::mt19937_64 rng(11);
  const PointSet g = oracle::random_matrix(rng, 3, 5);
  const Vec c = oracle::random_matrix(rng, 3, 1).col(0);
  const Vec n = oracle::random_matrix(rng, 3, 1).col(0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec p = oracle::random_matrix(rng, 3, 1, 3.0).col(0);
    const Vec q = oracle::random_matrix(rng, 3, 1, 3.0).col(0);

    const Vec bp = project_ball(p, c, 0.7), bq = project_ball(q, c, 0.7);
    CHECK((project_ball(bp, c, 0.7) - bp).norm() <= 1e-12);
    CHECK((bp - bq).norm() <= (p - q).norm() + 1e-12);

    const Vec hp = project_halfspace(p, n, 0.3), hq = project_halfspace(q, n, 0.3);
    CHECK((project_halfspace(hp, n, 0.3) - hp).norm() <= 1e-12);
    CHECK((hp - hq).norm() <= (p - q).norm() + 1e-12);

    const Vec gp = project_hull(p, g).point, gq = project_hull(q, g).point;
    CHECK((project_hull(gp, g).point - gp).norm() <= 1e-12);
    CHECK((gp - gq).norm() <= (p - q).norm() + 1e-12);
  }
}

TEST_CASE("rigid embedding") {
  Mat tri = Mat::Ones(3, 3) - Mat::Identity(3, 3);
  const PointSet e = rigid_embed(tri, 2);
  CHECK((distance_matrix(e) - tri).cwiseAbs().maxCoeff() <= 1e-12);

  const PointSet one = rigid_embed(Mat::Zero(1, 1), 3);
  CHECK(one.cols() == 1);
  CHECK(one.norm() == 0.0);

  const PointSet square = cols({v2(0, 0), v2(0, 1), v2(1, 0), v2(1, 1)});
  const Mat d = distance_matrix(square);
  CHECK((distance_matrix(rigid_embed(d, 2)) - d).cwiseAbs().maxCoeff() <= 1e-7);

  // four points at mutual distance 1 need three dimensions
  CHECK_THROWS_AS(rigid_embed(Mat(Mat::Ones(4, 4) - Mat::Identity(4, 4)), 2), DimensionError);
  // violates the triangle inequality
  Mat bad = Mat::Zero(3, 3);
  bad(0, 1) = bad(1, 0) = 1;
  bad(1, 2) = bad(2, 1) = 1;
  bad(0, 2) = bad(2, 0) = 3;
  CHECK_THROWS_AS(rigid_embed(bad, 3), NonEuclideanError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet s = oracle::random_matrix(rng, 3, 6);
    const Mat ds = distance_matrix(s);
    CHECK((distance_matrix(rigid_embed(ds, 3)) - ds).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("diameter and farthest pair") {
  CHECK(diameter(cols({v2(0, 0)})) == 0.0);
  CHECK(diameter(cols({v2(0, 0), v2(3, 4)})) == 5.0);
  const PointSet square = cols({v2(0, 0), v2(0, 1), v2(1, 0), v2(1, 1)});
  CHECK(diameter(square) == doctest::Approx(std::sqrt(2.0)));
  const auto fp = farthest_pair(square);
  CHECK(fp.first == 0);
  CHECK(fp.second == 3);
}

TEST_CASE("tolerance validation") {
  Tolerances t;
  CHECK_NOTHROW(t.validate());
  t.solve_tol = 1.0;
  CHECK_THROWS(t.validate());
}

TEST_CASE("templated on the scalar type") {
  using V = Vector<float>;
  const V p = (V(2) << 3.f, 0.f).finished();
  const V c = V::Zero(2);
  CHECK(project_ball(p, c, 1.f)(0) == doctest::Approx(1.f));
}
