#include <random>

#include <doctest.h>

#include "lipext/necessity.hpp"
#include "oracles.hpp"

using namespace lipext;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// Two-sided estimate and the defining equalities of an offset isometry.
void check_isometry(const PointSet& x, const PointSet& v, const Vec& w, double delta, const PointSet& u) {
  const double root = std::sqrt(delta);
  const double diam = diameter(x);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    CHECK(std::abs((u.col(i) - v.col(i)).dot(w) - root) <= 1e-9);
    const double sq = (u.col(i) - v.col(i)).squaredNorm();
    CHECK(sq >= delta - 1e-7);
    CHECK(sq <= delta + 4 * diam * diam + 1e-7);
    for (Eigen::Index j = i + 1; j < x.cols(); ++j)
      CHECK(std::abs((u.col(i) - u.col(j)).norm() - (x.col(i) - x.col(j)).norm()) <= 1e-9);
  }
  CHECK((u.col(0) - v.col(0) - root * w).norm() <= 1e-12);
}

PointSet lipschitz_values(std::mt19937_64& rng, const PointSet& x, Eigen::Index dim) {
  PointSet v = oracle::random_matrix(rng, dim, x.cols());
  return v / std::max(1.0, oracle::worst_pair_ratio(x, v) * 1.01);
}

} // namespace

TEST_CASE("delta threshold") {
  CHECK(delta_threshold(1, 1, 1) == 111.0);
  CHECK(delta_threshold(0, 1, 2) == 4.0);
  CHECK(delta_threshold(0, 2.5, 1e12) == doctest::Approx(7.5));
  CHECK_THROWS(delta_threshold(1, 1, 0));
  CHECK_THROWS(delta_threshold(1, -1, 1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 3);
  for (int i = 0; i < 100; ++i) {
    const double d = u(rng), c = u(rng), g = u(rng), e = u(rng) * 0.1;
    CHECK(delta_threshold(d + e, c, g) > delta_threshold(d, c, g));
    CHECK(delta_threshold(d, c + e, g) > delta_threshold(d, c, g));
    CHECK(delta_threshold(d, c, g + e) < delta_threshold(d, c, g));
  }
}

TEST_CASE("offset isometry examples") {
  PointSet x1(2, 1), v1(3, 1);
  x1 << 0.3, -1;
  v1 << 1, 2, 3;
  const Vec w = Vec::Unit(3, 2);
  const PointSet u1 = construct_offset_isometry(x1, v1, w, 4.0);
  CHECK((u1.col(0) - (v1.col(0) + 2.0 * w)).norm() == 0.0);

  PointSet x(2, 2);
  x << 0, 1, 0, 0;
  const PointSet u = construct_offset_isometry(x, PointSet::Zero(2, 2), v2(0, 1), 1.0);
  CHECK((u.col(0) - v2(0, 1)).norm() <= 1e-12);
  CHECK(u(1, 1) == doctest::Approx(1.0));
  CHECK(std::abs(u(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("offset isometry on random triples") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index m = 1 + trial % 3;
    const Eigen::Index dim = std::max<Eigen::Index>(m, 2 + trial % 3);
    const PointSet x = oracle::random_matrix(rng, 1 + trial % 3, m);
    PointSet v = lipschitz_values(rng, x, dim);
    if (m == 3)
      v = oracle::contract_differences(rng, x, v);
    const Vec w = oracle::random_matrix(rng, dim, 1).col(0).normalized();
    const double delta = 0.5 + trial % 7;
    INFO("trial ", trial);
    const PointSet u = construct_offset_isometry(x, v, w, delta);
    check_isometry(x, v, w, delta, u);
  }
}

TEST_CASE("offset isometry rejects triples that break the averaged condition") {
  // pairwise 1-Lipschitz, but the midpoint value is far from the average
  PointSet x(1, 3);
  x << 0, 1, 2;
  PointSet v = PointSet::Zero(3, 3);
  v(0, 1) = 1.0;
  CHECK(oracle::worst_pair_ratio(x, v) <= 1.0);
  CHECK_THROWS_AS(construct_offset_isometry(x, v, Vec::Unit(3, 0), 1.0), GeometryInconsistency);
}

TEST_CASE("offset isometry preconditions") {
  PointSet x(2, 2);
  x << 0, 1, 0, 0;
  CHECK_THROWS_AS(construct_offset_isometry(x, PointSet::Zero(2, 2), v2(0, 2), 1.0), PreconditionError);
  CHECK_THROWS_AS(construct_offset_isometry(x, PointSet::Zero(2, 2), v2(0, 1), 0.0), PreconditionError);
  PointSet steep = PointSet::Zero(2, 2);
  steep(0, 1) = 3.0;
  CHECK_THROWS_AS(construct_offset_isometry(x, steep, v2(0, 1), 1.0), PreconditionError);
  PointSet same = PointSet::Zero(2, 2);
  CHECK_THROWS_AS(construct_offset_isometry(same, PointSet::Zero(2, 2), v2(0, 1), 1.0), PreconditionError);
  CHECK_THROWS_AS(construct_offset_isometry(PointSet::Zero(2, 3), PointSet::Zero(2, 3), v2(0, 1), 1.0),
                  DimensionError);
}

TEST_CASE("necessity probe examples") {
  const Tolerances tol;
  PointSet x(2, 2);
  x << 0, 1, 0, 0;
  NecessityProbeInput in{{x, x}, {0}, 1, (Vec(1) << 1).finished(), 1.0};
  CHECK(necessity_probe(in, tol).verdict == NecessityVerdict::NoViolationDetected);

  in.sample.values = 2 * x;
  const auto r = necessity_probe(in, tol);
  CHECK(r.gap == doctest::Approx(1.0));
  CHECK(r.verdict == NecessityVerdict::ViolationConfirmed);
  // in the w-coordinate the two constraints are disjoint intervals
  const double root = std::sqrt(r.delta_used);
  const double wu1 = (x.col(0) * 2).dot(r.w) + root;
  const double wv2 = (x.col(1) * 2).dot(r.w);
  const oracle::Interval near_u1 = oracle::ball_1d(wu1, 1.0);
  const oracle::Interval near_v2 = oracle::ball_1d(wv2, std::sqrt(r.delta_used + r.c_used));
  CHECK(near_u1.meet(near_v2).empty());
  CHECK((r.delta_v - (2 * x.col(1) - 2 * x.col(0))).norm() <= 1e-10);
  CHECK(r.delta_x_norm == doctest::Approx(1.0));
}

TEST_CASE("affine 1-Lipschitz data is never flagged") {
  const Tolerances tol;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet x = oracle::random_matrix(rng, 3, 6);
    Mat M = oracle::random_matrix(rng, 3, 3);
    M /= M.jacobiSvd().singularValues()(0);
    const Vec b = oracle::random_matrix(rng, 3, 1).col(0);
    const PointSet v = (M * x).colwise() + b;
    const Eigen::Index m = 1 + trial % 3;
    std::vector<Eigen::Index> base;
    for (Eigen::Index i = 0; i < m; ++i)
      base.push_back(i);
    Vec t = oracle::random_matrix(rng, m, 1).col(0).cwiseAbs();
    t /= t.sum();
    const auto r = necessity_probe({{x, v}, base, 5, t, 1.0}, tol);
    CHECK(r.verdict != NecessityVerdict::ViolationConfirmed);
    CHECK(r.gap <= 1e-12);
  }
}

TEST_CASE("affinity probe") {
  const Tolerances tol;
  PointSet x(1, 3), v(1, 3);
  x << 0, 0.5, 1;
  v << 1, 1.25, 1.5;
  const std::vector<AffinityTriple> t = {{0, 2, 1}};
  auto r = affinity_probe({x, v}, t, tol);
  CHECK(r.defects[0] == doctest::Approx(0.0));
  CHECK(r.consistent);

  v << 0, 0.25, 1;
  r = affinity_probe({x, v}, t, tol);
  CHECK(r.defects[0] == doctest::Approx(0.25));
  CHECK_FALSE(r.consistent);

  const std::vector<AffinityTriple> bad = {{0, 1, 2}};
  CHECK_THROWS_AS(affinity_probe({x, v}, bad, tol), PreconditionError);
}

TEST_CASE("averaged offset bound") {
  std::mt19937_64 rng(4);
  const PointSet x = oracle::random_matrix(rng, 2, 3);
  const PointSet v = lipschitz_values(rng, x, 3);
  const Vec w = Vec::Unit(3, 0);
  const double delta = 2.0;
  PointSet u = v.colwise() + std::sqrt(delta) * w;
  auto r = averaged_offset_bound_check(u, v, x, delta, 0.5);
  CHECK(r.max_observed <= 1e-12);
  CHECK(r.holds);

  for (int trial = 0; trial < 20; ++trial) {
    const PointSet xs = oracle::random_matrix(rng, 2, 1 + trial % 2);
    const PointSet vs = lipschitz_values(rng, xs, 3);
    const Vec ws = oracle::random_matrix(rng, 3, 1).col(0).normalized();
    const PointSet us = construct_offset_isometry(xs, vs, ws, delta);
    const double d = diameter(xs);
    r = averaged_offset_bound_check(us, vs, xs, delta, std::max(4 * d * d, 1e-9));
    CHECK(r.holds);
    CHECK(r.grid_max <= r.max_observed + 1e-12);
  }

  u.col(1) += 10 * w;
  CHECK_THROWS_AS(averaged_offset_bound_check(u, v, x, delta, 0.5), PreconditionError);
}

TEST_CASE("square demo constants") {
  const auto r = square_demo(Tolerances{});
  const double s2 = std::sqrt(2.0);
  CHECK(std::abs(r.hull_distance - 1 / s2) <= 1e-12);
  CHECK(std::abs(r.affinity_defect - 1 / (2 * s2)) <= 1e-12);
  CHECK(std::abs(r.forbidden_c_threshold - 1 / (5 * s2)) <= 1e-12);
  CHECK(r.lipschitz_check.satisfied());
  CHECK(r.parallelogram_residual <= 1e-9);
  REQUIRE(r.obstructions.size() == 2);
  CHECK(r.obstructions[0].forbidden_by_chain);
  CHECK_FALSE(r.obstructions[1].forbidden_by_chain);
  for (const auto& o : r.obstructions)
    CHECK(o.search_min_deviation >= 1 / (5 * s2));
}

TEST_CASE("parallelogram identity on congruent squares") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat q = oracle::random_matrix(rng, 4, 4).householderQr().householderQ();
    const Vec shift = oracle::random_matrix(rng, 4, 1).col(0);
    PointSet sq(2, 4);
    sq << 0, 0, 1, 1, 0, 1, 0, 1;
    const PointSet img = (q.leftCols(2) * sq).colwise() + shift;
    // a1 + a4 = a2 + a3
    CHECK((img.col(0) + img.col(3) - img.col(1) - img.col(2)).norm() <= 1e-9);
  }
}
