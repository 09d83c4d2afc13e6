#include <random>

#include <doctest.h>

#include "lipext/simplex_quadratic.hpp"
#include "oracles.hpp"

using namespace lipext;

namespace {

SimplexQuadratic diff_square() {
  // -(t1 - t2)^2
  Mat Q(2, 2);
  Q << -1, 1, 1, -1;
  return SimplexQuadratic(Q);
}

SimplexQuadratic random_quadratic(std::mt19937_64& rng, Eigen::Index k) {
  const Mat a = oracle::random_matrix(rng, k, k);
  return SimplexQuadratic(Mat((a + a.transpose()) / 2), oracle::random_matrix(rng, k, 1).col(0),
                          oracle::random_matrix(rng, 1, 1)(0, 0));
}

} // namespace

TEST_CASE("maximize examples") {
  CHECK(maximize_over_simplex(SimplexQuadratic(Mat::Zero(3, 3))).value == 0.0);

  const auto w = maximize_over_simplex(SimplexQuadratic(Mat::Identity(2, 2)));
  CHECK(w.value == doctest::Approx(1.0));
  CHECK(w.face.size() == 1);
  CHECK(w.face[0] == 0); // tie between vertices goes to the smaller face

  const auto d = maximize_over_simplex(diff_square());
  CHECK(d.value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d.t(0) == doctest::Approx(0.5));
  // grid oracle at step 1e-3
  CHECK(oracle::grid_max(diff_square().Q, Vec::Zero(2), 0.0, 1000) == doctest::Approx(0.0));
}

TEST_CASE("minimize examples") {
  CHECK(minimize_over_simplex(SimplexQuadratic(Mat::Zero(2, 2))).value == 0.0);

  const auto m = minimize_over_simplex(SimplexQuadratic(Mat::Identity(2, 2)));
  CHECK(m.value == doctest::Approx(0.5));
  CHECK(m.t(0) == doctest::Approx(0.5));
  CHECK(-oracle::grid_max(-Mat::Identity(2, 2), Vec::Zero(2), 0.0, 1000) == doctest::Approx(0.5));

  const auto lin = minimize_over_simplex(SimplexQuadratic(Mat::Zero(2, 2), (Vec(2) << 1, -1).finished(), 0.0));
  CHECK(lin.value == -1.0);
  CHECK(lin.t(1) == 1.0);
}

TEST_CASE("brute force examples") {
  CHECK(brute_force_over_simplex(SimplexQuadratic(Mat::Zero(3, 3)), 7) == 0.0);
  CHECK(brute_force_over_simplex(SimplexQuadratic(Mat::Identity(2, 2)), 2) == 1.0);
  CHECK(brute_force_over_simplex(diff_square(), 2) == 0.0);
  CHECK_THROWS(brute_force_over_simplex(diff_square(), 0));
}

TEST_CASE("input validation") {
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(maximize_over_simplex(SimplexQuadratic(asym)), Error);
  CHECK_THROWS(maximize_over_simplex(SimplexQuadratic(Mat::Zero(25, 25))));
  CHECK_THROWS(SimplexQuadratic(Mat::Zero(2, 2), Vec::Zero(3), 0.0));
}

TEST_CASE("exactness against grid and polish") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const Eigen::Index k = 1 + trial % 5;
    const auto q = random_quadratic(rng, k);
    const auto w = maximize_over_simplex(q);
    CHECK(on_simplex(w.t, 1e-12));
    CHECK(std::abs(q(w.t) - w.value) <= 1e-10);
    for (Eigen::Index i = 0; i < k; ++i)
      if (std::find(w.face.begin(), w.face.end(), i) == w.face.end())
        CHECK(w.t(i) == 0.0);
    for (int r : {1, 3, 10, 25}) {
      CHECK(w.value >= brute_force_over_simplex(q, r) - 1e-9);
      CHECK(w.value >= oracle::grid_max(q.Q, q.b, q.c, r) - 1e-9);
    }
  }
}

TEST_CASE("concave quadratics agree with projected-gradient polish") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index k = 2 + trial % 4;
    const Mat a = oracle::random_matrix(rng, k, k);
    const SimplexQuadratic q(Mat(-(a.transpose() * a)), oracle::random_matrix(rng, k, 1).col(0), 0.0);
    const Vec start = Vec::Constant(k, 1.0 / k);
    const Vec t = oracle::polish_max(q.Q, q.b, q.c, start, 200000);
    CHECK(std::abs(maximize_over_simplex(q).value - q(t)) <= 1e-8);
  }
}

TEST_CASE("minimum is the negated maximum of -q") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = random_quadratic(rng, 3);
    const SimplexQuadratic neg(Mat(-q.Q), Vec(-q.b), -q.c);
    CHECK(minimize_over_simplex(q).value == doctest::Approx(-maximize_over_simplex(neg).value));
  }
}
