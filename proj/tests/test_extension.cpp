#include <random>

#include <doctest.h>

#include "lipext/extension.hpp"
#include "oracles.hpp"

using namespace lipext;

namespace {

PointSet row(std::initializer_list<double> xs) {
  PointSet p(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index j = 0;
  for (double x : xs)
    p(0, j++) = x;
  return p;
}

ExtensionProblem line_problem(ExtensionMode mode) {
  // X = {0, 1, 2}, A = {0, 2}, u(0) = 0, u(2) = 1, v(x) = x / 2, K = {0}
  ExtensionProblem p;
  p.sample = {row({0, 1, 2}), row({0, 0.5, 1})};
  p.a_mask = {true, false, true};
  p.u_partial = row({0, 0, 1});
  p.body = ConvexBody::ball(Vec::Zero(1), 0.0);
  p.mode = mode;
  return p;
}

std::vector<OrderStrategy> all_orders() {
  return {OrderStrategy::input(), OrderStrategy::nearest(), OrderStrategy::farthest(), OrderStrategy::seeded(3)};
}

double hull_distance(const ExtensionProblem& p, const ExtensionResult& r) {
  const auto a = p.a_indices();
  PointSet g(r.u_full.rows(), static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k)
    g.col(static_cast<Eigen::Index>(k)) = p.u_partial.col(a[k]) - p.sample.values.col(a[k]);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.u_full.cols(); ++i) {
    const Vec off = r.u_full.col(i) - p.sample.values.col(i);
    worst = std::max(worst, (project_hull(off, g).point - off).norm());
  }
  return worst;
}

ExtensionProblem random_lipschitz_problem(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m, Eigen::Index k,
                                          Eigen::Index a_count) {
  const PointSet x = oracle::random_matrix(rng, n, k);
  Mat M = oracle::random_matrix(rng, m, n);
  M /= M.jacobiSvd().singularValues()(0);
  const PointSet v = M * x;
  PointSet u = oracle::random_matrix(rng, m, k);
  const double ratio = oracle::worst_pair_ratio(x.leftCols(a_count), u.leftCols(a_count));
  u /= std::max(ratio, 1.0);
  ExtensionProblem p;
  p.sample = {x, v};
  p.a_mask.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < a_count; ++i)
    p.a_mask[static_cast<std::size_t>(i)] = true;
  p.u_partial = u;
  p.mode = ExtensionMode::Lipschitz;
  p.body = ConvexBody::ball(Vec::Zero(m), p.sup_offset_on_a());
  return p;
}

} // namespace

TEST_CASE("A = X leaves u unchanged") {
  const Tolerances tol;
  for (auto mode : {ExtensionMode::Lipschitz, ExtensionMode::Monotone, ExtensionMode::Strain}) {
    auto p = line_problem(mode);
    p.a_mask = {true, true, true};
    p.u_partial = row({0, 0.5, 1});
    const auto r = extend(p, OrderStrategy{}, tol);
    CHECK(r.u_full == p.u_partial);
    CHECK(r.per_point_log.empty());
  }
}

TEST_CASE("lipschitz line example") {
  const Tolerances tol;
  const auto p = line_problem(ExtensionMode::Lipschitz);
  const auto r = extend_lipschitz(p, OrderStrategy{}, tol);
  CHECK(r.u_full(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(verify_extension(r, p, tol).passed());
  REQUIRE(r.per_point_log.size() == 1);
  CHECK(r.per_point_log[0].index == 1);
}

TEST_CASE("zero map on the square") {
  const Tolerances tol;
  ExtensionProblem p;
  PointSet x(2, 4);
  x << 0, 0, 1, 1, 0, 1, 0, 1;
  p.sample = {x, PointSet::Zero(3, 4)};
  p.a_mask = {true, true, true, false};
  p.u_partial = PointSet::Zero(3, 4);
  p.body = ConvexBody::ball(Vec::Zero(3), 0.0);
  const auto r = extend_lipschitz(p, OrderStrategy{}, tol);
  CHECK(r.u_full.col(3).norm() <= 1e-12);
}

TEST_CASE("monotone line example") {
  const Tolerances tol;
  const auto p = line_problem(ExtensionMode::Monotone);
  const auto r = extend_monotone(p, OrderStrategy{}, tol);
  CHECK(r.u_full(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  // pairwise <du, dx>: 0.25, 0.25, 2
  CHECK(r.u_full(0, 1) * 1.0 == doctest::Approx(0.5));
  CHECK((1.0 - r.u_full(0, 1)) * 1.0 == doctest::Approx(0.5));
  CHECK(verify_extension(r, p, tol).passed());
}

TEST_CASE("monotone extension in one dimension against intervals") {
  const Tolerances tol;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(-2, 2);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> xs(7), us(4);
    for (auto& x : xs)
      x = unif(rng);
    for (auto& u : us)
      u = unif(rng);
    std::sort(xs.begin(), xs.begin() + 4);
    std::sort(us.begin(), us.end());
    ExtensionProblem p;
    p.sample = {PointSet(1, 7), PointSet::Zero(1, 7)};
    p.u_partial = PointSet::Zero(1, 7);
    p.a_mask.assign(7, false);
    double radius = 0.0;
    for (int i = 0; i < 7; ++i)
      p.sample.domain(0, i) = xs[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) {
      p.a_mask[static_cast<std::size_t>(i)] = true;
      p.u_partial(0, i) = us[static_cast<std::size_t>(i)];
      radius = std::max(radius, std::abs(us[static_cast<std::size_t>(i)]));
    }
    p.body = ConvexBody::ball(Vec::Zero(1), radius);
    p.mode = ExtensionMode::Monotone;
    const auto r = extend_monotone(p, OrderStrategy::input(), tol);
    // replay: each new value must lie in the interval cut out by the earlier ones
    for (int i = 4; i < 7; ++i) {
      oracle::Interval iv = oracle::ball_1d(0.0, radius);
      for (int j = 0; j < i; ++j) {
        const double xj = p.sample.domain(0, j), uj = r.u_full(0, j), xi = xs[static_cast<std::size_t>(i)];
        if (xi > xj)
          iv = iv.meet({uj, INFINITY});
        else if (xi < xj)
          iv = iv.meet({-INFINITY, uj});
      }
      CHECK_FALSE(iv.empty());
      CHECK(iv.contains(r.u_full(0, i), 1e-7));
    }
    CHECK(verify_extension(r, p, tol).passed());
  }
}

TEST_CASE("monotone mode needs a bounded body") {
  auto p = line_problem(ExtensionMode::Monotone);
  p.body = ConvexBody::whole_space(1);
  CHECK_THROWS_AS(extend_monotone(p, OrderStrategy{}, Tolerances{}), PreconditionError);
}

TEST_CASE("strain examples") {
  const Tolerances tol;
  auto p = line_problem(ExtensionMode::Strain);
  p.sample.values = row({0, 0, 0});
  p.u_partial = row({0, 0, 0});
  auto r = extend_strain(p, OrderStrategy{}, tol);
  CHECK(r.u_full.norm() <= 1e-12);

  p.sample.values = row({0, 1, 2});
  p.u_partial = row({0, 0, 2});
  r = extend_strain(p, OrderStrategy{}, tol);
  CHECK(r.u_full(0, 1) == doctest::Approx(1.0).epsilon(1e-9));

  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> unif(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    // u = x - g with g nondecreasing on A: x - u is monotone, so u is 1-semi-bounded
    std::vector<double> xs(6), g(3);
    for (auto& x : xs)
      x = unif(rng);
    for (auto& y : g)
      y = unif(rng);
    std::sort(xs.begin(), xs.begin() + 3);
    std::sort(g.begin(), g.end());
    ExtensionProblem q;
    q.sample = {PointSet(1, 6), PointSet::Zero(1, 6)};
    q.u_partial = PointSet::Zero(1, 6);
    q.a_mask.assign(6, false);
    double radius = 0.0;
    for (int i = 0; i < 6; ++i)
      q.sample.domain(0, i) = xs[static_cast<std::size_t>(i)];
    for (int i = 0; i < 3; ++i) {
      q.a_mask[static_cast<std::size_t>(i)] = true;
      q.u_partial(0, i) = xs[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)];
      radius = std::max(radius, std::abs(q.u_partial(0, i)));
    }
    q.body = ConvexBody::ball(Vec::Zero(1), radius);
    q.mode = ExtensionMode::Strain;
    const auto res = extend_strain(q, OrderStrategy{}, tol);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double dx = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
        CHECK((res.u_full(0, i) - res.u_full(0, j)) * dx <= dx * dx + 1e-9);
      }
  }
}

TEST_CASE("kirszbraun examples") {
  const Tolerances tol;
  PointSet x = row({0, 1, 2, 5});
  PointSet u = PointSet::Zero(2, 4);
  u.col(0) << 3, -1;
  auto r = kirszbraun_extend(x, {true, false, false, false}, u, OrderStrategy{}, tol);
  for (int i = 0; i < 4; ++i)
    CHECK((r.u_full.col(i) - u.col(0)).norm() <= 1e-12);

  r = kirszbraun_extend(row({0, 1, 2}), {true, false, true}, row({0, 0, 1}), OrderStrategy{}, tol);
  // the admissible set is [0, 1]; hull restriction and the averaged start give the midpoint
  CHECK(r.u_full(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("isometric data on a collinear triple extends affinely") {
  const Tolerances tol;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec a = oracle::random_matrix(rng, 2, 1).col(0);
    const Vec dir = oracle::random_matrix(rng, 2, 1).col(0).normalized();
    const Vec img0 = oracle::random_matrix(rng, 3, 1).col(0);
    const Vec imgdir = oracle::random_matrix(rng, 3, 1).col(0).normalized();
    // A at parameters 0, 1, 3; extra points at 0.4, 2.2 (inside the hull) and off the line
    const std::vector<double> s = {0, 1, 3, 0.4, 2.2};
    PointSet x(2, 6), u = PointSet::Zero(3, 6);
    for (int i = 0; i < 5; ++i) {
      x.col(i) = a + s[static_cast<std::size_t>(i)] * dir;
      u.col(i) = img0 + s[static_cast<std::size_t>(i)] * imgdir;
    }
    x.col(5) = a + Vec((Vec(2) << -dir(1), dir(0)).finished());
    const std::vector<bool> mask = {true, true, true, false, false, false};
    const auto r = kirszbraun_extend(x, mask, u, OrderStrategy{}, tol);
    for (int i = 3; i < 5; ++i) {
      const Vec want = oracle::affine_interpolate(x.col(0), u.col(0), x.col(2), u.col(2), x.col(i));
      CHECK((r.u_full.col(i) - want).norm() <= 1e-6);
    }
  }
}

TEST_CASE("every order succeeds and keeps the invariants") {
  const Tolerances tol;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const auto p = random_lipschitz_problem(rng, 3, 3, 10, 4);
    for (const auto& order : all_orders()) {
      const auto r = extend(p, order, tol);
      const auto ver = verify_extension(r, p, tol);
      CHECK(ver.passed());
      CHECK(hull_distance(p, r) <= tol.feas_tol);
      CHECK(r.sup_dist_x <= p.sup_offset_on_a() + tol.feas_tol);
      for (const auto& e : r.per_point_log) {
        CHECK(e.outcome.status == FeasibilityStatus::Feasible);
        CHECK(on_simplex(e.hull_weights, 1e-9));
      }
    }
  }
}

TEST_CASE("processing orders") {
  PointSet x = row({0, 10, 1, 4});
  const std::vector<bool> mask = {true, false, false, false};
  CHECK(processing_order(x, mask, OrderStrategy::input()) == std::vector<Eigen::Index>{1, 2, 3});
  CHECK(processing_order(x, mask, OrderStrategy::nearest()) == std::vector<Eigen::Index>{2, 3, 1});
  CHECK(processing_order(x, mask, OrderStrategy::farthest()) == std::vector<Eigen::Index>{1, 3, 2});
  const auto s1 = processing_order(x, mask, OrderStrategy::seeded(4));
  CHECK(s1 == processing_order(x, mask, OrderStrategy::seeded(4)));
}

TEST_CASE("infeasible step reports the failing point") {
  const Tolerances tol;
  ExtensionProblem p;
  p.sample = {row({0, 1, 2}), row({0, 5, 2})};
  p.a_mask = {true, false, true};
  p.u_partial = row({0, 0, 2});
  p.body = ConvexBody::ball(Vec::Zero(1), 0.0);
  try {
    extend_lipschitz(p, OrderStrategy{}, tol);
    FAIL("expected FeasibilityFailed");
  } catch (const FeasibilityFailed& e) {
    CHECK(e.index() == 1);
    CHECK(e.outcome().status == FeasibilityStatus::Infeasible);
  }
}

TEST_CASE("preconditions") {
  const Tolerances tol;
  auto p = line_problem(ExtensionMode::Lipschitz);
  p.u_partial = row({0, 0, 5}); // slope 2.5 on A and offset outside K
  CHECK_THROWS_AS(extend(p, OrderStrategy{}, tol), PreconditionError);
  p = line_problem(ExtensionMode::Lipschitz);
  p.a_mask = {false, false, false};
  CHECK_THROWS_AS(extend(p, OrderStrategy{}, tol), PreconditionError);
  p = line_problem(ExtensionMode::Lipschitz);
  p.a_mask.pop_back();
  CHECK_THROWS_AS(extend(p, OrderStrategy{}, tol), DimensionError);
}

TEST_CASE("verification flags corrupted results") {
  const Tolerances tol;
  std::mt19937_64 rng(61);
  const auto p = random_lipschitz_problem(rng, 2, 2, 8, 3);
  auto r = extend(p, OrderStrategy{}, tol);
  auto ver = verify_extension(r, p, tol);
  CHECK(ver.passed());
  CHECK(ver.ball_body);
  CHECK(ver.uniform_bound_holds);
  CHECK(ver.sup_dist_x <= ver.ball_radius + tol.feas_tol);

  r.u_full(0, 5) += 1.0;
  ver = verify_extension(r, p, tol);
  CHECK_FALSE(ver.passed());
  bool names_point = false;
  for (const auto& f : ver.violating_pairs)
    names_point = names_point || f.i == 5 || f.j == 5;
  CHECK(names_point);
}
