#include "churnlab/divergence.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "testutil.hpp"

using namespace churnlab;

namespace {
Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("tv and l1 known values") {
  Vector p = vec2(0.5, 0.5), q = vec2(0.8, 0.2);
  CHECK(tv(p, p) == doctest::Approx(0.0));
  CHECK(tv(p, q) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(l1(p, q) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(tv(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l1(vec2(1, 0), vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-15));

  Vector p3(3);
  p3 << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS((void)tv(p, p3), std::invalid_argument);
  CHECK_THROWS_AS((void)l1(p, p3), std::invalid_argument);
}

TEST_CASE("hellinger known values") {
  Vector p = vec2(0.5, 0.5), q = vec2(0.9, 0.1);
  CHECK(hellinger_sq(p, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hellinger_sq(p, q) == doctest::Approx(0.10557280900008414).epsilon(1e-15));
  CHECK(hellinger(p, q) == doctest::Approx(0.32491969623290634).epsilon(1e-14));
  CHECK(hellinger(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hellinger_sq(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("collision known values") {
  CHECK(collision(vec2(1, 0), vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(collision(vec2(1, 0), vec2(0, 1)) == doctest::Approx(0.0));
  CHECK(collision(vec2(0.5, 0.5), vec2(0.9, 0.1)) == doctest::Approx(0.5).epsilon(1e-15));
  Vector u5 = Vector::Constant(5, 0.2);
  CHECK(collision(u5, u5) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("lp_dist semantics split at exponent 1") {
  Vector a = vec2(1, 0), b = vec2(0, 1);
  // r >= 1: a norm
  CHECK(lp_dist(a, b, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lp_dist(a, b, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lp_dist(a, b, 4.0) == doctest::Approx(1.189207115002721).epsilon(1e-14));
  // 0 < r < 1: plain powered sum, not root-transformed
  CHECK(lp_dist(a, b, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  Vector p = vec2(0.5, 0.5), q = vec2(0.8, 0.2);
  CHECK(lp_dist(p, q, 0.5) == doctest::Approx(2.0 * std::sqrt(0.3)).epsilon(1e-14));
  CHECK_THROWS_AS((void)lp_dist(a, b, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)lp_dist(a, b, -1.0), std::invalid_argument);
}

TEST_CASE("lp_dist_normalized lands in [0,1] with disjoint one-hots at 1") {
  Vector a = vec2(1, 0), b = vec2(0, 1);
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    CHECK(lp_dist_normalized(a, b, r) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lp_dist_normalized(a, a, r) == doctest::Approx(0.0));
  }
  CHECK(lp_dist_max(4.0) == doctest::Approx(1.189207115002721).epsilon(1e-14));
  CHECK(lp_dist_max(0.5) == doctest::Approx(2.0));
  CHECK(lp_dist_normalized(vec2(0.5, 0.5), vec2(0.8, 0.2), 1.0) ==
        doctest::Approx(0.3).epsilon(1e-15));

  // The normalizer is the two-point maximum (disjoint one-hots).  For r >= 1
  // that is the true maximum, so values stay in [0,1].  For r < 1 the powered
  // sum is concave, spreading mass over K > 2 coordinates exceeds the
  // two-point value; the max over K-simplices is 2*(K/2)^(1-r), so the
  // normalized value is bounded by (K/2)^(1-r) instead.
  Vector onehot10 = Vector::Zero(10);
  onehot10[0] = 1.0;
  Vector rest10 = Vector::Constant(10, 1.0 / 9.0);
  rest10[0] = 0.0;
  CHECK(lp_dist_normalized(onehot10, rest10, 0.5) ==
        doctest::Approx(2.0).epsilon(1e-14));

  Rng rng(31);
  for (int t = 0; t < 2000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    Vector p = rng.simplex(k), q = rng.simplex(k);
    for (double r : {0.5, 1.0, 2.0, 4.0}) {
      double d = lp_dist_normalized(p, q, r);
      CHECK(d >= -1e-12);
      double cap = r >= 1.0 ? 1.0 : std::pow(0.5 * static_cast<double>(k), 1.0 - r);
      CHECK(d <= cap + 1e-12);
    }
  }
}

TEST_CASE("divergences are symmetric") {
  Rng rng(37);
  for (int t = 0; t < 2000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    Vector p = rng.simplex(k), q = rng.simplex(k);
    CHECK(std::abs(tv(p, q) - tv(q, p)) < 1e-15);
    CHECK(std::abs(l1(p, q) - l1(q, p)) < 1e-15);
    CHECK(std::abs(hellinger(p, q) - hellinger(q, p)) < 1e-15);
    CHECK(std::abs(collision(p, q) - collision(q, p)) < 1e-15);
    for (double r : {0.5, 1.0, 4.0})
      CHECK(std::abs(lp_dist(p, q, r) - lp_dist(q, p, r)) < 1e-14);
  }
}

TEST_CASE("hellinger squared equals the square of hellinger") {
  Rng rng(41);
  for (int t = 0; t < 10000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    Vector p = rng.simplex(k), q = rng.simplex(k);
    double h = hellinger(p, q);
    CHECK(std::abs(h * h - hellinger_sq(p, q)) < 1e-12);
  }
}

TEST_CASE("hellinger-tv sandwich on random simplex pairs") {
  // H^2 <= TV <= sqrt(2) H, checked on 1e5 pairs.
  Rng rng(43);
  for (int t = 0; t < 100000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    Vector p = rng.simplex(k), q = rng.simplex(k);
    double hsq = hellinger_sq(p, q);
    double t_v = tv(p, q);
    CHECK(hsq <= t_v + 1e-12);
    CHECK(t_v <= std::sqrt(2.0 * hsq) + 1e-12);
    // 1 - collision dominates hellinger_sq (since sqrt(pq) >= pq on [0,1])
    CHECK(1.0 - collision(p, q) >= hsq - 1e-12);
  }
}

TEST_CASE("triangle inequality for tv and lp norms") {
  Rng rng(47);
  for (int t = 0; t < 5000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    Vector p = rng.simplex(k), q = rng.simplex(k), m = rng.simplex(k);
    CHECK(tv(p, q) <= tv(p, m) + tv(m, q) + 1e-12);
    for (double r : {1.0, 2.0, 4.0})
      CHECK(lp_dist(p, q, r) <= lp_dist(p, m, r) + lp_dist(m, q, r) + 1e-12);
  }
}

TEST_CASE("ProbVector overloads agree with the raw vector forms") {
  ProbVector p(vec2(0.5, 0.5)), q(vec2(0.9, 0.1));
  CHECK(tv(p, q) == doctest::Approx(tv(p.values(), q.values())).epsilon(1e-15));
  CHECK(hellinger_sq(p, q) == doctest::Approx(0.10557280900008414).epsilon(1e-15));
  CHECK(collision(p, q) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lp_dist(p, q, 4.0) == doctest::Approx(lp_dist(p.values(), q.values(), 4.0)));
  CHECK(lp_dist_normalized(p, q, 0.5) ==
        doctest::Approx(lp_dist_normalized(p.values(), q.values(), 0.5)));
}
