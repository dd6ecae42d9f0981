#include "churnlab/reject.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "testutil.hpp"

using namespace churnlab;

TEST_CASE("RejectParams validation and derived slope ratio") {
  RejectParams p(0.3);
  CHECK(p.a == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  CHECK(p.alpha == 1.0);
  CHECK(p.delta == 0.0);

  CHECK_THROWS_AS(RejectParams(0.0), std::invalid_argument);
  CHECK_THROWS_AS(RejectParams(0.5), std::invalid_argument);
  CHECK_THROWS_AS(RejectParams(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(RejectParams(0.3, 0.5), std::invalid_argument);       // alpha < 1
  CHECK_THROWS_AS(RejectParams(0.3, 1.0, -0.1), std::invalid_argument);  // delta < 0
  CHECK_THROWS_AS(RejectParams(0.3, 1.0, 0.0, 1.0), std::invalid_argument);  // a <= 1
}

TEST_CASE("reject loss is a three-level step in the signed margin") {
  RejectParams p(0.3, 1.0, 0.1);
  CHECK(reject_loss(-0.5, p) == doctest::Approx(1.0));
  CHECK(reject_loss(0.05, p) == doctest::Approx(0.3));
  CHECK(reject_loss(-0.1, p) == doctest::Approx(0.3));  // band is closed
  CHECK(reject_loss(0.1, p) == doctest::Approx(0.3));
  CHECK(reject_loss(0.5, p) == doctest::Approx(0.0));
  CHECK(reject_loss(-0.10000001, p) == doctest::Approx(1.0));

  // delta = 0: only the sign matters, abstain exactly at zero
  RejectParams p0(0.3);
  CHECK(reject_loss(-1e-300, p0) == doctest::Approx(1.0));
  CHECK(reject_loss(0.0, p0) == doctest::Approx(0.3));
  CHECK(reject_loss(1e-300, p0) == doctest::Approx(0.0));
}

TEST_CASE("bayes rule abstains on the closed band [d, 1-d]") {
  RejectParams p(0.3);
  CHECK(bayes_reject(BinaryProb(0.1), p) == -1);
  CHECK(bayes_reject(BinaryProb(0.3), p) == 0);
  CHECK(bayes_reject(BinaryProb(0.5), p) == 0);
  CHECK(bayes_reject(BinaryProb(0.7), p) == 0);
  CHECK(bayes_reject(BinaryProb(0.8), p) == 1);
}

TEST_CASE("convex surrogate: values, continuity, and domination of the step loss") {
  RejectParams p(0.3);
  const double a = 7.0 / 3.0;
  CHECK(convex_surrogate(-1.0, p) == doctest::Approx(1.0 + a).epsilon(1e-15));
  CHECK(convex_surrogate(0.5, p) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(convex_surrogate(2.0, p) == doctest::Approx(0.0));
  // continuity at the kinks
  CHECK(convex_surrogate(-1e-12, p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(convex_surrogate(1.0 - 1e-12, p) == doctest::Approx(0.0).epsilon(1e-9));
  // upper bound on the zero-width rejection loss over a grid
  RejectParams p0(0.3);
  for (double z = -3.0; z <= 3.0; z += 0.01) {
    CHECK(convex_surrogate(z, p) >= reject_loss(z, p0) - 1e-15);
  }
}

TEST_CASE("smooth surrogate dominates the convex one and tightens with alpha") {
  for (double d : {0.1, 0.3, 0.45}) {
    double prev_max = infinity();
    for (double alpha : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      RejectParams p(d, alpha);
      double max_gap = 0.0;
      for (double z = -3.0; z <= 3.0; z += 0.01) {
        double gap = smooth_surrogate(z, p).value - convex_surrogate(z, p);
        CHECK(gap >= -1e-12);
        max_gap = std::max(max_gap, gap);
      }
      CHECK(max_gap < prev_max);  // strictly tighter as alpha doubles
      prev_max = max_gap;
    }
  }
  // far saturation: smooth value approaches the linear branches
  RejectParams p(0.3, 50.0);
  CHECK(smooth_surrogate(-1.0, p).value == doctest::Approx(1.0 + 7.0 / 3.0).epsilon(1e-3));
  CHECK(smooth_surrogate(3.0, p).value == doctest::Approx(0.0));
}

TEST_CASE("smooth surrogate derivative matches central differences") {
  Rng rng(107);
  for (int t = 0; t < 200; ++t) {
    double d = rng.uniform(0.05, 0.45);
    double alpha = rng.uniform(1.0, 12.0);
    RejectParams p(d, alpha);
    double z = rng.uniform(-3.0, 3.0);
    double fd = testutil::central_diff([&](double x) { return smooth_surrogate(x, p).value; }, z);
    CHECK(testutil::rel_err(smooth_surrogate(z, p).derivative, fd) < 1e-5);
  }
}

TEST_CASE("link is a monotone bijection from scores to probabilities") {
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    RejectParams p(0.3, alpha);
    double prev = -infinity();
    for (double v = -3.0; v <= 3.0 + 1e-12; v += 0.05) {
      double eta = link(v, p);
      CHECK(eta > prev);
      CHECK(eta >= -1e-12);
      CHECK(eta <= 1.0 + 1e-12);
      prev = eta;
    }
    // tails: far-left scores map to eta 0, far-right to eta 1
    CHECK(link(-40.0, p) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(link(40.0, p) == doctest::Approx(1.0).epsilon(1e-6));
  }
  // sharp alpha at the midpoint: link(0) -> 1/2
  RejectParams sharp(0.3, 64.0);
  CHECK(std::abs(link(0.0, sharp) - 0.5) < 1e-6);
}

TEST_CASE("bayes optimal score tracks the plateau structure at sharp alpha") {
  RejectParams p(0.3, 32.0);
  // plateau interiors: scores sit near -1 / 0 / +1
  CHECK(std::abs(bayes_optimal_score(BinaryProb(0.15), p) - (-1.0)) < 0.05);
  CHECK(std::abs(bayes_optimal_score(BinaryProb(0.5), p)) < 0.05);
  CHECK(std::abs(bayes_optimal_score(BinaryProb(0.85), p) - 1.0) < 0.05);
  // symmetry: z*(eta) == -z*(1 - eta)
  for (double eta : {0.1, 0.2, 0.35, 0.48}) {
    CHECK(std::abs(bayes_optimal_score(BinaryProb(eta), p) +
                   bayes_optimal_score(BinaryProb(1.0 - eta), p)) < 1e-4);
  }
  // monotone in eta
  double prev = -infinity();
  for (int i = 1; i <= 19; ++i) {
    double z = bayes_optimal_score(BinaryProb(static_cast<double>(i) / 20.0), p);
    CHECK(z >= prev - 1e-9);
    prev = z;
  }
}

TEST_CASE("reject risk averages the step loss over signed scores") {
  RejectParams p(0.3, 1.0, 0.1);
  Vector s(4);
  s << 2.0, -2.0, 0.05, -0.5;
  std::vector<int> y{1, -1, 1, 1};
  // margins: 2, 2, 0.05, -0.5 -> 0 + 0 + d + 1
  CHECK(reject_risk(s, y, p) == doctest::Approx((0.3 + 1.0) / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)reject_risk(s, std::vector<int>{1, -1}, p), std::invalid_argument);
  CHECK_THROWS_AS((void)reject_risk(s, std::vector<int>{1, 2, 1, 1}, p), std::invalid_argument);
  CHECK_THROWS_AS((void)reject_risk(Vector(0), std::vector<int>{}, p), std::invalid_argument);
}
