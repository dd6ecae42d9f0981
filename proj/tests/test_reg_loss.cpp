#include "churnlab/reg_loss.hpp"

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

/// Finite-difference gradient of a loss in the scores.
Vector fd_gradient(const Vector& scores, Index y, const RegParams& reg, double temperature,
                   double h = 1e-6) {
  Vector g(scores.size());
  for (Index j = 0; j < scores.size(); ++j) {
    Vector sp = scores, sm = scores;
    sp[j] += h;
    sm[j] -= h;
    g[j] = (softmax_reg_loss_grad(sp, y, reg, temperature).value -
            softmax_reg_loss_grad(sm, y, reg, temperature).value) /
           (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("RegParams validation") {
  CHECK_NOTHROW(RegParams(RegKind::entropic, 0.0));
  CHECK_NOTHROW(RegParams(RegKind::entropic, 2.0));
  CHECK_NOTHROW(RegParams(RegKind::kl_uniform, 1.0));
  CHECK_THROWS_AS(RegParams(RegKind::entropic, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(RegParams(RegKind::kl_uniform, 1.1), std::invalid_argument);
}

TEST_CASE("entropic log loss known values") {
  // confident correct one-hot: both terms vanish
  CHECK(entropic_log_loss(vec2(1.0, 0.0), 0, 0.7) == doctest::Approx(0.0));
  // ln 2 + 0.3 * ln 2
  CHECK(entropic_log_loss(vec2(0.5, 0.5), 0, 0.3) ==
        doctest::Approx(0.90109133472792891).epsilon(1e-15));
  // alpha = 0 is the plain log loss
  Rng rng(83);
  for (int t = 0; t < 10000; ++t) {
    Vector p = rng.simplex(3);
    CHECK(std::abs(entropic_log_loss(p, 1, 0.0) + std::log(p[1])) < 1e-15);
  }
  CHECK(std::isinf(entropic_log_loss(vec2(1.0, 0.0), 1, 0.3)));
  CHECK_THROWS_AS((void)entropic_log_loss(vec2(0.5, 0.5), 2, 0.3), std::invalid_argument);
}

TEST_CASE("kl-uniform log loss known values and identity") {
  CHECK(kl_log_loss(vec2(0.5, 0.5), 0, 0.3) ==
        doctest::Approx(0.48520302639196167).epsilon(1e-15));
  // alpha = 1 ignores the label and is zero exactly at uniform
  CHECK(kl_log_loss(vec2(0.5, 0.5), 1, 1.0) == doctest::Approx(0.0));
  CHECK(kl_log_loss(vec2(0.9, 0.1), 0, 1.0) ==
        doctest::Approx(0.51082562376599072).epsilon(1e-15));
  // closed form: (1-a)(-log p_y) + a(-log K - mean log p_j)
  Rng rng(89);
  for (int t = 0; t < 10000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(5));
    Vector p = rng.simplex(k);
    Index y = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k)));
    double a = rng.uniform(0.0, 1.0);
    double direct = (1.0 - a) * -std::log(p[y]) +
                    a * (-std::log(static_cast<double>(k)) - p.array().log().mean());
    CHECK(std::abs(kl_log_loss(p, y, a) - direct) < 1e-12);
  }
}

TEST_CASE("binary logistic losses: values, symmetry and saturation") {
  constexpr double kLn2 = 0.69314718055994529;
  ScalarFn e = entropic_logistic_loss(0.0, 1, 0.0);
  CHECK(e.value == doctest::Approx(kLn2).epsilon(1e-15));
  CHECK(e.derivative == doctest::Approx(-0.5).epsilon(1e-15));

  e = entropic_logistic_loss(0.0, 1, 0.3);
  CHECK(e.value == doctest::Approx(0.90109133472792891).epsilon(1e-14));

  ScalarFn kk = kl_logistic_loss(0.0, 0, 0.3);
  CHECK(kk.value == doctest::Approx(0.48520302639196167).epsilon(1e-14));

  // label flip mirrors the score axis
  for (double f : {-7.3, -1.0, 0.4, 2.2, 19.0}) {
    for (double a : {0.0, 0.3, 0.9}) {
      ScalarFn l1 = entropic_logistic_loss(f, 1, a);
      ScalarFn l0 = entropic_logistic_loss(-f, 0, a);
      CHECK(std::abs(l1.value - l0.value) < 1e-12);
      CHECK(std::abs(l1.derivative + l0.derivative) < 1e-12);
      ScalarFn k1 = kl_logistic_loss(f, 1, a);
      ScalarFn k0 = kl_logistic_loss(-f, 0, a);
      CHECK(std::abs(k1.value - k0.value) < 1e-12);
      CHECK(std::abs(k1.derivative + k0.derivative) < 1e-12);
    }
  }

  // deep saturation stays finite
  for (double f : {-700.0, 700.0}) {
    CHECK(std::isfinite(entropic_logistic_loss(f, 1, 0.5).value));
    CHECK(std::isfinite(entropic_logistic_loss(f, 1, 0.5).derivative));
    CHECK(std::isfinite(kl_logistic_loss(f, 0, 0.5).value));
  }
}

TEST_CASE("binary logistic derivatives match central differences") {
  Rng rng(97);
  for (int t = 0; t < 200; ++t) {
    double f = rng.uniform(-8.0, 8.0);
    int y = static_cast<int>(rng.below(2));
    double a = rng.uniform(0.0, 1.0);
    double fd_e = testutil::central_diff(
        [&](double x) { return entropic_logistic_loss(x, y, a).value; }, f);
    double fd_k = testutil::central_diff(
        [&](double x) { return kl_logistic_loss(x, y, a).value; }, f);
    CHECK(testutil::rel_err(entropic_logistic_loss(f, y, a).derivative, fd_e) < 1e-5);
    CHECK(testutil::rel_err(kl_logistic_loss(f, y, a).derivative, fd_k) < 1e-5);
  }
}

TEST_CASE("softmax regularized loss: values against the simplex forms") {
  Rng rng(101);
  for (int t = 0; t < 2000; ++t) {
    Index k = 2 + static_cast<Index>(rng.below(5));
    Vector s(k);
    for (Index j = 0; j < k; ++j) s[j] = rng.uniform(-4.0, 4.0);
    Index y = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k)));
    double temp = rng.uniform(0.5, 3.0);
    Vector p = softmax(s, temp);

    VectorLoss plain = softmax_reg_loss_grad(s, y, RegParams(RegKind::none, 0.0), temp);
    CHECK(std::abs(plain.value + std::log(p[y])) < 1e-12);

    double a = rng.uniform(0.0, 1.0);
    VectorLoss ent = softmax_reg_loss_grad(s, y, RegParams(RegKind::entropic, a), temp);
    CHECK(std::abs(ent.value - entropic_log_loss(p, y, a)) < 1e-12);

    VectorLoss klu = softmax_reg_loss_grad(s, y, RegParams(RegKind::kl_uniform, a), temp);
    CHECK(std::abs(klu.value - kl_log_loss(p, y, a)) < 1e-12);
  }
}

TEST_CASE("softmax regularized loss: known gradients") {
  // symmetric scores, alpha = 0: gradient is p - onehot = (-1/2, 1/2)
  VectorLoss l = softmax_reg_loss_grad(vec2(0.0, 0.0), 0, RegParams());
  CHECK(l.gradient[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(l.gradient[1] == doctest::Approx(0.5).epsilon(1e-15));

  // kl-uniform with alpha = 1 is stationary exactly at uniform scores
  l = softmax_reg_loss_grad(Vector::Zero(4), 2, RegParams(RegKind::kl_uniform, 1.0));
  CHECK(l.gradient.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(l.value == doctest::Approx(0.0));

  // entropic gradient at uniform: entropy is stationary there, so the
  // regularizer contributes nothing
  VectorLoss e0 = softmax_reg_loss_grad(Vector::Zero(3), 0, RegParams(RegKind::entropic, 0.7));
  VectorLoss p0 = softmax_reg_loss_grad(Vector::Zero(3), 0, RegParams());
  CHECK((e0.gradient - p0.gradient).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("softmax regularized gradients match finite differences") {
  Rng rng(103);
  for (RegKind kind : {RegKind::none, RegKind::entropic, RegKind::kl_uniform}) {
    for (int t = 0; t < 100; ++t) {
      Index k = 2 + static_cast<Index>(rng.below(5));
      Vector s(k);
      for (Index j = 0; j < k; ++j) s[j] = rng.uniform(-3.0, 3.0);
      Index y = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k)));
      double a = kind == RegKind::none ? 0.0 : rng.uniform(0.0, 1.0);
      double temp = t % 3 == 0 ? 2.5 : 1.0;
      RegParams reg(kind, a);
      Vector analytic = softmax_reg_loss_grad(s, y, reg, temp).gradient;
      Vector fd = fd_gradient(s, y, reg, temp);
      for (Index j = 0; j < k; ++j) CHECK(testutil::rel_err(analytic[j], fd[j]) < 1e-5);
    }
  }
}

TEST_CASE("entropic minimizer drifts toward certainty as alpha grows") {
  // grid argmin over p in (0,1) of the binary entropic loss with y = 1;
  // the minimizing probability must be nondecreasing in alpha
  double prev_best = 0.0;
  for (double alpha : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0}) {
    double best_p = 0.0, best_v = infinity();
    for (int i = 1; i <= 999; ++i) {
      double p = static_cast<double>(i) / 1000.0;
      double v = entropic_log_loss(vec2(1.0 - p, p), 1, alpha);
      if (v < best_v) {
        best_v = v;
        best_p = p;
      }
    }
    CHECK(best_p >= prev_best);
    prev_best = best_p;
  }
  CHECK(prev_best == doctest::Approx(0.999));
}
