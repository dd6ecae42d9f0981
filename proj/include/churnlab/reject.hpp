#pragma once

#include "churnlab/prob.hpp"
#include "churnlab/types.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace churnlab {

/// Parameters of the abstain loss: cost d per rejection, half-width delta of
/// the abstain band on scores, slope ratio a of the convex surrogate
/// (defaults to (1-d)/d so the surrogate calibrates the d / 1-d thresholds),
/// and sharpness alpha of the smooth surrogate.
struct RejectParams {
  double d;
  double delta;
  double a;
  double alpha;

  explicit RejectParams(double d_, double alpha_ = 1.0, double delta_ = 0.0)
      : RejectParams(d_, alpha_, delta_, (1.0 - d_) / d_) {}

  RejectParams(double d_, double alpha_, double delta_, double a_)
      : d(d_), delta(delta_), a(a_), alpha(alpha_) {
    if (!(d > 0.0 && d < 0.5)) throw std::invalid_argument("RejectParams: need 0 < d < 0.5");
    if (!(delta >= 0.0)) throw std::invalid_argument("RejectParams: need delta >= 0");
    if (!(a > 1.0)) throw std::invalid_argument("RejectParams: need slope ratio a > 1");
    if (!(alpha >= 1.0)) throw std::invalid_argument("RejectParams: need alpha >= 1");
  }
};

/// Cost of the signed margin z = y * f(x): 1 if z < -delta, d inside the
/// abstain band |z| <= delta, 0 if z > delta.
inline double reject_loss(double z, const RejectParams& p) {
  if (!std::isfinite(z)) throw std::invalid_argument("reject_loss: non-finite margin");
  if (z < -p.delta) return 1.0;
  if (z > p.delta) return 0.0;
  return p.d;
}

/// Bayes rule under abstention: predict -1 when eta < d, abstain on
/// [d, 1-d], predict +1 when eta > 1-d.
inline int bayes_reject(const BinaryProb& eta, const RejectParams& p) {
  if (eta.value() < p.d) return -1;
  if (eta.value() > 1.0 - p.d) return 1;
  return 0;
}

/// Piecewise-linear convex surrogate: 1 - a z on z < 0, hinge 1 - z on
/// [0, 1), zero beyond.
inline double convex_surrogate(double z, const RejectParams& p) {
  if (!std::isfinite(z)) throw std::invalid_argument("convex_surrogate: non-finite margin");
  if (z < 0.0) return 1.0 - p.a * z;
  if (z < 1.0) return 1.0 - z;
  return 0.0;
}

/// Softplus smoothing of convex_surrogate at sharpness alpha, with d/dz.
/// Pointwise decreasing in alpha and >= the piecewise-linear surrogate.
inline ScalarFn smooth_surrogate(double z, const RejectParams& p) {
  if (!std::isfinite(z)) throw std::invalid_argument("smooth_surrogate: non-finite margin");
  double am1 = p.a - 1.0;
  ScalarFn out;
  out.value = (am1 * softplus(p.alpha * z) + softplus(p.alpha - p.alpha * z)) / p.alpha - am1 * z;
  out.derivative = am1 * sigmoid(p.alpha * z) - sigmoid(p.alpha - p.alpha * z) - am1;
  return out;
}

/// Maps a surrogate-optimal score back to a class probability. Solves the
/// stationarity condition of eta * phi(v) + (1 - eta) * phi(-v) for eta.
inline double link(double v, const RejectParams& p) {
  if (!std::isfinite(v)) throw std::invalid_argument("link: non-finite score");
  double sp = sigmoid(p.alpha * v + p.alpha);   // sigma(alpha (v + 1))
  double sm = sigmoid(-p.alpha * v + p.alpha);  // sigma(alpha (1 - v))
  double num = (1.0 - p.a) * sigmoid(p.alpha * v) - sp;
  double den = (1.0 - p.a) - sp - sm;
  if (std::abs(den) < 1e-12) throw std::domain_error("link: singular denominator");
  return num / den;
}

struct ScoreSearch {
  double lo = -3.0;
  double hi = 3.0;
  Index grid_points = 61;
  double tol = 1e-6;
};

/// Pointwise surrogate risk eta * phibar(z) + (1 - eta) * phibar(-z).
inline double smooth_pointwise_risk(double z, const BinaryProb& eta, const RejectParams& p) {
  return eta.value() * smooth_surrogate(z, p).value +
         (1.0 - eta.value()) * smooth_surrogate(-z, p).value;
}

/// Minimizer of the pointwise smooth-surrogate risk: coarse grid to bracket,
/// then ternary search (the objective is convex in z).
inline double bayes_optimal_score(const BinaryProb& eta, const RejectParams& p,
                                  const ScoreSearch& search = {}) {
  if (!(search.hi > search.lo) || search.grid_points < 3 || !(search.tol > 0.0))
    throw std::invalid_argument("bayes_optimal_score: bad search window");
  auto risk = [&](double z) {
    double r = smooth_pointwise_risk(z, eta, p);
    if (!std::isfinite(r)) throw std::runtime_error("bayes_optimal_score: non-finite risk");
    return r;
  };
  double step = (search.hi - search.lo) / static_cast<double>(search.grid_points - 1);
  Index best = 0;
  double best_val = infinity();
  for (Index i = 0; i < search.grid_points; ++i) {
    double val = risk(search.lo + step * static_cast<double>(i));
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  double lo = search.lo + step * static_cast<double>(best > 0 ? best - 1 : 0);
  double hi = search.lo + step * static_cast<double>(best + 1 < search.grid_points ? best + 1 : search.grid_points - 1);
  while (hi - lo > search.tol) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (risk(m1) <= risk(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

/// Mean abstain loss of signed scores against labels in {-1, +1}.
inline double reject_risk(const Vector& scores, const std::vector<int>& labels,
                          const RejectParams& p) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("reject_risk: size mismatch");
  if (scores.size() == 0) throw std::invalid_argument("reject_risk: empty sample");
  double total = 0.0;
  for (Index i = 0; i < scores.size(); ++i) {
    int y = labels[static_cast<std::size_t>(i)];
    if (y != -1 && y != 1) throw std::invalid_argument("reject_risk: labels must be -1/+1");
    total += reject_loss(y * scores[i], p);
  }
  return total / static_cast<double>(scores.size());
}

}  // namespace churnlab
