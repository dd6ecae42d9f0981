#pragma once

#include "churnlab/prob.hpp"
#include "churnlab/types.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

enum class RegKind { none, entropic, kl_uniform };

/// Regularizer choice and strength. For the KL-to-uniform family alpha is a
/// convex mixing weight and must lie in [0, 1].
struct RegParams {
  RegKind kind = RegKind::none;
  double alpha = 0.0;

  RegParams() = default;
  RegParams(RegKind k, double a) : kind(k), alpha(a) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("RegParams: alpha must be >= 0");
    if (kind == RegKind::kl_uniform && alpha > 1.0)
      throw std::invalid_argument("RegParams: kl-uniform alpha must be in [0,1]");
  }
};

struct VectorLoss {
  double value = 0.0;
  Vector gradient;
};

/// -log p_y + alpha * H(p).
template <typename Derived>
double entropic_log_loss(const Eigen::MatrixBase<Derived>& p, Index y, double alpha) {
  if (y < 0 || y >= p.size()) throw std::invalid_argument("entropic_log_loss: label out of range");
  double py = p[y];
  double nll = py > 0.0 ? -std::log(py) : infinity();
  return nll + alpha * entropy(p);
}

template <typename Scalar>
double entropic_log_loss(const ProbVectorT<Scalar>& p, Index y, double alpha) {
  return entropic_log_loss(p.values(), y, alpha);
}

/// (1 - alpha) * (-log p_y) + alpha * KL(Unif || p).
template <typename Derived>
double kl_log_loss(const Eigen::MatrixBase<Derived>& p, Index y, double alpha) {
  if (y < 0 || y >= p.size()) throw std::invalid_argument("kl_log_loss: label out of range");
  double py = p[y];
  double nll = py > 0.0 ? -std::log(py) : infinity();
  return (1.0 - alpha) * nll + alpha * kl_from_uniform(p);
}

template <typename Scalar>
double kl_log_loss(const ProbVectorT<Scalar>& p, Index y, double alpha) {
  return kl_log_loss(p.values(), y, alpha);
}

// Binary logistic forms. Written in softplus terms so that values and
// derivatives stay finite-difference checkable deep into saturation.
//   -log sigma(f)        = softplus(-f)
//   -log(1 - sigma(f))   = softplus(f)
//   H_bin(sigma(f))      = p softplus(-f) + (1-p) softplus(f)
//   KL(Unif || sigma(f)) = -log 2 + (softplus(f) + softplus(-f)) / 2

/// -log sigma(y ? f : -f) + alpha * H_bin(sigma(f)), with d/df.
inline ScalarFn entropic_logistic_loss(double f, int y, double alpha) {
  if (!std::isfinite(f)) throw std::invalid_argument("entropic_logistic_loss: non-finite score");
  if (y != 0 && y != 1) throw std::invalid_argument("entropic_logistic_loss: label must be 0/1");
  double p = sigmoid(f);
  double nll = y == 1 ? softplus(-f) : softplus(f);
  double hbin = p * softplus(-f) + (1.0 - p) * softplus(f);
  ScalarFn out;
  out.value = nll + alpha * hbin;
  out.derivative = (p - y) + alpha * (-f * p * (1.0 - p));
  return out;
}

/// (1 - alpha) * -log sigma(y ? f : -f) + alpha * KL(Unif || sigma(f)), with d/df.
inline ScalarFn kl_logistic_loss(double f, int y, double alpha) {
  if (!std::isfinite(f)) throw std::invalid_argument("kl_logistic_loss: non-finite score");
  if (y != 0 && y != 1) throw std::invalid_argument("kl_logistic_loss: label must be 0/1");
  double p = sigmoid(f);
  double nll = y == 1 ? softplus(-f) : softplus(f);
  double klu = -std::log(2.0) + 0.5 * (softplus(f) + softplus(-f));
  ScalarFn out;
  out.value = (1.0 - alpha) * nll + alpha * klu;
  out.derivative = (1.0 - alpha) * (p - y) + alpha * (p - 0.5);
  return out;
}

/// Regularized loss of softmax(temperature * scores) against label y, with
/// the analytic gradient in the scores. alpha = 0 recovers the standard
/// softmax cross-entropy gradient p - onehot(y).
inline VectorLoss softmax_reg_loss_grad(const Vector& scores, Index y, const RegParams& reg,
                                        double temperature = 1.0) {
  const Index k = scores.size();
  if (y < 0 || y >= k) throw std::invalid_argument("softmax_reg_loss_grad: label out of range");
  if (!(temperature > 0.0))
    throw std::invalid_argument("softmax_reg_loss_grad: temperature must be positive");
  if (!scores.allFinite()) throw std::invalid_argument("softmax_reg_loss_grad: non-finite score");

  Vector s = temperature * scores;
  double m = s.maxCoeff();
  Vector e = (s.array() - m).exp();
  double z = e.sum();
  Vector p = e / z;
  double lse = m + std::log(z);
  // log p_j without going through the (possibly underflowed) probabilities
  Vector logp = s.array() - lse;

  VectorLoss out;
  out.gradient = Vector::Zero(k);
  double nll = -logp[y];
  switch (reg.kind) {
    case RegKind::none: {
      out.value = nll;
      out.gradient = temperature * (p - Vector::Unit(k, y));
      break;
    }
    case RegKind::entropic: {
      double h = -(p.array() * logp.array()).sum();
      out.value = nll + reg.alpha * h;
      Vector dh = -(p.array() * (logp.array() + h)).matrix();
      out.gradient = temperature * (p - Vector::Unit(k, y) + reg.alpha * dh);
      break;
    }
    case RegKind::kl_uniform: {
      double klu = -std::log(static_cast<double>(k)) - logp.mean();
      out.value = (1.0 - reg.alpha) * nll + reg.alpha * klu;
      Vector target = (1.0 - reg.alpha) * Vector::Unit(k, y) +
                      (reg.alpha / static_cast<double>(k)) * Vector::Ones(k);
      out.gradient = temperature * (p - target);
      break;
    }
  }
  return out;
}

}  // namespace churnlab
