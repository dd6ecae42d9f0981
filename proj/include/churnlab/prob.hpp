#pragma once

#include "churnlab/types.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

/// log(1 + e^x) without overflow.
inline double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

/// Logistic sigmoid, stable on both tails. sigmoid(f) + sigmoid(-f) == 1
/// to machine precision.
inline double sigmoid(double f) {
  if (!std::isfinite(f)) throw std::invalid_argument("sigmoid: non-finite input");
  if (f >= 0.0) {
    double u = std::exp(-f);
    return 1.0 / (1.0 + u);
  }
  double u = std::exp(f);
  return u / (1.0 + u);
}

/// softmax(temperature * scores), computed with max subtraction.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& scores,
                                          typename Derived::Scalar temperature = 1) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() < 1) throw std::invalid_argument("softmax: empty scores");
  if (!(temperature > 0)) throw std::invalid_argument("softmax: temperature must be positive");
  if (!scores.allFinite()) throw std::invalid_argument("softmax: non-finite score");
  VectorX<Scalar> s = temperature * scores;
  VectorX<Scalar> e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

template <typename Scalar>
ProbVectorT<Scalar> softmax_prob(const VectorX<Scalar>& scores, Scalar temperature = 1) {
  return ProbVectorT<Scalar>(softmax(scores, temperature));
}

/// Shannon entropy in nats, with 0 log 0 := 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h = 0;
  for (Index j = 0; j < p.size(); ++j) {
    Scalar pj = p[j];
    if (pj > 0) h -= pj * std::log(pj);
  }
  return h;
}

template <typename Scalar>
Scalar entropy(const ProbVectorT<Scalar>& p) {
  return entropy(p.values());
}

inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

inline double binary_entropy(const BinaryProb& p) { return binary_entropy(p.p); }

/// H(p, q) = -sum_j p_j log q_j. Returns +inf when q lacks support where p
/// has mass.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar cross_entropy(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size()) throw std::invalid_argument("cross_entropy: dimension mismatch");
  Scalar h = 0;
  for (Index j = 0; j < p.size(); ++j) {
    Scalar pj = p[j];
    if (pj > 0) {
      if (q[j] <= 0) return std::numeric_limits<Scalar>::infinity();
      h -= pj * std::log(q[j]);
    }
  }
  return h;
}

template <typename Scalar>
Scalar cross_entropy(const ProbVectorT<Scalar>& p, const ProbVectorT<Scalar>& q) {
  return cross_entropy(p.values(), q.values());
}

/// KL(p || q) = sum_j p_j log(p_j / q_j), +inf on support mismatch.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl(const Eigen::MatrixBase<DerivedP>& p,
                             const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size()) throw std::invalid_argument("kl: dimension mismatch");
  Scalar d = 0;
  for (Index j = 0; j < p.size(); ++j) {
    Scalar pj = p[j];
    if (pj > 0) {
      if (q[j] <= 0) return std::numeric_limits<Scalar>::infinity();
      d += pj * std::log(pj / q[j]);
    }
  }
  return d;
}

template <typename Scalar>
Scalar kl(const ProbVectorT<Scalar>& p, const ProbVectorT<Scalar>& q) {
  return kl(p.values(), q.values());
}

/// KL(Unif_K || p).
template <typename Derived>
typename Derived::Scalar kl_from_uniform(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> u = VectorX<Scalar>::Constant(p.size(), Scalar(1) / Scalar(p.size()));
  return kl(u, p);
}

template <typename Scalar>
Scalar kl_from_uniform(const ProbVectorT<Scalar>& p) {
  return kl_from_uniform(p.values());
}

}  // namespace churnlab
