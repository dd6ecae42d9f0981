#pragma once

#include "churnlab/types.hpp"

#include <cmath>
#include <stdexcept>

namespace churnlab {

namespace detail {
template <typename DerivedP, typename DerivedQ>
void check_same_dim(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q,
                    const char* who) {
  if (p.size() != q.size()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}
}  // namespace detail

/// Total variation distance, D_TV = (1/2) sum_j |p_j - q_j|.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar tv(const Eigen::MatrixBase<DerivedP>& p,
                             const Eigen::MatrixBase<DerivedQ>& q) {
  detail::check_same_dim(p, q, "tv");
  return (p - q).cwiseAbs().sum() / 2;
}

/// L1 distance, sum_j |p_j - q_j| = 2 * tv.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar l1(const Eigen::MatrixBase<DerivedP>& p,
                             const Eigen::MatrixBase<DerivedQ>& q) {
  detail::check_same_dim(p, q, "l1");
  return (p - q).cwiseAbs().sum();
}

/// Squared Hellinger distance, 1 - sum_j sqrt(p_j q_j).
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar hellinger_sq(const Eigen::MatrixBase<DerivedP>& p,
                                       const Eigen::MatrixBase<DerivedQ>& q) {
  detail::check_same_dim(p, q, "hellinger_sq");
  return 1 - p.cwiseProduct(q).cwiseAbs().cwiseSqrt().sum();
}

/// Hellinger distance, (1/sqrt 2) * || sqrt(p) - sqrt(q) ||_2.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar hellinger(const Eigen::MatrixBase<DerivedP>& p,
                                    const Eigen::MatrixBase<DerivedQ>& q) {
  detail::check_same_dim(p, q, "hellinger");
  using std::sqrt;
  return (p.cwiseSqrt() - q.cwiseSqrt()).norm() / sqrt(typename DerivedP::Scalar(2));
}

/// Collision probability, sum_j p_j q_j: the chance two independent draws
/// from p and q coincide.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar collision(const Eigen::MatrixBase<DerivedP>& p,
                                    const Eigen::MatrixBase<DerivedQ>& q) {
  detail::check_same_dim(p, q, "collision");
  return p.cwiseProduct(q).sum();
}

/// L_r deviation. For r >= 1 this is the norm (sum |p-q|^r)^(1/r); for
/// 0 < r < 1 the untransformed sum of powered deviations (not a norm).
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar lp_dist(const Eigen::MatrixBase<DerivedP>& p,
                                  const Eigen::MatrixBase<DerivedQ>& q,
                                  typename DerivedP::Scalar exponent) {
  using Scalar = typename DerivedP::Scalar;
  detail::check_same_dim(p, q, "lp_dist");
  if (!(exponent > 0)) throw std::invalid_argument("lp_dist: exponent must be positive");
  Scalar s = (p - q).cwiseAbs().array().pow(exponent).sum();
  if (exponent >= 1) return std::pow(s, Scalar(1) / exponent);
  return s;
}

/// Maximum of lp_dist over two points of a common simplex: attained at
/// disjoint one-hot vectors.
template <typename Scalar>
Scalar lp_dist_max(Scalar exponent) {
  if (!(exponent > 0)) throw std::invalid_argument("lp_dist_max: exponent must be positive");
  if (exponent >= 1) return std::pow(Scalar(2), Scalar(1) / exponent);
  return Scalar(2);
}

/// lp_dist scaled into [0, 1] by its simplex-pair maximum.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar lp_dist_normalized(const Eigen::MatrixBase<DerivedP>& p,
                                             const Eigen::MatrixBase<DerivedQ>& q,
                                             typename DerivedP::Scalar exponent) {
  return lp_dist(p, q, exponent) / lp_dist_max(exponent);
}

#define CHURNLAB_PROBVECTOR_BINARY(fn)                                        \
  template <typename Scalar>                                                  \
  Scalar fn(const ProbVectorT<Scalar>& p, const ProbVectorT<Scalar>& q) {     \
    return fn(p.values(), q.values());                                        \
  }
CHURNLAB_PROBVECTOR_BINARY(tv)
CHURNLAB_PROBVECTOR_BINARY(l1)
CHURNLAB_PROBVECTOR_BINARY(hellinger)
CHURNLAB_PROBVECTOR_BINARY(hellinger_sq)
CHURNLAB_PROBVECTOR_BINARY(collision)
#undef CHURNLAB_PROBVECTOR_BINARY

template <typename Scalar>
Scalar lp_dist(const ProbVectorT<Scalar>& p, const ProbVectorT<Scalar>& q, Scalar exponent) {
  return lp_dist(p.values(), q.values(), exponent);
}

template <typename Scalar>
Scalar lp_dist_normalized(const ProbVectorT<Scalar>& p, const ProbVectorT<Scalar>& q,
                          Scalar exponent) {
  return lp_dist_normalized(p.values(), q.values(), exponent);
}

}  // namespace churnlab
