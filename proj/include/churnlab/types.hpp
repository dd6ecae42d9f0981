#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace churnlab {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Unconstrained real scores (logits). Finiteness is checked by the
/// operations that consume them.
using ScoreVector = Vector;

/// Pairwise query/document scores; rows are queries, the diagonal holds the
/// matching pairs.
using SimilarityMatrix = Matrix;

inline constexpr double kSimplexSumTol = 1e-9;
inline constexpr double kSimplexNegTol = -1e-12;

/// A point on the K-simplex (K >= 2). Construction clamps entries in
/// [-1e-12, 0) to zero and renormalizes when the sum deviates from 1 by at
/// most 1e-9; anything worse is rejected.
template <typename Scalar>
class ProbVectorT {
 public:
  explicit ProbVectorT(VectorX<Scalar> v) : v_(std::move(v)) {
    if (v_.size() < 2) throw std::invalid_argument("ProbVector: need K >= 2");
    Scalar sum = 0;
    for (Index i = 0; i < v_.size(); ++i) {
      Scalar x = v_[i];
      if (!std::isfinite(x)) throw std::invalid_argument("ProbVector: non-finite entry");
      if (x < 0) {
        if (x < Scalar(kSimplexNegTol)) throw std::invalid_argument("ProbVector: negative entry");
        v_[i] = x = 0;
      }
      sum += x;
    }
    if (std::abs(sum - Scalar(1)) > Scalar(kSimplexSumTol))
      throw std::invalid_argument("ProbVector: entries do not sum to 1");
    if (sum != Scalar(1)) v_ /= sum;
  }

  static ProbVectorT uniform(Index k) {
    return ProbVectorT(VectorX<Scalar>::Constant(k, Scalar(1) / Scalar(k)));
  }
  static ProbVectorT onehot(Index k, Index label) {
    if (label < 0 || label >= k) throw std::invalid_argument("ProbVector: label out of range");
    VectorX<Scalar> v = VectorX<Scalar>::Zero(k);
    v[label] = 1;
    return ProbVectorT(std::move(v));
  }

  const VectorX<Scalar>& values() const { return v_; }
  Index size() const { return v_.size(); }
  Scalar operator[](Index i) const { return v_[i]; }

 private:
  VectorX<Scalar> v_;
};

using ProbVector = ProbVectorT<double>;

/// Probability of class 1 in a binary problem.
struct BinaryProb {
  double p;
  explicit BinaryProb(double value) : p(value) {
    if (!(value >= 0.0 && value <= 1.0))
      throw std::invalid_argument("BinaryProb: p outside [0,1]");
  }
  double value() const { return p; }
};

/// A scalar function value together with its derivative.
struct ScalarFn {
  double value = 0.0;
  double derivative = 0.0;
};

/// Argmax label and confidence gap of a probability vector.
struct PredictionMargin {
  Index label = 0;
  double margin = 0.0;
};

inline double infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace churnlab
