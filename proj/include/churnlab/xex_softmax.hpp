#pragma once

#include "churnlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace churnlab {

/// How many negatives to mine: either a fixed count or a fraction of the
/// candidate set, resolved as ceil(fraction * set_size).
class MiningSpec {
 public:
  static MiningSpec top_fraction(double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw std::invalid_argument("MiningSpec: fraction must be in (0,1]");
    MiningSpec spec;
    spec.by_fraction_ = true;
    spec.fraction_ = fraction;
    return spec;
  }
  static MiningSpec top_count(Index k) {
    if (k < 1) throw std::invalid_argument("MiningSpec: count must be >= 1");
    MiningSpec spec;
    spec.by_fraction_ = false;
    spec.count_ = k;
    return spec;
  }

  Index resolve(Index set_size) const {
    if (set_size < 1) throw std::invalid_argument("MiningSpec: no negatives to mine from");
    Index k = by_fraction_
                  ? static_cast<Index>(std::ceil(fraction_ * static_cast<double>(set_size)))
                  : count_;
    if (k < 1 || k > set_size) throw std::invalid_argument("MiningSpec: count exceeds set size");
    return k;
  }

  bool by_fraction() const { return by_fraction_; }
  double fraction() const { return fraction_; }
  Index count() const { return count_; }

 private:
  MiningSpec() = default;
  bool by_fraction_ = true;
  double fraction_ = 0.5;
  Index count_ = 0;
};

enum class TempScaling { lambda_squared, lambda };

/// Scaled cosine similarities between row-wise embeddings: by default the
/// printed form s_ij = lambda^2 <x_i / |x_i|, y_j / |y_j|>; the `lambda`
/// scaling uses a single factor of lambda instead.
inline SimilarityMatrix cosine_similarity_matrix(const Matrix& queries, const Matrix& docs,
                                                 double lambda,
                                                 TempScaling scaling = TempScaling::lambda_squared) {
  if (queries.cols() != docs.cols())
    throw std::invalid_argument("cosine_similarity_matrix: dimension mismatch");
  if (queries.rows() == 0 || docs.rows() == 0)
    throw std::invalid_argument("cosine_similarity_matrix: empty input");
  if (!queries.allFinite() || !docs.allFinite())
    throw std::invalid_argument("cosine_similarity_matrix: non-finite embedding");
  if (!(lambda > 0.0)) throw std::invalid_argument("cosine_similarity_matrix: lambda must be positive");
  auto normalize = [](const Matrix& m, const char* what) {
    Matrix out(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
      double norm = m.row(i).norm();
      if (norm == 0.0) throw std::invalid_argument(std::string(what) + ": zero-norm row");
      out.row(i) = m.row(i) / norm;
    }
    return out;
  };
  double scale = scaling == TempScaling::lambda_squared ? lambda * lambda : lambda;
  return scale * (normalize(queries, "cosine_similarity_matrix queries") *
                  normalize(docs, "cosine_similarity_matrix docs").transpose());
}

namespace detail {

inline void check_scores(const SimilarityMatrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("xex loss: score matrix must be square");
  if (s.rows() < 1) throw std::invalid_argument("xex loss: empty score matrix");
  if (!s.allFinite()) throw std::invalid_argument("xex loss: non-finite score");
}

}  // namespace detail

/// Off-diagonal entries of row i in column order: the scores of query i
/// against every non-matching document.
inline std::vector<double> negatives_per_query(const SimilarityMatrix& s, Index i) {
  detail::check_scores(s);
  if (i < 0 || i >= s.rows()) throw std::invalid_argument("negatives_per_query: row out of range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(s.cols() - 1));
  for (Index j = 0; j < s.cols(); ++j)
    if (j != i) out.push_back(s(i, j));
  return out;
}

namespace detail {

inline std::vector<Index> snm_mined_columns_unchecked(const SimilarityMatrix& s, Index i,
                                                      Index k) {
  std::vector<Index> cols;
  cols.reserve(static_cast<std::size_t>(s.cols() - 1));
  for (Index j = 0; j < s.cols(); ++j)
    if (j != i) cols.push_back(j);
  auto better = [&](Index a, Index b) {
    if (s(i, a) != s(i, b)) return s(i, a) > s(i, b);
    return a < b;
  };
  std::nth_element(cols.begin(), cols.begin() + (k - 1), cols.end(), better);
  cols.resize(static_cast<std::size_t>(k));
  std::sort(cols.begin(), cols.end());
  return cols;
}

}  // namespace detail

/// Columns of the top-k negatives of row i, ties broken toward the smaller
/// column; returned in ascending column order.
inline std::vector<Index> snm_mined_columns(const SimilarityMatrix& s, Index i,
                                            const MiningSpec& spec) {
  detail::check_scores(s);
  if (i < 0 || i >= s.rows()) throw std::invalid_argument("snm_mined_columns: row out of range");
  return detail::snm_mined_columns_unchecked(s, i, spec.resolve(s.cols() - 1));
}

/// The top-k off-diagonal entries of the whole matrix, ties broken by row
/// then column; returned in row-major order.
inline std::vector<std::pair<Index, Index>> ce_mined_entries(const SimilarityMatrix& s,
                                                             const MiningSpec& spec) {
  detail::check_scores(s);
  const Index n = s.rows();
  Index k = spec.resolve(n * n - n);
  std::vector<std::pair<Index, Index>> entries;
  entries.reserve(static_cast<std::size_t>(n * n - n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (j != i) entries.emplace_back(i, j);
  auto better = [&](const std::pair<Index, Index>& a, const std::pair<Index, Index>& b) {
    double va = s(a.first, a.second);
    double vb = s(b.first, b.second);
    if (va != vb) return va > vb;
    return a < b;
  };
  std::nth_element(entries.begin(), entries.begin() + (k - 1), entries.end(), better);
  entries.resize(static_cast<std::size_t>(k));
  std::sort(entries.begin(), entries.end());
  return entries;
}

struct XexLoss {
  double value = 0.0;
  Matrix gradient;
};

/// Per-row softmax against all candidates: mean over i of
/// -log(exp(s_ii) / sum_j exp(s_ij)).
inline XexLoss sampled_softmax_loss(const SimilarityMatrix& s) {
  detail::check_scores(s);
  const Index n = s.rows();
  XexLoss out;
  out.gradient = Matrix::Zero(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    double m = s.row(i).maxCoeff();
    Vector e = (s.row(i).array() - m).exp();
    double z = e.sum();
    out.value += (std::log(z) - (s(i, i) - m)) * inv_n;
    out.gradient.row(i) = (inv_n / z) * e.transpose();
    out.gradient(i, i) -= inv_n;
  }
  return out;
}

/// Sampled softmax restricted per row to the matching score plus that row's
/// top-k negatives. Mining the whole row recovers sampled_softmax_loss.
inline XexLoss snm_loss(const SimilarityMatrix& s, const MiningSpec& spec) {
  detail::check_scores(s);
  const Index n = s.rows();
  XexLoss out;
  out.gradient = Matrix::Zero(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const Index k = spec.resolve(n - 1);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> cols = detail::snm_mined_columns_unchecked(s, i, k);
    cols.insert(std::upper_bound(cols.begin(), cols.end(), i), i);
    double m = -infinity();
    for (Index j : cols) m = std::max(m, s(i, j));
    double z = 0.0;
    for (Index j : cols) z += std::exp(s(i, j) - m);
    out.value += (std::log(z) - (s(i, i) - m)) * inv_n;
    for (Index j : cols) out.gradient(i, j) = inv_n * std::exp(s(i, j) - m) / z;
    out.gradient(i, i) -= inv_n;
  }
  return out;
}

namespace detail {

// Shared-denominator softmax: every row competes against its own match plus
// one pool of off-diagonal entries common to all rows.
inline XexLoss pooled_ce_loss(const SimilarityMatrix& s,
                              const std::vector<std::pair<Index, Index>>& pool) {
  const Index n = s.rows();
  double m = s.diagonal().maxCoeff();
  for (const auto& [r, c] : pool) m = std::max(m, s(r, c));
  double t = 0.0;
  for (const auto& [r, c] : pool) t += std::exp(s(r, c) - m);

  XexLoss out;
  out.gradient = Matrix::Zero(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double inv_z_sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    double ei = std::exp(s(i, i) - m);
    double z = ei + t;
    out.value += (std::log(z) - (s(i, i) - m)) * inv_n;
    inv_z_sum += 1.0 / z;
    out.gradient(i, i) = inv_n * (ei / z - 1.0);
  }
  for (const auto& [r, c] : pool)
    out.gradient(r, c) += inv_n * std::exp(s(r, c) - m) * inv_z_sum;
  return out;
}

}  // namespace detail

/// Cross-example softmax: each matching score competes against every
/// off-diagonal entry of the matrix, so scores must be comparable across
/// queries, not just within a row.
inline XexLoss ce_softmax_loss(const SimilarityMatrix& s) {
  detail::check_scores(s);
  const Index n = s.rows();
  std::vector<std::pair<Index, Index>> pool;
  pool.reserve(static_cast<std::size_t>(n * n - n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (j != i) pool.emplace_back(i, j);
  return detail::pooled_ce_loss(s, pool);
}

/// Cross-example softmax over the top-k off-diagonal entries of the whole
/// matrix. Mining every entry recovers ce_softmax_loss.
inline XexLoss ce_mining_loss(const SimilarityMatrix& s, const MiningSpec& spec) {
  detail::check_scores(s);
  return detail::pooled_ce_loss(s, ce_mined_entries(s, spec));
}

}  // namespace churnlab
