#pragma once

#include "churnlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace churnlab {

/// Fraction of queries whose matching document (column i for row i) ranks in
/// the top k of its row; score ties are broken toward the lower document
/// index.
inline double recall_at_k(const Matrix& s, Index k) {
  if (s.rows() < 1 || s.cols() < s.rows())
    throw std::invalid_argument("recall_at_k: need an n x m score matrix with m >= n");
  if (!s.allFinite()) throw std::invalid_argument("recall_at_k: non-finite score");
  if (k < 1 || k > s.cols()) throw std::invalid_argument("recall_at_k: k out of range");
  Index hits = 0;
  for (Index i = 0; i < s.rows(); ++i) {
    double match = s(i, i);
    Index rank = 0;
    for (Index j = 0; j < s.cols(); ++j) {
      if (j == i) continue;
      if (s(i, j) > match || (s(i, j) == match && j < i)) ++rank;
    }
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(s.rows());
}

struct ScoredPair {
  double score = 0.0;
  bool match = false;
};

/// Precision–recall points swept over the distinct score values in
/// descending order, anchored at (recall 0, precision of the top group);
/// auc is the trapezoidal integral of the stored points.
struct PRCurve {
  std::vector<double> recall;
  std::vector<double> precision;
  double auc = 0.0;
};

inline PRCurve pr_curve(std::vector<ScoredPair> pairs) {
  long long positives = 0;
  for (const ScoredPair& sp : pairs) {
    if (!std::isfinite(sp.score)) throw std::invalid_argument("pr_curve: non-finite score");
    positives += sp.match ? 1 : 0;
  }
  if (positives == 0) throw std::invalid_argument("pr_curve: no positive pairs");
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    return a.score > b.score;
  });

  PRCurve out;
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j].score == pairs[i].score) {
      tp += pairs[j].match ? 1 : 0;
      fp += pairs[j].match ? 0 : 1;
      ++j;
    }
    out.recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
    out.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    i = j;
  }
  out.recall.insert(out.recall.begin(), 0.0);
  out.precision.insert(out.precision.begin(), out.precision.front());
  for (std::size_t k = 1; k < out.recall.size(); ++k)
    out.auc += (out.recall[k] - out.recall[k - 1]) * (out.precision[k] + out.precision[k - 1]) / 2.0;
  return out;
}

/// PR curve over every entry of a square similarity matrix, diagonal
/// entries flagged as the matching pairs.
inline PRCurve pr_curve_from_matrix(const SimilarityMatrix& s) {
  if (s.rows() != s.cols() || s.rows() < 1)
    throw std::invalid_argument("pr_curve_from_matrix: need a nonempty square matrix");
  std::vector<ScoredPair> pairs;
  pairs.reserve(static_cast<std::size_t>(s.rows() * s.cols()));
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) pairs.push_back({s(i, j), i == j});
  return pr_curve(std::move(pairs));
}

struct Histogram {
  Vector edges;                   // bins + 1 ascending edges
  std::vector<long long> counts;  // per-bin counts, conserving the sample size
};

/// Fixed-width bins over [min, max]; a degenerate range puts every value in
/// bin 0. Values on the upper edge land in the last bin.
inline Histogram histogram(const std::vector<double>& values, Index bins) {
  if (values.empty()) throw std::invalid_argument("histogram: empty input");
  if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
  double lo = values[0], hi = values[0];
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("histogram: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Histogram h;
  h.edges = Vector::LinSpaced(bins + 1, lo, hi);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    Index b = 0;
    if (width > 0.0) {
      b = static_cast<Index>(std::floor((v - lo) / width));
      b = std::max<Index>(0, std::min(b, bins - 1));
    }
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

/// Bins given by explicit ascending edges; out-of-range values clamp into
/// the boundary bins so counts still conserve the sample size.
inline Histogram histogram(const std::vector<double>& values, const Vector& edges) {
  if (values.empty()) throw std::invalid_argument("histogram: empty input");
  if (edges.size() < 2) throw std::invalid_argument("histogram: need at least two edges");
  for (Index i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("histogram: edges must ascend");
  Histogram h;
  h.edges = edges;
  h.counts.assign(static_cast<std::size_t>(edges.size() - 1), 0);
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("histogram: non-finite value");
    Index b = 0;
    while (b + 2 < edges.size() && v >= edges[b + 1]) ++b;
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

/// Nearest-rank percentile: the ceil(q/100 * N)-th smallest value.
inline double nearest_rank_percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("nearest_rank_percentile: empty input");
  if (!(q > 0.0 && q <= 100.0))
    throw std::invalid_argument("nearest_rank_percentile: q outside (0,100]");
  std::sort(values.begin(), values.end());
  auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::max<std::size_t>(1, std::min(rank, values.size()));
  return values[rank - 1];
}

/// Per-query neighbor-score curves: each sampled row of S sorted descending,
/// plus 5th/95th percentile envelopes across queries at every rank. A wide
/// envelope means scores are not comparable across queries.
struct ScoreProfile {
  Matrix sorted_scores;  // one row per sampled query, columns are ranks
  Vector p5;
  Vector p95;
  double envelope_width = 0.0;  // mean of p95 - p5 over ranks
};

inline ScoreProfile score_distribution_profile(const Matrix& s, const std::vector<Index>& sample) {
  if (sample.empty()) throw std::invalid_argument("score_distribution_profile: empty sample");
  if (s.rows() < 1 || s.cols() < 1)
    throw std::invalid_argument("score_distribution_profile: empty matrix");
  if (!s.allFinite()) throw std::invalid_argument("score_distribution_profile: non-finite score");
  ScoreProfile out;
  out.sorted_scores.resize(static_cast<Index>(sample.size()), s.cols());
  for (std::size_t r = 0; r < sample.size(); ++r) {
    Index q = sample[r];
    if (q < 0 || q >= s.rows())
      throw std::invalid_argument("score_distribution_profile: query out of range");
    std::vector<double> row(s.row(q).begin(), s.row(q).end());
    std::sort(row.begin(), row.end(), std::greater<>());
    for (Index c = 0; c < s.cols(); ++c) out.sorted_scores(static_cast<Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  out.p5.resize(s.cols());
  out.p95.resize(s.cols());
  for (Index c = 0; c < s.cols(); ++c) {
    std::vector<double> col(out.sorted_scores.col(c).begin(), out.sorted_scores.col(c).end());
    out.p5[c] = nearest_rank_percentile(col, 5.0);
    out.p95[c] = nearest_rank_percentile(col, 95.0);
  }
  out.envelope_width = (out.p95 - out.p5).mean();
  return out;
}

inline ScoreProfile score_distribution_profile(const Matrix& s) {
  std::vector<Index> all(static_cast<std::size_t>(s.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return score_distribution_profile(s, all);
}

}  // namespace churnlab
