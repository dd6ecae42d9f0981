#pragma once

#include "churnlab/divergence.hpp"
#include "churnlab/prob.hpp"
#include "churnlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace churnlab {

/// Argmax with lowest-index tie-break plus the gap to the best other entry.
/// In the binary case the margin equals |2 p_0 - 1|.
template <typename Derived>
PredictionMargin margin(const Eigen::MatrixBase<Derived>& p) {
  if (p.size() < 2) throw std::invalid_argument("margin: need K >= 2");
  Index best = 0;
  for (Index j = 1; j < p.size(); ++j)
    if (p[j] > p[best]) best = j;
  double runner = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < p.size(); ++j)
    if (j != best) runner = std::max(runner, static_cast<double>(p[j]));
  return PredictionMargin{best, static_cast<double>(p[best]) - runner};
}

template <typename Scalar>
PredictionMargin margin(const ProbVectorT<Scalar>& p) {
  return margin(p.values());
}

/// Entropy as a function of the binary prediction confidence,
/// g(gamma) = H_bin((1 + gamma) / 2). Strictly decreasing on [0, 1].
inline double margin_entropy(double gamma) { return binary_entropy((1.0 + gamma) / 2.0); }

/// g'(gamma) = (1/2) log((1 - gamma) / (1 + gamma)).
inline double margin_entropy_derivative(double gamma) {
  return 0.5 * std::log((1.0 - gamma) / (1.0 + gamma));
}

/// Predictions of two models over the same sample; rows are probability
/// vectors, labels optional.
struct PairedPredictions {
  Matrix model1;
  Matrix model2;
  std::optional<std::vector<Index>> labels;

  PairedPredictions(Matrix m1, Matrix m2, std::optional<std::vector<Index>> y = std::nullopt)
      : model1(std::move(m1)), model2(std::move(m2)), labels(std::move(y)) {
    if (model1.rows() != model2.rows() || model1.cols() != model2.cols())
      throw std::invalid_argument("PairedPredictions: shape mismatch");
    if (model1.cols() < 2) throw std::invalid_argument("PairedPredictions: need K >= 2");
    check_rows(model1);
    check_rows(model2);
    if (labels) {
      if (static_cast<Index>(labels->size()) != model1.rows())
        throw std::invalid_argument("PairedPredictions: label count mismatch");
      for (Index y : *labels)
        if (y < 0 || y >= model1.cols())
          throw std::invalid_argument("PairedPredictions: label out of range");
    }
  }

  Index samples() const { return model1.rows(); }
  Index classes() const { return model1.cols(); }

  PairedPredictions swapped() const { return PairedPredictions(model2, model1, labels); }

 private:
  static void check_rows(const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
      double sum = 0.0;
      for (Index j = 0; j < m.cols(); ++j) {
        double x = m(i, j);
        if (!std::isfinite(x) || x < kSimplexNegTol)
          throw std::invalid_argument("PairedPredictions: invalid probability entry");
        sum += x;
      }
      if (std::abs(sum - 1.0) > kSimplexSumTol)
        throw std::invalid_argument("PairedPredictions: row does not sum to 1");
    }
  }
};

/// Fraction of samples whose argmax labels disagree.
inline double hard_churn(const PairedPredictions& pp) {
  if (pp.samples() == 0) throw std::invalid_argument("hard_churn: empty input");
  Index flips = 0;
  for (Index i = 0; i < pp.samples(); ++i)
    if (margin(pp.model1.row(i).transpose()).label != margin(pp.model2.row(i).transpose()).label)
      ++flips;
  return static_cast<double>(flips) / static_cast<double>(pp.samples());
}

/// Randomized churn: 1 - mean collision probability of the paired
/// predictions.
inline double soft_churn(const PairedPredictions& pp) {
  if (pp.samples() == 0) throw std::invalid_argument("soft_churn: empty input");
  double acc = 0.0;
  for (Index i = 0; i < pp.samples(); ++i)
    acc += collision(pp.model1.row(i).transpose(), pp.model2.row(i).transpose());
  return 1.0 - acc / static_cast<double>(pp.samples());
}

/// Mean of -log collision; a monotone proxy for soft churn. +inf if any
/// collision is zero.
inline double log_collision_proxy(const PairedPredictions& pp) {
  if (pp.samples() == 0) throw std::invalid_argument("log_collision_proxy: empty input");
  double acc = 0.0;
  for (Index i = 0; i < pp.samples(); ++i) {
    double c = collision(pp.model1.row(i).transpose(), pp.model2.row(i).transpose());
    if (c <= 0.0) return infinity();
    acc += -std::log(c);
  }
  return acc / static_cast<double>(pp.samples());
}

/// Fraction of predictions whose argmax differs from the label.
inline double error_rate(const Matrix& preds, const std::vector<Index>& labels) {
  if (preds.rows() == 0) throw std::invalid_argument("error_rate: empty input");
  if (static_cast<Index>(labels.size()) != preds.rows())
    throw std::invalid_argument("error_rate: label count mismatch");
  Index wrong = 0;
  for (Index i = 0; i < preds.rows(); ++i)
    if (margin(preds.row(i).transpose()).label != labels[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(preds.rows());
}

// ---------------------------------------------------------------------------
// Executable bound checkers. Each returns the quantities entering the bound
// plus a violation count; on valid inputs all bounds hold with slack >= -1e-12.

inline constexpr double kBoundSlack = 1e-12;

/// churn <= err1 + err2 (union bound).
struct ChurnErrReport {
  double churn = 0.0;
  double err1 = 0.0;
  double err2 = 0.0;
  bool holds = false;
};

inline ChurnErrReport check_churn_err_bound(const PairedPredictions& pp) {
  if (!pp.labels) throw std::invalid_argument("check_churn_err_bound: labels required");
  ChurnErrReport r;
  r.churn = hard_churn(pp);
  r.err1 = error_rate(pp.model1, *pp.labels);
  r.err2 = error_rate(pp.model2, *pp.labels);
  r.holds = r.churn <= r.err1 + r.err2 + kBoundSlack;
  return r;
}

/// Per sample, -log collision(p, q) <= H(p, q) and <= H(q, p) (Jensen).
struct KlProxyReport {
  long violations = 0;
  double max_violation = 0.0;  // max over samples of lhs - min(rhs); <= 0 when the bound holds
  bool holds = false;
};

inline KlProxyReport check_kl_proxy_bound(const PairedPredictions& pp) {
  KlProxyReport r;
  r.max_violation = -infinity();
  for (Index i = 0; i < pp.samples(); ++i) {
    auto p = pp.model1.row(i).transpose();
    auto q = pp.model2.row(i).transpose();
    double c = collision(p, q);
    double lhs = c > 0.0 ? -std::log(c) : infinity();
    double rhs = std::min(cross_entropy(p, q), cross_entropy(q, p));
    double slack = (std::isinf(lhs) && std::isinf(rhs)) ? 0.0 : lhs - rhs;
    r.max_violation = std::max(r.max_violation, slack);
    if (slack > kBoundSlack) ++r.violations;
  }
  r.holds = r.violations == 0;
  return r;
}

/// soft churn >= mean hellinger_sq >= (1/2) mean tv^2, and the Hoelder upper
/// bound soft churn <= 1 - mean collision(p, p) + mean l1(p, q). Checked per
/// sample and on the aggregates.
struct HellingerSandwichReport {
  double soft_churn = 0.0;
  double mean_hellinger_sq = 0.0;
  double half_mean_tv_sq = 0.0;
  double upper_bound = 0.0;  // 1 - mean self-collision + mean l1
  long violations = 0;
  bool holds = false;
};

inline HellingerSandwichReport check_hellinger_sandwich(const PairedPredictions& pp) {
  if (pp.samples() == 0) throw std::invalid_argument("check_hellinger_sandwich: empty input");
  HellingerSandwichReport r;
  double coll = 0.0, hsq = 0.0, tvsq = 0.0, self = 0.0, l1d = 0.0;
  for (Index i = 0; i < pp.samples(); ++i) {
    auto p = pp.model1.row(i).transpose();
    auto q = pp.model2.row(i).transpose();
    double ci = collision(p, q);
    double hi = hellinger_sq(p, q);
    double ti = tv(p, q);
    double si = collision(p, p);
    double li = l1(p, q);
    coll += ci;
    hsq += hi;
    tvsq += ti * ti;
    self += si;
    l1d += li;
    if (1.0 - ci < hi - kBoundSlack) ++r.violations;
    if (hi < 0.5 * ti * ti - kBoundSlack) ++r.violations;
    if (1.0 - ci > 1.0 - si + li + kBoundSlack) ++r.violations;
  }
  double n = static_cast<double>(pp.samples());
  r.soft_churn = 1.0 - coll / n;
  r.mean_hellinger_sq = hsq / n;
  r.half_mean_tv_sq = 0.5 * tvsq / n;
  r.upper_bound = 1.0 - self / n + l1d / n;
  bool chain = r.soft_churn >= r.mean_hellinger_sq - kBoundSlack &&
               r.mean_hellinger_sq >= r.half_mean_tv_sq - kBoundSlack &&
               r.soft_churn <= r.upper_bound + kBoundSlack;
  r.holds = chain && r.violations == 0;
  return r;
}

/// Every sample that churns satisfies l1(p, q) >= min(margin(p), margin(q)).
struct MarginEventReport {
  long churn_events = 0;
  long violations = 0;
  bool holds = false;
};

inline MarginEventReport check_margin_event(const PairedPredictions& pp) {
  MarginEventReport r;
  for (Index i = 0; i < pp.samples(); ++i) {
    auto p = pp.model1.row(i).transpose();
    auto q = pp.model2.row(i).transpose();
    PredictionMargin m1 = margin(p);
    PredictionMargin m2 = margin(q);
    if (m1.label == m2.label) continue;
    ++r.churn_events;
    if (l1(p, q) < std::min(m1.margin, m2.margin) - kBoundSlack) ++r.violations;
  }
  r.holds = r.violations == 0;
  return r;
}

/// A candidate predictor realized as a table of per-sample probability rows.
struct CandidateTable {
  Matrix predictions;  // rows are probability vectors over the shared data
};

struct EntropyMinimizerReport {
  Index base_index = 0;     // log-loss minimizer
  Index reg_index = 0;      // entropy-regularized minimizer
  double base_entropy = 0;  // mean entropy of the log-loss minimizer
  double reg_entropy = 0;   // mean entropy of the regularized minimizer
  bool holds = false;
};

/// The minimizer of log-loss + alpha * mean entropy never has higher mean
/// entropy than the plain log-loss minimizer over the same candidate set.
/// Ties are broken toward lower mean entropy, then lower index.
inline EntropyMinimizerReport entropy_minimizer_check(const std::vector<CandidateTable>& candidates,
                                                      const std::vector<Index>& labels,
                                                      double alpha) {
  if (candidates.empty()) throw std::invalid_argument("entropy_minimizer_check: no candidates");
  if (!(alpha >= 0)) throw std::invalid_argument("entropy_minimizer_check: alpha must be >= 0");
  const Index n = static_cast<Index>(labels.size());
  std::vector<double> loss(candidates.size()), ent(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Matrix& t = candidates[c].predictions;
    if (t.rows() != n) throw std::invalid_argument("entropy_minimizer_check: table size mismatch");
    double ll = 0.0, he = 0.0;
    for (Index i = 0; i < n; ++i) {
      double py = t(i, labels[i]);
      ll += py > 0.0 ? -std::log(py) : infinity();
      he += entropy(t.row(i).transpose());
    }
    loss[c] = ll / static_cast<double>(n);
    ent[c] = he / static_cast<double>(n);
  }
  auto argmin = [&](auto objective) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      double oc = objective(c), ob = objective(best);
      if (oc < ob || (oc == ob && ent[c] < ent[best])) best = c;
    }
    return best;
  };
  EntropyMinimizerReport r;
  r.base_index = static_cast<Index>(argmin([&](std::size_t c) { return loss[c]; }));
  r.reg_index = static_cast<Index>(argmin([&](std::size_t c) { return loss[c] + alpha * ent[c]; }));
  r.base_entropy = ent[r.base_index];
  r.reg_entropy = ent[r.reg_index];
  r.holds = r.reg_entropy <= r.base_entropy;
  return r;
}

}  // namespace churnlab
