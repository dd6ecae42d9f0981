#pragma once

#include "churnlab/dataset.hpp"
#include "churnlab/eval.hpp"
#include "churnlab/train.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace churnlab {

/// Worker-pool width: the CHURNLAB_WORKERS environment variable when set
/// (must parse to >= 1), otherwise the hardware concurrency.
int worker_pool_size();

/// Runs job(0..count-1) on the worker pool. Jobs must be independent; each
/// writes its own slot, so results are identical to a sequential loop.
void run_jobs(Index count, const std::function<void(Index)>& job);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample stddev (n - 1), zero for fewer than two values
};

MeanStd summarize(const std::vector<double>& values);

struct BlobSpec {
  std::uint64_t seed = 0;
  Index m = 0, d = 0, k = 0;
  double separation = 0.0;
};

struct PairedSpec {
  std::uint64_t seed = 0;
  Index n = 0, latent_dim = 0;
  double noise = 0.0;
};

/// Which of the two churn factors a seed pair varies: initialization,
/// minibatch order, or both.
enum class VaryMode { both, init, shuffle };

struct StabilityCounts {
  long long stable_correct = 0;
  long long stable_incorrect = 0;
  long long churn_one_correct = 0;
  long long churn_both_wrong = 0;
};

struct ChurnPairResult {
  int pair_id = 0;
  double hard_churn = 0, soft_churn = 0;
  double l1_mean = 0, l1norm_mean = 0, l4_mean = 0, l05norm_mean = 0;
  double err1 = 0, err2 = 0;
  StabilityCounts counts;
  bool bounds_hold = true;  // churn-vs-error and Hellinger/TV sandwich on this pair
  bool failed = false;
  std::string failure;
  // raw holdout values, pooled into the per-alpha histograms
  std::vector<double> logits, l1_values, l1norm_values, l4_values;
};

struct ChurnAlphaReport {
  double alpha = 0.0;
  std::vector<ChurnPairResult> pairs;
  MeanStd hard_churn, soft_churn, l1, l1norm, l4, l05norm, err1, err2;
  StabilityCounts counts;
  Histogram logit_hist, l1_hist, l1norm_hist, l4_hist;
  int failures = 0;
};

struct ChurnExperimentConfig {
  BlobSpec dataset;
  TrainConfig base;  // reg.kind picks the regularizer family; alpha comes from the sweep
  std::vector<double> alphas{0.0, 0.3};
  int pairs = 10;
  VaryMode vary = VaryMode::both;
  double holdout_fraction = 0.2;
  Index hist_bins = 40;
};

/// Trains `pairs` seed pairs per alpha on one shared blob dataset and
/// reports holdout churn, divergence, and stability statistics. Training
/// failures are recorded per pair without aborting the sweep.
std::vector<ChurnAlphaReport> churn_experiment(const ChurnExperimentConfig& config);

struct RetrievalRunResult {
  XexVariant loss = XexVariant::sampled;
  std::uint64_t seed = 0;
  double recall1 = 0, recall5 = 0, recall10 = 0;
  double pr_auc = 0;
  double envelope_width = 0;
  Vector p5, p95;  // per-rank envelope of the holdout score profile
  bool failed = false;
  std::string failure;
};

struct RetrievalLossReport {
  XexVariant loss = XexVariant::sampled;
  std::vector<RetrievalRunResult> runs;
  MeanStd recall1, recall5, recall10, pr_auc, envelope_width;
  Vector p5_mean, p95_mean;  // seed-averaged envelopes
  int failures = 0;
};

struct RetrievalExperimentConfig {
  PairedSpec dataset;
  TrainConfig base;
  std::vector<XexVariant> losses{XexVariant::sampled, XexVariant::snm, XexVariant::ce,
                                 XexVariant::cem};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double holdout_fraction = 0.2;
  double mining_fraction = 0.5;
};

/// Trains dual encoders for every (loss, seed) on seed-fresh paired data
/// (all losses share data and init within a seed) and evaluates holdout
/// Recall@{1,5,10}, PR-AUC, and score-envelope width.
std::vector<RetrievalLossReport> retrieval_experiment(const RetrievalExperimentConfig& config);

const char* to_string(XexVariant v);
std::optional<XexVariant> xex_variant_from(const std::string& name);

}  // namespace churnlab
