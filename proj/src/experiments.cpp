#include "churnlab/experiments.hpp"

#include "churnlab/churn.hpp"
#include "churnlab/divergence.hpp"
#include "churnlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

namespace churnlab {

int worker_pool_size() {
  if (const char* env = std::getenv("CHURNLAB_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw std::invalid_argument("CHURNLAB_WORKERS must be a positive integer");
    return static_cast<int>(std::min(v, 256L));
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void run_jobs(Index count, const std::function<void(Index)>& job) {
  if (count <= 0) return;
  int workers = std::min<Index>(worker_pool_size(), count);
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          job(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

MeanStd summarize(const std::vector<double>& values) {
  MeanStd ms;
  if (values.empty()) return ms;
  for (double v : values) ms.mean += v;
  ms.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return ms;
  double ss = 0.0;
  for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
  ms.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return ms;
}

namespace {

struct PairSeeds {
  std::uint64_t init_a, shuffle_a, init_b, shuffle_b;
};

PairSeeds pair_seeds(const TrainConfig& base, VaryMode vary, int pair) {
  auto j = static_cast<std::uint64_t>(pair);
  PairSeeds s{};
  switch (vary) {
    case VaryMode::both:
      s = {mix_seed(base.seed_init, 2 * j), mix_seed(base.seed_shuffle, 2 * j),
           mix_seed(base.seed_init, 2 * j + 1), mix_seed(base.seed_shuffle, 2 * j + 1)};
      break;
    case VaryMode::init:
      s = {mix_seed(base.seed_init, 2 * j), mix_seed(base.seed_shuffle, j),
           mix_seed(base.seed_init, 2 * j + 1), mix_seed(base.seed_shuffle, j)};
      break;
    case VaryMode::shuffle:
      s = {mix_seed(base.seed_init, j), mix_seed(base.seed_shuffle, 2 * j),
           mix_seed(base.seed_init, j), mix_seed(base.seed_shuffle, 2 * j + 1)};
      break;
  }
  return s;
}

ChurnPairResult run_churn_pair(const ChurnExperimentConfig& config, const Dataset& ds,
                               const Split& split, double alpha, int pair) {
  ChurnPairResult res;
  res.pair_id = pair;

  TrainConfig cfg = config.base;
  cfg.reg = RegParams(config.base.reg.kind, alpha);
  PairSeeds seeds = pair_seeds(config.base, config.vary, pair);

  Matrix train_x = take_rows(ds.inputs, split.train);
  std::vector<Index> train_y = take_labels(ds.labels, split.train);
  Matrix hold_x = take_rows(ds.inputs, split.holdout);
  std::vector<Index> hold_y = take_labels(ds.labels, split.holdout);

  TrainedModel model_a, model_b;
  try {
    cfg.seed_init = seeds.init_a;
    cfg.seed_shuffle = seeds.shuffle_a;
    model_a = train_classifier(cfg, train_x, train_y, ds.k_classes);
    cfg.seed_init = seeds.init_b;
    cfg.seed_shuffle = seeds.shuffle_b;
    model_b = train_classifier(cfg, train_x, train_y, ds.k_classes);
  } catch (const TrainingFailure& tf) {
    res.failed = true;
    res.failure = tf.what();
    return res;
  }

  Matrix scores_a = forward_scores(model_a.params, hold_x);
  Matrix scores_b = forward_scores(model_b.params, hold_x);
  Matrix probs_a = predict_probs(model_a.params, hold_x, config.base.temperature);
  Matrix probs_b = predict_probs(model_b.params, hold_x, config.base.temperature);

  PairedPredictions pp(probs_a, probs_b, hold_y);
  res.hard_churn = hard_churn(pp);
  res.soft_churn = soft_churn(pp);
  res.err1 = error_rate(probs_a, hold_y);
  res.err2 = error_rate(probs_b, hold_y);
  res.bounds_hold =
      check_churn_err_bound(pp).holds && check_hellinger_sandwich(pp).holds;

  const Index h = hold_x.rows();
  res.logits.reserve(static_cast<std::size_t>(2 * scores_a.size()));
  for (Index i = 0; i < h; ++i)
    for (Index c = 0; c < scores_a.cols(); ++c) res.logits.push_back(scores_a(i, c));
  for (Index i = 0; i < h; ++i)
    for (Index c = 0; c < scores_b.cols(); ++c) res.logits.push_back(scores_b(i, c));

  for (Index i = 0; i < h; ++i) {
    Vector p = probs_a.row(i).transpose();
    Vector q = probs_b.row(i).transpose();
    double v1 = l1(p, q);
    res.l1_values.push_back(v1);
    res.l1norm_values.push_back(lp_dist_normalized(p, q, 1.0));
    res.l4_values.push_back(lp_dist(p, q, 4.0));
    res.l1_mean += v1;
    res.l1norm_mean += res.l1norm_values.back();
    res.l4_mean += res.l4_values.back();
    res.l05norm_mean += lp_dist_normalized(p, q, 0.5);

    Index ya = margin(p).label;
    Index yb = margin(q).label;
    Index truth = hold_y[static_cast<std::size_t>(i)];
    if (ya == yb) {
      if (ya == truth)
        ++res.counts.stable_correct;
      else
        ++res.counts.stable_incorrect;
    } else {
      if (ya == truth || yb == truth)
        ++res.counts.churn_one_correct;
      else
        ++res.counts.churn_both_wrong;
    }
  }
  res.l1_mean /= static_cast<double>(h);
  res.l1norm_mean /= static_cast<double>(h);
  res.l4_mean /= static_cast<double>(h);
  res.l05norm_mean /= static_cast<double>(h);
  return res;
}

}  // namespace

std::vector<ChurnAlphaReport> churn_experiment(const ChurnExperimentConfig& config) {
  if (config.pairs < 1) throw std::invalid_argument("churn_experiment: need pairs >= 1");
  if (config.alphas.empty()) throw std::invalid_argument("churn_experiment: empty alpha sweep");
  if (config.hist_bins < 1) throw std::invalid_argument("churn_experiment: need hist_bins >= 1");
  config.base.validate();

  const Dataset ds = gen_gaussian_blobs(config.dataset.seed, config.dataset.m, config.dataset.d,
                                        config.dataset.k, config.dataset.separation);
  const Split split = holdout_split(ds.inputs.rows(), config.holdout_fraction);

  const auto n_alphas = static_cast<Index>(config.alphas.size());
  const auto n_pairs = static_cast<Index>(config.pairs);
  std::vector<ChurnPairResult> results(static_cast<std::size_t>(n_alphas * n_pairs));
  run_jobs(n_alphas * n_pairs, [&](Index job) {
    Index a = job / n_pairs;
    Index p = job % n_pairs;
    results[static_cast<std::size_t>(job)] =
        run_churn_pair(config, ds, split, config.alphas[static_cast<std::size_t>(a)],
                       static_cast<int>(p));
  });

  std::vector<ChurnAlphaReport> reports;
  for (Index a = 0; a < n_alphas; ++a) {
    ChurnAlphaReport rep;
    rep.alpha = config.alphas[static_cast<std::size_t>(a)];
    std::vector<double> hard, soft, v1, v1n, v4, v05n, e1, e2;
    std::vector<double> logits, l1s, l1ns, l4s;
    for (Index p = 0; p < n_pairs; ++p) {
      const ChurnPairResult& r = results[static_cast<std::size_t>(a * n_pairs + p)];
      rep.pairs.push_back(r);
      if (r.failed) {
        ++rep.failures;
        continue;
      }
      hard.push_back(r.hard_churn);
      soft.push_back(r.soft_churn);
      v1.push_back(r.l1_mean);
      v1n.push_back(r.l1norm_mean);
      v4.push_back(r.l4_mean);
      v05n.push_back(r.l05norm_mean);
      e1.push_back(r.err1);
      e2.push_back(r.err2);
      rep.counts.stable_correct += r.counts.stable_correct;
      rep.counts.stable_incorrect += r.counts.stable_incorrect;
      rep.counts.churn_one_correct += r.counts.churn_one_correct;
      rep.counts.churn_both_wrong += r.counts.churn_both_wrong;
      logits.insert(logits.end(), r.logits.begin(), r.logits.end());
      l1s.insert(l1s.end(), r.l1_values.begin(), r.l1_values.end());
      l1ns.insert(l1ns.end(), r.l1norm_values.begin(), r.l1norm_values.end());
      l4s.insert(l4s.end(), r.l4_values.begin(), r.l4_values.end());
    }
    rep.hard_churn = summarize(hard);
    rep.soft_churn = summarize(soft);
    rep.l1 = summarize(v1);
    rep.l1norm = summarize(v1n);
    rep.l4 = summarize(v4);
    rep.l05norm = summarize(v05n);
    rep.err1 = summarize(e1);
    rep.err2 = summarize(e2);
    if (!logits.empty()) {
      rep.logit_hist = histogram(logits, config.hist_bins);
      rep.l1_hist = histogram(l1s, config.hist_bins);
      rep.l1norm_hist = histogram(l1ns, config.hist_bins);
      rep.l4_hist = histogram(l4s, config.hist_bins);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

namespace {

RetrievalRunResult run_retrieval_job(const RetrievalExperimentConfig& config, XexVariant loss,
                                     std::uint64_t seed) {
  RetrievalRunResult res;
  res.loss = loss;
  res.seed = seed;

  PairedDataset ds = gen_paired_embeddings(mix_seed(config.dataset.seed, seed), config.dataset.n,
                                           config.dataset.latent_dim, config.dataset.noise);
  Split split = holdout_split(ds.queries.rows(), config.holdout_fraction);

  TrainConfig cfg = config.base;
  cfg.seed_init = mix_seed(config.base.seed_init, seed);
  cfg.seed_shuffle = mix_seed(config.base.seed_shuffle, seed);
  cfg.xex = loss;
  cfg.mining = (loss == XexVariant::snm || loss == XexVariant::cem)
                   ? std::optional<MiningSpec>(MiningSpec::top_fraction(config.mining_fraction))
                   : std::nullopt;

  TrainedDual trained;
  try {
    trained = train_dual_encoder(cfg, take_rows(ds.queries, split.train),
                                 take_rows(ds.docs, split.train));
  } catch (const TrainingFailure& tf) {
    res.failed = true;
    res.failure = tf.what();
    return res;
  }

  SimilarityMatrix s = dual_scores(trained.enc, take_rows(ds.queries, split.holdout),
                                   take_rows(ds.docs, split.holdout), cfg.temperature,
                                   cfg.scaling);
  const Index m = s.cols();
  res.recall1 = recall_at_k(s, std::min<Index>(1, m));
  res.recall5 = recall_at_k(s, std::min<Index>(5, m));
  res.recall10 = recall_at_k(s, std::min<Index>(10, m));
  res.pr_auc = pr_curve_from_matrix(s).auc;
  ScoreProfile profile = score_distribution_profile(s);
  res.envelope_width = profile.envelope_width;
  res.p5 = profile.p5;
  res.p95 = profile.p95;
  return res;
}

}  // namespace

std::vector<RetrievalLossReport> retrieval_experiment(const RetrievalExperimentConfig& config) {
  if (config.losses.empty()) throw std::invalid_argument("retrieval_experiment: no losses");
  if (config.seeds.empty()) throw std::invalid_argument("retrieval_experiment: no seeds");
  if (!(config.mining_fraction > 0.0 && config.mining_fraction <= 1.0))
    throw std::invalid_argument("retrieval_experiment: mining_fraction outside (0,1]");
  config.base.validate();

  const auto n_losses = static_cast<Index>(config.losses.size());
  const auto n_seeds = static_cast<Index>(config.seeds.size());
  std::vector<RetrievalRunResult> results(static_cast<std::size_t>(n_losses * n_seeds));
  run_jobs(n_losses * n_seeds, [&](Index job) {
    Index l = job / n_seeds;
    Index s = job % n_seeds;
    results[static_cast<std::size_t>(job)] =
        run_retrieval_job(config, config.losses[static_cast<std::size_t>(l)],
                          config.seeds[static_cast<std::size_t>(s)]);
  });

  std::vector<RetrievalLossReport> reports;
  for (Index l = 0; l < n_losses; ++l) {
    RetrievalLossReport rep;
    rep.loss = config.losses[static_cast<std::size_t>(l)];
    std::vector<double> r1, r5, r10, auc, env;
    for (Index s = 0; s < n_seeds; ++s) {
      const RetrievalRunResult& r = results[static_cast<std::size_t>(l * n_seeds + s)];
      rep.runs.push_back(r);
      if (r.failed) {
        ++rep.failures;
        continue;
      }
      r1.push_back(r.recall1);
      r5.push_back(r.recall5);
      r10.push_back(r.recall10);
      auc.push_back(r.pr_auc);
      env.push_back(r.envelope_width);
      if (rep.p5_mean.size() == 0) {
        rep.p5_mean = Vector::Zero(r.p5.size());
        rep.p95_mean = Vector::Zero(r.p95.size());
      }
      rep.p5_mean += r.p5;
      rep.p95_mean += r.p95;
    }
    auto successes = static_cast<double>(rep.runs.size() - static_cast<std::size_t>(rep.failures));
    if (successes > 0 && rep.p5_mean.size() > 0) {
      rep.p5_mean /= successes;
      rep.p95_mean /= successes;
    }
    rep.recall1 = summarize(r1);
    rep.recall5 = summarize(r5);
    rep.recall10 = summarize(r10);
    rep.pr_auc = summarize(auc);
    rep.envelope_width = summarize(env);
    reports.push_back(std::move(rep));
  }
  return reports;
}

const char* to_string(XexVariant v) {
  switch (v) {
    case XexVariant::sampled: return "sampled";
    case XexVariant::snm: return "snm";
    case XexVariant::ce: return "ce";
    case XexVariant::cem: return "cem";
  }
  return "sampled";
}

std::optional<XexVariant> xex_variant_from(const std::string& name) {
  if (name == "sampled") return XexVariant::sampled;
  if (name == "snm") return XexVariant::snm;
  if (name == "ce") return XexVariant::ce;
  if (name == "cem") return XexVariant::cem;
  return std::nullopt;
}

}  // namespace churnlab
