#include "churnlab/commands.hpp"

#include "churnlab/churn.hpp"
#include "churnlab/config.hpp"
#include "churnlab/csv.hpp"
#include "churnlab/reg_loss.hpp"
#include "churnlab/reject.hpp"
#include "churnlab/rng.hpp"
#include "churnlab/xex_softmax.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>

namespace churnlab {

namespace {

std::string resolve_out_dir(const std::string& flag, const std::string& from_config) {
  std::string dir = !flag.empty() ? flag : (!from_config.empty() ? from_config : ".");
  std::filesystem::create_directories(dir);
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::vector<double> linear_grid(double lo, double hi, Index points) {
  std::vector<double> g;
  double step = (hi - lo) / static_cast<double>(points - 1);
  for (Index i = 0; i < points; ++i) g.push_back(lo + step * static_cast<double>(i));
  return g;
}

void write_prob_loss_curve(const std::string& path, bool entropic) {
  CsvWriter csv(path, {"x", "value", "alpha"});
  const std::vector<double> alphas{0.0, 0.1, 0.3, 0.5, 1.0};
  for (double alpha : alphas) {
    for (int i = 1; i <= 99; ++i) {
      double p = static_cast<double>(i) / 100.0;
      Vector v(2);
      v << p, 1.0 - p;
      double value = entropic ? entropic_log_loss(v, 0, alpha) : kl_log_loss(v, 0, alpha);
      csv.row({CsvWriter::num(p), CsvWriter::num(value), CsvWriter::num(alpha)});
    }
  }
}

void write_reject_curve(const std::string& path, double d) {
  CsvWriter csv(path, {"x", "value", "alpha", "d"});
  const std::vector<double> grid = linear_grid(-3.0, 3.0, 121);
  for (double alpha : {1.0, 2.0, 4.0, 8.0, 32.0}) {
    RejectParams params(d, alpha);
    for (double z : grid)
      csv.row({CsvWriter::num(z), CsvWriter::num(smooth_surrogate(z, params).value),
               CsvWriter::num(alpha), CsvWriter::num(d)});
  }
  // the piecewise-linear limit, tagged alpha = inf
  RejectParams params(d);
  for (double z : grid)
    csv.row({CsvWriter::num(z), CsvWriter::num(convex_surrogate(z, params)),
             CsvWriter::num(infinity()), CsvWriter::num(d)});
}

void write_link_curve(const std::string& path, double d) {
  CsvWriter csv(path, {"x", "value", "alpha", "d"});
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    RejectParams params(d, alpha);
    for (double v : linear_grid(-3.0, 3.0, 121))
      csv.row({CsvWriter::num(v), CsvWriter::num(link(v, params)), CsvWriter::num(alpha),
               CsvWriter::num(d)});
  }
}

// One-parameter similarity family: diagonal (matching) score x against
// zero-score negatives on an 8x8 batch.
void write_xex_curve(const std::string& path, XexVariant variant) {
  CsvWriter csv(path, {"x", "value"});
  const Index n = 8;
  const MiningSpec mining = MiningSpec::top_fraction(0.5);
  for (double x : linear_grid(-3.0, 3.0, 121)) {
    SimilarityMatrix s = Matrix::Zero(n, n);
    s.diagonal().setConstant(x);
    double value = 0.0;
    switch (variant) {
      case XexVariant::sampled: value = sampled_softmax_loss(s).value; break;
      case XexVariant::snm: value = snm_loss(s, mining).value; break;
      case XexVariant::ce: value = ce_softmax_loss(s).value; break;
      case XexVariant::cem: value = ce_mining_loss(s, mining).value; break;
    }
    csv.row({CsvWriter::num(x), CsvWriter::num(value)});
  }
}

}  // namespace

int cmd_losscurve(const LosscurveArgs& args) {
  std::string dir = resolve_out_dir(args.out_dir, "");
  const std::string& tag = args.loss;
  if (tag == "entropic") {
    write_prob_loss_curve(join(dir, "losscurve_entropic.csv"), true);
  } else if (tag == "kl") {
    write_prob_loss_curve(join(dir, "losscurve_kl.csv"), false);
  } else if (tag == "reject") {
    write_reject_curve(join(dir, "losscurve_reject.csv"), 0.3);
  } else if (tag == "link") {
    write_link_curve(join(dir, "losscurve_link.csv"), 0.3);
  } else if (tag == "xex") {
    for (XexVariant v : {XexVariant::sampled, XexVariant::snm, XexVariant::ce, XexVariant::cem})
      write_xex_curve(join(dir, std::string("losscurve_xex_") + to_string(v) + ".csv"), v);
  } else if (tag.rfind("xex_", 0) == 0) {
    auto v = xex_variant_from(tag.substr(4));
    if (!v) throw std::invalid_argument("losscurve: unknown loss tag \"" + tag + "\"");
    write_xex_curve(join(dir, "losscurve_" + tag + ".csv"), *v);
  } else {
    throw std::invalid_argument("losscurve: unknown loss tag \"" + tag + "\"");
  }
  std::cout << "losscurve " << tag << ": wrote " << dir << "\n";
  return 0;
}

int cmd_bounds(const BoundsArgs& args) {
  if (args.samples < 1) throw std::invalid_argument("bounds: samples must be >= 1");
  std::string dir = resolve_out_dir(args.out_dir, "");

  // Random simplex pairs with K varying per sample; grouped by K because a
  // PairedPredictions batch has one fixed K.
  Rng rng(mix_seed(args.seed, 0x626e6473));  // "bnds"
  std::map<Index, std::vector<Vector>> ps, qs;
  std::map<Index, std::vector<Index>> labels;
  for (long long i = 0; i < args.samples; ++i) {
    Index k = 2 + static_cast<Index>(rng.below(9));
    ps[k].push_back(rng.simplex(k));
    qs[k].push_back(rng.simplex(k));
    labels[k].push_back(static_cast<Index>(rng.below(static_cast<std::uint64_t>(k))));
  }

  long churn_err_violations = 0, kl_violations = 0, sandwich_violations = 0,
       margin_violations = 0;
  long margin_events = 0;
  double churn_err_min_slack = infinity();
  double kl_max_violation = -infinity();
  long groups = 0;
  for (const auto& [k, rows] : ps) {
    Matrix m1(static_cast<Index>(rows.size()), k), m2(static_cast<Index>(rows.size()), k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m1.row(static_cast<Index>(i)) = rows[i].transpose();
      m2.row(static_cast<Index>(i)) = qs[k][i].transpose();
    }
    PairedPredictions pp(m1, m2, labels[k]);
    ++groups;

    ChurnErrReport ce = check_churn_err_bound(pp);
    if (!ce.holds) ++churn_err_violations;
    churn_err_min_slack = std::min(churn_err_min_slack, ce.err1 + ce.err2 - ce.churn);

    KlProxyReport kl = check_kl_proxy_bound(pp);
    kl_violations += kl.violations;
    kl_max_violation = std::max(kl_max_violation, kl.max_violation);

    HellingerSandwichReport hs = check_hellinger_sandwich(pp);
    sandwich_violations += hs.violations + (hs.holds ? 0 : (hs.violations == 0 ? 1 : 0));

    MarginEventReport me = check_margin_event(pp);
    margin_events += me.churn_events;
    margin_violations += me.violations;
  }

  bool all_hold = churn_err_violations == 0 && kl_violations == 0 && sandwich_violations == 0 &&
                  margin_violations == 0;

  Json report;
  report["command"] = "bounds";
  report["tool_version"] = kToolVersion;
  report["samples"] = args.samples;
  report["seed"] = args.seed;
  report["groups"] = groups;
  report["checks"]["churn_err"] = {{"violations", churn_err_violations},
                                   {"min_slack", churn_err_min_slack}};
  report["checks"]["kl_proxy"] = {{"violations", kl_violations},
                                  {"max_violation", kl_max_violation}};
  report["checks"]["hellinger_sandwich"] = {{"violations", sandwich_violations}};
  report["checks"]["margin_event"] = {{"churn_events", margin_events},
                                      {"violations", margin_violations}};
  report["all_hold"] = all_hold;
  write_file(join(dir, "bounds.json"), report.dump(2) + "\n");

  std::cout << "churn_err: " << churn_err_violations << " violations\n"
            << "kl_proxy: " << kl_violations << " violations\n"
            << "hellinger_sandwich: " << sandwich_violations << " violations\n"
            << "margin_event: " << margin_violations << " violations over " << margin_events
            << " churn events\n"
            << (all_hold ? "all bounds hold" : "BOUND VIOLATIONS FOUND") << "\n";
  return all_hold ? 0 : 1;
}

namespace {

Json mean_std_json(const MeanStd& ms) {
  return Json{{"mean", ms.mean}, {"stddev", ms.stddev}};
}

Json counts_json(const StabilityCounts& c) {
  return Json{{"stable_correct", c.stable_correct},
              {"stable_incorrect", c.stable_incorrect},
              {"churn_one_correct", c.churn_one_correct},
              {"churn_both_wrong", c.churn_both_wrong}};
}

void write_histogram_csv(CsvWriter& csv, double alpha, const Histogram& h) {
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    csv.row({CsvWriter::num(alpha), CsvWriter::num(h.edges[static_cast<Index>(b)]),
             CsvWriter::num(h.edges[static_cast<Index>(b) + 1]),
             CsvWriter::num(static_cast<long long>(h.counts[b]))});
}

}  // namespace

int cmd_churn(const RunArgs& args) {
  std::string raw = read_file(args.config_path);
  Json config_json = load_json_file(args.config_path);
  ChurnExperimentConfig config = parse_churn_config(config_json);
  std::string dir = resolve_out_dir(args.out_dir, config_out_dir(config_json));

  std::vector<ChurnAlphaReport> reports = churn_experiment(config);

  CsvWriter csv(join(dir, "churn.csv"),
                {"alpha", "pair_id", "hard_churn", "soft_churn", "l1_mean", "l1norm_mean",
                 "l4_mean", "l05norm_mean", "err1", "err2"});
  for (const ChurnAlphaReport& rep : reports)
    for (const ChurnPairResult& p : rep.pairs) {
      if (p.failed) continue;
      csv.row({CsvWriter::num(rep.alpha), CsvWriter::num(static_cast<long long>(p.pair_id)),
               CsvWriter::num(p.hard_churn), CsvWriter::num(p.soft_churn),
               CsvWriter::num(p.l1_mean), CsvWriter::num(p.l1norm_mean),
               CsvWriter::num(p.l4_mean), CsvWriter::num(p.l05norm_mean),
               CsvWriter::num(p.err1), CsvWriter::num(p.err2)});
    }

  const std::vector<std::string> hist_header{"alpha", "bin_lo", "bin_hi", "count"};
  CsvWriter hist_logits(join(dir, "hist_logits.csv"), hist_header);
  CsvWriter hist_l1(join(dir, "hist_l1.csv"), hist_header);
  CsvWriter hist_l1norm(join(dir, "hist_l1norm.csv"), hist_header);
  CsvWriter hist_l4(join(dir, "hist_l4.csv"), hist_header);
  for (const ChurnAlphaReport& rep : reports) {
    if (rep.failures == static_cast<int>(rep.pairs.size())) continue;
    write_histogram_csv(hist_logits, rep.alpha, rep.logit_hist);
    write_histogram_csv(hist_l1, rep.alpha, rep.l1_hist);
    write_histogram_csv(hist_l1norm, rep.alpha, rep.l1norm_hist);
    write_histogram_csv(hist_l4, rep.alpha, rep.l4_hist);
  }

  int failures = 0;
  bool bounds_hold = true;
  Json alphas = Json::array();
  for (const ChurnAlphaReport& rep : reports) {
    Json pairs = Json::array();
    for (const ChurnPairResult& p : rep.pairs) {
      Json pj{{"pair_id", p.pair_id}, {"failed", p.failed}};
      if (p.failed) {
        pj["failure"] = p.failure;
      } else {
        pj["hard_churn"] = p.hard_churn;
        pj["soft_churn"] = p.soft_churn;
        pj["l1_mean"] = p.l1_mean;
        pj["l1norm_mean"] = p.l1norm_mean;
        pj["l4_mean"] = p.l4_mean;
        pj["l05norm_mean"] = p.l05norm_mean;
        pj["err1"] = p.err1;
        pj["err2"] = p.err2;
        pj["bounds_hold"] = p.bounds_hold;
        pj["counts"] = counts_json(p.counts);
        bounds_hold = bounds_hold && p.bounds_hold;
      }
      pairs.push_back(std::move(pj));
    }
    failures += rep.failures;
    alphas.push_back(Json{{"alpha", rep.alpha},
                          {"failures", rep.failures},
                          {"pairs", std::move(pairs)},
                          {"aggregates",
                           Json{{"hard_churn", mean_std_json(rep.hard_churn)},
                                {"soft_churn", mean_std_json(rep.soft_churn)},
                                {"l1_mean", mean_std_json(rep.l1)},
                                {"l1norm_mean", mean_std_json(rep.l1norm)},
                                {"l4_mean", mean_std_json(rep.l4)},
                                {"l05norm_mean", mean_std_json(rep.l05norm)},
                                {"err1", mean_std_json(rep.err1)},
                                {"err2", mean_std_json(rep.err2)}}},
                          {"counts", counts_json(rep.counts)}});
  }

  Json bundle;
  bundle["command"] = "churn";
  bundle["tool_version"] = kToolVersion;
  bundle["config_digest"] = "fnv1a64:" + hex64(fnv1a64(raw));
  bundle["config"] = config_json;
  bundle["alphas"] = std::move(alphas);
  bundle["failures"] = failures;
  bundle["all_bounds_hold"] = bounds_hold;
  write_file(join(dir, "churn_results.json"), bundle.dump(2) + "\n");

  for (const ChurnAlphaReport& rep : reports)
    std::cout << "alpha=" << rep.alpha << ": hard_churn " << rep.hard_churn.mean << " +- "
              << rep.hard_churn.stddev << ", soft_churn " << rep.soft_churn.mean << ", l1 "
              << rep.l1.mean << ", failures " << rep.failures << "\n";
  return (failures == 0 && bounds_hold) ? 0 : 1;
}

int cmd_retrieval(const RunArgs& args) {
  std::string raw = read_file(args.config_path);
  Json config_json = load_json_file(args.config_path);
  RetrievalExperimentConfig config = parse_retrieval_config(config_json);
  std::string dir = resolve_out_dir(args.out_dir, config_out_dir(config_json));

  std::vector<RetrievalLossReport> reports = retrieval_experiment(config);

  CsvWriter csv(join(dir, "retrieval.csv"),
                {"loss", "seed", "recall@1", "recall@5", "recall@10", "pr_auc"});
  for (const RetrievalLossReport& rep : reports)
    for (const RetrievalRunResult& r : rep.runs) {
      if (r.failed) continue;
      csv.row({to_string(rep.loss), std::to_string(r.seed), CsvWriter::num(r.recall1),
               CsvWriter::num(r.recall5), CsvWriter::num(r.recall10), CsvWriter::num(r.pr_auc)});
    }

  for (const RetrievalLossReport& rep : reports) {
    if (rep.p5_mean.size() == 0) continue;
    CsvWriter env(join(dir, std::string("envelope_") + to_string(rep.loss) + ".csv"),
                  {"rank", "p5", "p95"});
    for (Index r = 0; r < rep.p5_mean.size(); ++r)
      env.row({CsvWriter::num(static_cast<long long>(r)), CsvWriter::num(rep.p5_mean[r]),
               CsvWriter::num(rep.p95_mean[r])});
  }

  int failures = 0;
  Json losses = Json::array();
  for (const RetrievalLossReport& rep : reports) {
    Json runs = Json::array();
    for (const RetrievalRunResult& r : rep.runs) {
      Json rj{{"loss", to_string(rep.loss)}, {"seed", r.seed}, {"failed", r.failed}};
      if (r.failed) {
        rj["failure"] = r.failure;
      } else {
        rj["recall@1"] = r.recall1;
        rj["recall@5"] = r.recall5;
        rj["recall@10"] = r.recall10;
        rj["pr_auc"] = r.pr_auc;
        rj["envelope_width"] = r.envelope_width;
      }
      runs.push_back(std::move(rj));
    }
    failures += rep.failures;
    losses.push_back(Json{{"loss", to_string(rep.loss)},
                          {"failures", rep.failures},
                          {"runs", std::move(runs)},
                          {"aggregates",
                           Json{{"recall@1", mean_std_json(rep.recall1)},
                                {"recall@5", mean_std_json(rep.recall5)},
                                {"recall@10", mean_std_json(rep.recall10)},
                                {"pr_auc", mean_std_json(rep.pr_auc)},
                                {"envelope_width", mean_std_json(rep.envelope_width)}}}});
  }

  Json bundle;
  bundle["command"] = "retrieval";
  bundle["tool_version"] = kToolVersion;
  bundle["config_digest"] = "fnv1a64:" + hex64(fnv1a64(raw));
  bundle["config"] = config_json;
  bundle["losses"] = std::move(losses);
  bundle["failures"] = failures;
  write_file(join(dir, "retrieval_results.json"), bundle.dump(2) + "\n");

  for (const RetrievalLossReport& rep : reports)
    std::cout << to_string(rep.loss) << ": pr_auc " << rep.pr_auc.mean << " +- "
              << rep.pr_auc.stddev << ", recall@1 " << rep.recall1.mean << ", envelope "
              << rep.envelope_width.mean << ", failures " << rep.failures << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_rejectmap(const RejectmapArgs& args) {
  std::string dir = resolve_out_dir(args.out_dir, "");
  CsvWriter csv(join(dir, "rejectmap.csv"), {"eta", "z_star", "alpha", "d"});
  for (double alpha : {1.0, 2.0, 4.0, 8.0, 32.0}) {
    RejectParams params(args.d, alpha);
    for (int i = 1; i <= 99; ++i) {
      double eta = static_cast<double>(i) / 100.0;
      double z = bayes_optimal_score(BinaryProb(eta), params);
      csv.row({CsvWriter::num(eta), CsvWriter::num(z), CsvWriter::num(alpha),
               CsvWriter::num(args.d)});
    }
  }
  std::cout << "rejectmap: wrote " << join(dir, "rejectmap.csv") << "\n";
  return 0;
}

}  // namespace churnlab
