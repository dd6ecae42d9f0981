#include "churnlab/commands.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{
      "churnlab: prediction-churn metrics and bounds, regularized losses, reject surrogates, "
      "cross-example softmax, and deterministic desk-scale experiments"};
  app.require_subcommand(1);

  churnlab::LosscurveArgs losscurve_args;
  CLI::App* losscurve = app.add_subcommand("losscurve", "Write loss curves over parameter grids");
  losscurve->add_option("--loss", losscurve_args.loss,
                        "entropic | kl | reject | link | xex | xex_<sampled|snm|ce|cem>")
      ->required();
  losscurve->add_option("--out", losscurve_args.out_dir, "Output directory");

  churnlab::BoundsArgs bounds_args;
  CLI::App* bounds = app.add_subcommand("bounds", "Check every churn bound on random instances");
  bounds->add_option("--samples", bounds_args.samples, "Number of random instances");
  bounds->add_option("--seed", bounds_args.seed, "Instance generator seed");
  bounds->add_option("--out", bounds_args.out_dir, "Output directory");

  churnlab::RunArgs churn_args;
  CLI::App* churn = app.add_subcommand("churn", "Seed-pair churn experiment from a config file");
  churn->add_option("--config", churn_args.config_path, "Config JSON path")->required();
  churn->add_option("--out", churn_args.out_dir, "Output directory (overrides config)");

  churnlab::RunArgs retrieval_args;
  CLI::App* retrieval =
      app.add_subcommand("retrieval", "Dual-encoder retrieval experiment from a config file");
  retrieval->add_option("--config", retrieval_args.config_path, "Config JSON path")->required();
  retrieval->add_option("--out", retrieval_args.out_dir, "Output directory (overrides config)");

  churnlab::RejectmapArgs rejectmap_args;
  CLI::App* rejectmap =
      app.add_subcommand("rejectmap", "Bayes-optimal score as a function of the posterior");
  rejectmap->add_option("--out", rejectmap_args.out_dir, "Output directory");
  rejectmap->add_option("--d", rejectmap_args.d, "Rejection cost in (0, 0.5)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (losscurve->parsed()) return churnlab::cmd_losscurve(losscurve_args);
    if (bounds->parsed()) return churnlab::cmd_bounds(bounds_args);
    if (churn->parsed()) return churnlab::cmd_churn(churn_args);
    if (retrieval->parsed()) return churnlab::cmd_retrieval(retrieval_args);
    if (rejectmap->parsed()) return churnlab::cmd_rejectmap(rejectmap_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
