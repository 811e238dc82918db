// Command-line front end for the trace/model/recommendation pipeline.
// Subcommands: run, fit-system, fit-convergence, predict, recommend,
// eval, synth-data, synth-timings. See README.md for a worked recipe.

#include <iostream>

#include "CLI11.hpp"
#include "scalefit/errors.hpp"
#include "scalefit/pipeline.hpp"
#include "scalefit/recommend.hpp"

using namespace scalefit;

int main(int argc, char** argv) {
  CLI::App app{"fit per-iteration time and convergence models from "
               "data-parallel optimizer traces and recommend the best "
               "(algorithm, machine count)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "optional key=value config file; "
                 "command-line flags override it");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "generate convergence/timing traces");
  run->add_option("--data", run_args.data_path, "LIBSVM dataset path")
      ->required();
  run->add_option("--algorithms", run_args.algorithms,
                  "cocoa, cocoa_plus, minibatch_sgd, full_gd")
      ->delimiter(',');
  run->add_option("--m-grid", run_args.m_grid, "machine counts to sweep")
      ->delimiter(',');
  run->add_option("--reg", run_args.reg, "L2 regularization strength");
  run->add_option("--local-iters", run_args.local_iters,
                  "dual coordinate steps per worker round (0: one epoch)");
  run->add_option("--batch-size", run_args.batch_size,
                  "SGD batch size (rounded up to a multiple of m)");
  run->add_option("--max-iters", run_args.max_iters, "outer iteration cap");
  run->add_option("--epsilon", run_args.epsilon,
                  "stop at this primal suboptimality");
  run->add_option("--seed", run_args.seed, "run seed");
  run->add_option("--timing", run_args.timing_mode, "measured|synthetic");
  run->add_option("--system-model", run_args.system_model_path,
                  "system model for synthetic timing");
  run->add_flag("--scale", run_args.scale, "max-abs scale features to [-1,1]");
  run->add_option("--exec", run_args.exec, "parallel|serial worker execution");
  run->add_option("--out-dir", run_args.out_dir, "output directory")
      ->required();

  FitSystemArgs fs_args;
  auto* fit_system =
      app.add_subcommand("fit-system", "fit the per-iteration time model");
  fit_system
      ->add_option("--timings", fs_args.timings_csv,
                   "timings CSV (m,size,time_s)")
      ->required();
  fit_system->add_option("--out", fs_args.out_path, "model file")->required();
  fit_system->add_option("--basis", fs_args.basis, "standard4|extended6");
  fit_system->add_option("--algorithm", fs_args.algorithm, "provenance stamp");
  fit_system->add_option("--dataset-hash", fs_args.dataset_hash,
                         "provenance stamp");
  fit_system->add_option("--size", fs_args.size_override,
                         "predict at this data size instead of the fitted one");

  FitConvergenceArgs fc_args;
  auto* fit_conv =
      app.add_subcommand("fit-convergence", "fit the convergence model");
  fit_conv->add_option("--traces", fc_args.trace_dir, "trace directory")
      ->required();
  fit_conv->add_option("--out", fc_args.out_path, "model file")->required();
  fit_conv->add_option("--algorithm", fc_args.algorithm, "trace filter");
  fit_conv->add_option("--folds", fc_args.folds, "cross-validation folds");
  fit_conv->add_flag("--ols", fc_args.ols,
                     "reduced-basis least squares instead of lasso CV");
  fit_conv->add_option("--p-star", fc_args.p_star_override,
                       "override the reference optimum");
  fit_conv->add_option("--p-star-gap", fc_args.p_star_gap_override,
                       "certified gap of the override");

  PredictArgs pr_args;
  auto* predict = app.add_subcommand(
      "predict", "predict suboptimality at (i,m) or (t,m)");
  predict->add_option("--system", pr_args.system_path, "system model file")
      ->required();
  predict
      ->add_option("--convergence", pr_args.convergence_path,
                   "convergence model file")
      ->required();
  predict->add_option("--m", pr_args.m, "machine count")->required();
  predict->add_option("--i", pr_args.i, "iteration count");
  predict->add_option("--t", pr_args.t, "wall-clock seconds");

  RecommendArgs rc_args;
  auto* recommend = app.add_subcommand(
      "recommend", "pick the best (algorithm, m) for a goal");
  recommend
      ->add_option("--system", rc_args.system_paths,
                   "system model files, one per candidate algorithm")
      ->required();
  recommend
      ->add_option("--convergence", rc_args.convergence_paths,
                   "convergence model files, paired with --system")
      ->required();
  recommend->add_option("--epsilon", rc_args.epsilon,
                        "target suboptimality (time query)");
  recommend->add_option("--deadline", rc_args.deadline,
                        "time budget in seconds (loss query)");
  recommend->add_option("--m-grid", rc_args.m_grid, "machine counts")
      ->delimiter(',');
  recommend->add_option("--out-dir", rc_args.out_dir, "output directory")
      ->required();

  EvalArgs ev_args;
  auto* eval = app.add_subcommand("eval", "run an evaluation protocol");
  eval->add_option("--traces", ev_args.trace_dir, "trace directory");
  eval->add_option("--protocol", ev_args.protocol,
                   "loo-m|forward-iters|forward-time")
      ->required();
  eval->add_option("--algorithm", ev_args.algorithm, "trace filter");
  eval->add_option("--trace", ev_args.trace_csv,
                   "specific trace CSV for forward protocols");
  eval->add_option("--system", ev_args.system_path,
                   "system model (forward-time)");
  eval->add_option("--folds", ev_args.folds, "cross-validation folds");
  eval->add_option("--window", ev_args.window, "window in iterations");
  eval->add_option("--horizon", ev_args.horizon,
                   "iterations ahead, or seconds for forward-time");
  eval->add_option("--window-s", ev_args.window_s,
                   "window in seconds (forward-time)");
  eval->add_option("--out-prefix", ev_args.out_prefix,
                   "prefix for the summary/long CSVs")
      ->required();
  eval->add_option("--p-star", ev_args.p_star_override,
                   "override the reference optimum");
  eval->add_option("--p-star-gap", ev_args.p_star_gap_override,
                   "certified gap of the override");

  SynthDataArgs sd_args;
  auto* synth_data =
      app.add_subcommand("synth-data", "generate a synthetic dataset");
  synth_data->add_option("--n", sd_args.n, "examples");
  synth_data->add_option("--d", sd_args.d, "feature dimension");
  synth_data->add_option("--margin", sd_args.margin, "rejection margin");
  synth_data->add_option("--noise-frac", sd_args.noise_frac,
                         "fraction of labels flipped");
  synth_data->add_option("--seed", sd_args.seed, "generator seed");
  synth_data->add_option("--out", sd_args.out_path, "LIBSVM output path")
      ->required();

  SynthTimingsArgs st_args;
  auto* synth_timings = app.add_subcommand(
      "synth-timings", "sample timing observations from a known model");
  synth_timings->add_option("--theta", st_args.theta, "model coefficients")
      ->delimiter(',');
  synth_timings->add_option("--size", st_args.size, "data size");
  synth_timings->add_option("--ms", st_args.ms, "machine counts")
      ->delimiter(',');
  synth_timings->add_option("--noise", st_args.noise,
                            "multiplicative noise amplitude");
  synth_timings->add_option("--repeats", st_args.repeats, "samples per m");
  synth_timings->add_option("--seed", st_args.seed, "generator seed");
  synth_timings->add_option("--out", st_args.out_path, "timings CSV path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args, std::cout);
    if (*fit_system) return cmd_fit_system(fs_args, std::cout);
    if (*fit_conv) return cmd_fit_convergence(fc_args, std::cout);
    if (*predict) return cmd_predict(pr_args, std::cout);
    if (*recommend) return cmd_recommend(rc_args, std::cout);
    if (*eval) return cmd_eval(ev_args, std::cout);
    if (*synth_data) return cmd_synth_data(sd_args, std::cout);
    if (*synth_timings) return cmd_synth_timings(st_args, std::cout);
  } catch (const NoFeasibleConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& row : e.table()) {
      std::cerr << "  " << row.algorithm << " m=" << row.m
                << (row.feasible ? "" : " unreachable") << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
