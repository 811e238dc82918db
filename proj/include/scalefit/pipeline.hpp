#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace scalefit {

// Implementations behind the CLI subcommands. Each reads only its declared
// inputs, writes only into its output directory, accompanies every output
// with a "<file>.meta" sidecar (config echo plus input hashes), and is
// idempotent for identical inputs. Exit codes: 0 success, 1 error,
// 3 partial success (a run diverged but its trace was saved).

struct RunArgs {
  std::string data_path;
  std::vector<std::string> algorithms = {"cocoa_plus"};
  std::vector<int> m_grid = {1, 2, 4, 8, 16, 32, 64, 128};
  double reg = 1e-2;
  int local_iters = 0;  // 0: one local epoch
  int batch_size = 0;   // SGD; 0 defaults to m
  int max_iters = 500;
  double epsilon = 1e-4;
  std::uint64_t seed = 0;
  std::string timing_mode = "measured";
  std::string system_model_path;  // synthetic timing source
  bool scale = false;
  std::string exec = "parallel";
  std::string out_dir;
};
int cmd_run(const RunArgs& args, std::ostream& log);

struct FitSystemArgs {
  std::string timings_csv;
  std::string out_path;
  std::string basis = "standard4";
  std::string algorithm;     // provenance stamp, optional
  std::string dataset_hash;  // provenance stamp, optional
  double size_override = 0;  // 0: keep the fitted size
};
int cmd_fit_system(const FitSystemArgs& args, std::ostream& log);

struct FitConvergenceArgs {
  std::string trace_dir;
  std::string out_path;
  std::string algorithm;  // filter; required when the dir mixes algorithms
  int folds = 5;
  bool ols = false;       // reduced-basis least squares instead of lasso CV
  double p_star_override = std::numeric_limits<double>::quiet_NaN();
  double p_star_gap_override = std::numeric_limits<double>::quiet_NaN();
};
int cmd_fit_convergence(const FitConvergenceArgs& args, std::ostream& log);

struct PredictArgs {
  std::string system_path;
  std::string convergence_path;
  int m = 1;
  double i = 0;  // one of i/t must be set (> 0)
  double t = 0;
};
int cmd_predict(const PredictArgs& args, std::ostream& log);

struct RecommendArgs {
  std::vector<std::string> system_paths;
  std::vector<std::string> convergence_paths;  // paired with system_paths
  double epsilon = 0;   // epsilon query when > 0
  double deadline = 0;  // deadline query when > 0
  std::vector<int> m_grid = {1, 2, 4, 8, 16, 32, 64, 128};
  std::string out_dir;
};
int cmd_recommend(const RecommendArgs& args, std::ostream& log);

struct EvalArgs {
  std::string trace_dir;
  std::string protocol;  // "loo-m" | "forward-iters" | "forward-time"
  std::string algorithm;
  std::string trace_csv;  // forward protocols; default: longest trace
  std::string system_path;  // forward-time
  int folds = 5;
  int window = 50;
  double horizon = 0;    // iterations (forward-iters) or seconds (forward-time)
  double window_s = 0;   // forward-time; 0 derives from `window` iterations
  std::string out_prefix;
  double p_star_override = std::numeric_limits<double>::quiet_NaN();
  double p_star_gap_override = std::numeric_limits<double>::quiet_NaN();
};
int cmd_eval(const EvalArgs& args, std::ostream& log);

struct SynthDataArgs {
  int n = 1000;
  int d = 20;
  double margin = 0.1;
  double noise_frac = 0.05;
  std::uint64_t seed = 0;
  std::string out_path;
};
int cmd_synth_data(const SynthDataArgs& args, std::ostream& log);

struct SynthTimingsArgs {
  std::vector<double> theta = {0.1, 2.0, 0.05, 0.01};
  double size = 1.0;
  std::vector<int> ms = {1, 2, 4, 8, 16, 32};
  double noise = 0.0;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string out_path;
};
int cmd_synth_timings(const SynthTimingsArgs& args, std::ostream& log);

}  // namespace scalefit
