#pragma once

#include <string>
#include <vector>

#include "scalefit/convergence.hpp"
#include "scalefit/system_model.hpp"
#include "scalefit/trace_io.hpp"

namespace scalefit {

// Every metric below lives in ln-suboptimality space, the space the
// convergence model is fitted in.

struct EvalRow {
  std::string unit;  // "m=<k>" or "a=<anchor>"
  int n_points = 0;
  double rmse_log = 0.0;
  double r2_log = 0.0;  // NaN when undefined (fewer than 2 points)
  double max_abs_err_log = 0.0;
};

struct EvalLongRow {
  std::string unit;
  double i = 0.0;
  double m = 0.0;
  double actual_log = 0.0;
  double predicted_log = 0.0;
};

struct EvalReport {
  std::string protocol;
  std::vector<EvalRow> rows;
  EvalRow aggregate;               // means of the row metrics
  std::vector<EvalLongRow> long_rows;
  int skipped_units = 0;
  std::vector<std::string> notes;
};

// Leave-one-m-out: for each distinct m*, fit on every other trace and
// score the held-out one. Duplicate traces (same metadata hash) are
// collapsed before fitting.
EvalReport loo_m_cv(const std::vector<Trace>& traces,
                    const FeatureBasis& basis, double p_star,
                    double p_star_gap, int folds);

// Sliding-window forward prediction: fit a reduced-basis least-squares
// model on iterations (a-window, a], predict at a+horizon, score against
// the trace. One unit per anchor a.
EvalReport forward_prediction_iters(const Trace& trace,
                                    const FeatureBasis& basis, int window,
                                    int horizon, double p_star,
                                    double p_star_gap);

// Time-horizon variant: horizon_s and window_s are converted to iteration
// counts through the system model (rounded down, clamped to >= 1) and the
// evaluation is delegated to forward_prediction_iters.
EvalReport forward_prediction_time(const Trace& trace,
                                   const SystemModel& system,
                                   const FeatureBasis& basis, double window_s,
                                   double horizon_s, double p_star,
                                   double p_star_gap);

void save_eval_report(const EvalReport& report, const std::string& summary_path,
                      const std::string& long_path);

}  // namespace scalefit
