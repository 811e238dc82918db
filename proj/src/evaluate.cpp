#include "scalefit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace scalefit {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

EvalRow score_unit(const std::string& unit,
                   const std::vector<double>& actual,
                   const std::vector<double>& predicted) {
  EvalRow row;
  row.unit = unit;
  row.n_points = static_cast<int>(actual.size());
  double sq = 0, max_abs = 0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    const double err = predicted[k] - actual[k];
    sq += err * err;
    max_abs = std::max(max_abs, std::abs(err));
  }
  row.rmse_log = std::sqrt(sq / actual.size());
  row.max_abs_err_log = max_abs;
  if (actual.size() >= 2) {
    const double mu = mean_of(actual);
    double ss_tot = 0;
    for (double a : actual) ss_tot += (a - mu) * (a - mu);
    row.r2_log = ss_tot > 0 ? 1.0 - sq / ss_tot
                            : std::numeric_limits<double>::quiet_NaN();
  } else {
    row.r2_log = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

void finish_aggregate(EvalReport& report) {
  if (report.rows.empty()) {
    throw InsufficientDataError(report.protocol +
                                ": no units survived evaluation");
  }
  EvalRow agg;
  agg.unit = "aggregate";
  std::vector<double> rmse, r2, maxe;
  for (const auto& row : report.rows) {
    agg.n_points += row.n_points;
    rmse.push_back(row.rmse_log);
    maxe.push_back(row.max_abs_err_log);
    if (std::isfinite(row.r2_log)) r2.push_back(row.r2_log);
  }
  agg.rmse_log = mean_of(rmse);
  agg.max_abs_err_log = mean_of(maxe);
  agg.r2_log = r2.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : mean_of(r2);
  report.aggregate = agg;
}

std::vector<Trace> dedup_traces(const std::vector<Trace>& traces) {
  std::vector<Trace> unique;
  std::set<std::string> seen;
  for (const auto& t : traces) {
    if (seen.insert(trace_meta_hash(t.meta)).second) unique.push_back(t);
  }
  return unique;
}

}  // namespace

EvalReport loo_m_cv(const std::vector<Trace>& traces, const FeatureBasis& basis,
                    double p_star, double p_star_gap, int folds) {
  const std::vector<Trace> unique = dedup_traces(traces);
  std::set<int> distinct_m;
  for (const auto& t : unique) distinct_m.insert(t.meta.m);
  if (distinct_m.size() < 3) {
    throw InsufficientDataError(
        "loo_m_cv needs >= 3 distinct m values, got " +
        std::to_string(distinct_m.size()));
  }

  EvalReport report;
  report.protocol = "loo-m";
  for (int held_m : distinct_m) {
    std::vector<Trace> train, test;
    for (const auto& t : unique) {
      (t.meta.m == held_m ? test : train).push_back(t);
    }
    const TrainingSet train_set = build_training_set(train, p_star, p_star_gap);
    const ConvergenceModel model = fit_convergence(train_set, basis, folds);
    const TrainingSet test_set = build_training_set(test, p_star, p_star_gap);

    const std::string unit = "m=" + std::to_string(held_m);
    std::vector<double> actual, predicted;
    for (const auto& row : test_set.rows) {
      actual.push_back(row.y);
      predicted.push_back(predict_log_g(model, row.i, row.m));
      report.long_rows.push_back({unit, row.i, row.m, actual.back(),
                                  predicted.back()});
    }
    report.rows.push_back(score_unit(unit, actual, predicted));
  }
  finish_aggregate(report);
  return report;
}

EvalReport forward_prediction_iters(const Trace& trace,
                                    const FeatureBasis& basis, int window,
                                    int horizon, double p_star,
                                    double p_star_gap) {
  if (horizon < 1) {
    throw InvalidHorizonError("forward prediction horizon must be >= 1");
  }
  if (window < 2) throw Error("forward prediction window must be >= 2");
  const int last_iter =
      trace.records.empty() ? 0 : trace.records.back().iteration;
  if (last_iter <= window + horizon) {
    throw InsufficientDataError(
        "trace length " + std::to_string(last_iter) +
        " does not exceed window+horizon=" + std::to_string(window + horizon));
  }

  const TrainingSet full = build_training_set({trace}, p_star, p_star_gap);
  std::map<int, TrainingRow> by_iter;
  for (const auto& row : full.rows) {
    by_iter[static_cast<int>(row.i)] = row;
  }

  EvalReport report;
  report.protocol = "forward-iters";
  for (int anchor = window; anchor + horizon <= last_iter; ++anchor) {
    const auto target = by_iter.find(anchor + horizon);
    if (target == by_iter.end()) {
      ++report.skipped_units;
      continue;
    }
    TrainingSet window_set;
    window_set.p_star = full.p_star;
    window_set.p_star_gap = full.p_star_gap;
    window_set.algorithm = full.algorithm;
    window_set.dataset_hash = full.dataset_hash;
    for (auto it = by_iter.upper_bound(anchor - window);
         it != by_iter.end() && it->first <= anchor; ++it) {
      window_set.rows.push_back(it->second);
    }
    if (window_set.rows.size() < 2) {
      ++report.skipped_units;
      continue;
    }
    const ConvergenceModel model = fit_ols_reduced(window_set, basis);
    const double predicted =
        predict_log_g(model, target->second.i, target->second.m);

    const std::string unit = "a=" + std::to_string(anchor);
    report.rows.push_back(
        score_unit(unit, {target->second.y}, {predicted}));
    report.long_rows.push_back({unit, target->second.i, target->second.m,
                                target->second.y, predicted});
  }
  if (report.skipped_units > 0) {
    report.notes.push_back(std::to_string(report.skipped_units) +
                           " anchors skipped (window or target below the "
                           "resolution floor)");
  }
  finish_aggregate(report);
  return report;
}

EvalReport forward_prediction_time(const Trace& trace,
                                   const SystemModel& system,
                                   const FeatureBasis& basis, double window_s,
                                   double horizon_s, double p_star,
                                   double p_star_gap) {
  const double f = predict_time(system, trace.meta.m);
  if (!(f > 0.0)) {
    throw InvalidModelError("forward_prediction_time: f(m) <= 0");
  }
  // Rounded down with a small tolerance so an exact multiple of f(m)
  // converts to exactly that many iterations.
  int horizon = static_cast<int>(std::floor(horizon_s / f + 1e-9));
  int window = static_cast<int>(std::floor(window_s / f + 1e-9));
  std::vector<std::string> notes;
  if (horizon < 1) {
    notes.push_back("horizon_s below one iteration; clamped to horizon=1");
    horizon = 1;
  }
  if (window < 2) {
    notes.push_back("window_s below two iterations; clamped to window=2");
    window = 2;
  }
  notes.push_back("converted horizon_s=" + std::to_string(horizon_s) +
                  " to horizon=" + std::to_string(horizon) + " via f(m)=" +
                  std::to_string(f));

  EvalReport report = forward_prediction_iters(trace, basis, window, horizon,
                                               p_star, p_star_gap);
  report.protocol = "forward-time";
  report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
  return report;
}

void save_eval_report(const EvalReport& report, const std::string& summary_path,
                      const std::string& long_path) {
  std::ofstream summary(summary_path);
  if (!summary) throw Error("cannot write file: " + summary_path);
  summary << "unit,n_points,rmse_log,r2_log,max_abs_err_log\n";
  const auto print_row = [&](const EvalRow& row) {
    summary << row.unit << ',' << row.n_points << ','
            << format_double(row.rmse_log) << ',';
    if (std::isfinite(row.r2_log)) summary << format_double(row.r2_log);
    summary << ',' << format_double(row.max_abs_err_log) << '\n';
  };
  for (const auto& row : report.rows) print_row(row);
  print_row(report.aggregate);

  std::ofstream longf(long_path);
  if (!longf) throw Error("cannot write file: " + long_path);
  longf << "unit,i,m,actual_log,predicted_log\n";
  for (const auto& row : report.long_rows) {
    longf << row.unit << ',' << format_double(row.i) << ','
          << format_double(row.m) << ',' << format_double(row.actual_log)
          << ',' << format_double(row.predicted_log) << '\n';
  }
}

}  // namespace scalefit
