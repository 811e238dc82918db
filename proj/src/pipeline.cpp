#include "scalefit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "scalefit/bsp.hpp"
#include "scalefit/evaluate.hpp"
#include "scalefit/recommend.hpp"
#include "scalefit/trace_io.hpp"

namespace scalefit {

namespace fs = std::filesystem;

namespace {

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

// Sidecar = config echo + content hashes of the inputs that produced the
// file, enough to regenerate it.
void write_sidecar(const std::string& out_path, KvMap config,
                   const std::vector<std::string>& input_paths) {
  for (const auto& in : input_paths) {
    config["input." + fs::path(in).filename().string()] = file_hash(in);
  }
  write_kv_file(out_path + ".meta", config);
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw Error("an output directory is required");
  fs::create_directories(dir);
}

ExecMode exec_from_name(const std::string& name) {
  if (name == "serial") return ExecMode::kSerial;
  if (name == "parallel") return ExecMode::kParallel;
  throw Error("unknown exec mode '" + name + "' (serial|parallel)");
}

std::string pstar_cache_path(const std::string& out_dir,
                             const std::string& hash, double reg) {
  return out_dir + "/pstar_" + hash + "_reg" + format_double(reg) + ".kv";
}

ReferenceOptimum cached_reference_optimum(const std::string& out_dir,
                                          const SvmProblem& problem,
                                          const std::string& hash,
                                          int max_iters, std::ostream& log) {
  const std::string path = pstar_cache_path(out_dir, hash, problem.reg);
  if (fs::exists(path)) {
    const KvMap kv = read_kv_file(path);
    ReferenceOptimum ref;
    ref.p_star = parse_double(kv_require(kv, "p_star", path));
    ref.gap = parse_double(kv_require(kv, "p_star_gap", path));
    ref.loose = kv_get(kv, "loose").value_or("0") == "1";
    ref.iterations =
        static_cast<int>(parse_double(kv_get(kv, "iterations").value_or("0")));
    log << "reference optimum from cache: p_star=" << ref.p_star
        << " gap=" << ref.gap << "\n";
    return ref;
  }
  log << "computing reference optimum (gap target 1e-9)...\n";
  const ReferenceOptimum ref = reference_optimum(problem, 50 * max_iters);
  if (ref.loose) {
    log << "warning: reference optimum is loose (gap=" << ref.gap << ")\n";
  }
  KvMap kv;
  kv["p_star"] = format_double(ref.p_star);
  kv["p_star_gap"] = format_double(ref.gap);
  kv["loose"] = ref.loose ? "1" : "0";
  kv["iterations"] = std::to_string(ref.iterations);
  kv["dataset_hash"] = hash;
  kv["reg"] = format_double(problem.reg);
  write_kv_file(path, kv);
  return ref;
}

std::vector<Trace> traces_for(const std::string& dir,
                              const std::string& algorithm) {
  std::vector<Trace> traces = load_trace_dir(dir);
  if (!algorithm.empty()) {
    std::erase_if(traces, [&](const Trace& t) {
      return t.meta.algorithm != algorithm;
    });
  } else {
    std::set<std::string> algs;
    for (const auto& t : traces) algs.insert(t.meta.algorithm);
    if (algs.size() > 1) {
      throw Error(dir + " mixes algorithms; pass an explicit --algorithm");
    }
  }
  if (traces.empty()) {
    throw InsufficientDataError("no matching traces in " + dir);
  }
  return traces;
}

// p_star resolution: explicit override, else the value stamped into the
// trace metadata by `run`.
std::pair<double, double> resolve_pstar(const std::vector<Trace>& traces,
                                        double p_star_override,
                                        double gap_override) {
  if (!std::isnan(p_star_override)) {
    return {p_star_override, std::isnan(gap_override) ? 0.0 : gap_override};
  }
  for (const auto& t : traces) {
    if (t.meta.p_star) {
      return {*t.meta.p_star, t.meta.p_star_gap.value_or(0.0)};
    }
  }
  throw Error("traces carry no reference optimum; pass --p-star");
}

}  // namespace

int cmd_run(const RunArgs& args, std::ostream& log) {
  ensure_out_dir(args.out_dir);
  Dataset ds = load_libsvm_file(args.data_path);
  if (args.scale) ds = max_abs_scale(ds).dataset;
  const std::string hash = dataset_hash(ds);
  const SvmProblem problem{&ds, args.reg};

  SystemModel timing_model;
  RunOptions options;
  options.exec = exec_from_name(args.exec);
  options.dataset_path = args.data_path;
  options.dataset_hash = hash;
  options.scaled = args.scale;
  if (args.timing_mode == "synthetic") {
    if (args.system_model_path.empty()) {
      throw Error("synthetic timing requires --system-model");
    }
    timing_model = load_system_model(args.system_model_path);
    options.timing = TimingMode::kSynthetic;
    options.timing_model = &timing_model;
  } else if (args.timing_mode != "measured") {
    throw Error("unknown timing mode '" + args.timing_mode + "'");
  }

  const ReferenceOptimum ref = cached_reference_optimum(
      args.out_dir, problem, hash, args.max_iters, log);
  options.p_star = ref.p_star;

  bool diverged = false;
  for (const auto& alg_name : args.algorithms) {
    const Algorithm alg = algorithm_from_name(alg_name);
    for (int m : args.m_grid) {
      AlgorithmConfig config;
      config.algorithm = alg;
      config.m = m;
      config.local_iters = args.local_iters;
      config.batch_size = alg == Algorithm::kMinibatchSgd
                              ? (args.batch_size > 0 ? args.batch_size : m)
                              : 0;
      config.max_iters = args.max_iters;
      config.epsilon = args.epsilon;
      config.seed = args.seed;

      const std::string stem =
          args.out_dir + "/trace_" + alg_name + "_m" + std::to_string(m);
      Trace trace;
      try {
        trace = run_bsp(problem, config, options);
      } catch (const DivergenceError& e) {
        log << "warning: " << alg_name << " m=" << m << " diverged: "
            << e.what() << "\n";
        trace = e.partial();
        diverged = true;
      }
      trace.meta.p_star_gap = ref.gap;
      save_trace(trace, stem + ".csv");
      log << alg_name << " m=" << m << ": " << trace.records.size()
          << " records, final primal "
          << format_double(trace.records.back().primal) << "\n";
    }
  }
  return diverged ? 3 : 0;
}

int cmd_fit_system(const FitSystemArgs& args, std::ostream& log) {
  const auto obs = load_timings_csv(args.timings_csv);
  SystemModel model = fit_nnls(obs, basis_from_name(args.basis));
  if (args.size_override > 0) model.size = args.size_override;
  model.algorithm = args.algorithm;
  model.dataset_hash = args.dataset_hash;
  save_system_model(model, args.out_path);

  KvMap echo;
  echo["command"] = "fit-system";
  echo["basis"] = args.basis;
  write_sidecar(args.out_path, echo, {args.timings_csv});
  log << "system model: f(1)=" << format_double(predict_time(model, 1))
      << " rms_residual=" << format_double(model.fit_residual)
      << (model.rank_deficient ? " (rank deficient)" : "") << "\n";
  return 0;
}

int cmd_fit_convergence(const FitConvergenceArgs& args, std::ostream& log) {
  const std::vector<Trace> traces = traces_for(args.trace_dir, args.algorithm);
  const auto [p_star, p_star_gap] = resolve_pstar(
      traces, args.p_star_override, args.p_star_gap_override);

  const TrainingSet training = build_training_set(traces, p_star, p_star_gap);
  const ConvergenceModel model =
      args.ols ? fit_ols_reduced(training, default_basis())
               : fit_convergence(training, default_basis(), args.folds);
  save_convergence_model(model, args.out_path);

  KvMap echo;
  echo["command"] = "fit-convergence";
  echo["trace_dir"] = args.trace_dir;
  echo["folds"] = std::to_string(args.folds);
  echo["rows"] = std::to_string(training.rows.size());
  echo["rows_dropped"] = std::to_string(training.dropped_rows);
  write_sidecar(args.out_path, echo, {});
  log << "convergence model: support " << model.support_size() << "/"
      << default_basis().size() << ", chosen_reg "
      << format_double(model.chosen_reg) << ", " << training.rows.size()
      << " rows (" << training.dropped_rows << " dropped)\n";
  for (const auto& w : model.warnings) log << "note: " << w << "\n";
  return 0;
}

int cmd_predict(const PredictArgs& args, std::ostream& log) {
  const ModelPair pair =
      make_model_pair("", load_system_model(args.system_path),
                      load_convergence_model(args.convergence_path));
  if ((args.i > 0) == (args.t > 0)) {
    throw Error("pass exactly one of --i or --t");
  }
  double value;
  if (args.i > 0) {
    value = predict_g(pair.convergence, args.i, args.m);
    log << "g(i=" << format_double(args.i) << ",m=" << args.m << ")\n";
  } else {
    bool clamped = false;
    value = h_suboptimality(pair, args.t, args.m, &clamped);
    log << "h(t=" << format_double(args.t) << ",m=" << args.m << ")"
        << (clamped ? " [clamped to i=1]" : "") << "\n";
  }
  log << "predicted_suboptimality=" << format_double(value) << "\n";
  return 0;
}

int cmd_recommend(const RecommendArgs& args, std::ostream& log) {
  ensure_out_dir(args.out_dir);
  if (args.system_paths.size() != args.convergence_paths.size() ||
      args.system_paths.empty()) {
    throw Error("--system and --convergence must be paired");
  }
  if ((args.epsilon > 0) == (args.deadline > 0)) {
    throw Error("pass exactly one of --epsilon or --deadline");
  }
  std::vector<ModelPair> pairs;
  for (std::size_t k = 0; k < args.system_paths.size(); ++k) {
    ConvergenceModel conv = load_convergence_model(args.convergence_paths[k]);
    std::string name = conv.algorithm.empty()
                           ? fs::path(args.convergence_paths[k]).stem().string()
                           : conv.algorithm;
    pairs.push_back(make_model_pair(std::move(name),
                                    load_system_model(args.system_paths[k]),
                                    std::move(conv)));
  }

  const Recommendation rec =
      args.epsilon > 0 ? recommend_for_epsilon(pairs, args.epsilon, args.m_grid)
                       : recommend_for_deadline(pairs, args.deadline,
                                                args.m_grid);
  const std::string out_csv = args.out_dir + "/recommendation.csv";
  save_recommendation_csv(rec, out_csv);
  KvMap echo;
  echo["command"] = "recommend";
  echo["metric"] = rec.metric;
  echo["query"] = args.epsilon > 0 ? format_double(args.epsilon)
                                   : format_double(args.deadline);
  std::vector<std::string> inputs = args.system_paths;
  inputs.insert(inputs.end(), args.convergence_paths.begin(),
                args.convergence_paths.end());
  write_sidecar(out_csv, echo, inputs);
  log << recommendation_verdict(rec) << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& log) {
  if (args.out_prefix.empty()) throw Error("--out-prefix is required");
  ensure_out_dir(fs::path(args.out_prefix).parent_path().string());

  EvalReport report;
  if (args.protocol == "loo-m") {
    const std::vector<Trace> traces =
        traces_for(args.trace_dir, args.algorithm);
    const auto [p_star, gap] = resolve_pstar(traces, args.p_star_override,
                                             args.p_star_gap_override);
    report = loo_m_cv(traces, default_basis(), p_star, gap, args.folds);
  } else if (args.protocol == "forward-iters" ||
             args.protocol == "forward-time") {
    Trace trace;
    if (!args.trace_csv.empty()) {
      trace = load_trace(args.trace_csv);
    } else {
      // Default to the canonical forward-prediction subject: the longest
      // trace in the directory.
      auto traces = traces_for(args.trace_dir, args.algorithm);
      trace = *std::max_element(traces.begin(), traces.end(),
                                [](const Trace& a, const Trace& b) {
                                  return a.records.size() < b.records.size();
                                });
    }
    const auto [p_star, gap] = resolve_pstar({trace}, args.p_star_override,
                                             args.p_star_gap_override);
    if (args.protocol == "forward-iters") {
      const int horizon = args.horizon > 0 ? static_cast<int>(args.horizon) : 1;
      report = forward_prediction_iters(trace, default_basis(), args.window,
                                        horizon, p_star, gap);
    } else {
      if (args.system_path.empty()) {
        throw Error("forward-time requires --system");
      }
      const SystemModel system = load_system_model(args.system_path);
      const double f = predict_time(system, trace.meta.m);
      const double horizon_s = args.horizon > 0 ? args.horizon : 1.0;
      const double window_s =
          args.window_s > 0 ? args.window_s : args.window * f;
      report = forward_prediction_time(trace, system, default_basis(),
                                       window_s, horizon_s, p_star, gap);
    }
  } else {
    throw Error("unknown protocol '" + args.protocol +
                "' (loo-m|forward-iters|forward-time)");
  }

  const std::string summary = args.out_prefix + "_summary.csv";
  const std::string longf = args.out_prefix + "_long.csv";
  save_eval_report(report, summary, longf);
  KvMap echo;
  echo["command"] = "eval";
  echo["protocol"] = args.protocol;
  write_sidecar(summary, echo, {});
  for (const auto& note : report.notes) log << "note: " << note << "\n";
  log << "protocol " << report.protocol << ": " << report.rows.size()
      << " units, mean rmse_log " << format_double(report.aggregate.rmse_log)
      << ", mean r2_log "
      << (std::isfinite(report.aggregate.r2_log)
              ? format_double(report.aggregate.r2_log)
              : "n/a")
      << "\n";
  return 0;
}

int cmd_synth_data(const SynthDataArgs& args, std::ostream& log) {
  if (args.out_path.empty()) throw Error("--out is required");
  const Dataset ds = synth_classification(args.n, args.d, args.margin,
                                          args.noise_frac, args.seed);
  save_libsvm_file(ds, args.out_path);
  KvMap echo;
  echo["command"] = "synth-data";
  echo["n"] = std::to_string(args.n);
  echo["d"] = std::to_string(args.d);
  echo["margin"] = format_double(args.margin);
  echo["noise_frac"] = format_double(args.noise_frac);
  echo["seed"] = std::to_string(args.seed);
  echo["dataset_hash"] = dataset_hash(ds);
  write_sidecar(args.out_path, echo, {});
  log << "wrote " << ds.n() << " examples, d=" << ds.d << ", hash "
      << dataset_hash(ds) << "\n";
  return 0;
}

int cmd_synth_timings(const SynthTimingsArgs& args, std::ostream& log) {
  if (args.out_path.empty()) throw Error("--out is required");
  SystemModel model;
  if (args.theta.size() == 4) {
    model.basis = TimeBasis::kStandard4;
  } else if (args.theta.size() == 6) {
    model.basis = TimeBasis::kExtended6;
  } else {
    throw Error("--theta needs 4 (standard) or 6 (extended) values");
  }
  model.theta = args.theta;
  model.size = args.size;
  const auto obs =
      synth_timings(model, args.ms, args.noise, args.repeats, args.seed);
  save_timings_csv(obs, args.out_path);
  KvMap echo;
  echo["command"] = "synth-timings";
  for (std::size_t c = 0; c < args.theta.size(); ++c) {
    echo["theta" + std::to_string(c)] = format_double(args.theta[c]);
  }
  echo["size"] = format_double(args.size);
  echo["noise"] = format_double(args.noise);
  echo["repeats"] = std::to_string(args.repeats);
  echo["seed"] = std::to_string(args.seed);
  write_sidecar(args.out_path, echo, {});
  log << "wrote " << obs.size() << " timing observations\n";
  return 0;
}

}  // namespace scalefit
