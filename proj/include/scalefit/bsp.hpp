#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scalefit/svm.hpp"
#include "scalefit/system_model.hpp"

namespace scalefit {

enum class Algorithm { kCocoa, kCocoaPlus, kMinibatchSgd, kFullGd };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

// Shards always map one-to-one onto logical workers; kParallel runs them
// on an OpenMP thread pool, kSerial runs the identical work loop on one
// thread. Traces are byte-identical between the two modes.
enum class ExecMode { kSerial, kParallel };

enum class TimingMode { kMeasured, kSynthetic };

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::kCocoa;
  int m = 1;
  int local_iters = 0;   // H; 0 means one local epoch, ceil(n/m)
  int batch_size = 0;    // SGD only; rounded up to a multiple of m
  int max_iters = 500;
  double epsilon = 1e-4; // stop once primal suboptimality <= epsilon
  std::uint64_t seed = 0;

  // Aggregation is fixed by algorithm identity: averaging uses
  // gamma = 1/m with sigma' = 1, adding uses gamma = 1 with sigma' = m.
  double gamma() const;
  double sigma_prime() const;
  bool has_dual() const {
    return algorithm == Algorithm::kCocoa || algorithm == Algorithm::kCocoaPlus;
  }
};

struct TraceRecord {
  int iteration = 0;
  double primal = 0.0;
  std::optional<double> duality_gap;  // absent for SGD/GD
  double iter_wall_time_s = 0.0;
  double cumulative_time_s = 0.0;
};

struct TraceMeta {
  std::string algorithm;
  int m = 1;
  std::string dataset_path;
  std::string dataset_hash;
  double reg = 1.0;
  int local_iters = 0;
  double gamma = 1.0;
  double sigma_prime = 1.0;
  int batch_size = 0;
  std::string step_rule;  // "pegasos" for SGD/GD
  int max_iters = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string timing_mode;  // "measured" | "synthetic"
  bool scaled = false;
  bool diverged = false;
  std::optional<double> p_star;
  std::optional<double> p_star_gap;
};

struct Trace {
  TraceMeta meta;
  std::vector<TraceRecord> records;  // consecutive iterations from 0
};

struct RunOptions {
  ExecMode exec = ExecMode::kParallel;
  TimingMode timing = TimingMode::kMeasured;
  const SystemModel* timing_model = nullptr;  // required for kSynthetic
  std::optional<double> p_star;               // enables the epsilon stop
  std::string dataset_path;  // metadata passthrough
  std::string dataset_hash;
  bool scaled = false;

  // Called after every aggregation with the current iterates; used by
  // progress displays and the invariant tests.
  std::function<void(int iteration, std::span<const double> alpha,
                     std::span<const double> w)>
      inspect;
};

// Thrown when an iterate turns non-finite; carries the trace so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Trace partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trace& partial() const { return partial_; }

 private:
  Trace partial_;
};

// Outer BSP loop: broadcast w, run every shard's local step, barrier,
// aggregate deltas in fixed tree order, record one TraceRecord. Record 0
// is the initial point w = 0, alpha = 0.
Trace run_bsp(const SvmProblem& problem, const AlgorithmConfig& config,
              const RunOptions& options = {});

// High-precision optimum estimate: single-machine dual ascent with one
// full epoch per outer round, run until the duality gap certifies the
// primal value. `loose` is set when the gap never got below 1e-6.
struct ReferenceOptimum {
  double p_star = 0.0;
  double gap = 0.0;
  bool loose = false;
  int iterations = 0;
};

ReferenceOptimum reference_optimum(const SvmProblem& problem,
                                   int max_outer = 25000,
                                   double gap_tol = 1e-9,
                                   std::uint64_t seed = 0);

}  // namespace scalefit
