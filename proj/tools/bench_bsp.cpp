// Compares the serial reference worker loop against the OpenMP one on the
// same problem and verifies the traces agree record for record. Usage:
//   bench_bsp [n] [d] [iters]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "scalefit/bsp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace scalefit;

namespace {

double run_once(const SvmProblem& problem, Algorithm alg, int m, int iters,
                ExecMode exec, Trace* out) {
  AlgorithmConfig config;
  config.algorithm = alg;
  config.m = m;
  config.max_iters = iters;
  config.batch_size = alg == Algorithm::kMinibatchSgd ? 8 * m : 0;
  config.seed = 7;

  RunOptions options;
  options.exec = exec;

  const auto t0 = std::chrono::steady_clock::now();
  *out = run_bsp(problem, config, options);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 20000;
  const int d = argc > 2 ? std::atoi(argv[2]) : 200;
  const int iters = argc > 3 ? std::atoi(argv[3]) : 20;

  const Dataset ds = synth_classification(n, d, 0.05, 0.05, 3);
  const SvmProblem problem{&ds, 1e-2};

#ifdef _OPENMP
  std::printf("n=%d d=%d iters=%d threads=%d\n", n, d, iters,
              omp_get_max_threads());
#else
  std::printf("n=%d d=%d iters=%d (built without OpenMP)\n", n, d, iters);
#endif
  std::printf("%-14s %4s %12s %12s %9s %9s\n", "algorithm", "m", "serial_s",
              "parallel_s", "speedup", "match");

  const Algorithm algs[] = {Algorithm::kCocoa, Algorithm::kCocoaPlus,
                            Algorithm::kMinibatchSgd, Algorithm::kFullGd};
  for (Algorithm alg : algs) {
    for (int m : {2, 4, 8}) {
      Trace serial_trace, parallel_trace;
      const double ts = run_once(problem, alg, m, iters, ExecMode::kSerial,
                                 &serial_trace);
      const double tp = run_once(problem, alg, m, iters, ExecMode::kParallel,
                                 &parallel_trace);

      bool match = serial_trace.records.size() == parallel_trace.records.size();
      for (std::size_t r = 0; match && r < serial_trace.records.size(); ++r) {
        match = serial_trace.records[r].primal ==
                parallel_trace.records[r].primal;
      }
      std::printf("%-14s %4d %12.4f %12.4f %8.2fx %9s\n",
                  algorithm_name(alg).c_str(), m, ts, tp, ts / tp,
                  match ? "exact" : "MISMATCH");
      if (!match) return 1;
    }
  }
  return 0;
}
