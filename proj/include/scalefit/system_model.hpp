#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scalefit {

// Per-iteration wall time as a function of machine count, fit by NNLS:
//   f(m) = theta0 + theta1*(size/m) + theta2*ln(m) + theta3*m
// The optional extended basis appends m*ln(m) and size^2/m for algorithms
// with super-linear compute or communication terms.
enum class TimeBasis { kStandard4, kExtended6 };

int basis_width(TimeBasis basis);
const char* basis_name(TimeBasis basis);
TimeBasis basis_from_name(const std::string& name);

struct SystemModel {
  std::vector<double> theta;   // basis_width entries, all >= 0
  double size = 1.0;           // row count the model was fit at
  double fit_residual = 0.0;   // RMS error on the training observations
  TimeBasis basis = TimeBasis::kStandard4;
  bool rank_deficient = false;

  // Provenance stamps used when pairing with a convergence model.
  // Empty means unchecked (synthetic timings have no dataset).
  std::string algorithm;
  std::string dataset_hash;
};

struct TimingObservation {
  int m = 1;
  double size = 1.0;
  double time_s = 0.0;
};

std::vector<double> design_row(int m, double size,
                               TimeBasis basis = TimeBasis::kStandard4);

// Requires >= basis_width observations spanning >= 3 distinct m values.
SystemModel fit_nnls(const std::vector<TimingObservation>& obs,
                     TimeBasis basis = TimeBasis::kStandard4);

double predict_time(const SystemModel& model, int m);

// Multiplicative-noise samples of f(m): time = f(m) * (1 + noise*u) with
// u uniform in [-1, 1], clamped positive. Deterministic per seed.
std::vector<TimingObservation> synth_timings(const SystemModel& model,
                                             const std::vector<int>& ms,
                                             double noise, int repeats,
                                             std::uint64_t seed);

void save_system_model(const SystemModel& model, const std::string& path);
SystemModel load_system_model(const std::string& path);

void save_timings_csv(const std::vector<TimingObservation>& obs,
                      const std::string& path);
std::vector<TimingObservation> load_timings_csv(const std::string& path);

}  // namespace scalefit
