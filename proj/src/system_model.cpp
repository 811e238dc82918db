#include "scalefit/system_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "scalefit/errors.hpp"
#include "scalefit/kv_io.hpp"
#include "scalefit/nnls.hpp"
#include "scalefit/rng.hpp"

namespace scalefit {

int basis_width(TimeBasis basis) {
  return basis == TimeBasis::kStandard4 ? 4 : 6;
}

const char* basis_name(TimeBasis basis) {
  return basis == TimeBasis::kStandard4 ? "standard4" : "extended6";
}

TimeBasis basis_from_name(const std::string& name) {
  if (name == "standard4") return TimeBasis::kStandard4;
  if (name == "extended6") return TimeBasis::kExtended6;
  throw SchemaError("unknown time basis '" + name + "'");
}

std::vector<double> design_row(int m, double size, TimeBasis basis) {
  const double md = m;
  std::vector<double> row = {1.0, size / md, std::log(md), md};
  if (basis == TimeBasis::kExtended6) {
    row.push_back(md * std::log(md));
    row.push_back(size * size / md);
  }
  return row;
}

SystemModel fit_nnls(const std::vector<TimingObservation>& obs,
                     TimeBasis basis) {
  const int width = basis_width(basis);
  std::set<int> distinct_m;
  for (const auto& o : obs) distinct_m.insert(o.m);
  if (static_cast<int>(obs.size()) < width || distinct_m.size() < 3) {
    throw InsufficientDataError(
        "fit_nnls needs >= " + std::to_string(width) +
        " observations over >= 3 distinct m values (got " +
        std::to_string(obs.size()) + " over " +
        std::to_string(distinct_m.size()) + ")");
  }

  Eigen::MatrixXd A(obs.size(), width);
  Eigen::VectorXd b(obs.size());
  for (std::size_t r = 0; r < obs.size(); ++r) {
    const auto row = design_row(obs[r].m, obs[r].size, basis);
    for (int c = 0; c < width; ++c) A(r, c) = row[c];
    b[r] = obs[r].time_s;
  }

  const NnlsResult sol = nnls(A, b);

  SystemModel model;
  model.basis = basis;
  model.theta.assign(sol.x.data(), sol.x.data() + width);
  model.rank_deficient = sol.rank_deficient;
  model.fit_residual =
      sol.residual_norm / std::sqrt(static_cast<double>(obs.size()));
  model.size = 0;
  for (const auto& o : obs) model.size = std::max(model.size, o.size);
  return model;
}

double predict_time(const SystemModel& model, int m) {
  const auto row = design_row(m, model.size, model.basis);
  double t = 0;
  for (std::size_t c = 0; c < row.size(); ++c) t += row[c] * model.theta[c];
  return t;
}

std::vector<TimingObservation> synth_timings(const SystemModel& model,
                                             const std::vector<int>& ms,
                                             double noise, int repeats,
                                             std::uint64_t seed) {
  if (repeats < 1) throw Error("synth_timings requires repeats >= 1");
  Rng rng = Rng::stream(seed, 0);
  std::vector<TimingObservation> obs;
  obs.reserve(ms.size() * repeats);
  for (int m : ms) {
    const double f = predict_time(model, m);
    for (int r = 0; r < repeats; ++r) {
      const double u = 2.0 * rng.next_double() - 1.0;
      const double t = std::max(f * (1.0 + noise * u), 1e-12);
      obs.push_back({m, model.size, t});
    }
  }
  return obs;
}

void save_system_model(const SystemModel& model, const std::string& path) {
  KvMap kv;
  kv["basis"] = basis_name(model.basis);
  for (std::size_t c = 0; c < model.theta.size(); ++c) {
    kv["theta" + std::to_string(c)] = format_double(model.theta[c]);
  }
  kv["size"] = format_double(model.size);
  kv["fit_residual"] = format_double(model.fit_residual);
  kv["rank_deficient"] = model.rank_deficient ? "1" : "0";
  if (!model.algorithm.empty()) kv["algorithm"] = model.algorithm;
  if (!model.dataset_hash.empty()) kv["dataset_hash"] = model.dataset_hash;
  write_kv_file(path, kv);
}

SystemModel load_system_model(const std::string& path) {
  const KvMap kv = read_kv_file(path);
  SystemModel model;
  model.basis = basis_from_name(kv_require(kv, "basis", path));
  const int width = basis_width(model.basis);
  model.theta.resize(width);
  for (int c = 0; c < width; ++c) {
    model.theta[c] =
        parse_double(kv_require(kv, "theta" + std::to_string(c), path));
  }
  model.size = parse_double(kv_require(kv, "size", path));
  model.fit_residual = parse_double(kv_require(kv, "fit_residual", path));
  model.rank_deficient = kv_get(kv, "rank_deficient").value_or("0") == "1";
  model.algorithm = kv_get(kv, "algorithm").value_or("");
  model.dataset_hash = kv_get(kv, "dataset_hash").value_or("");
  return model;
}

void save_timings_csv(const std::vector<TimingObservation>& obs,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << "m,size,time_s\n";
  for (const auto& o : obs) {
    out << o.m << ',' << format_double(o.size) << ','
        << format_double(o.time_s) << '\n';
  }
}

std::vector<TimingObservation> load_timings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "m,size,time_s") {
    throw SchemaError(path + ": expected header 'm,size,time_s'");
  }
  std::vector<TimingObservation> obs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    TimingObservation o;
    try {
      if (!std::getline(ls, tok, ',')) throw SchemaError("missing column 'm'");
      o.m = static_cast<int>(parse_double(tok));
      if (!std::getline(ls, tok, ',')) throw SchemaError("missing column 'size'");
      o.size = parse_double(tok);
      if (!std::getline(ls, tok, ',')) throw SchemaError("missing column 'time_s'");
      o.time_s = parse_double(tok);
    } catch (const SchemaError& e) {
      throw SchemaError(path + " line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    obs.push_back(o);
  }
  return obs;
}

}  // namespace scalefit
