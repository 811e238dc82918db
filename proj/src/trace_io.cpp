#include "scalefit/trace_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scalefit/dataset.hpp"

namespace scalefit {

namespace fs = std::filesystem;

void write_trace_csv(const Trace& trace, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw Error("cannot write trace file: " + csv_path);
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << trace.meta.algorithm << ',' << trace.meta.m << ',' << r.iteration
        << ',' << format_double(r.primal) << ',';
    if (r.duality_gap) out << format_double(*r.duality_gap);
    out << ',' << format_double(r.iter_wall_time_s) << ','
        << format_double(r.cumulative_time_s) << '\n';
  }
}

KvMap trace_meta_to_kv(const TraceMeta& meta) {
  KvMap kv;
  kv["algorithm"] = meta.algorithm;
  kv["m"] = std::to_string(meta.m);
  kv["dataset_path"] = meta.dataset_path;
  kv["dataset_hash"] = meta.dataset_hash;
  kv["reg"] = format_double(meta.reg);
  kv["local_iters"] = std::to_string(meta.local_iters);
  kv["gamma"] = format_double(meta.gamma);
  kv["sigma_prime"] = format_double(meta.sigma_prime);
  kv["batch_size"] = std::to_string(meta.batch_size);
  kv["step_rule"] = meta.step_rule;
  kv["max_iters"] = std::to_string(meta.max_iters);
  kv["epsilon"] = format_double(meta.epsilon);
  kv["seed"] = std::to_string(meta.seed);
  kv["timing_mode"] = meta.timing_mode;
  kv["scaled"] = meta.scaled ? "1" : "0";
  kv["diverged"] = meta.diverged ? "1" : "0";
  if (meta.p_star) kv["p_star"] = format_double(*meta.p_star);
  if (meta.p_star_gap) kv["p_star_gap"] = format_double(*meta.p_star_gap);
  return kv;
}

TraceMeta trace_meta_from_kv(const KvMap& kv, const std::string& context) {
  TraceMeta meta;
  meta.algorithm = kv_require(kv, "algorithm", context);
  meta.m = static_cast<int>(parse_double(kv_require(kv, "m", context)));
  meta.dataset_path = kv_get(kv, "dataset_path").value_or("");
  meta.dataset_hash = kv_get(kv, "dataset_hash").value_or("");
  meta.reg = parse_double(kv_require(kv, "reg", context));
  meta.local_iters =
      static_cast<int>(parse_double(kv_get(kv, "local_iters").value_or("0")));
  meta.gamma = parse_double(kv_get(kv, "gamma").value_or("1"));
  meta.sigma_prime = parse_double(kv_get(kv, "sigma_prime").value_or("1"));
  meta.batch_size =
      static_cast<int>(parse_double(kv_get(kv, "batch_size").value_or("0")));
  meta.step_rule = kv_get(kv, "step_rule").value_or("");
  meta.max_iters =
      static_cast<int>(parse_double(kv_get(kv, "max_iters").value_or("0")));
  meta.epsilon = parse_double(kv_get(kv, "epsilon").value_or("0"));
  meta.seed = static_cast<std::uint64_t>(
      std::stoull(kv_get(kv, "seed").value_or("0")));
  meta.timing_mode = kv_get(kv, "timing_mode").value_or("measured");
  meta.scaled = kv_get(kv, "scaled").value_or("0") == "1";
  meta.diverged = kv_get(kv, "diverged").value_or("0") == "1";
  if (auto v = kv_get(kv, "p_star")) meta.p_star = parse_double(*v);
  if (auto v = kv_get(kv, "p_star_gap")) meta.p_star_gap = parse_double(*v);
  return meta;
}

void write_trace_meta(const TraceMeta& meta, const std::string& meta_path) {
  write_kv_file(meta_path, trace_meta_to_kv(meta));
}

TraceMeta read_trace_meta(const std::string& meta_path) {
  return trace_meta_from_kv(read_kv_file(meta_path), meta_path);
}

void save_trace(const Trace& trace, const std::string& csv_path) {
  write_trace_csv(trace, csv_path);
  write_trace_meta(trace.meta, csv_path + ".meta");
}

std::string trace_meta_hash(const TraceMeta& meta) {
  const std::string text = format_kv(trace_meta_to_kv(meta));
  const std::uint64_t h = fnv1a64(text.data(), text.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Trace read_trace_csv(const std::string& csv_path,
                     const std::string& meta_path) {
  Trace trace;
  trace.meta = read_trace_meta(meta_path);

  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open trace file: " + csv_path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw SchemaError(csv_path + ": expected header '" +
                      std::string(kTraceCsvHeader) + "'");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    auto next = [&](const char* col) {
      if (!std::getline(ls, tok, ',')) {
        throw SchemaError(csv_path + " line " + std::to_string(line_no) +
                          ": missing column '" + col + "'");
      }
      return tok;
    };
    TraceRecord r;
    const std::string alg = next("algorithm");
    if (alg != trace.meta.algorithm) {
      throw SchemaError(csv_path + " line " + std::to_string(line_no) +
                        ": column 'algorithm' disagrees with the sidecar");
    }
    next("m");  // carried in metadata; kept in the CSV for plotting
    r.iteration = static_cast<int>(parse_double(next("iteration")));
    r.primal = parse_double(next("primal"));
    const std::string gap = next("duality_gap");
    if (!gap.empty()) r.duality_gap = parse_double(gap);
    r.iter_wall_time_s = parse_double(next("iter_wall_time_s"));
    r.cumulative_time_s = parse_double(next("cumulative_time_s"));
    trace.records.push_back(r);
  }
  return trace;
}

Trace load_trace(const std::string& csv_path) {
  return read_trace_csv(csv_path, csv_path + ".meta");
}

std::vector<Trace> load_trace_dir(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto p = entry.path();
    if (p.extension() != ".csv" || !fs::exists(p.string() + ".meta")) continue;
    std::ifstream in(p);
    std::string header;
    if (std::getline(in, header) && header == kTraceCsvHeader) {
      paths.push_back(p.string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Trace> traces;
  traces.reserve(paths.size());
  for (const auto& p : paths) traces.push_back(load_trace(p));
  return traces;
}

}  // namespace scalefit
