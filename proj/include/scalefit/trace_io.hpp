#pragma once

#include <string>
#include <vector>

#include "scalefit/bsp.hpp"
#include "scalefit/kv_io.hpp"

namespace scalefit {

inline constexpr const char* kTraceCsvHeader =
    "algorithm,m,iteration,primal,duality_gap,iter_wall_time_s,"
    "cumulative_time_s";

// One CSV per run plus a key-value sidecar ("<csv path>.meta" by
// convention). The duality-gap column is empty for algorithms with no
// dual iterate. Numeric fields round-trip exactly.
void write_trace_csv(const Trace& trace, const std::string& csv_path);
void write_trace_meta(const TraceMeta& meta, const std::string& meta_path);
void save_trace(const Trace& trace, const std::string& csv_path);

Trace read_trace_csv(const std::string& csv_path,
                     const std::string& meta_path);
Trace load_trace(const std::string& csv_path);
TraceMeta read_trace_meta(const std::string& meta_path);

KvMap trace_meta_to_kv(const TraceMeta& meta);
TraceMeta trace_meta_from_kv(const KvMap& kv, const std::string& context);

// Hash of the identifying metadata (not the records); duplicate runs of
// the same configuration collide here, which eval uses to deduplicate.
std::string trace_meta_hash(const TraceMeta& meta);

// All traces found as "*.csv" with a sidecar in a directory, sorted by
// path for determinism.
std::vector<Trace> load_trace_dir(const std::string& dir);

}  // namespace scalefit
