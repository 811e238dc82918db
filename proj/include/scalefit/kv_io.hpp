#pragma once

#include <map>
#include <optional>
#include <string>

namespace scalefit {

// Plain "key=value" text files used for model files and metadata sidecars.
// Keys are written sorted so identical content always serializes to
// identical bytes.
using KvMap = std::map<std::string, std::string>;

std::string format_kv(const KvMap& kv);
KvMap parse_kv(const std::string& text);

void write_kv_file(const std::string& path, const KvMap& kv);
KvMap read_kv_file(const std::string& path);

std::string format_double(double v);  // shortest round-trip form
double parse_double(const std::string& s);

const std::string& kv_require(const KvMap& kv, const std::string& key,
                              const std::string& context);
std::optional<std::string> kv_get(const KvMap& kv, const std::string& key);

}  // namespace scalefit
