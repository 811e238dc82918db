#include "scalefit/kv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scalefit/errors.hpp"

namespace scalefit {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw SchemaError("bad numeric value '" + s + "'");
  }
  return v;
}

std::string format_kv(const KvMap& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KvMap parse_kv(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value, got '" + line + "'", line_no);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_kv_file(const std::string& path, const KvMap& kv) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << format_kv(kv);
}

KvMap read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str());
}

const std::string& kv_require(const KvMap& kv, const std::string& key,
                              const std::string& context) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw SchemaError(context + ": missing key '" + key + "'");
  }
  return it->second;
}

std::optional<std::string> kv_get(const KvMap& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return it->second;
}

}  // namespace scalefit
