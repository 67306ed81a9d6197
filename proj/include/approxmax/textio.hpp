#pragma once

// Small text helpers shared by the serializers, the report writers, and the
// CLI. Doubles are always printed with %.17g so that every emitted decimal
// parses back to the identical bit pattern and artifacts are byte-stable.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "approxmax/errors.hpp"

namespace approxmax {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw io_error("bad numeric field '" + s + "'");
  }
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
    throw io_error("bad integer field '" + s + "'");
  }
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("read failure on '" + path + "'");
  return ss.str();
}

// Content is materialized fully before this is called, so a failed
// configuration can never leave a partial file behind.
inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(content.data(), std::streamsize(content.size()));
  out.flush();
  if (!out) throw io_error("write failure on '" + path + "'");
}

}  // namespace approxmax
