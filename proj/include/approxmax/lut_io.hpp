#pragma once

// Lookup-table serialization. Both encodings carry the raw coefficients and
// their real-valued sources side by side, and both round-trip bit-exactly:
// parse(serialize(t)) == t including every double.

#include <string>

#include <json.hpp>

#include "approxmax/exp_kernels.hpp"
#include "approxmax/textio.hpp"

namespace approxmax {

inline bool operator==(const SegmentIndexMap& a, const SegmentIndexMap& b) {
  return a.bias == b.bias && a.shift == b.shift && a.segments == b.segments;
}

inline bool operator==(const LutSegment& a, const LutSegment& b) {
  return a.lo == b.lo && a.hi == b.hi && a.coeff_real == b.coeff_real &&
         a.coeff_raw == b.coeff_raw;
}

inline bool operator==(const LutTable& a, const LutTable& b) {
  return a.degree == b.degree && a.segments == b.segments &&
         a.domain_lo == b.domain_lo && a.domain_hi == b.domain_hi &&
         a.value_format == b.value_format && a.coeff_format == b.coeff_format &&
         a.index_map == b.index_map && a.table == b.table;
}

namespace detail {

inline std::string degree_name(LutDegree d) {
  return d == LutDegree::linear ? "linear" : "quadratic";
}

inline LutDegree degree_from_name(const std::string& s) {
  if (s == "linear") return LutDegree::linear;
  if (s == "quadratic") return LutDegree::quadratic;
  throw io_error("unknown lut degree '" + s + "'");
}

}  // namespace detail

inline std::string export_lut_csv(const LutTable& t) {
  std::string out;
  out += "# approxmax-lut segments=" + std::to_string(t.segments) +
         " degree=" + detail::degree_name(t.degree) +
         " domain_lo=" + fmt_double(t.domain_lo) +
         " domain_hi=" + fmt_double(t.domain_hi) +
         " value_format=" + t.value_format.to_string() +
         " coeff_format=" + t.coeff_format.to_string() +
         " bias=" + std::to_string(t.index_map.bias) +
         " shift=" + std::to_string(t.index_map.shift) + "\n";
  out += "segment,lo,hi";
  for (int j = 0; j < t.coeff_count(); ++j) {
    out += ",c" + std::to_string(j) + "_raw";
  }
  for (int j = 0; j < t.coeff_count(); ++j) {
    out += ",c" + std::to_string(j) + "_real";
  }
  out += "\n";
  for (int p = 0; p < t.segments; ++p) {
    const LutSegment& seg = t.table[p];
    out += std::to_string(p) + "," + fmt_double(seg.lo) + "," +
           fmt_double(seg.hi);
    for (int j = t.coeff_base(); j < 3; ++j) {
      out += "," + std::to_string(seg.coeff_raw[j]);
    }
    for (int j = t.coeff_base(); j < 3; ++j) {
      out += "," + fmt_double(seg.coeff_real[j]);
    }
    out += "\n";
  }
  return out;
}

inline LutTable parse_lut_csv(const std::string& text) {
  const std::vector<std::string> lines = split(text, '\n');
  if (lines.size() < 3 || lines[0].rfind("# approxmax-lut ", 0) != 0) {
    throw io_error("not an approxmax lut csv");
  }
  LutTable t;
  for (const std::string& field : split(lines[0].substr(16), ' ')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw io_error("bad lut csv header field");
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "segments") t.segments = int(parse_int(val));
    else if (key == "degree") t.degree = detail::degree_from_name(val);
    else if (key == "domain_lo") t.domain_lo = parse_double(val);
    else if (key == "domain_hi") t.domain_hi = parse_double(val);
    else if (key == "value_format") t.value_format = FixedFormat::parse(val);
    else if (key == "coeff_format") t.coeff_format = FixedFormat::parse(val);
    else if (key == "bias") t.index_map.bias = parse_int(val);
    else if (key == "shift") t.index_map.shift = int(parse_int(val));
    else throw io_error("unknown lut csv header key '" + key + "'");
  }
  if (t.segments < 2) throw io_error("lut csv declares no segments");
  t.index_map.segments = t.segments;

  const int n_coeff = t.coeff_count();
  std::string want_cols = "segment,lo,hi";
  for (int j = 0; j < n_coeff; ++j) want_cols += ",c" + std::to_string(j) + "_raw";
  for (int j = 0; j < n_coeff; ++j) want_cols += ",c" + std::to_string(j) + "_real";
  if (lines[1] != want_cols) throw io_error("unexpected lut csv columns");

  t.table.resize(t.segments);
  int rows = 0;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split(lines[i], ',');
    if (int(f.size()) != 3 + 2 * n_coeff) throw io_error("short lut csv row");
    const std::int64_t p = parse_int(f[0]);
    if (p != rows || p >= t.segments) throw io_error("lut csv rows out of order");
    LutSegment& seg = t.table[p];
    seg.lo = parse_double(f[1]);
    seg.hi = parse_double(f[2]);
    for (int j = 0; j < n_coeff; ++j) {
      seg.coeff_raw[t.coeff_base() + j] = parse_int(f[3 + j]);
      seg.coeff_real[t.coeff_base() + j] = parse_double(f[3 + n_coeff + j]);
    }
    ++rows;
  }
  if (rows != t.segments) throw io_error("lut csv row count mismatch");
  return t;
}

inline std::string export_lut_json(const LutTable& t) {
  nlohmann::ordered_json j;
  j["format"] = "approxmax-lut";
  j["version"] = 1;
  j["segments"] = t.segments;
  j["degree"] = detail::degree_name(t.degree);
  j["domain_lo"] = t.domain_lo;
  j["domain_hi"] = t.domain_hi;
  j["value_format"] = t.value_format.to_string();
  j["coeff_format"] = t.coeff_format.to_string();
  j["bias"] = t.index_map.bias;
  j["shift"] = t.index_map.shift;
  j["table"] = nlohmann::ordered_json::array();
  for (int p = 0; p < t.segments; ++p) {
    const LutSegment& seg = t.table[p];
    nlohmann::ordered_json row;
    row["segment"] = p;
    row["lo"] = seg.lo;
    row["hi"] = seg.hi;
    auto raw = nlohmann::ordered_json::array();
    auto real = nlohmann::ordered_json::array();
    for (int k = t.coeff_base(); k < 3; ++k) {
      raw.push_back(seg.coeff_raw[k]);
      real.push_back(seg.coeff_real[k]);
    }
    row["coeff_raw"] = raw;
    row["coeff_real"] = real;
    j["table"].push_back(row);
  }
  return j.dump(2) + "\n";
}

inline LutTable parse_lut_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bad lut json: ") + e.what());
  }
  try {
    if (j.at("format") != "approxmax-lut" || j.at("version") != 1) {
      throw io_error("not an approxmax lut json");
    }
    LutTable t;
    t.segments = j.at("segments").get<int>();
    t.degree = detail::degree_from_name(j.at("degree").get<std::string>());
    t.domain_lo = j.at("domain_lo").get<double>();
    t.domain_hi = j.at("domain_hi").get<double>();
    t.value_format = FixedFormat::parse(j.at("value_format").get<std::string>());
    t.coeff_format = FixedFormat::parse(j.at("coeff_format").get<std::string>());
    t.index_map.bias = j.at("bias").get<std::int64_t>();
    t.index_map.shift = j.at("shift").get<int>();
    t.index_map.segments = t.segments;
    const auto& rows = j.at("table");
    if (int(rows.size()) != t.segments) {
      throw io_error("lut json row count mismatch");
    }
    t.table.resize(t.segments);
    for (int p = 0; p < t.segments; ++p) {
      const auto& row = rows.at(p);
      if (row.at("segment").get<int>() != p) {
        throw io_error("lut json rows out of order");
      }
      LutSegment& seg = t.table[p];
      seg.lo = row.at("lo").get<double>();
      seg.hi = row.at("hi").get<double>();
      const auto& raw = row.at("coeff_raw");
      const auto& real = row.at("coeff_real");
      if (int(raw.size()) != t.coeff_count() ||
          int(real.size()) != t.coeff_count()) {
        throw io_error("lut json coefficient count mismatch");
      }
      for (int k = 0; k < t.coeff_count(); ++k) {
        seg.coeff_raw[t.coeff_base() + k] = raw.at(k).get<std::int64_t>();
        seg.coeff_real[t.coeff_base() + k] = real.at(k).get<double>();
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bad lut json: ") + e.what());
  }
}

}  // namespace approxmax
