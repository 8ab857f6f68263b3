#pragma once

// Channel file ingestion and machine-readable result formatting.
//
// Channel files are JSON with keys input_alphabet, output_alphabet,
// matrix (row-major, one row per input symbol) and optional cost
// (defaults to all-zero). Rows whose sums are off by less than 1e-9 are
// renormalized; anything worse is rejected as a likely typo.

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbb/bounds.hpp"
#include "fbb/channel.hpp"
#include "fbb/codesim.hpp"

namespace fbb {

class channel_io_error : public std::runtime_error {
 public:
  explicit channel_io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ChannelFile {
  Channel channel;
  std::vector<std::string> input_labels;
  std::vector<std::string> output_labels;
};

inline ChannelFile parse_channel_json(const nlohmann::json& doc) {
  ChannelFile cf;
  if (!doc.is_object()) throw channel_io_error("channel file: top level must be an object");
  if (!doc.contains("input_alphabet") || !doc.contains("output_alphabet") ||
      !doc.contains("matrix"))
    throw channel_io_error("channel file: input_alphabet, output_alphabet and matrix required");
  for (const auto& s : doc.at("input_alphabet")) cf.input_labels.push_back(s.get<std::string>());
  for (const auto& s : doc.at("output_alphabet")) cf.output_labels.push_back(s.get<std::string>());
  std::size_t nx = cf.input_labels.size(), ny = cf.output_labels.size();
  if (nx == 0 || ny == 0) throw channel_io_error("channel file: empty alphabet");

  const auto& rows = doc.at("matrix");
  if (!rows.is_array() || rows.size() != nx)
    throw channel_io_error("channel file: matrix must have one row per input symbol");
  Channel& ch = cf.channel;
  ch.input_size = nx;
  ch.output_size = ny;
  ch.matrix.assign(nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    const auto& row = rows[x];
    if (!row.is_array() || row.size() != ny)
      throw channel_io_error("channel file: matrix row " + std::to_string(x) +
                             " must have one entry per output symbol");
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      double v = row[y].get<double>();
      if (v < 0.0)
        throw channel_io_error("channel file: matrix entry (" + std::to_string(x) + "," +
                               std::to_string(y) + ") is negative");
      ch.matrix[x * ny + y] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) >= 1e-9)
      throw channel_io_error("channel file: row " + std::to_string(x) + " sums to " +
                             std::to_string(sum));
    for (std::size_t y = 0; y < ny; ++y) ch.matrix[x * ny + y] /= sum;
  }

  if (doc.contains("cost")) {
    const auto& cost = doc.at("cost");
    if (!cost.is_array() || cost.size() != nx)
      throw channel_io_error("channel file: cost must have one entry per input symbol");
    for (const auto& c : cost) ch.cost.push_back(c.get<double>());
    for (std::size_t x = 0; x < nx; ++x)
      if (ch.cost[x] < 0.0)
        throw channel_io_error("channel file: cost[" + std::to_string(x) + "] is negative");
  } else {
    ch.cost.assign(nx, 0.0);
  }

  if (auto err = validate_channel(ch)) throw channel_io_error("channel file: " + *err);
  return cf;
}

inline ChannelFile load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw channel_io_error("cannot open channel file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw channel_io_error("channel file parse error: " + std::string(e.what()));
  }
  return parse_channel_json(doc);
}

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{}) throw channel_io_error("bad number: " + s);
  return v;
}

struct ResultRow {
  int n = 0;
  double rate = 0.0;
  double gamma_budget = kInf;  // Gamma
  std::string variant;
  double value = 0.0;
  double raw = 0.0;
  double gamma_star = 0.0;
  std::string type_star;
  double penalty_log2 = 0.0;
  double wall_time_ms = 0.0;
};

inline constexpr const char* kResultCsvHeader =
    "n,R,Gamma,variant,value,raw,gamma_star,type_star,penalty_log2,wall_time_ms";

inline ResultRow make_result_row(const BoundQuery& q, const BoundResult& r, double wall_ms) {
  ResultRow row;
  row.n = q.n;
  row.rate = q.rate;
  row.gamma_budget = q.cost_budget;
  row.variant = variant_name(r.variant);
  row.value = r.value;
  row.raw = r.raw;
  row.gamma_star = r.gamma_star;
  row.type_star = r.type_star.to_string();
  row.penalty_log2 = r.penalty_log2;
  row.wall_time_ms = wall_ms;
  return row;
}

inline std::string to_csv(const ResultRow& r) {
  std::string s;
  s += std::to_string(r.n);
  s += ',';
  s += format_double(r.rate);
  s += ',';
  s += format_double(r.gamma_budget);
  s += ',';
  s += r.variant;
  s += ',';
  s += format_double(r.value);
  s += ',';
  s += format_double(r.raw);
  s += ',';
  s += format_double(r.gamma_star);
  s += ',';
  s += r.type_star;
  s += ',';
  s += format_double(r.penalty_log2);
  s += ',';
  s += format_double(r.wall_time_ms);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline ResultRow parse_csv_row(const std::string& line) {
  auto parts = split(line, ',');
  if (parts.size() != 10) throw channel_io_error("bad csv row: " + line);
  ResultRow r;
  r.n = static_cast<int>(std::stol(parts[0]));
  r.rate = parse_double(parts[1]);
  r.gamma_budget = parse_double(parts[2]);
  r.variant = parts[3];
  r.value = parse_double(parts[4]);
  r.raw = parse_double(parts[5]);
  r.gamma_star = parse_double(parts[6]);
  r.type_star = parts[7];
  r.penalty_log2 = parse_double(parts[8]);
  r.wall_time_ms = parse_double(parts[9]);
  return r;
}

inline std::string to_json_line(const ResultRow& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["R"] = r.rate;
  if (r.gamma_budget < kInf)
    j["Gamma"] = r.gamma_budget;
  else
    j["Gamma"] = nullptr;
  j["variant"] = r.variant;
  j["value"] = r.value;
  j["raw"] = r.raw;
  j["gamma_star"] = r.gamma_star;
  j["type_star"] = r.type_star;
  j["penalty_log2"] = r.penalty_log2;
  j["wall_time_ms"] = r.wall_time_ms;
  return j.dump();
}

inline std::string to_json_line(const SimResult& r) {
  nlohmann::ordered_json j;
  j["trials"] = r.trials;
  j["errors"] = r.errors;
  j["estimate"] = r.estimate;
  j["wilson_upper_95"] = r.wilson_upper_95;
  j["decoder"] = decoder_name(r.decoder);
  j["gamma"] = r.gamma;
  return j.dump();
}

// "n=a:b:step" or "R=a:b:step"
struct GridSpec {
  bool over_n = false;
  double from = 0.0, to = 0.0, step = 0.0;
};

inline GridSpec parse_grid(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw channel_io_error("bad grid spec: " + spec);
  std::string axis = spec.substr(0, eq);
  GridSpec g;
  if (axis == "n")
    g.over_n = true;
  else if (axis == "R")
    g.over_n = false;
  else
    throw channel_io_error("bad grid axis (want n or R): " + spec);
  auto parts = split(spec.substr(eq + 1), ':');
  if (parts.size() != 3) throw channel_io_error("bad grid spec (want a:b:step): " + spec);
  try {
    g.from = parse_double(parts[0]);
    g.to = parse_double(parts[1]);
    g.step = parse_double(parts[2]);
  } catch (const channel_io_error&) {
    throw channel_io_error("bad grid spec: " + spec);
  }
  if (!(g.step > 0.0) || g.to < g.from) throw channel_io_error("bad grid range: " + spec);
  return g;
}

inline std::vector<double> grid_values(const GridSpec& g) {
  std::vector<double> vals;
  for (int i = 0;; ++i) {
    double v = g.from + g.step * i;
    if (v > g.to + 1e-9 * std::max(1.0, std::abs(g.to))) break;
    vals.push_back(v);
  }
  return vals;
}

}  // namespace fbb
