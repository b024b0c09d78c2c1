#pragma once

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace rmb::io {

using json = nlohmann::json;

// 17 significant digits, '.' decimal point.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

inline json to_json(const ScatteringData& d) {
  json j;
  j["z_grid"] = d.z_grid;
  std::vector<double> re, im;
  for (cplx r : d.r_samples) {
    re.push_back(r.real());
    im.push_back(r.imag());
  }
  j["r_re"] = re;
  j["r_im"] = im;
  j["discrete"] = json::array();
  for (const auto& p : d.discrete) j["discrete"].push_back({{"eta", p.eta()}, {"c_im", p.c.imag()}});
  return j;
}

inline ScatteringData scattering_from_json(const json& j) {
  ScatteringData d;
  try {
    d.z_grid = j.at("z_grid").get<std::vector<double>>();
    auto re = j.at("r_re").get<std::vector<double>>();
    auto im = j.at("r_im").get<std::vector<double>>();
    if (re.size() != im.size()) throw ValidationError("scattering json: r_re and r_im differ in length");
    for (std::size_t i = 0; i < re.size(); ++i) d.r_samples.emplace_back(re[i], im[i]);
    for (const auto& p : j.at("discrete")) d.discrete.push_back({cplx(0, p.at("eta").get<double>()), cplx(0, p.at("c_im").get<double>())});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scattering json: ") + e.what());
  }
  d.validate();
  return d;
}

inline void write_scattering(const std::string& path, const ScatteringData& d) {
  auto out = open_out(path);
  out << to_json(d).dump(1) << '\n';
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline ScatteringData read_scattering(const std::string& path) { return scattering_from_json(read_json(path)); }

inline void write_field(std::ostream& out, const SpatialField& f, double mu) {
  out << "# t=" << num(f.t) << " mu=" << num(mu) << '\n' << "x,E,s,u,r\n";
  for (std::size_t i = 0; i < f.grid.size(); ++i)
    out << num(f.grid[i]) << ',' << num(f.E[i]) << ',' << num(f.s[i]) << ',' << num(f.u[i]) << ',' << num(f.r[i]) << '\n';
}

inline void write_field(const std::string& path, const SpatialField& f, double mu) {
  auto out = open_out(path);
  write_field(out, f, mu);
}

namespace detail {

inline std::vector<double> split_numbers(const std::string& line, std::size_t row) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double d;
    try {
      d = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ValidationError("row " + std::to_string(row) + ": not a number: " + cell);
    }
    if (!std::isfinite(d)) throw ValidationError("row " + std::to_string(row) + ": non-finite value");
    v.push_back(d);
  }
  return v;
}

inline bool is_header(const std::string& line) {
  return line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]));
}

}  // namespace detail

struct Samples {
  Grid grid;
  std::vector<double> E;
};

// Two-column CSV "x,E" on a uniform grid; comment and header lines are skipped.
inline Samples read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open samples file " + path);
  std::vector<double> x, e;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_header(line)) continue;
    auto v = detail::split_numbers(line, row);
    if (v.size() != 2) throw ValidationError("row " + std::to_string(row) + ": expected x,E");
    x.push_back(v[0]);
    e.push_back(v[1]);
  }
  if (x.size() < 3) throw ValidationError("samples file: insufficient samples");
  Grid g(x.front(), x.back(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - g[i]) > 1e-9 * (1 + std::abs(x[i]))) throw ValidationError("samples file: x must be uniform");
  return {g, e};
}

inline SpatialField read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  double t = 0;
  std::vector<double> x;
  SpatialField f;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.rfind("# t=", 0) == 0) t = std::stod(line.substr(4));
    if (detail::is_header(line)) continue;
    auto v = detail::split_numbers(line, row);
    if (v.size() != 5) throw ValidationError("row " + std::to_string(row) + ": expected x,E,s,u,r");
    x.push_back(v[0]);
    f.E.push_back(v[1]);
    f.s.push_back(v[2]);
    f.u.push_back(v[3]);
    f.r.push_back(v[4]);
  }
  if (x.size() < 3) throw ValidationError("field file: insufficient samples");
  f.grid = Grid(x.front(), x.back(), x.size());
  f.t = t;
  return f;
}

}  // namespace rmb::io
