#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmb {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Bad input or violated precondition. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure (blowup, inconsistency, singular system). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Grid {
 public:
  Grid() = default;
  Grid(double x_min, double x_max, std::size_t n_points)
      : x_min_(x_min), x_max_(x_max), n_(n_points) {
    if (!(x_min < x_max)) throw ValidationError("grid: x_min must be < x_max");
    if (n_points < 3) throw ValidationError("grid: need at least 3 points");
  }

  // Grid with spacing as close to h as the interval allows.
  static Grid with_spacing(double x_min, double x_max, double h) {
    if (!(h > 0)) throw ValidationError("grid: spacing must be > 0");
    auto n = static_cast<std::size_t>(std::llround((x_max - x_min) / h)) + 1;
    return Grid(x_min, x_max, n);
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return (x_max_ - x_min_) / static_cast<double>(n_ - 1); }
  double operator[](std::size_t i) const {
    return i + 1 == n_ ? x_max_ : x_min_ + static_cast<double>(i) * spacing();
  }
  std::size_t midpoint() const { return n_ / 2; }

  std::vector<double> points() const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = (*this)[i];
    return x;
  }

  template <class F>
  std::vector<double> sample(F&& f) const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = f((*this)[i]);
    return y;
  }

 private:
  double x_min_ = 0, x_max_ = 1;
  std::size_t n_ = 3;
};

// Pointwise field values (E, s, u, r).
struct Fields {
  double E = 0, s = 0, u = -1, r = 0;
};

struct SpatialField {
  Grid grid;
  std::vector<double> E, s, u, r;
  double t = 0;

  static SpatialField ground(const Grid& g, double t = 0) {
    SpatialField f{g, {}, {}, {}, {}, t};
    f.E.assign(g.size(), 0.0);
    f.s.assign(g.size(), 0.0);
    f.u.assign(g.size(), -1.0);
    f.r.assign(g.size(), 0.0);
    return f;
  }

  Fields at(std::size_t i) const { return {E[i], s[i], u[i], r[i]}; }
  void set(std::size_t i, const Fields& v) {
    E[i] = v.E;
    s[i] = v.s;
    u[i] = v.u;
    r[i] = v.r;
  }

  void check_shape() const {
    auto n = grid.size();
    if (E.size() != n || s.size() != n || u.size() != n || r.size() != n)
      throw ValidationError("field: sequence length does not match grid");
  }
};

inline double bloch_norm_defect(const SpatialField& f) {
  double d = 0;
  for (std::size_t i = 0; i < f.s.size(); ++i)
    d = std::max(d, std::abs(f.r[i] * f.r[i] + f.s[i] * f.s[i] + f.u[i] * f.u[i] - 1.0));
  return d;
}

// Distance of the two boundary Bloch vectors from the ground state (0,0,-1).
inline double boundary_defect(const SpatialField& f) {
  auto dev = [&](std::size_t i) {
    return std::max({std::abs(f.s[i]), std::abs(f.u[i] + 1.0), std::abs(f.r[i])});
  };
  return std::max(dev(0), dev(f.s.size() - 1));
}

inline void validate(const SpatialField& f, double tol_bloch, double tol_bdy) {
  f.check_shape();
  if (bloch_norm_defect(f) > tol_bloch) throw ValidationError("field: Bloch constraint violated");
  if (boundary_defect(f) > tol_bdy) throw ValidationError("field: boundary not in ground state");
}

struct SpectralPair {
  cplx z;  // i*eta
  cplx c;  // i*c_im
  double eta() const { return z.imag(); }
};

struct ScatteringData {
  std::vector<double> z_grid;
  std::vector<cplx> r_samples;
  std::vector<SpectralPair> discrete;

  // Largest |r(-z) - conj r(z)| over grid points whose mirror is also a grid point.
  double symmetry_defect() const {
    double d = 0;
    const std::size_t n = z_grid.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = n - 1 - i;
      if (std::abs(z_grid[i] + z_grid[j]) > 1e-12 * (1 + std::abs(z_grid[i]))) continue;
      d = std::max(d, std::abs(r_samples[j] - std::conj(r_samples[i])));
    }
    return d;
  }

  void validate(double tol = 1e-8) const {
    if (z_grid.size() != r_samples.size())
      throw ValidationError("scattering data: r_samples length differs from z_grid");
    if (z_grid.size() >= 2) {
      double h = (z_grid.back() - z_grid.front()) / static_cast<double>(z_grid.size() - 1);
      for (std::size_t i = 1; i < z_grid.size(); ++i)
        if (std::abs(z_grid[i] - z_grid[i - 1] - h) > 1e-9 * (1 + std::abs(h)))
          throw ValidationError("scattering data: z_grid must be uniform");
    }
    if (symmetry_defect() > tol) throw ValidationError("scattering data: r(-z) != conj r(z)");
    for (std::size_t k = 0; k < discrete.size(); ++k) {
      const auto& p = discrete[k];
      if (p.z.real() != 0 || !(p.z.imag() > 0))
        throw ValidationError("scattering data: eigenvalues must lie on i(0,inf)");
      if (p.c.real() != 0 || p.c.imag() == 0)
        throw ValidationError("scattering data: norming constants must lie on iR\\{0}");
      for (std::size_t j = 0; j < k; ++j)
        if (discrete[j].z == p.z) throw ValidationError("scattering data: repeated eigenvalue");
    }
  }
};

struct ConeSpec {
  double x1 = 0, x2 = 0, v1 = -0.5, v2 = -0.5, mu = 1;

  void validate() const {
    if (!(mu > 0 && mu <= 1)) throw ValidationError("cone: need 0 < mu <= 1");
    if (!(x1 <= x2)) throw ValidationError("cone: need x1 <= x2");
    if (!(-1.0 / (mu * mu) < v1 && v1 <= v2 && v2 < 0))
      throw ValidationError("cone: need -1/mu^2 < v1 <= v2 < 0");
  }

  bool contains(double x, double t) const {
    return t > 0 && x >= x1 + v1 * t - 1e-12 && x <= x2 + v2 * t + 1e-12;
  }
};

struct PhaseConstants {
  double zeta0 = 0;
  cplx zeta1;
  double beta = 0;
  double nu0 = 0;
  cplx delta0A{1, 0};
};

// (||f||^2 + ||f'||^2 + ||x f||^2)^(1/2) with central differences and the trapezoid rule.
inline double sobolev_norm_h11(const Grid& g, std::span<const cplx> f) {
  const std::size_t n = f.size();
  if (n < 3 || n != g.size()) throw ValidationError("insufficient samples");
  const double h = g.spacing();
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx d = i == 0       ? (f[1] - f[0]) / h
             : i + 1 == n ? (f[n - 1] - f[n - 2]) / h
                          : (f[i + 1] - f[i - 1]) / (2 * h);
    double x = g[i];
    double term = std::norm(f[i]) + std::norm(d) + x * x * std::norm(f[i]);
    acc += (i == 0 || i + 1 == n ? 0.5 : 1.0) * term;
  }
  return std::sqrt(acc * h);
}

inline double sobolev_norm_h11(const Grid& g, std::span<const double> f) {
  std::vector<cplx> c(f.begin(), f.end());
  return sobolev_norm_h11(g, c);
}

// Flat key=value configuration. '#' starts a comment; keys carry section
// prefixes such as grid.h or evolve.dt.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      if (trim(line).empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    return parse(in);
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw ValidationError("config: empty key");
    kv_[key] = value;
  }

  // "key=value" as given on the command line.
  void apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ValidationError("override must be key=value: " + assignment);
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback = "") const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return to_double(key, it->second);
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    double v = num(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) throw ValidationError("config: " + key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

  // Comma separated list of reals.
  std::vector<double> list(const std::string& key, std::vector<double> fallback = {}) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) out.push_back(to_double(key, trim(item)));
    return out;
  }

  // Tolerances (keys under tol. or ending in _tol) and step sizes must be positive.
  void validate() const {
    for (const auto& [k, v] : kv_) {
      bool tol = k.rfind("tol.", 0) == 0 || ends_with(k, "_tol");
      bool step = ends_with(k, ".h") || ends_with(k, ".dt");
      if ((tol || step) && !(to_double(k, v) > 0))
        throw ValidationError("config: " + k + " must be > 0");
    }
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  static bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
  }
  static double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      throw ValidationError("config: " + key + " is not a number: " + v);
    }
    if (used != v.size() || !std::isfinite(d))
      throw ValidationError("config: " + key + " is not a finite number: " + v);
    return d;
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace rmb
