#pragma once

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "numeric.hpp"

namespace rmb {

// Real potential E0 sampled on a grid, with Gauss-node values cached for the
// fourth-order Magnus steps.
class Potential {
 public:
  Potential(Grid g, std::vector<double> E, double decay_tol = 1e-12) : grid_(g), E_(std::move(E)) {
    if (E_.size() != grid_.size()) throw ValidationError("potential: sample count does not match grid");
    for (double e : E_)
      if (!std::isfinite(e)) throw ValidationError("potential: non-finite sample");
    if (std::abs(E_.front()) > decay_tol || std::abs(E_.back()) > decay_tol)
      throw ValidationError("potential not decayed at grid ends");
    gauss_ = gauss_samples(grid_, E_);
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> samples() const { return E_; }
  const std::array<double, 2>& gauss(std::size_t i) const { return gauss_[i]; }

  // Trapezoid integral of |E0|.
  double area() const {
    double a = 0;
    for (std::size_t i = 0; i < E_.size(); ++i) a += (i == 0 || i + 1 == E_.size() ? 0.5 : 1.0) * std::abs(E_[i]);
    return a * grid_.spacing();
  }

 private:
  Grid grid_;
  std::vector<double> E_;
  std::vector<std::array<double, 2>> gauss_;
};

enum class Side { left, right };
enum class Columns { both, first, second };

struct JostSolution {
  cplx z;
  Side side = Side::left;
  Grid grid;
  std::vector<Vec2> col1, col2;  // empty when not requested

  Mat2 at(std::size_t i) const {
    if (col1.empty() || col2.empty()) throw ValidationError("jost: both columns required");
    Mat2 m;
    m << col1[i], col2[i];
    return m;
  }

  double det_defect() const {
    double d = 0;
    for (std::size_t i = 0; i < col1.size() && i < col2.size(); ++i)
      d = std::max(d, std::abs(at(i).determinant() - 1.0));
    return d;
  }
};

namespace detail {

// Magnus generator for one interval of the x-part A = -iz sigma3 + Q1(E).
inline Mat2 magnus_step(cplx z, double h, double e1, double e2) {
  auto gen = [z](double e) {
    Mat2 a;
    a << -I * z, -0.5 * e, 0.5 * e, I * z;
    return a;
  };
  Mat2 a1 = gen(e1), a2 = gen(e2);
  Mat2 comm = a2 * a1 - a1 * a2;
  return 0.5 * h * (a1 + a2) + (0.28867513459481288225 / 2.0) * h * h * comm;
}

inline bool finite(const Vec2& v) {
  return std::isfinite(v[0].real()) && std::isfinite(v[0].imag()) && std::isfinite(v[1].real()) &&
         std::isfinite(v[1].imag()) && v.norm() < 1e250;
}

}  // namespace detail

// Normalized Jost solution m_- (side left, m -> I at x_min) or m_+ (side right,
// m -> I at x_max). The columns are integrated separately so that a column is
// only requested where it is analytic.
inline JostSolution integrate_jost(const Potential& pot, cplx z, Side side, Columns cols = Columns::both) {
  const bool want1 = cols != Columns::second, want2 = cols != Columns::first;
  const double im = z.imag();
  // left: col1 analytic in C+, col2 in C-. right: the reverse.
  bool ok1 = side == Side::left ? im >= 0 : im <= 0;
  bool ok2 = side == Side::left ? im <= 0 : im >= 0;
  if ((want1 && !ok1) || (want2 && !ok2)) throw ValidationError("column not analytic here");

  const Grid& g = pot.grid();
  const std::size_t n = g.size();
  const double h = g.spacing();
  JostSolution js{z, side, g, {}, {}};
  if (want1) js.col1.resize(n);
  if (want2) js.col2.resize(n);
  const cplx ph = std::exp(I * z * h);
  const cplx phi = 1.0 / ph;
  const Vec2 e1(1, 0), e2(0, 1);

  if (side == Side::left) {
    if (want1) js.col1[0] = e1;
    if (want2) js.col2[0] = e2;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto& ge = pot.gauss(i);
      Mat2 u = expm_traceless(detail::magnus_step(z, h, ge[0], ge[1]));
      if (want1) js.col1[i + 1] = ph * (u * js.col1[i]);
      if (want2) js.col2[i + 1] = phi * (u * js.col2[i]);
    }
  } else {
    if (want1) js.col1[n - 1] = e1;
    if (want2) js.col2[n - 1] = e2;
    for (std::size_t i = n - 1; i-- > 0;) {
      const auto& ge = pot.gauss(i);
      Mat2 v = expm_traceless(-detail::magnus_step(z, h, ge[0], ge[1]));
      if (want1) js.col1[i] = phi * (v * js.col1[i + 1]);
      if (want2) js.col2[i] = ph * (v * js.col2[i + 1]);
    }
  }
  for (const auto* c : {&js.col1, &js.col2})
    for (const auto& v : *c)
      if (!detail::finite(v)) throw NumericError("integration overflow");
  return js;
}

struct ScatteringCoefficients {
  cplx s11;
  std::optional<cplx> s21;
  double wronskian_spread = 0;  // max deviation of s11 across 5 reference points
  double det_defect = 0;        // only filled for real z
};

inline ScatteringCoefficients scattering_coefficients(const Potential& pot, cplx z, bool want_s21 = true) {
  if (z.imag() < 0) throw ValidationError("scattering coefficients need Im z >= 0");
  const bool real = z.imag() == 0;
  if (want_s21 && !real) throw ValidationError("s21 only on real axis");

  JostSolution lft = integrate_jost(pot, z, Side::left, real ? Columns::both : Columns::first);
  JostSolution rgt = integrate_jost(pot, z, Side::right, real ? Columns::both : Columns::second);
  const Grid& g = pot.grid();
  const std::size_t mid = g.midpoint();
  auto wr = [](const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; };

  ScatteringCoefficients out;
  out.s11 = wr(lft.col1[mid], rgt.col2[mid]);
  const std::size_t step = std::max<std::size_t>(1, g.size() / 10);
  for (int k = -2; k <= 2; ++k) {
    auto j = static_cast<std::ptrdiff_t>(mid) + k * static_cast<std::ptrdiff_t>(step);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(g.size()) - 1);
    out.wronskian_spread = std::max(out.wronskian_spread, std::abs(wr(lft.col1[j], rgt.col2[j]) - out.s11));
  }
  if (want_s21) out.s21 = -std::exp(-2.0 * I * z * g[mid]) * wr(lft.col1[mid], rgt.col1[mid]);
  if (real) out.det_defect = std::max(lft.det_defect(), rgt.det_defect());
  return out;
}

struct ReflectionRow {
  double z;
  cplx s11, s21;
  double unitarity_defect;  // |s11|^2 + |s21|^2 - 1
  double det_defect;
};

inline std::vector<ReflectionRow> reflection_scan(const Potential& pot, std::span<const double> z_grid) {
  std::vector<ReflectionRow> rows;
  rows.reserve(z_grid.size());
  for (double z : z_grid) {
    auto sc = scattering_coefficients(pot, cplx(z, 0), true);
    rows.push_back({z, sc.s11, *sc.s21, std::norm(sc.s11) + std::norm(*sc.s21) - 1.0, sc.det_defect});
  }
  return rows;
}

inline std::vector<cplx> reflection_coefficient(const std::vector<ReflectionRow>& rows, double tol_zero = 1e-8) {
  std::vector<cplx> r;
  r.reserve(rows.size());
  for (const auto& row : rows) {
    if (std::abs(row.s11) <= tol_zero) throw NumericError("spectral singularity suspected");
    r.push_back(row.s21 / row.s11);
  }
  return r;
}

inline std::vector<cplx> reflection_coefficient(const Potential& pot, std::span<const double> z_grid,
                                                double tol_zero = 1e-8) {
  return reflection_coefficient(reflection_scan(pot, z_grid), tol_zero);
}

namespace detail {

inline double s11_on_axis(const Potential& pot, double eta) {
  cplx s = scattering_coefficients(pot, cplx(0, eta), false).s11;
  if (std::abs(s.imag()) > 1e-9 * std::max(1.0, std::abs(s)))
    throw NumericError("s11 not real on the imaginary axis");
  return s.real();
}

// d/deta s11(i eta) by a five-point stencil.
inline double s11_axis_slope(const Potential& pot, double eta) {
  double d = 1e-3 * std::max(eta, 0.05);
  if (eta - 2 * d <= 0) d = eta / 3;
  return (s11_on_axis(pot, eta - 2 * d) - 8 * s11_on_axis(pot, eta - d) + 8 * s11_on_axis(pot, eta + d) -
          s11_on_axis(pot, eta + 2 * d)) /
         (12 * d);
}

}  // namespace detail

// Zeros of s11 on the positive imaginary axis, ascending in eta.
inline std::vector<cplx> discrete_spectrum(const Potential& pot, double eta_max, std::size_t n_scan = 400) {
  if (!(eta_max > 0)) throw ValidationError("eta_max must be > 0");
  if (n_scan < 2) throw ValidationError("n_scan must be >= 2");
  std::vector<double> eta(n_scan), f(n_scan);
  for (std::size_t j = 0; j < n_scan; ++j) {
    eta[j] = eta_max * static_cast<double>(j + 1) / static_cast<double>(n_scan);
    f[j] = detail::s11_on_axis(pot, eta[j]);
  }
  // s11 -> 1 along the axis, so a negative value at the top hides a zero above eta_max.
  if (f.back() <= 0) throw ValidationError("increase eta_max");

  std::vector<cplx> zeros;
  auto fn = [&](double e) { return detail::s11_on_axis(pot, e); };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::max(1.0, std::abs(a)); };
  for (std::size_t j = 0; j + 1 < n_scan; ++j) {
    if (f[j] != 0 && (f[j] < 0) == (f[j + 1] < 0)) continue;
    double root;
    if (f[j] == 0) {
      root = eta[j];
    } else {
      std::uintmax_t iters = 100;
      auto br = boost::math::tools::toms748_solve(fn, eta[j], eta[j + 1], f[j], f[j + 1], tol, iters);
      root = 0.5 * (br.first + br.second);
    }
    if (std::abs(fn(root)) > 1e-10) throw NumericError("eigenvalue refinement did not converge");
    if (std::abs(detail::s11_axis_slope(pot, root)) < 1e-8)
      throw NumericError("non-simple zero");
    if (zeros.empty() || std::abs(zeros.back().imag() - root) > 1e-9) zeros.emplace_back(0.0, root);
  }
  return zeros;
}

// Norming constant c_k with phi_{-,1}(x, z_k) = b_k phi_{+,2}(x, z_k) and
// c_k = b_k / s11'(z_k), the residue constant of the inverse problem.
inline cplx norming_constants(const Potential& pot, cplx zk) {
  if (zk.real() != 0 || !(zk.imag() > 0)) throw ValidationError("eigenvalue must be on the positive imaginary axis");
  const Grid& g = pot.grid();
  JostSolution lft = integrate_jost(pot, zk, Side::left, Columns::first);
  JostSolution rgt = integrate_jost(pot, zk, Side::right, Columns::second);

  auto ratio_at = [&](std::size_t i) {
    const Vec2& a = lft.col1[i];
    const Vec2& b = rgt.col2[i];
    const cplx ph = std::exp(-2.0 * I * zk * g[i]);
    double bmax = std::max(std::abs(b[0]), std::abs(b[1]));
    cplx sum = 0;
    int used = 0;
    cplx first = 0;
    for (int c = 0; c < 2; ++c) {
      if (std::abs(b[c]) < 1e-3 * bmax) continue;
      cplx q = a[c] / b[c] * ph;
      if (used == 1 && std::abs(q - first) > 1e-6 * std::abs(first)) throw NumericError("proportionality failure");
      if (used == 0) first = q;
      sum += q;
      ++used;
    }
    return sum / static_cast<double>(used);
  };

  const std::size_t mid = g.midpoint();
  const cplx b = ratio_at(mid);
  const std::size_t step = std::max<std::size_t>(1, g.size() / 40);
  for (int k = -2; k <= 2; ++k) {
    auto j = static_cast<std::ptrdiff_t>(mid) + k * static_cast<std::ptrdiff_t>(step);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(g.size()) - 1);
    if (std::abs(ratio_at(static_cast<std::size_t>(j)) - b) > 1e-6 * std::abs(b))
      throw NumericError("proportionality failure");
  }

  // s11'(z) = -i d/deta s11(i eta)
  const cplx ds = -I * detail::s11_axis_slope(pot, zk.imag());
  const cplx c = b / ds;
  if (std::abs(c.real()) > 1e-4 * std::abs(c))
    throw NumericError("norming constant not purely imaginary");
  return {0.0, c.imag()};
}

enum class Segment { real_axis, arc_plus, arc_minus };

struct ContourPoint {
  cplx z;
  cplx value;
  Segment segment;
  double alpha = 0;  // arc angle, 0 on the real axis
};

// Uniformly spaced real grid.
inline std::vector<double> uniform_points(double a, double b, std::size_t n) {
  if (n < 2 || !(a < b)) throw ValidationError("uniform grid needs n >= 2 and a < b");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  z.back() = b;
  return z;
}

// r(z) on the sampled range by cubic interpolation.
inline cplx r_at(const ScatteringData& d, double z) {
  const auto& zg = d.z_grid;
  if (zg.size() < 4) throw ValidationError("extrapolation refused");
  double h = (zg.back() - zg.front()) / static_cast<double>(zg.size() - 1);
  return interp_cubic<cplx>(d.r_samples, zg.front(), h, z);
}

// r~(z,t) = r(Re z) exp(-2izt/(4z^2-mu^2)) on the real part of the contour
// and on the upper arcs of radius kappa around +-mu/2.
inline std::vector<ContourPoint> modified_reflection(const ScatteringData& d, double mu, double kappa, double t,
                                                     std::size_t n_arc = 64) {
  if (!(mu > 0 && mu <= 1)) throw ValidationError("need 0 < mu <= 1");
  if (!(kappa > 0)) throw ValidationError("kappa must be > 0");
  if (kappa >= mu) throw ValidationError("contour touches second singularity");
  if (t < 0) throw ValidationError("t must be >= 0");
  auto factor = [&](cplx z) { return std::exp(-2.0 * I * z * t / (4.0 * z * z - mu * mu)); };

  std::vector<ContourPoint> out;
  for (std::size_t i = 0; i < d.z_grid.size(); ++i) {
    double z = d.z_grid[i];
    if (std::abs(z - mu / 2) < kappa || std::abs(z + mu / 2) < kappa) continue;
    out.push_back({cplx(z, 0), d.r_samples[i] * factor(cplx(z, 0)), Segment::real_axis, 0.0});
  }
  for (int sgn : {+1, -1}) {
    for (std::size_t j = 0; j < n_arc; ++j) {
      double a = pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_arc);
      cplx z = sgn * mu / 2 + kappa * std::exp(I * a);
      out.push_back({z, r_at(d, z.real()) * factor(z), sgn > 0 ? Segment::arc_plus : Segment::arc_minus, a});
    }
  }
  return out;
}

struct TransformOptions {
  std::vector<double> z_grid = uniform_points(-8, 8, 801);
  double eta_max = 0;  // 0: area heuristic
  std::size_t n_scan = 400;
  double tol_zero = 1e-8;
};

struct TransformResult {
  ScatteringData data;
  std::vector<ReflectionRow> rows;
};

inline TransformResult direct_transform_detailed(const Potential& pot, const TransformOptions& opt = {}) {
  TransformResult res;
  res.rows = reflection_scan(pot, opt.z_grid);
  res.data.z_grid = opt.z_grid;
  res.data.r_samples = reflection_coefficient(res.rows, opt.tol_zero);
  double eta_max = opt.eta_max > 0 ? opt.eta_max : 0.25 * pot.area() + 1.0;
  for (cplx z : discrete_spectrum(pot, eta_max, opt.n_scan)) res.data.discrete.push_back({z, norming_constants(pot, z)});
  return res;
}

inline ScatteringData direct_transform(const Potential& pot, const TransformOptions& opt = {}) {
  return direct_transform_detailed(pot, opt).data;
}

}  // namespace rmb
