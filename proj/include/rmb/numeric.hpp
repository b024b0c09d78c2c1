#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "core.hpp"

namespace rmb {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline const Mat2& sigma3() {
  static const Mat2 s = (Mat2() << 1, 0, 0, -1).finished();
  return s;
}
inline const Mat2& sigma2() {
  static const Mat2 s = (Mat2() << 0, -I, I, 0).finished();
  return s;
}

// exp of a traceless 2x2 matrix: cosh(l) 1 + sinh(l)/l A, l^2 = -det A.
inline Mat2 expm_traceless(const Mat2& a) {
  cplx l2 = -a.determinant();
  cplx l = std::sqrt(l2);
  cplx ch, sh;
  if (std::abs(l) < 1e-4) {
    ch = 1.0 + l2 / 2.0 + l2 * l2 / 24.0;
    sh = 1.0 + l2 / 6.0 + l2 * l2 / 120.0;
  } else {
    ch = std::cosh(l);
    sh = std::sinh(l) / l;
  }
  return ch * Mat2::Identity() + sh * a;
}

// Offsets of the two Gauss-Legendre nodes within a unit step.
inline constexpr double gauss_lo = 0.5 - 0.28867513459481288225;
inline constexpr double gauss_hi = 0.5 + 0.28867513459481288225;

// Cubic Lagrange interpolation of uniform samples y_i = f(x0 + i h).
// Uses the four nodes surrounding x (shifted inwards at the ends).
template <class T>
T interp_cubic(std::span<const T> y, double x0, double h, double x) {
  const std::size_t n = y.size();
  double s = (x - x0) / h;
  if (n < 4 || s < -1e-9 || s > static_cast<double>(n - 1) + 1e-9)
    throw ValidationError("extrapolation refused");
  auto i = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 4);
  double u = s - static_cast<double>(i);  // nodes at 0,1,2,3
  double w0 = -(u - 1) * (u - 2) * (u - 3) / 6;
  double w1 = u * (u - 2) * (u - 3) / 2;
  double w2 = -u * (u - 1) * (u - 3) / 2;
  double w3 = u * (u - 1) * (u - 2) / 6;
  return w0 * y[i] + w1 * y[i + 1] + w2 * y[i + 2] + w3 * y[i + 3];
}

// Values at the two Gauss nodes of every grid interval, by cubic interpolation.
inline std::vector<std::array<double, 2>> gauss_samples(const Grid& g, std::span<const double> y) {
  const std::size_t n = g.size();
  std::vector<std::array<double, 2>> out(n - 1);
  if (n < 4) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      out[i] = {y[i] + gauss_lo * (y[i + 1] - y[i]), y[i] + gauss_hi * (y[i + 1] - y[i])};
    return out;
  }
  const double h = g.spacing();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double x = g.x_min() + static_cast<double>(i) * h;
    out[i] = {interp_cubic(y, g.x_min(), h, x + gauss_lo * h), interp_cubic(y, g.x_min(), h, x + gauss_hi * h)};
  }
  return out;
}

// Fourth-order central differences on uniform samples (one-sided near the ends).
inline std::vector<double> derivative(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 5) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = i == 0 ? 0 : i - 1, b = std::min(i + 1, n - 1);
      if (b > a) d[i] = (y[b] - y[a]) / (static_cast<double>(b - a) * h);
    }
    return d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 2 && i + 2 < n) {
      d[i] = (y[i - 2] - 8 * y[i - 1] + 8 * y[i + 1] - y[i + 2]) / (12 * h);
    } else if (i < 2) {
      d[i] = (-25 * y[i] + 48 * y[i + 1] - 36 * y[i + 2] + 16 * y[i + 3] - 3 * y[i + 4]) / (12 * h);
    } else {
      d[i] = (25 * y[i] - 48 * y[i - 1] + 36 * y[i - 2] - 16 * y[i - 3] + 3 * y[i - 4]) / (12 * h);
    }
  }
  return d;
}

// log Gamma(z) for complex z: Lanczos, g = 7, nine terms; reflection for Re z < 1/2.
inline cplx lgamma_complex(cplx z) {
  static constexpr double g = 7.0;
  static constexpr double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                  771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                  -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) {
    // log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
    return std::log(pi) - std::log(std::sin(pi * z)) - lgamma_complex(1.0 - z);
  }
  z -= 1.0;
  cplx x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
  cplx t = z + g + 0.5;
  return 0.5 * std::log(2 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// arg Gamma(i y) as a continuous branch through the Lanczos form, reduced to (-pi, pi].
inline double arg_gamma_imag(double y) {
  double a = std::imag(lgamma_complex(cplx(0, y)));
  return std::remainder(a, 2 * pi);
}

}  // namespace rmb
