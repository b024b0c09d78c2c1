#pragma once

#include <cmath>

#include <rmb/scattering.hpp>

namespace rmb::test {

inline Potential sech_potential(double a, double w = 1, double x_min = -30, double x_max = 30, double h = 0.02) {
  Grid g = Grid::with_spacing(x_min, x_max, h);
  return Potential(g, g.sample([=](double x) { return a / std::cosh(w * x); }));
}

}  // namespace rmb::test
