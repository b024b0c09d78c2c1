#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "numeric.hpp"

namespace rmb {

struct BlochState {
  std::vector<double> s, u, r;
};

// Integrates (s,u,r)_x = w x (s,u,r) with w = (0, mu, -E) from the ground state
// at x_max toward x_min. Waves of the linearized system travel to the left, and
// only this direction keeps E_t = -s[E] stable. Each interval is one
// fourth-order Magnus rotation, so the Bloch norm is preserved up to round-off.
inline BlochState bloch_sweep(const Grid& grid, std::span<const double> E, double mu, double tol = 1e-10) {
  const std::size_t n = grid.size();
  if (E.size() != n) throw ValidationError("sweep: sample count does not match grid");
  const double h = grid.spacing();
  BlochState st{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  double s = 0, u = -1, r = 0;
  st.s[n - 1] = s;
  st.u[n - 1] = u;
  st.r[n - 1] = r;
  const double c3 = 0.28867513459481288225 / 2.0;  // sqrt(3)/12
  double defect = 0;
  for (std::size_t i = n - 1; i-- > 0;) {
    double e1, e2;
    if (n >= 4) {
      double x = grid.x_min() + static_cast<double>(i) * h;
      e1 = interp_cubic(E, grid.x_min(), h, x + gauss_lo * h);
      e2 = interp_cubic(E, grid.x_min(), h, x + gauss_hi * h);
    } else {
      e1 = E[i] + gauss_lo * (E[i + 1] - E[i]);
      e2 = E[i] + gauss_hi * (E[i + 1] - E[i]);
    }
    // Backward step: rotate by -(h/2 (w1 + w2) + sqrt(3)/12 h^2 (w2 x w1)).
    double o1 = -c3 * h * h * mu * (e2 - e1);
    double o2 = -h * mu;
    double o3 = 0.5 * h * (e1 + e2);
    double th = std::sqrt(o1 * o1 + o2 * o2 + o3 * o3);
    if (th > 0) {
      double k1 = o1 / th, k2 = o2 / th, k3 = o3 / th;
      double c = std::cos(th), sn = std::sin(th);
      double kv = k1 * s + k2 * u + k3 * r;
      double cx = k2 * r - k3 * u, cy = k3 * s - k1 * r, cz = k1 * u - k2 * s;
      double ns = s * c + cx * sn + k1 * kv * (1 - c);
      double nu = u * c + cy * sn + k2 * kv * (1 - c);
      double nr = r * c + cz * sn + k3 * kv * (1 - c);
      s = ns;
      u = nu;
      r = nr;
    }
    st.s[i] = s;
    st.u[i] = u;
    st.r[i] = r;
    defect = std::max(defect, std::abs(s * s + u * u + r * r - 1));
  }
  if (!(defect <= tol)) throw NumericError("sweep instability");
  return st;
}

inline SpatialField field_from_E(const Grid& grid, std::vector<double> E, double mu, double t) {
  auto st = bloch_sweep(grid, E, mu);
  return {grid, std::move(E), std::move(st.s), std::move(st.u), std::move(st.r), t};
}

// One classical RK4 step of E_t = -s[E], with a full sweep per stage.
inline SpatialField step_time(const SpatialField& state, double dt, double mu) {
  state.check_shape();
  const Grid& g = state.grid;
  const std::size_t n = g.size();
  auto s_of = [&](const std::vector<double>& e) { return bloch_sweep(g, e, mu).s; };
  std::vector<double> k1(state.s), stage(n);
  auto add = [&](const std::vector<double>& k, double w) {
    for (std::size_t i = 0; i < n; ++i) stage[i] = state.E[i] - w * k[i];
  };
  add(k1, dt / 2);
  auto k2 = s_of(stage);
  add(k2, dt / 2);
  auto k3 = s_of(stage);
  add(k3, dt);
  auto k4 = s_of(stage);
  std::vector<double> E(n);
  for (std::size_t i = 0; i < n; ++i) {
    E[i] = state.E[i] - dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    if (!std::isfinite(E[i])) throw NumericError("blowup or instability");
  }
  return field_from_E(g, std::move(E), mu, state.t + dt);
}

struct EvolveSpec {
  Grid grid;
  double mu = 1;
  double dt = 0.01;
  double t_end = 0;
  std::vector<double> record_times;

  void validate() const {
    if (!(mu > 0 && mu <= 1)) throw ValidationError("need 0 < mu <= 1");
    if (!(dt > 0)) throw ValidationError("dt must be > 0");
    if (!(t_end >= 0)) throw ValidationError("t_end must be >= 0");
    double prev = -1;
    for (double t : record_times) {
      if (t < 0 || t > t_end + 1e-12 || t < prev) throw ValidationError("record times must be sorted within [0, t_end]");
      prev = t;
    }
  }
};

struct EvolveResult {
  std::vector<SpatialField> snapshots;
  double max_bloch_defect = 0;
  double max_boundary_defect = 0;
  std::size_t steps = 0;
  double wall_seconds = 0;
  std::vector<std::string> warnings;
};

inline EvolveResult evolve(std::span<const double> E0, const EvolveSpec& spec, double tol_bdy = 1e-6) {
  spec.validate();
  const Grid& g = spec.grid;
  if (E0.size() != g.size()) throw ValidationError("initial datum does not match grid");
  auto start = std::chrono::steady_clock::now();
  EvolveResult res;
  if (spec.dt > 1.5 * g.spacing()) res.warnings.push_back("dt exceeds the grid spacing");

  SpatialField state = field_from_E(g, std::vector<double>(E0.begin(), E0.end()), spec.mu, 0);
  bool exit_warned = false;
  auto observe = [&](const SpatialField& f) {
    res.max_bloch_defect = std::max(res.max_bloch_defect, bloch_norm_defect(f));
    res.max_boundary_defect = std::max(res.max_boundary_defect, boundary_defect(f));
    if (exit_warned) return;
    for (std::size_t i = 0; i < g.size(); ++i) {
      bool edge = g[i] - g.x_min() < 5 || g.x_max() - g[i] < 5;
      if (edge && std::abs(f.E[i]) > 1e-3) {
        res.warnings.push_back("pulse within 5 units of a boundary at t=" + std::to_string(f.t));
        exit_warned = true;
        break;
      }
    }
  };
  observe(state);

  std::vector<double> stops = spec.record_times;
  if (stops.empty() || stops.back() < spec.t_end) stops.push_back(spec.t_end);
  for (double stop : stops) {
    double span = stop - state.t;
    if (span > 1e-12) {
      auto steps = static_cast<std::size_t>(std::ceil(span / spec.dt - 1e-9));
      double dt = span / static_cast<double>(steps);
      for (std::size_t k = 0; k < steps; ++k) {
        state = step_time(state, dt, spec.mu);
        ++res.steps;
      }
      state.t = stop;
      observe(state);
    }
    if (res.snapshots.size() < spec.record_times.size()) res.snapshots.push_back(state);
  }
  if (res.max_boundary_defect > tol_bdy) res.warnings.push_back("boundary Bloch vector left the ground state");
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace rmb
