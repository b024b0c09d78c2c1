#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "numeric.hpp"

namespace rmb {

// phi(z; x, t) = z t / (4z^2 - mu^2) - z x
inline cplx phase_phi(cplx z, double x, double t, double mu) {
  cplx den = 4.0 * z * z - mu * mu;
  if (std::abs(den) < 1e-14 * (1 + mu * mu)) throw ValidationError("phase singular at +-mu/2");
  return z * t / den - z * x;
}

inline void validate_poles(const std::vector<SpectralPair>& poles) {
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const auto& p = poles[k];
    if (p.z.real() != 0 || !(p.z.imag() > 0)) throw ValidationError("poles must be purely imaginary with Im z > 0");
    if (p.c.real() != 0 || p.c.imag() == 0) throw ValidationError("norming constants must be purely imaginary and nonzero");
    for (std::size_t j = 0; j < k; ++j)
      if (poles[j].z == p.z) throw ValidationError("poles must be distinct");
  }
}

struct PoleSolution {
  double x = 0, t = 0, mu = 1;
  std::vector<bool> triangle;
  std::vector<SpectralPair> poles;
  // Column 1 of M has simple poles at p_k with residue alpha_k P_k, where
  // P_k = col2(p_k); column 2 has poles at q_k = conj p_k with residue
  // beta_k Q_k, Q_k = col1(q_k).
  std::vector<cplx> p, q, alpha, beta;
  std::vector<Vec2> P, Q;
  Mat2 M1 = Mat2::Zero();
  double condition = 1;
  std::optional<std::string> warning;
};

namespace detail {

inline constexpr double trigger_clamp = 700.0;

// exp(log_coef + expo) with the real part clamped.
inline cplx clamped_exp(cplx log_value) {
  double re = std::clamp(log_value.real(), -trigger_clamp, trigger_clamp);
  return std::exp(cplx(re, log_value.imag()));
}

}  // namespace detail

// Reflectionless residue problem in the gauge M F^{-sigma3} with
// F(z) = prod_{k in triangle} (z - conj z_k)/(z - z_k).
inline PoleSolution solve_reflectionless(const std::vector<SpectralPair>& poles, const std::vector<bool>& triangle,
                                         double x, double t, double mu) {
  validate_poles(poles);
  const std::size_t n = poles.size();
  if (!triangle.empty() && triangle.size() != n) throw ValidationError("triangle size does not match poles");
  PoleSolution sol;
  sol.x = x;
  sol.t = t;
  sol.mu = mu;
  sol.poles = poles;
  sol.triangle = triangle.empty() ? std::vector<bool>(n, false) : triangle;
  if (n == 0) return sol;

  const auto& tri = sol.triangle;
  // log F(w) over the triangle, skipping one index.
  auto log_F = [&](cplx w, std::size_t skip) {
    cplx s = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (tri[j] && j != skip) s += std::log((w - std::conj(poles[j].z)) / (w - poles[j].z));
    return s;
  };

  sol.p.resize(n);
  sol.q.resize(n);
  sol.alpha.resize(n);
  sol.beta.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx zk = poles[k].z, zb = std::conj(zk), ck = poles[k].c;
    if (!tri[k]) {
      sol.p[k] = zk;
      sol.q[k] = zb;
      sol.alpha[k] = detail::clamped_exp(std::log(ck) - 2.0 * log_F(zk, n) - 2.0 * I * phase_phi(zk, x, t, mu));
      sol.beta[k] =
          detail::clamped_exp(std::log(-std::conj(ck)) + 2.0 * log_F(zb, n) + 2.0 * I * phase_phi(zb, x, t, mu));
    } else {
      // F'(conj z_k) = 1/(conj z_k - z_k) prod_{j != k}, (1/F)'(z_k) = 1/(z_k - conj z_k) prod_{j != k}
      cplx log_dF_bar = -std::log(zb - zk) + log_F(zb, k);
      cplx log_dFinv = -std::log(zk - zb) - log_F(zk, k);
      sol.p[k] = zb;
      sol.q[k] = zk;
      sol.alpha[k] =
          detail::clamped_exp(std::log(-1.0 / std::conj(ck)) - 2.0 * log_dF_bar - 2.0 * I * phase_phi(zb, x, t, mu));
      sol.beta[k] = detail::clamped_exp(std::log(1.0 / ck) - 2.0 * log_dFinv + 2.0 * I * phase_phi(zk, x, t, mu));
    }
  }

  // Unknowns [P_1..P_n, Q_1..Q_n]:
  //   P_j - sum_k beta_k Q_k/(p_j - q_k) = e2,  Q_k - sum_l alpha_l P_l/(q_k - p_l) = e1.
  const auto m = static_cast<Eigen::Index>(2 * n);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(m, m);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(m, 2);
  for (std::size_t j = 0; j < n; ++j) {
    auto jj = static_cast<Eigen::Index>(j);
    auto nn = static_cast<Eigen::Index>(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto kk = static_cast<Eigen::Index>(k);
      A(jj, nn + kk) = -sol.beta[k] / (sol.p[j] - sol.q[k]);
      A(nn + jj, kk) = -sol.alpha[k] / (sol.q[j] - sol.p[k]);
    }
    rhs(jj, 1) = 1;
    rhs(nn + jj, 0) = 1;
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  double rc = lu.rcond();
  if (!(rc > 0) || !std::isfinite(rc)) throw NumericError("degenerate pole configuration");
  sol.condition = 1.0 / rc;
  if (sol.condition > 1e12) sol.warning = "ill-conditioned residue system (condition " + std::to_string(sol.condition) + ")";
  Eigen::MatrixXcd X = lu.solve(rhs);
  if (!X.allFinite()) throw NumericError("degenerate pole configuration");

  sol.P.resize(n);
  sol.Q.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto kk = static_cast<Eigen::Index>(k);
    sol.P[k] = Vec2(X(kk, 0), X(kk, 1));
    sol.Q[k] = Vec2(X(static_cast<Eigen::Index>(n) + kk, 0), X(static_cast<Eigen::Index>(n) + kk, 1));
    sol.M1.col(0) += sol.alpha[k] * sol.P[k];
    sol.M1.col(1) += sol.beta[k] * sol.Q[k];
  }
  return sol;
}

inline Mat2 evaluate_M(const PoleSolution& sol, cplx z) {
  Mat2 m = Mat2::Identity();
  for (std::size_t k = 0; k < sol.p.size(); ++k) {
    if (std::abs(z - sol.p[k]) < 1e-14 * (1 + std::abs(z)) || std::abs(z - sol.q[k]) < 1e-14 * (1 + std::abs(z)))
      throw ValidationError("evaluation at pole");
    m.col(0) += sol.alpha[k] * sol.P[k] / (z - sol.p[k]);
    m.col(1) += sol.beta[k] * sol.Q[k] / (z - sol.q[k]);
  }
  return m;
}

struct Reconstruction {
  Fields value;
  double imag_max = 0;     // largest imaginary part among the raw outputs
  double pm_mismatch = 0;  // disagreement between the +mu/2 and -mu/2 evaluations
};

inline Reconstruction reconstruct_fields_detailed(const PoleSolution& sol, double tol = 1e-9) {
  Reconstruction rec;
  cplx E = -4.0 * I * sol.M1(0, 1);
  rec.value.E = E.real();
  rec.imag_max = std::abs(E.imag());

  cplx su[2], uu[2], ru[2];
  for (int side = 0; side < 2; ++side) {
    double sign = side == 0 ? 1.0 : -1.0;
    Mat2 M = evaluate_M(sol, cplx(sign * sol.mu / 2, 0));
    Mat2 rho = M * sigma3() * M.inverse();
    uu[side] = -rho(0, 0);
    su[side] = -(rho(0, 1) + rho(1, 0)) / 2.0;
    ru[side] = -sign * (rho(0, 1) - rho(1, 0)) / (2.0 * I);
  }
  for (int side = 0; side < 2; ++side)
    rec.imag_max = std::max({rec.imag_max, std::abs(uu[side].imag()), std::abs(su[side].imag()), std::abs(ru[side].imag())});
  rec.pm_mismatch = std::max({std::abs(uu[0] - uu[1]), std::abs(su[0] - su[1]), std::abs(ru[0] - ru[1])});
  if (!(rec.pm_mismatch <= tol)) throw NumericError("reconstruction inconsistency");
  rec.value.s = 0.5 * (su[0] + su[1]).real();
  rec.value.u = 0.5 * (uu[0] + uu[1]).real();
  rec.value.r = 0.5 * (ru[0] + ru[1]).real();
  return rec;
}

inline Fields reconstruct_fields(const PoleSolution& sol) { return reconstruct_fields_detailed(sol).value; }

// Closed-form one soliton for the pair (i eta, i c), c real.
inline Fields one_soliton_exact(double eta, double c, double mu, double x, double t) {
  if (!(eta > 0) || c == 0 || !(mu > 0)) throw ValidationError("one soliton needs eta > 0, c != 0, mu > 0");
  const double a = 4 * eta * eta + mu * mu;
  const double lam = 2 * eta * (t / a + x);
  const double th = lam + std::log(2 * eta / std::abs(c));
  const double e = std::exp(-std::abs(th));
  const double sech = 2 * e / (1 + e * e);
  const double tanh = std::copysign((1 - e * e) / (1 + e * e), th);
  const double sg = c > 0 ? 1.0 : -1.0;
  return {4 * eta * sg * sech, sg * 8 * eta * eta / a * tanh * sech, -1 + 8 * eta * eta / a * sech * sech,
          sg * 4 * eta * mu / a * sech};
}

// Index k belongs to the triangle when G(0, eta_k) < 0 on the ray v.
inline std::vector<bool> default_triangle(const std::vector<SpectralPair>& poles, double mu, double v) {
  std::vector<bool> tri(poles.size());
  for (std::size_t k = 0; k < poles.size(); ++k) {
    double eta = poles[k].eta();
    tri[k] = 1.0 / (4 * eta * eta + mu * mu) + v < 0;
  }
  return tri;
}

// Gauge that keeps every trigger factor bounded at (x, t): pole k goes into
// the triangle when |c_k e^{-2i phi(z_k)}| exceeds 2 eta_k.
inline std::vector<bool> balanced_triangle(const std::vector<SpectralPair>& poles, double x, double t, double mu) {
  std::vector<bool> tri(poles.size());
  for (std::size_t k = 0; k < poles.size(); ++k) {
    double eta = poles[k].eta();
    double lg = std::log(std::abs(poles[k].c)) + (-2.0 * I * phase_phi(poles[k].z, x, t, mu)).real();
    tri[k] = lg > std::log(2 * eta);
  }
  return tri;
}

// Field of the reflectionless problem on a grid. Without a triangle the
// balanced gauge is chosen point by point.
inline SpatialField nsoliton_field(const std::vector<SpectralPair>& poles,
                                   const std::optional<std::vector<bool>>& triangle,
                                   const Grid& grid, double t, double mu) {
  validate_poles(poles);
  SpatialField f = SpatialField::ground(grid, t);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid[i];
    auto tri = triangle ? *triangle : balanced_triangle(poles, x, t, mu);
    f.set(i, reconstruct_fields(solve_reflectionless(poles, tri, x, t, mu)));
  }
  return f;
}

}  // namespace rmb
