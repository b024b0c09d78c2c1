#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "core.hpp"
#include "evolve.hpp"
#include "io.hpp"
#include "scattering.hpp"
#include "soliton.hpp"

// Orchestration behind the command-line verbs. Every run reads a flat Config
// and writes into an output directory.
namespace rmb::app {

namespace fs = std::filesystem;
using io::json;

inline double mu_of(const Config& c) {
  double mu = c.num("medium.mu", 1.0);
  if (!(mu > 0 && mu <= 1)) throw ValidationError("medium.mu must be in (0, 1]");
  return mu;
}

inline Grid grid_of(const Config& c, const std::string& prefix = "grid") {
  return Grid::with_spacing(c.num(prefix + ".x_min", c.num("grid.x_min", -30)),
                            c.num(prefix + ".x_max", c.num("grid.x_max", 30)), c.num("grid.h", 0.02));
}

// "a:b:c; d:e:f" -> rows of numbers
inline std::vector<std::vector<double>> parse_tuples(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream is(item);
    std::string cell;
    while (std::getline(is, cell, ':')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("config: " + key + " has a malformed entry: " + item);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<SpectralPair> poles_of(const Config& c, const std::string& key) {
  std::vector<SpectralPair> poles;
  for (const auto& row : parse_tuples(key, c.str(key))) {
    if (row.size() != 2) throw ValidationError("config: " + key + " entries are eta:c");
    poles.push_back({cplx(0, row[0]), cplx(0, row[1])});
  }
  validate_poles(poles);
  return poles;
}

// Initial datum E0 sampled on a grid. Kinds: zero, sech (datum.terms =
// "amplitude:width:center; ..."), solitons (datum.poles = "eta:c; ...",
// field at datum.t0), samples (datum.file, CSV x,E).
inline Potential datum_on(const Config& c, const Grid& g) {
  const std::string kind = c.str("datum.kind", "sech");
  const double decay = c.num("tol.decay", 1e-12);
  if (kind == "zero") return Potential(g, std::vector<double>(g.size(), 0.0), decay);
  if (kind == "sech") {
    auto terms = parse_tuples("datum.terms", c.str("datum.terms", "2:1:0"));
    for (const auto& t : terms)
      if (t.size() != 3) throw ValidationError("config: datum.terms entries are amplitude:width:center");
    return Potential(g, g.sample([&](double x) {
      double e = 0;
      for (const auto& t : terms) e += t[0] / std::cosh(t[1] * (x - t[2]));
      return e;
    }), decay);
  }
  if (kind == "solitons") {
    auto f = nsoliton_field(poles_of(c, "datum.poles"), std::nullopt, g, c.num("datum.t0", 0), mu_of(c));
    return Potential(g, f.E, decay);
  }
  if (kind == "samples") {
    auto s = io::read_samples(c.str("datum.file"));
    return Potential(s.grid, s.E, decay);
  }
  throw ValidationError("config: unknown datum.kind " + kind);
}

inline Potential datum(const Config& c) {
  if (c.str("datum.kind") == "samples") return datum_on(c, Grid(0, 1, 3));
  return datum_on(c, grid_of(c));
}

inline TransformOptions transform_options(const Config& c) {
  TransformOptions o;
  o.z_grid = uniform_points(c.num("scatter.z_min", -8), c.num("scatter.z_max", 8), c.count("scatter.z_n", 801));
  o.eta_max = c.num("scatter.eta_max", 0);
  o.n_scan = c.count("scatter.n_scan", 400);
  o.tol_zero = c.num("tol.zero", 1e-8);
  return o;
}

inline ConeSpec cone_of(const Config& c) {
  ConeSpec k{c.num("cone.x1", 0), c.num("cone.x2", 0), c.num("cone.v1", -0.5), c.num("cone.v2", -0.5), mu_of(c)};
  k.validate();
  return k;
}

inline fs::path prepare_out(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ValidationError("cannot create output directory " + p.string());
  return p;
}

struct ScatterRun {
  ScatteringData data;
  double max_unitarity_defect = 0;
  double max_det_defect = 0;
};

inline ScatterRun run_scatter(const Config& c, const std::string& out_dir, std::ostream& log) {
  Grid sg = grid_of(c, "scatter");
  Potential pot = c.str("datum.kind") == "samples" ? datum(c) : datum_on(c, sg);
  auto res = direct_transform_detailed(pot, transform_options(c));
  ScatterRun run{res.data, 0, 0};
  fs::path out = prepare_out(out_dir);
  io::write_scattering((out / "scattering.json").string(), res.data);
  auto diag = io::open_out((out / "scatter_diagnostics.csv").string());
  diag << "z,s11_re,s11_im,s21_re,s21_im,unitarity_defect,det_defect\n";
  for (const auto& row : res.rows) {
    diag << io::num(row.z) << ',' << io::num(row.s11.real()) << ',' << io::num(row.s11.imag()) << ','
         << io::num(row.s21.real()) << ',' << io::num(row.s21.imag()) << ',' << io::num(row.unitarity_defect) << ','
         << io::num(row.det_defect) << '\n';
    run.max_unitarity_defect = std::max(run.max_unitarity_defect, std::abs(row.unitarity_defect));
    run.max_det_defect = std::max(run.max_det_defect, row.det_defect);
  }
  log << "scatter: " << res.data.discrete.size() << " eigenvalue(s)";
  for (const auto& p : res.data.discrete) log << " (eta=" << p.eta() << ", c=" << p.c.imag() << "i)";
  log << "; max unitarity defect " << run.max_unitarity_defect << "; max det defect " << run.max_det_defect << '\n';
  return run;
}

// Scattering data from scatter.data when given, otherwise computed from the datum.
inline ScatteringData scattering_of(const Config& c) {
  if (c.has("scatter.data")) return io::read_scattering(c.str("scatter.data"));
  Grid sg = grid_of(c, "scatter");
  Potential pot = c.str("datum.kind") == "samples" ? datum(c) : datum_on(c, sg);
  return direct_transform(pot, transform_options(c));
}

inline SpatialField run_solitons(const Config& c, const std::string& out_dir, std::ostream& log) {
  std::vector<SpectralPair> poles =
      c.has("soliton.poles") ? poles_of(c, "soliton.poles") : scattering_of(c).discrete;
  const double mu = mu_of(c), t = c.num("soliton.t", 0);
  std::optional<std::vector<bool>> tri;
  const std::string mode = c.str("soliton.triangle", "balanced");
  if (mode == "none") {
    tri = std::vector<bool>(poles.size(), false);
  } else if (mode == "default") {
    tri = default_triangle(poles, mu, c.num("soliton.v", -1.0 / (2 * mu * mu)));
  } else if (mode != "balanced") {
    throw ValidationError("config: soliton.triangle must be balanced, none or default");
  }
  auto f = nsoliton_field(poles, tri, grid_of(c), t, mu);
  io::write_field((prepare_out(out_dir) / "solitons.csv").string(), f, mu);
  log << "solitons: " << poles.size() << " pole(s) at t=" << t << "; Bloch defect " << bloch_norm_defect(f) << '\n';
  return f;
}

struct PredictionRow {
  double x, t;
  AsymptoticPrediction p;
};

// Evaluation points across the cone at time t with spacing dx.
inline std::vector<double> cone_points(const ConeSpec& cone, double t, double dx) {
  double a = cone.x1 + cone.v1 * t, b = cone.x2 + cone.v2 * t;
  std::vector<double> xs;
  auto n = static_cast<std::size_t>(std::floor((b - a) / dx + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) xs.push_back(a + static_cast<double>(i) * dx);
  return xs;
}

inline std::vector<PredictionRow> run_asymptotics(const Config& c, const std::string& out_dir, std::ostream& log) {
  ConeSpec cone = cone_of(c);
  AsymptoticModel model(scattering_of(c), cone);
  const double t = c.num("asym.t", 100);
  std::vector<PredictionRow> rows;
  for (double x : cone_points(cone, t, c.num("asym.dx", 0.1))) rows.push_back({x, t, model.at(x, t)});

  fs::path out = prepare_out(out_dir);
  auto csv = io::open_out((out / "prediction.csv").string());
  csv << "x,t,E_lead,E_rad,s,u,r\n";
  for (const auto& r : rows)
    csv << io::num(r.x) << ',' << io::num(r.t) << ',' << io::num(r.p.leading.E) << ',' << io::num(r.p.radiation) << ','
        << io::num(r.p.leading.s) << ',' << io::num(r.p.leading.u) << ',' << io::num(r.p.leading.r) << '\n';

  // Constants on the central ray of the cone at this time.
  const double xc = 0.5 * (cone.x1 + cone.x2 + (cone.v1 + cone.v2) * t);
  auto mid = model.at(xc, t);
  auto [lo, hi] = cone_interval(cone.mu, cone.v1, cone.v2);
  json side = {{"x", xc},
               {"t", t},
               {"zeta0", mid.phase.zeta0},
               {"zeta1_im", mid.phase.zeta1.imag()},
               {"beta", mid.phase.beta},
               {"nu", mid.phase.nu0},
               {"arg_b", mid.radiation_defined ? json(std::arg(mid.b)) : json(nullptr)},
               {"abs_b", std::abs(mid.b)},
               {"eta_interval", {lo, hi}},
               {"selected", mid.selected}};
  if (auto alt = cone_interval_inverse_mu(cone.mu, cone.v1, cone.v2); alt && (alt->first != lo || alt->second != hi))
    side["eta_interval_inverse_mu_form"] = {alt->first, alt->second};
  auto js = io::open_out((out / "prediction.json").string());
  js << side.dump(1) << '\n';
  log << "asymptotics: " << rows.size() << " point(s) at t=" << t << "; zeta0=" << mid.phase.zeta0
      << "; selected " << mid.selected.size() << " soliton(s)\n";
  return rows;
}

inline EvolveSpec evolve_spec(const Config& c, const Grid& g) {
  EvolveSpec s{g, mu_of(c), c.num("evolve.dt", 0.01), c.num("evolve.t_end", 10), {}};
  s.record_times = c.list("evolve.record", {s.t_end});
  s.validate();
  return s;
}

inline json manifest(const EvolveSpec& s, const EvolveResult& r) {
  return {{"x_min", s.grid.x_min()},
          {"x_max", s.grid.x_max()},
          {"n_points", s.grid.size()},
          {"mu", s.mu},
          {"dt", s.dt},
          {"t_end", s.t_end},
          {"record_times", s.record_times},
          {"steps", r.steps},
          {"max_bloch_defect", r.max_bloch_defect},
          {"max_boundary_defect", r.max_boundary_defect},
          {"wall_seconds", r.wall_seconds},
          {"warnings", r.warnings}};
}

inline EvolveResult run_evolve(const Config& c, const std::string& out_dir, std::ostream& log) {
  Potential pot = datum(c);
  EvolveSpec spec = evolve_spec(c, pot.grid());
  auto res = evolve(pot.samples(), spec, c.num("tol.bdy", 1e-6));
  if (res.max_bloch_defect > c.num("tol.bloch", 1e-8)) throw NumericError("Bloch constraint drifted beyond tol.bloch");
  fs::path out = prepare_out(out_dir);
  json m = manifest(spec, res);
  m["snapshots"] = json::array();
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    std::string name = "snapshot_" + std::to_string(k) + ".csv";
    io::write_field((out / name).string(), res.snapshots[k], spec.mu);
    m["snapshots"].push_back({{"t", res.snapshots[k].t}, {"file", name}});
  }
  auto js = io::open_out((out / "manifest.json").string());
  js << m.dump(1) << '\n';
  log << "evolve: " << res.steps << " steps in " << res.wall_seconds << " s; Bloch defect " << res.max_bloch_defect
      << '\n';
  for (const auto& w : res.warnings) log << "warning: " << w << '\n';
  return res;
}

// Least-squares slope of log r against log t.
inline std::optional<double> loglog_slope(const std::vector<double>& t, const std::vector<double>& r) {
  if (t.size() < 2) return std::nullopt;
  double mt = 0, mr = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(r[i] > 0) || !(t[i] > 0)) return std::nullopt;
    mt += std::log(t[i]);
    mr += std::log(r[i]);
  }
  mt /= static_cast<double>(t.size());
  mr /= static_cast<double>(t.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (std::log(t[i]) - mt) * (std::log(r[i]) - mr);
    den += (std::log(t[i]) - mt) * (std::log(t[i]) - mt);
  }
  return num / den;
}

struct CompareRow {
  double t;
  double residual_lead;       // max |E_sim - E_lead| inside the cone
  double residual_radiation;  // max |E_sim - E_lead - E_rad|
  double radiation_max;
  std::size_t points;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::optional<double> slope_lead, slope_radiation;
  bool radiation_present = false;
};

// Residuals of the simulated field against the asymptotic prediction at every
// grid point inside the cone.
inline CompareRow compare_at(const SpatialField& f, const AsymptoticModel& model) {
  CompareRow row{f.t, 0, 0, 0, 0};
  for (std::size_t i = 0; i < f.grid.size(); ++i) {
    double x = f.grid[i];
    if (!model.cone().contains(x, f.t)) continue;
    auto p = model.at(x, f.t);
    row.residual_lead = std::max(row.residual_lead, std::abs(f.E[i] - p.leading.E));
    row.residual_radiation = std::max(row.residual_radiation, std::abs(f.E[i] - p.leading.E - p.radiation));
    row.radiation_max = std::max(row.radiation_max, std::abs(p.radiation));
    ++row.points;
  }
  return row;
}

inline CompareReport compare_runs(const std::vector<SpatialField>& snaps, const AsymptoticModel& model) {
  CompareReport rep;
  std::vector<double> t, r1, r2;
  for (const auto& f : snaps) {
    auto row = compare_at(f, model);
    rep.rows.push_back(row);
    rep.radiation_present = rep.radiation_present || row.radiation_max > 0;
    t.push_back(row.t);
    r1.push_back(row.residual_lead);
    r2.push_back(row.residual_radiation);
  }
  rep.slope_lead = loglog_slope(t, r1);
  if (rep.radiation_present) {
    rep.slope_radiation = loglog_slope(t, r2);
  } else {
    rep.slope_lead.reset();  // reflectionless: residual is scheme error, no decay law to fit
  }
  return rep;
}

inline CompareReport run_compare(const Config& c, const std::string& out_dir, std::ostream& log) {
  ConeSpec cone = cone_of(c);
  AsymptoticModel model(scattering_of(c), cone);
  Potential pot = datum(c);
  auto times = c.list("compare.times", {25, 50, 100, 200});
  if (times.empty()) throw ValidationError("compare.times is empty");
  const Grid& g = pot.grid();
  for (double t : times)
    if (cone.x1 + cone.v1 * t < g.x_min() || cone.x2 + cone.v2 * t > g.x_max())
      throw ValidationError("cone outside simulated domain");
  EvolveSpec spec{g, cone.mu, c.num("evolve.dt", 0.01), times.back(), times};
  auto res = evolve(pot.samples(), spec, c.num("tol.bdy", 1e-6));
  auto rep = compare_runs(res.snapshots, model);

  fs::path out = prepare_out(out_dir);
  auto csv = io::open_out((out / "compare.csv").string());
  csv << "t,residual_lead,residual_radiation,radiation_max,points\n";
  for (const auto& r : rep.rows)
    csv << io::num(r.t) << ',' << io::num(r.residual_lead) << ',' << io::num(r.residual_radiation) << ','
        << io::num(r.radiation_max) << ',' << r.points << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"slope_lead", opt(rep.slope_lead)},
            {"slope_radiation", opt(rep.slope_radiation)},
            {"radiation_present", rep.radiation_present},
            {"second_steeper", rep.slope_lead && rep.slope_radiation ? json(*rep.slope_radiation < *rep.slope_lead)
                                                                     : json(nullptr)},
            {"evolve", manifest(spec, res)}};
  auto js = io::open_out((out / "compare.json").string());
  js << j.dump(1) << '\n';
  for (const auto& r : rep.rows)
    log << "compare: t=" << r.t << " |E-lead|=" << r.residual_lead << " |E-lead-rad|=" << r.residual_radiation << '\n';
  if (rep.slope_lead) log << "compare: slope(lead)=" << *rep.slope_lead << '\n';
  if (rep.slope_radiation) log << "compare: slope(lead+rad)=" << *rep.slope_radiation << '\n';
  return rep;
}

// Quick end-to-end checks on the 2 sech x datum; returns true when all pass.
inline bool run_selfcheck(std::ostream& log) {
  bool ok = true;
  auto check = [&](const std::string& name, double value, double tol) {
    bool pass = std::isfinite(value) && std::abs(value) <= tol;
    ok = ok && pass;
    log << (pass ? "PASS " : "FAIL ") << name << " deviation=" << value << " tol=" << tol << '\n';
  };
  Grid g = Grid::with_spacing(-30, 30, 0.05);
  Potential pot(g, g.sample([](double x) { return 2 / std::cosh(x); }));
  TransformOptions opt;
  opt.z_grid = uniform_points(-4, 4, 81);
  opt.eta_max = 1.5;
  opt.n_scan = 60;
  auto d = direct_transform(pot, opt);
  check("eigenvalue count", static_cast<double>(d.discrete.size()) - 1, 0);
  if (d.discrete.size() == 1) {
    check("eigenvalue i/2", d.discrete[0].eta() - 0.5, 1e-4);
    check("norming constant i", d.discrete[0].c.imag() - 1, 1e-3);
  }
  double rmax = 0;
  for (cplx r : d.r_samples) rmax = std::max(rmax, std::abs(r));
  check("reflectionless", rmax, 1e-6);
  auto f = nsoliton_field({{cplx(0, 0.5), cplx(0, 1)}}, std::nullopt, Grid(-10, 10, 201), 3, 1);
  double e = 0;
  for (std::size_t i = 0; i < f.grid.size(); ++i) e = std::max(e, std::abs(f.E[i] - one_soliton_exact(0.5, 1, 1, f.grid[i], 3).E));
  check("residue solver vs closed form", e, 1e-9);
  auto sp = stationary_points(1, -0.125);
  check("stationary point quartic", quartic_residual(1, -0.125, sp.zeta0), 1e-12);
  auto ev = evolve(pot.samples(), EvolveSpec{g, 1, 0.025, 1, {1}});
  double ee = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    ee = std::max(ee, std::abs(ev.snapshots[0].E[i] - one_soliton_exact(0.5, 1, 1, g[i], 1).E));
  check("integrator vs closed form", ee, 1e-5);
  return ok;
}

}  // namespace rmb::app
