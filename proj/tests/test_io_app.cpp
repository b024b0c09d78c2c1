#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <rmb/app.hpp>

using namespace rmb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("rmb_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  int status = std::system((std::string(RMB_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Io, ScatteringJsonRoundTrip) {
  ScatteringData d;
  d.z_grid = uniform_points(-1, 1, 3);
  d.r_samples = {cplx(0.1, -0.3), 0.25, cplx(0.1, 0.3)};
  d.discrete = {{cplx(0, 0.35), cplx(0, -1.25)}};
  auto path = (scratch("json") / "s.json").string();
  io::write_scattering(path, d);
  auto back = io::read_scattering(path);
  EXPECT_EQ(back.z_grid, d.z_grid);
  EXPECT_EQ(back.r_samples, d.r_samples);
  ASSERT_EQ(back.discrete.size(), 1u);
  EXPECT_EQ(back.discrete[0].c, d.discrete[0].c);
  EXPECT_THROW(io::scattering_from_json(io::json::parse(R"({"z_grid":[0]})")), ValidationError);
}

TEST(Io, FieldRoundTripKeepsFullPrecision) {
  auto f = nsoliton_field({{cplx(0, 0.5), cplx(0, 1)}}, std::nullopt, Grid(-5, 5, 21), 1.5, 1);
  auto path = (scratch("field") / "f.csv").string();
  io::write_field(path, f, 1);
  auto g = io::read_field(path);
  EXPECT_EQ(g.t, 1.5);
  EXPECT_EQ(g.E, f.E);
  EXPECT_EQ(g.r, f.r);
  EXPECT_EQ(g.grid.size(), 21u);
}

TEST(Io, SamplesFileChecks) {
  auto dir = scratch("samples");
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  auto ok = io::read_samples(write("ok.csv", "x,E\n0,0\n0.5,1\n1,0\n"));
  EXPECT_EQ(ok.grid.size(), 3u);
  EXPECT_THROW(io::read_samples(write("nan.csv", "0,0\n0.5,nan\n1,0\n")), ValidationError);
  EXPECT_THROW(io::read_samples(write("gap.csv", "0,0\n0.4,1\n1,0\n")), ValidationError);
  EXPECT_THROW(io::read_samples(write("short.csv", "0,0\n1,0\n")), ValidationError);
  EXPECT_THROW(io::read_samples((dir / "missing.csv").string()), ValidationError);
}

TEST(App, DatumKinds) {
  Config c;
  c.set("grid.x_min", "-40");
  c.set("grid.x_max", "40");
  c.set("grid.h", "0.1");
  c.set("datum.terms", "1:1:-3; 0.5:2:4");
  auto p = app::datum(c);
  EXPECT_NEAR(p.samples()[p.grid().size() / 2], 1 / std::cosh(3.0) + 0.5 / std::cosh(8.0), 1e-14);
  c.set("datum.kind", "solitons");
  c.set("datum.poles", "0.5:1");
  EXPECT_NEAR(app::datum(c).samples()[400], one_soliton_exact(0.5, 1, 1, 0, 0).E, 1e-12);
  c.set("datum.kind", "zero");
  EXPECT_EQ(app::datum(c).area(), 0);
  c.set("datum.kind", "bogus");
  EXPECT_THROW(app::datum(c), ValidationError);
  c.set("datum.kind", "sech");
  c.set("datum.terms", "1:2");
  EXPECT_THROW(app::datum(c), ValidationError);
}

TEST(App, LogLogSlope) {
  std::vector<double> t{25, 50, 100, 200}, r;
  for (double x : t) r.push_back(3 * std::pow(x, -0.5));
  EXPECT_NEAR(*app::loglog_slope(t, r), -0.5, 1e-14);
  r[1] = 0;
  EXPECT_FALSE(app::loglog_slope(t, r).has_value());
  EXPECT_FALSE(app::loglog_slope({1}, {1}).has_value());
}

TEST(App, ScatterThenSolitonsAndAsymptotics) {
  auto dir = scratch("app");
  Config c;
  c.set("grid.h", "0.05");
  c.set("scatter.z_n", "161");
  c.set("datum.terms", "1.7:1:0");
  std::ostringstream log;
  auto run = app::run_scatter(c, dir.string(), log);
  ASSERT_EQ(run.data.discrete.size(), 1u);
  EXPECT_NEAR(run.data.discrete[0].eta(), 0.35, 1e-6);
  EXPECT_LT(run.max_unitarity_defect, 1e-10);
  EXPECT_TRUE(fs::exists(dir / "scattering.json"));
  EXPECT_TRUE(fs::exists(dir / "scatter_diagnostics.csv"));

  c.set("scatter.data", (dir / "scattering.json").string());
  c.set("cone.v1", "-0.70");
  c.set("cone.v2", "-0.64");
  c.set("asym.t", "50");
  auto rows = app::run_asymptotics(c, dir.string(), log);
  EXPECT_EQ(rows.size(), 31u);
  for (const auto& r : rows) EXPECT_TRUE(r.p.radiation_defined);
  auto side = io::read_json((dir / "prediction.json").string());
  EXPECT_EQ(side["selected"].size(), 1u);
  EXPECT_NEAR(side["abs_b"].get<double>(), std::sqrt(-side["nu"].get<double>()), 1e-12);

  c.set("soliton.t", "3");
  auto f = app::run_solitons(c, dir.string(), log);
  EXPECT_TRUE(fs::exists(dir / "solitons.csv"));
  EXPECT_NEAR(f.E[f.grid.size() / 2], one_soliton_exact(run.data.discrete[0].eta(), run.data.discrete[0].c.imag(), 1, 0, 3).E, 1e-12);
}

TEST(App, EvolveWritesManifest) {
  auto dir = scratch("evolve");
  Config c;
  c.set("grid.h", "0.1");
  c.set("evolve.dt", "0.05");
  c.set("evolve.t_end", "1");
  c.set("evolve.record", "0.5,1");
  std::ostringstream log;
  auto res = app::run_evolve(c, dir.string(), log);
  EXPECT_EQ(res.snapshots.size(), 2u);
  auto m = io::read_json((dir / "manifest.json").string());
  EXPECT_EQ(m["snapshots"].size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "snapshot_1.csv"));
  EXPECT_EQ(io::read_field((dir / "snapshot_1.csv").string()).t, 1);
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("cli").string();
  EXPECT_EQ(cli("selfcheck"), 0);
  EXPECT_EQ(cli("scatter --set grid.h=0.1 --set scatter.z_n=41 --out " + dir), 0);
  EXPECT_TRUE(fs::exists(fs::path(dir) / "scattering.json"));
  EXPECT_EQ(cli("nonsense"), 2);
  EXPECT_EQ(cli("evolve --set evolve.dt=-1"), 2);
  EXPECT_EQ(cli("scatter --config /nonexistent.cfg"), 2);
  EXPECT_EQ(cli("scatter --set grid.x_max=3"), 2);  // datum not decayed
  EXPECT_EQ(cli("asymptotics --set cone.v1=-2"), 2);
}
