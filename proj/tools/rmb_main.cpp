#include <CLI11.hpp>
#include <iostream>

#include <rmb/app.hpp>

namespace {

int dispatch(const std::string& verb, const rmb::Config& cfg, const std::string& out) {
  using namespace rmb::app;
  if (verb == "scatter") run_scatter(cfg, out, std::cout);
  else if (verb == "solitons") run_solitons(cfg, out, std::cout);
  else if (verb == "asymptotics") run_asymptotics(cfg, out, std::cout);
  else if (verb == "evolve") run_evolve(cfg, out, std::cout);
  else if (verb == "compare") run_compare(cfg, out, std::cout);
  else if (verb == "selfcheck") return run_selfcheck(std::cout) ? 0 : 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse scattering and asymptotics for the reduced Maxwell-Bloch equations"};
  std::string verb, config_path, out = ".";
  std::vector<std::string> overrides;
  app.add_option("verb", verb, "scatter | solitons | asymptotics | evolve | compare | selfcheck")
      ->required()
      ->check(CLI::IsMember({"scatter", "solitons", "asymptotics", "evolve", "compare", "selfcheck"}));
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out, "output directory");
  app.add_option("--set", overrides, "override a configuration entry, key=value (repeatable)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    rmb::Config cfg = config_path.empty() ? rmb::Config{} : rmb::Config::load(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
    cfg.validate();
    return dispatch(verb, cfg, out);
  } catch (const rmb::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rmb::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  }
}
