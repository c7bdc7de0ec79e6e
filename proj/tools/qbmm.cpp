// qbmm: run a benchmark preset, a convergence study or an audited run.
//
//   qbmm --config run.cfg --nx 1600 --out results/
//   qbmm --preset riemann --closure hyqmom --mode audit

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qbmm/cli.hpp"
#include "qbmm/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Realizability-preserving moment solver"};

  std::string config_path;
  std::string mode, preset, closure, tau, out;
  std::optional<int> nx;
  std::optional<double> cfl;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "run | converge | audit");
  app.add_option("--preset", preset, "smooth | riemann | shock_tube | shu_osher | "
                                      "double_rarefaction | custom");
  app.add_option("--closure", closure, "eqmom | hyqmom");
  app.add_option("--nx", nx, "number of cells");
  app.add_option("--cfl", cfl, "CFL number in (0, 0.5]");
  app.add_option("--tau", tau, "relaxation time, or inf");
  app.add_option("--out", out, "output directory");
  CLI11_PARSE(app, argc, argv);

  qbmm::configure_threads_from_env();

  qbmm::RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      qbmm::apply_config_text(cfg, ss.str());
    }
    if (!mode.empty()) qbmm::set_config_value(cfg, "mode", mode);
    if (!preset.empty()) qbmm::set_config_value(cfg, "preset", preset);
    if (!closure.empty()) qbmm::set_config_value(cfg, "closure", closure);
    if (nx) cfg.nx = *nx;
    if (cfl) cfg.cfl = *cfl;
    if (!tau.empty()) qbmm::set_config_value(cfg, "tau", tau);
    if (!out.empty()) cfg.out = out;
    qbmm::validate_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return qbmm::run(cfg, std::cout, std::cerr);
}
