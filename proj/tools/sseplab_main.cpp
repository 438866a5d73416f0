#include "sseplab/harness.hpp"
#include "sseplab/random.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Slow-boundary exclusion process: simulation, exact solvers and checks"};
  app.set_version_flag("--version", sseplab::version_string());

  std::string mode;
  std::string config;
  unsigned jobs = 0;
  std::string seed;
  std::string out;
  app.add_option("mode", mode, "profile | correlations | stationary | fluctuations | bounds | verify | spectrum")
      ->required();
  app.add_option("--config", config, "JSON experiment configuration")->required();
  app.add_option("--jobs", jobs, "worker threads (0: available parallelism)");
  app.add_option("--seed", seed, "seed, decimal or 0x-hex; overrides SSEPLAB_SEED and the config");
  app.add_option("--out", out, "output directory; overrides the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  sseplab::RunRequest req;
  try {
    req.mode = sseplab::parse_mode(mode);
    if (!seed.empty()) req.seed = sseplab::parse_seed(seed);
  } catch (const std::exception& e) {
    std::cerr << "sseplab: " << e.what() << "\n";
    return 2;
  }
  req.config = config;
  req.jobs = jobs;
  if (!out.empty()) req.out = out;
  return sseplab::run(req);
}
