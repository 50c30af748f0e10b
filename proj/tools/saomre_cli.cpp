#include <iostream>

#include "CLI11.hpp"
#include "saomre/config.hpp"
#include "saomre/error.hpp"
#include "saomre/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic actor-oriented network models with random effects"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir;

  for (const char* name : {"simulate", "estimate", "test", "gof", "psc"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads for Phase 1 and Phase 3");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(saomre::ExitCode::Validation);
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  saomre::RunConfig cfg;
  try {
    cfg = saomre::parse_config(config_path);
  } catch (const saomre::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return static_cast<int>(e.code());
  }
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  return saomre::run(subcommand, cfg, std::cout);
}
