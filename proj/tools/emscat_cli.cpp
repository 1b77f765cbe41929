#include "emscat/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"emscat: electromagnetic scattering simulation and reconstruction"};
  app.require_subcommand(1, 1);
  std::string config_path, out;
  int threads = -1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
  app.fallthrough();  // options may follow the command name
  for (const std::string& name : emscat::command_names()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // help exits 0; every other parse problem is a configuration error
    return rc == 0 ? 0 : 2;
  }

  emscat::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = emscat::load_config(config_path);
  } catch (const emscat::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  if (!out.empty()) cfg.out = out;
  if (threads >= 0) cfg.threads = threads;
  return emscat::run_command(app.get_subcommands().front()->get_name(), cfg, std::cout, std::cerr);
}
