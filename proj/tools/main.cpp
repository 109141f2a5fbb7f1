#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace hawkes::cli;
  CLI::App app{"Hawkes processes with general immigrants: simulation, "
               "moments, Laplace transforms and Monte Carlo validation"};
  std::string subcommand;
  std::string config_path;
  unsigned threads = 0;
  std::string out_dir;
  bool dump = false;
  app.add_option("subcommand", subcommand,
                 "simulate | moments | laplace | validate | powerlaw")
      ->required()
      ->check(CLI::IsMember({"simulate", "moments", "laplace", "validate",
                             "powerlaw"}));
  app.add_option("config", config_path, "experiment config (YAML)")->required();
  app.add_option("--threads", threads, "worker cap (0 = all cores)");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_flag("--dump-config", dump, "print the normalized config and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (const char* env = std::getenv("HAWKES_SEED")) {
      std::size_t used = 0;
      const std::string text(env);
      config.run.seed = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    }
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::logic_error&) {
    std::cerr << "HAWKES_SEED must be an unsigned integer\n";
    return kConfigError;
  }
  if (dump) {
    std::cout << dump_config(config);
    return kOk;
  }
  RunOptions options;
  options.threads = threads;
  options.output_dir = out_dir;
  return run(subcommand, config, options);
}
