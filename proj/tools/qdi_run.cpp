// qdi_run <config-path> [--out DIR] [--threads N] [--seed S]
//
// Environment variables QDI_OUT, QDI_THREADS and QDI_SEED supply the same
// overrides; a flag on the command line wins over the environment.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qdi/config.hpp"
#include "qdi/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quenched-disorder gradient interface experiments"};
  app.set_version_flag("--version", std::string(QDI_VERSION));
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("config", config_path, "key=value experiment configuration")->required();
  app.add_option("--out", out_dir, "output directory")->envname("QDI_OUT");
  app.add_option("--threads", threads, "worker threads")->envname("QDI_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "master seed")->envname("QDI_SEED");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qdi::exit_config;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "qdi_run: cannot read " << config_path << "\n";
    return qdi::exit_config;
  }
  std::stringstream text;
  text << in.rdbuf();

  qdi::ExperimentConfig cfg;
  try {
    cfg = qdi::parse_config(text.str());
  } catch (const qdi::ConfigError& e) {
    std::cerr << "qdi_run: " << config_path << ": " << e.what() << "\n";
    return qdi::exit_config;
  }
  if (out_dir) cfg.output = *out_dir;
  if (threads) cfg.threads = *threads;
  if (seed) cfg.disorder.seed = *seed;

  const auto result = qdi::run(cfg);
  if (result.exit_code != qdi::exit_ok) std::cerr << "qdi_run: " << result.message << "\n";
  for (const auto& f : result.files) std::cout << f.string() << "\n";
  return result.exit_code;
}
