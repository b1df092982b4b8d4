// Command-line front end: runs one configured task and writes its artifacts.

#include <iostream>

#include "CLI11.hpp"
#include "latpair/config.hpp"
#include "latpair/errors.hpp"
#include "latpair/pipeline.hpp"
#include "latpair/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two atoms in one optical-lattice site: spectra, ledgers, densities and resonance maps"};
  app.set_version_flag("--version", latpair::version_string);
  std::string config_path, task, out;
  int threads = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "YAML or JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--task", task, "solve | sweep | densities | cuts | map | fit (overrides the config)");
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads for independent sweep points")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "progress messages on stderr");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = latpair::load_config(config_path);
    if (!task.empty()) cfg.task = latpair::parse_task(task);
    if (!out.empty()) cfg.output_dir = out;
    if (threads > 0) cfg.threads = threads;
    const auto report = latpair::run(cfg, verbose ? &std::cerr : nullptr);
    for (const auto& f : report.files) std::cout << cfg.output_dir << "/" << f << '\n';
    std::cout << report.manifest << '\n';
    return 0;
  } catch (const latpair::config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
