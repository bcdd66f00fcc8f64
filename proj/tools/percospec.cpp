#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "percospec/experiments.hpp"

int main(int argc, char** argv) {
  using namespace percospec;
  CLI::App app{"Spectra of percolation Hamiltonians on Cayley graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  for (const auto& name : subcommand_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON experiment configuration")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--workers", workers, "worker threads (results do not depend on it)")->check(CLI::Range(1, 1024));
    sub->add_option("--out", out_dir, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  ExperimentConfig config;
  try {
    nlohmann::json document = [&] {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
      try {
        return nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }();
    config = parse_config(document);
    if (seed) document["seed"] = *seed;
    if (workers) document["workers"] = *workers;
    if (out_dir) document["output_dir"] = *out_dir;
    config = parse_config(document);
  } catch (const std::exception& e) {
    std::cerr << "percospec: " << e.what() << '\n';
    return exit_code_for(std::current_exception());
  }

  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  int code = 0;
  std::string message = "ok";
  try {
    run_experiment(subcommand, config, config.output_dir, result);
  } catch (const std::exception& e) {
    code = exit_code_for(std::current_exception());
    message = e.what();
    std::cerr << "percospec: " << e.what() << '\n';
  } catch (...) {
    code = 4;
    message = "unknown error";
    std::cerr << "percospec: unknown error\n";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_manifest(config.output_dir, subcommand, config, result, wall, code, message);
  } catch (const std::exception& e) {
    std::cerr << "percospec: cannot write manifest: " << e.what() << '\n';
    if (code == 0) code = 4;
  }
  if (code == 0) {
    for (const auto& file : result.files) std::cout << config.output_dir << '/' << file << '\n';
  }
  return code;
}
