#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "percospec/asymptotics.hpp"
#include "percospec/bounds.hpp"
#include "percospec/config.hpp"
#include "percospec/spectra.hpp"

namespace percospec {

/// Files written by one run, in write order, and the run's JSON summary.
struct RunResult {
  std::vector<std::string> files;
  nlohmann::json summary;
};

const std::vector<std::string>& subcommand_names();

/// Runs one subcommand and writes its CSV/JSON artifacts into `out_dir`.
/// OracleViolation is raised after the artifacts are written; `result` then
/// still lists them.
void run_experiment(const std::string& subcommand, const ExperimentConfig& config,
                    const std::filesystem::path& out_dir, RunResult& result);
RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& config,
                         const std::filesystem::path& out_dir);

/// manifest.json: subcommand, config digest, code version, wall time, status, file digests.
void write_manifest(const std::filesystem::path& out_dir, const std::string& subcommand,
                    const ExperimentConfig& config, const RunResult& result, double wall_seconds, int exit_code,
                    const std::string& message);

/// 0 success, 1 validation, 2 resource budget, 3 oracle violation, 4 internal.
int exit_code_for(const std::exception_ptr& error) noexcept;

std::string code_version();

nlohmann::json to_json(const ExponentFit& fit);
nlohmann::json to_json(const GrowthFit& fit);
nlohmann::json to_json(const BoundFit& fit);
nlohmann::json to_json(const TetrahedronReport& report);
nlohmann::json to_json(const SandwichReport& report);

}  // namespace percospec
