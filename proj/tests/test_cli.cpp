#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "percospec/errors.hpp"
#include "percospec/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
  const char* path = std::getenv("PERCOSPEC_CLI");
  REQUIRE_MESSAGE(path != nullptr, "PERCOSPEC_CLI must point at the percospec executable");
  return path;
}

struct Scratch {
  fs::path root = fs::temp_directory_path() / ("percospec_cli_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(root); }
  ~Scratch() { fs::remove_all(root); }

  std::string config(const std::string& name, const json& document) const {
    const fs::path file = root / (name + ".json");
    std::ofstream(file) << document.dump(2);
    return file.string();
  }
};

int run(const std::string& arguments, const std::string& env = "") {
  const std::string command = env + " '" + cli() + "' " + arguments + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json growth_config() {
  return json::parse(R"({"seed": 1, "group": {"kind": "free_abelian", "rank": 2}, "fits": {"growth_n_max": 20}})");
}

}  // namespace

TEST_CASE("growth run writes its artifacts and a manifest") {
  Scratch s;
  const auto cfg = s.config("growth", growth_config());
  const auto out = s.root / "growth";
  REQUIRE(run("growth --config " + cfg + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "growth.csv"));
  CHECK(slurp(out / "growth.csv").rfind("n,volume\n0,1\n1,5\n2,13\n", 0) == 0);
  const json fit = json::parse(slurp(out / "growth_fit.json"));
  CHECK(fit["classification"] == "polynomial");
  CHECK(std::abs(fit["polynomial"]["slope"].get<double>() - 2.0) < 0.1);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["subcommand"] == "growth");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["config_digest"].get<std::string>().size() == 16);
  CHECK(manifest["code_version"] == percospec::code_version());
  CHECK(manifest["wall_time_seconds"].get<double>() >= 0.0);
  CHECK(manifest["files"].contains("growth.csv"));
}

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(run("growth") == 1);
  CHECK(run("nonsense --config x.json") == 1);
  CHECK(run("growth --config " + (s.root / "missing.json").string()) == 1);

  json unknown = growth_config();
  unknown["colour"] = "red";
  CHECK(run("growth --config " + s.config("unknown", unknown)) == 1);
  json no_seed = growth_config();
  no_seed.erase("seed");
  CHECK(run("growth --config " + s.config("no_seed", no_seed)) == 1);
  CHECK(run("ids --config " + s.config("no_percolation", growth_config()) + " --out " + (s.root / "ids").string()) ==
        1);
  CHECK(json::parse(slurp(s.root / "ids" / "manifest.json"))["exit_code"] == 1);
  CHECK(run("growth --config " + s.config("workers", growth_config()) + " --workers 0") == 1);

  const auto out = s.root / "budget";
  CHECK(run("growth --config " + s.config("budget", growth_config()) + " --out " + out.string(),
            "PERCOSPEC_BUDGET_VERTICES=50") == 2);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["exit_code"] == 2);
  CHECK(manifest["budget_vertices"] == 50);

  using namespace percospec;
  CHECK(exit_code_for(std::make_exception_ptr(OracleViolation("x"))) == 3);
  CHECK(exit_code_for(std::make_exception_ptr(ResourceError("x"))) == 2);
  CHECK(exit_code_for(std::make_exception_ptr(DomainError("x"))) == 1);
  CHECK(exit_code_for(std::make_exception_ptr(std::logic_error("x"))) == 4);
  CHECK(exit_code_for(nullptr) == 0);
}

TEST_CASE("seed override and digest") {
  Scratch s;
  const auto cfg = s.config("growth", growth_config());
  REQUIRE(run("growth --config " + cfg + " --out " + (s.root / "a").string()) == 0);
  REQUIRE(run("growth --config " + cfg + " --workers 4 --out " + (s.root / "b").string()) == 0);
  REQUIRE(run("growth --config " + cfg + " --seed 99 --out " + (s.root / "c").string()) == 0);
  const json a = json::parse(slurp(s.root / "a" / "manifest.json"));
  const json b = json::parse(slurp(s.root / "b" / "manifest.json"));
  const json c = json::parse(slurp(s.root / "c" / "manifest.json"));
  CHECK(a["config_digest"] == b["config_digest"]);
  CHECK(a["config_digest"] != c["config_digest"]);
  CHECK(c["seed"] == 99);
  CHECK(b["workers"] == 4);
}

TEST_CASE("CSV output does not depend on the worker count") {
  Scratch s;
  const json ids = json::parse(R"({
    "seed": 3, "group": {"kind": "free_abelian", "rank": 2},
    "percolation": {"model": "site", "p": 0.6}, "window": {"radius": 4},
    "spectra": {"n_samples": 12, "energies": {"min": 0, "max": 8, "count": 9}}
  })");
  json chain = ids;
  chain["spectra"]["lambdas"] = {1, 10};
  const json percolate = json::parse(R"({
    "seed": 4, "group": {"kind": "free_abelian", "rank": 2},
    "percolation": {"model": "bond", "p": 0.3, "n_samples": 100, "tail_grid": [1, 2, 4]}, "window": {"radius": 5}
  })");
  for (const auto& [name, document] : {std::pair{"ids", ids}, std::pair{"chain", chain}, std::pair{"percolate", percolate}}) {
    CAPTURE(name);
    const auto cfg = s.config(name, document);
    const fs::path one = s.root / (std::string(name) + "_1"), eight = s.root / (std::string(name) + "_8");
    REQUIRE(run(std::string(name) + " --config " + cfg + " --workers 1 --out " + one.string()) == 0);
    REQUIRE(run(std::string(name) + " --config " + cfg + " --workers 8 --out " + eight.string()) == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(one)) {
      if (entry.path().extension() != ".csv") continue;
      CHECK(slurp(entry.path()) == slurp(eight / entry.path().filename()));
      ++compared;
    }
    CHECK(compared > 0);
  }
}
