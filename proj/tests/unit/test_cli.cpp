#include "hjlab/cli.hpp"
#include "hjlab/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hjlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hjlab_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path path = dir / "config.in.json";
  std::ofstream(path) << doc.dump();
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& path) { return json::parse(slurp(path)); }

int run_in(Subcommand c, const fs::path& config, const fs::path& out, int threads = 1) {
  std::ostringstream log;
  return run({c, config, out, threads}, log);
}

const json small_family = {
    {"N", 128},
    {"tau", 0.02},
    {"T", 4},
    {"sample_every", 5},
    {"c_longtime_T", 20},
    {"tolerances", {{"window", 10}}},
    {"initial_data", {{{"name", "sqrt-cusp"}}, {{"name", "holder"}}, {{"name", "cosine"}}}},
};

}  // namespace

TEST_CASE("verify-hr writes a passing verification report") {
  const fs::path dir = scratch("verify");
  const fs::path cfg = write_config(dir, {{"R_schedule", {5}}});
  REQUIRE(run_in(Subcommand::verify_hr, cfg, dir / "out") == exit_code::ok);
  const json v = load(dir / "out" / "verification.json");
  CHECK(v.at("passed") == true);
  CHECK(v.at("rows")[0].at("claims").at("min_hessian_eigenvalue").get<double>() > 0.0);
  CHECK(fs::exists(dir / "out" / "lagrangian_R5.json"));
  CHECK(fs::exists(dir / "out" / "config.json"));
}

TEST_CASE("critical-value for the free particle") {
  const fs::path dir = scratch("critical");
  const fs::path cfg = write_config(dir, {{"potential", "zero"}, {"N", 128}, {"c_longtime_T", 10}});
  REQUIRE(run_in(Subcommand::critical_value, cfg, dir / "out") == exit_code::ok);
  const json c = load(dir / "out" / "critical_value.json");
  CHECK(std::abs(c.at("c_est").get<double>()) < 1e-6);
  CHECK(fs::exists(dir / "out" / "cR_stability.json"));
}

TEST_CASE("evolve writes the trace and an orbit") {
  const fs::path dir = scratch("evolve");
  const fs::path cfg = write_config(dir, small_family);
  REQUIRE(run_in(Subcommand::evolve, cfg, dir / "out") == exit_code::ok);
  const std::string trace = slurp(dir / "out" / "trace.csv");
  CHECK(trace.rfind("step,node_index,value\n", 0) == 0);
  CHECK(slurp(dir / "out" / "orbit.csv").rfind("k,position_x", 0) == 0);
  CHECK(load(dir / "out" / "trace.json").at("N") == 128);
}

TEST_CASE("regularity-experiment outputs are reproducible") {
  const fs::path dir = scratch("regularity");
  const fs::path cfg = write_config(dir, small_family);
  REQUIRE(run_in(Subcommand::regularity_experiment, cfg, dir / "a", 1) == exit_code::ok);
  REQUIRE(run_in(Subcommand::regularity_experiment, cfg, dir / "b", 1) == exit_code::ok);
  REQUIRE(run_in(Subcommand::regularity_experiment, cfg, dir / "c", 8) == exit_code::ok);
  for (const char* f : {"regularity_report.json", "lip_series.csv", "config.json", "manifest.json"}) {
    CAPTURE(f);
    const std::string a = slurp(dir / "a" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(dir / "b" / f));
    CHECK(a == slurp(dir / "c" / f));
  }
  const json manifest = load(dir / "a" / "manifest.json");
  CHECK(manifest.at("files").size() == 3);
  for (const auto& entry : manifest.at("files")) {
    const std::string body = slurp(dir / "a" / entry.at("path").get<std::string>());
    CHECK(entry.at("sha256") == sha256_hex(body));
    CHECK(entry.at("bytes") == body.size());
  }
  CHECK(manifest.at("volatile")[0].at("path") == "metadata.json");
  CHECK(load(dir / "c" / "metadata.json").at("threads") == 8);
  CHECK(load(dir / "a" / "regularity_report.json").at("passed") == true);
}

TEST_CASE("errors give exit status 1") {
  const fs::path dir = scratch("errors");
  const fs::path bad = write_config(dir, {{"taus", 0.01}});
  std::ostringstream log;
  CHECK(run({Subcommand::verify_hr, bad, dir / "out", 1}, log) == exit_code::failure);
  CHECK(log.str().find("/taus") != std::string::npos);
  CHECK(run_in(Subcommand::verify_hr, dir / "missing.json", dir / "out") == exit_code::failure);

  // Output path below a regular file cannot be created.
  std::ofstream(dir / "blocker") << "x";
  const fs::path good = write_config(dir, {{"R_schedule", {5}}});
  CHECK(run_in(Subcommand::verify_hr, good, dir / "blocker" / "out") == exit_code::failure);

  const fs::path unseeded = write_config(dir, {{"initial_data", {{{"name", "random-nodal"}}}}});
  CHECK(run_in(Subcommand::regularity_experiment, unseeded, dir / "out2") == exit_code::failure);
}

TEST_CASE("binary reads HJLAB_THREADS and rejects bad arguments") {
  const char* bin = std::getenv("HJLAB_BIN");
  if (bin == nullptr) {
    MESSAGE("HJLAB_BIN not set; skipping binary checks");
    return;
  }
  const fs::path dir = scratch("binary");
  const fs::path cfg = write_config(dir, {{"R_schedule", {5}}});
  const std::string base = std::string(bin) + " verify-hr --config " + cfg.string();
  const std::string quiet = " 2>/dev/null";
  CHECK(std::system(("HJLAB_THREADS=3 " + base + " --out " + (dir / "env").string() + quiet).c_str()) == 0);
  CHECK(load(dir / "env" / "metadata.json").at("threads") == 3);
  CHECK(std::system(("HJLAB_THREADS=3 " + base + " --threads 2 --out " + (dir / "flag").string() + quiet).c_str()) == 0);
  CHECK(load(dir / "flag" / "metadata.json").at("threads") == 2);
  CHECK(WEXITSTATUS(std::system((base + " --threads 0 --out " + (dir / "zero").string() + quiet).c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " bogus" + quiet).c_str())) == 1);
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " evolve --config " + (dir / "nope.json").string() + quiet).c_str())) == 1);
}
