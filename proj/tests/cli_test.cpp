#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "avcredit/commands.hpp"

using namespace avcredit;
namespace fs = std::filesystem;

namespace {

const fs::path kTable1 = fs::path(AVCREDIT_SOURCE_DIR) / "configs" / "table1.cfg";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("avcredit_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("run writes all four artifacts") {
  const fs::path dir = scratch("run");
  std::ostringstream out, err;
  REQUIRE(cmd_run(kTable1, std::nullopt, dir, out, err) == kExitOk);
  for (const char* f : {"trajectory.csv", "events.json", "summary.json", "manifest.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto events = nlohmann::json::parse(slurp(dir / "events.json"));
  REQUIRE(events.size() == 3);
  const double first[] = {0.5, 0.7079, 0.9159};
  for (int e = 0; e < 3; ++e) CHECK(std::abs(events[e]["credits"][0].get<double>() - first[e]) <= 1e-3);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["controller"] == "auction");
  fs::remove_all(dir);
}

TEST_CASE("qp override") {
  const fs::path dir = scratch("qp");
  std::ostringstream out, err;
  REQUIRE(cmd_run(kTable1, ControllerMode::qp, dir, out, err) == kExitOk);
  CHECK(nlohmann::json::parse(slurp(dir / "events.json")).empty());
  CHECK(nlohmann::json::parse(slurp(dir / "summary.json"))["per_agent_effort"].size() == 4);
  CHECK(nlohmann::json::parse(slurp(dir / "manifest.json"))["controller"] == "qp");
  fs::remove_all(dir);
}

TEST_CASE("config problems exit with code 2") {
  std::ostringstream out, err;
  CHECK(cmd_run("/nonexistent/table.cfg", std::nullopt, scratch("missing"), out, err) == kExitConfig);
  CHECK(err.str().find("cannot open") != std::string::npos);

  const fs::path dir = scratch("typo");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << slurp(kTable1) << "kappa3 = 1\n";
  std::ostringstream err2;
  CHECK(cmd_run(dir / "bad.cfg", std::nullopt, dir / "out", out, err2) == kExitConfig);
  CHECK(err2.str().find("kappa3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("auction subcommand") {
  std::ostringstream out, err;
  REQUIRE(cmd_auction(parse_agent_spec("1,0", 8.0, 5.0), {}, out, err) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(std::abs(j["credits"][0].get<double>() - 0.7079) <= 1e-3);
  CHECK(j["converged"] == true);
  CHECK(j["payments"].size() == 2);

  const auto agents = parse_agent_spec("2:1.5,0", 8.0, 5.0);
  CHECK(agents[0].n == 2);
  CHECK(agents[0].alpha == 1.5);
  CHECK(agents[1].alpha == 1.0);
  CHECK_THROWS_AS(parse_agent_spec("1", 8.0, 5.0), InvalidInput);
  CHECK_THROWS_AS(parse_agent_spec("1,x", 8.0, 5.0), InvalidInput);
  CHECK_THROWS_AS(parse_agent_spec("-1,0", 8.0, 5.0), InvalidInput);
}

TEST_CASE("verify subcommand") {
  std::ostringstream out, err;
  CHECK(cmd_verify("mapping", 500, 3, out, err) == kExitOk);
  CHECK(out.str().rfind("PASS mapping", 0) == 0);
  std::ostringstream out2, err2;
  CHECK(cmd_verify("nonsense", 10, 1, out2, err2) == kExitConfig);
}
