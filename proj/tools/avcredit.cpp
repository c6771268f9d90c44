#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "avcredit/commands.hpp"

int main(int argc, char** argv) {
  using namespace avcredit;

  CLI::App app{"Multi-agent collision avoidance with an avoidance-credit auction"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string controller_name;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its logs");
  run->add_option("--config", config_path, "Scenario file")->required();
  run->add_option("--controller", controller_name, "Override the scenario's controller")
      ->check(CLI::IsMember({"auction", "qp"}));
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string agents_spec;
  AuctionOptions options;
  double gamma = 8.0;
  double k = 5.0;
  auto* auction = app.add_subcommand("auction", "Run one standalone credit auction");
  auction->add_option("--agents", agents_spec, "Per-agent 'n' or 'n:alpha', comma separated")->required();
  auction->add_option("--gamma", gamma, "Escalation base")->capture_default_str();
  auction->add_option("--k", k, "Valuation shape")->capture_default_str();
  auction->add_option("--eps", options.eps, "Stopping tolerance on utility gains")->capture_default_str();
  auction->add_option("--grid", options.grid_step, "Demand grid step")->capture_default_str();
  auction->add_option("--max-rounds", options.max_rounds, "Round budget")->capture_default_str();

  std::string suite;
  int samples = 1000;
  std::uint64_t seed = 1;
  auto* verify = app.add_subcommand("verify", "Compare the implementation against reference computations");
  verify->add_option("suite", suite, "lie, lse, auction, mechanism, qp, mapping or all")->required();
  verify->add_option("--samples", samples, "Random samples per suite")->capture_default_str();
  verify->add_option("--seed", seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) {
    std::optional<ControllerMode> controller;
    if (controller_name == "auction") controller = ControllerMode::auction;
    if (controller_name == "qp") controller = ControllerMode::qp;
    return cmd_run(config_path, controller, out_dir, std::cout, std::cerr);
  }
  if (*auction) {
    try {
      return cmd_auction(parse_agent_spec(agents_spec, gamma, k), options, std::cout, std::cerr);
    } catch (const InvalidInput& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  return cmd_verify(suite, samples, seed, std::cout, std::cerr);
}
