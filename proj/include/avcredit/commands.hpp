#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "avcredit/auction.hpp"
#include "avcredit/engine.hpp"

namespace avcredit {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitVerifyFailed = 4,
};

/// Version string written into run manifests.
const char* tool_version();

/// Loads a scenario, runs it and writes trajectory.csv, events.json,
/// summary.json and manifest.json into `out_dir`.
int cmd_run(const std::filesystem::path& config_path, std::optional<ControllerMode> controller,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

/// Parses an agent list such as "1,0" or "2:1.5,0:1": one entry per agent,
/// encounter count n optionally followed by ":alpha".
std::vector<ValuationParams> parse_agent_spec(const std::string& spec, double gamma, double k);

/// Runs one standalone auction and prints its outcome as JSON.
int cmd_auction(const std::vector<ValuationParams>& agents, const AuctionOptions& options,
                std::ostream& out, std::ostream& err);

/// Runs a verification suite (or "all") and prints one line per suite.
int cmd_verify(const std::string& suite, int samples, std::uint64_t seed, std::ostream& out,
               std::ostream& err);

}  // namespace avcredit
