#include "avcredit/commands.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "avcredit/config.hpp"
#include "avcredit/report.hpp"
#include "avcredit/verify.hpp"

namespace avcredit {
namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot write '" + path.string() + "'");
  file << content;
  if (!file) throw std::runtime_error("write failed for '" + path.string() + "'");
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InvalidInput("agents: bad " + what + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

const char* tool_version() { return AVCREDIT_VERSION; }

int cmd_run(const std::filesystem::path& config_path, std::optional<ControllerMode> controller,
            const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioConfig config;
  try {
    config = load_config(config_path);
    if (controller) config.controller = *controller;
    config.validate();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    err << "error: config: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const RunResult result = run_scenario(config);
    std::filesystem::create_directories(out_dir);

    std::ostringstream csv;
    write_trajectory_csv(csv, result.log);
    write_file(out_dir / "trajectory.csv", csv.str());
    write_file(out_dir / "events.json", dump_json(events_json(result.events)));
    write_file(out_dir / "summary.json", dump_json(summary_json(result.log)));

    RunManifest manifest;
    manifest.config_hash = config_hash(config);
    manifest.tool_version = tool_version();
    manifest.controller = config.controller;
    manifest.outputs = {"trajectory.csv", "events.json", "summary.json", "manifest.json"};
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(out_dir / "manifest.json", dump_json(manifest_json(manifest)));

    for (const auto& w : result.log.warnings) err << "warning: " << w << "\n";
    out << "controller " << to_string(config.controller) << ": " << result.log.rows.size() << " steps, "
        << result.events.size() << " auction events, total effort "
        << format_number(result.log.effort.sum()) << " rad, min distance "
        << format_number(result.log.min_distance) << " m\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

std::vector<ValuationParams> parse_agent_spec(const std::string& spec, double gamma, double k) {
  std::vector<ValuationParams> agents;
  std::string_view rest(spec);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view entry = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);

    ValuationParams p;
    p.gamma = gamma;
    p.k = k;
    const auto colon = entry.find(':');
    const double n = parse_double(entry.substr(0, colon), "encounter count");
    if (n < 0 || n != static_cast<int>(n)) throw InvalidInput("agents: encounter count must be a non-negative integer");
    p.n = static_cast<int>(n);
    if (colon != std::string_view::npos) p.alpha = parse_double(entry.substr(colon + 1), "alpha");
    p.validate();
    agents.push_back(p);
  }
  if (agents.size() < 2) throw InvalidInput("agents: at least two participants are required");
  return agents;
}

int cmd_auction(const std::vector<ValuationParams>& agents, const AuctionOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    const AuctionOutcome outcome = run_auction(agents, options);
    nlohmann::json j;
    auto credits = nlohmann::json::array();
    auto payments = nlohmann::json::array();
    auto bids = nlohmann::json::array();
    for (Eigen::Index i = 0; i < outcome.credits.size(); ++i) {
      credits.push_back(round_sig12(outcome.credits(i)));
      payments.push_back(round_sig12(outcome.payments(i)));
    }
    for (const Bid& b : outcome.bids) bids.push_back({{"beta", round_sig12(b.beta)}, {"d", round_sig12(b.demand)}});
    j["credits"] = credits;
    j["payments"] = payments;
    j["bids"] = bids;
    j["iterations"] = outcome.iterations;
    j["converged"] = outcome.converged;
    auto reference = nlohmann::json::array();
    const VectorXd ref = welfare_oracle(agents);
    for (Eigen::Index i = 0; i < ref.size(); ++i) reference.push_back(round_sig12(ref(i)));
    j["welfare_optimum"] = reference;
    out << dump_json(j);
    if (!outcome.converged) err << "warning: auction stopped at max_rounds without converging\n";
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, int samples, std::uint64_t seed, std::ostream& out,
               std::ostream& err) {
  std::vector<verify::SuiteReport> reports;
  try {
    reports = verify::run_suites(suite, samples, seed);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  bool all_passed = true;
  for (const auto& r : reports) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": samples=" << r.samples
        << " worst=" << format_number(r.worst) << " tolerance=" << format_number(r.tolerance) << " ("
        << r.detail << ")\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace avcredit
