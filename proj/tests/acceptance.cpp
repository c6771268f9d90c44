// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "avcredit/commands.hpp"
#include "avcredit/config.hpp"
#include "avcredit/verify.hpp"

using namespace avcredit;
namespace fs = std::filesystem;

namespace {

const fs::path kTable1 = fs::path(AVCREDIT_SOURCE_DIR) / "configs" / "table1.cfg";

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void auction_allocations() {
  const double k = 5.0, gamma = 8.0;
  const double expected[] = {0.50, 0.7079, 0.9159};
  const char* specs[] = {"0,0", "1,0", "2,0"};
  bool ok = true;
  std::ostringstream what;
  what << "tol 1e-3, runtime < 1 s;";
  for (int e = 0; e < 3; ++e) {
    const double closed = 0.5 + std::log(std::pow(gamma, e)) / (2 * k);
    std::ostringstream out, err;
    Timer t;
    const int code = cmd_auction(parse_agent_spec(specs[e], gamma, k), {}, out, err);
    const double secs = t.seconds();
    const auto j = nlohmann::json::parse(out.str());
    const double c1 = j["credits"][0].get<double>();
    const double c2 = j["credits"][1].get<double>();
    ok = ok && code == 0 && j["converged"].get<bool>() && secs < 1.0 && std::abs(c1 - expected[e]) <= 1e-3 &&
         std::abs(c2 - (1 - expected[e])) <= 1e-3 && std::abs(c1 - closed) <= 1e-3;
    what << " cmd_auction n=(" << e << ",0) c=(" << fmt(c1) << "," << fmt(c2) << ") closed-form " << fmt(closed)
         << " in " << fmt(secs) << " s;";
  }

  const ScenarioConfig config = load_config(kTable1);
  Timer t;
  const RunResult r = run_scenario(config);
  what << " scenario events " << r.events.size();
  ok = ok && r.events.size() == 3;
  for (std::size_t e = 0; e < r.events.size() && e < 3; ++e) {
    const EventRecord& ev = r.events[e];
    const double c1 = ev.credits(0);
    ok = ok && ev.converged && ev.credits.size() == 2 && std::abs(c1 - expected[e]) <= 1e-3 &&
         std::abs(ev.credits(1) - (1 - expected[e])) <= 1e-3;
    what << " (" << fmt(c1) << "," << fmt(ev.credits(1)) << ")";
  }
  report(1, ok, what.str());
}

RunResult timed_run(ControllerMode mode, double& seconds) {
  ScenarioConfig config = load_config(kTable1);
  config.controller = mode;
  Timer t;
  RunResult r = run_scenario(config);
  seconds = t.seconds();
  return r;
}

void safety_and_effort() {
  double t_auction = 0, t_qp = 0;
  const RunResult a = timed_run(ControllerMode::auction, t_auction);
  const RunResult q = timed_run(ControllerMode::qp, t_qp);

  bool ok = true;
  double worst_h = std::numeric_limits<double>::infinity();
  for (const RunResult* r : {&a, &q}) {
    for (const StepRow& row : r->log.rows) worst_h = std::min(worst_h, row.h_tilde);
    ok = ok && r->log.min_distance >= 0.12 - 0.001 && r->log.min_h_tilde >= -1e-6;
  }
  ok = ok && worst_h >= -1e-6 && t_auction < 5.0 && t_qp < 5.0;
  report(2, ok,
         "min distance auction " + fmt(a.log.min_distance) + " m, qp " + fmt(q.log.min_distance) +
             " m (>= 0.119); min H " + fmt(worst_h) + " (>= -1e-6); runtime " + fmt(t_auction) + " s / " +
             fmt(t_qp) + " s (< 5 s)");

  const double e1_auction = a.log.effort(0), e1_qp = q.log.effort(0);
  const double total_auction = a.log.effort.sum(), total_qp = q.log.effort.sum();
  const double reduction = 1.0 - e1_auction / e1_qp;
  const double total_gap = std::abs(total_auction - total_qp) / total_qp;
  report(3, reduction >= 0.20 && total_gap < 0.10,
         "agent 1 effort auction " + fmt(e1_auction) + " vs qp " + fmt(e1_qp) + " rad (reduction " +
             fmt(100 * reduction) + "%, need >= 20%); totals " + fmt(total_auction) + " vs " + fmt(total_qp) +
             " rad (gap " + fmt(100 * total_gap) + "%, need < 10%)");
}

void suite_criterion(int id, std::initializer_list<std::pair<const char*, int>> suites) {
  bool ok = true;
  std::string what;
  for (const auto& [name, samples] : suites) {
    for (const auto& r : verify::run_suites(name, samples, 20240601)) {
      ok = ok && r.passed;
      if (!what.empty()) what += "; ";
      what += r.suite + " samples=" + std::to_string(r.samples) + " worst=" + fmt(r.worst) +
              " tol=" + fmt(r.tolerance) + " (" + r.detail + ")";
    }
  }
  report(id, ok, what);
}

void determinism() {
  const fs::path base = fs::temp_directory_path() / "avcredit_acceptance";
  fs::remove_all(base);
  std::ostringstream out, err;
  const int a = cmd_run(kTable1, std::nullopt, base / "a", out, err);
  const int b = cmd_run(kTable1, std::nullopt, base / "b", out, err);
  bool ok = a == 0 && b == 0;
  std::string what;
  for (const char* f : {"trajectory.csv", "events.json"}) {
    const std::string x = slurp(base / "a" / f), y = slurp(base / "b" / f);
    ok = ok && !x.empty() && x == y;
    what += std::string(f) + (x == y ? " identical (" : " DIFFERS (") + std::to_string(x.size()) + " bytes) ";
  }
  fs::remove_all(base);
  report(8, ok, what);
}

}  // namespace

int main() {
  try {
    auction_allocations();
    safety_and_effort();
    suite_criterion(4, {{"lie", 1000}});
    suite_criterion(5, {{"lse", 10000}});
    suite_criterion(6, {{"mechanism", 1000}, {"auction", 100}});
    suite_criterion(7, {{"mapping", 10000}, {"qp", 10000}});
    determinism();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
