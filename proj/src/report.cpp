#include "avcredit/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace avcredit {

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

double round_sig12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  const std::string s = format_number(x);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  const std::size_t n = log.rows.empty() ? 0 : log.rows.front().states.size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) {
    out << ",x_" << i << ",y_" << i << ",theta_" << i << ",omega_nom_" << i << ",omega_app_" << i;
  }
  out << ",h_tilde,deficit,active_set,event_id\n";

  std::string line;
  for (const StepRow& row : log.rows) {
    line = format_number(row.t);
    for (std::size_t i = 0; i < n; ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      for (double v : {row.states[i].x, row.states[i].y, row.states[i].theta, row.omega_nominal(e),
                       row.omega_applied(e)}) {
        line += ',';
        line += format_number(v);
      }
    }
    line += ',' + format_number(row.h_tilde) + ',' + format_number(row.deficit) + ',';
    for (std::size_t q = 0; q < row.active.size(); ++q) {
      if (q) line += ';';
      line += std::to_string(row.active[q] + 1);
    }
    line += ',' + std::to_string(row.event_id) + '\n';
    out << line;
  }
}

namespace {

nlohmann::json number_array(const VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(round_sig12(v(i)));
  return out;
}

}  // namespace

nlohmann::json events_json(const std::vector<EventRecord>& events) {
  auto out = nlohmann::json::array();
  for (const EventRecord& ev : events) {
    nlohmann::json j;
    j["t"] = round_sig12(ev.t);
    j["reason"] = to_string(ev.reason);
    auto agents = nlohmann::json::array();
    for (int a : ev.agents) agents.push_back(a + 1);
    j["agents"] = agents;
    j["n"] = ev.encounters;
    auto bids = nlohmann::json::array();
    for (const Bid& b : ev.bids) bids.push_back({{"beta", round_sig12(b.beta)}, {"d", round_sig12(b.demand)}});
    j["bids"] = bids;
    j["credits"] = number_array(ev.credits);
    j["payments"] = number_array(ev.payments);
    j["iterations"] = ev.iterations;
    j["converged"] = ev.converged;
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::json summary_json(const TrajectoryLog& log) {
  nlohmann::json j;
  j["per_agent_effort"] = number_array(log.effort);
  j["total_effort"] = round_sig12(log.effort.sum());
  j["min_distance"] = round_sig12(log.min_distance);
  j["min_h_tilde"] = round_sig12(log.min_h_tilde);
  auto violations = nlohmann::json::array();
  for (const FeasibilityRecord& f : log.feasibility) {
    violations.push_back({{"t", round_sig12(f.t)},
                          {"agent", f.agent < 0 ? nlohmann::json(nullptr) : nlohmann::json(f.agent + 1)},
                          {"kind", f.kind},
                          {"required", round_sig12(f.required)},
                          {"applied", round_sig12(f.applied)}});
  }
  j["feasibility_violations"] = violations;
  j["warnings"] = log.warnings;
  return j;
}

nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.tool_version;
  j["controller"] = to_string(m.controller);
  j["outputs"] = m.outputs;
  j["wall_clock_seconds"] = round_sig12(m.wall_clock_seconds);
  return j;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace avcredit
