#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "avcredit/engine.hpp"

namespace avcredit {

/// 12 significant digits, '.' separator, no locale; trailing zeros dropped.
std::string format_number(double x);

/// `x` rounded to 12 significant digits (the value `format_number` prints).
double round_sig12(double x);

/// Header plus one line per logged step.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

nlohmann::json events_json(const std::vector<EventRecord>& events);
nlohmann::json summary_json(const TrajectoryLog& log);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  ControllerMode controller{ControllerMode::auction};
  std::vector<std::string> outputs;
  double wall_clock_seconds{0.0};
};

nlohmann::json manifest_json(const RunManifest& manifest);

/// Pretty-printed with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace avcredit
