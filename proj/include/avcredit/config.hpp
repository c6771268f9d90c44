#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "avcredit/engine.hpp"

namespace avcredit {

/// Any problem reading or validating a scenario file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the flat `key = value` scenario format.
///
/// Lines are `key = value`; `#` starts a comment. Scalar keys:
///   v d kx ky ktheta kappa1 kappa2 lambda gamma k dt duration
///   stop_at_goals goal_tolerance controller omega_max
///   auction.eps auction.grid_step auction.max_rounds
///   auction.initial_decrement auction.decrement_divisor
/// Per-agent keys, agents numbered 1..N without gaps:
///   agents.<i>.x0 agents.<i>.y0 agents.<i>.goal_x agents.<i>.alpha
///   agents.<i>.theta0 (default: facing goal_x) agents.<i>.y_ref (default: y0)
/// `lambda` and every agent's x0, y0, goal_x are required. Unknown or repeated
/// keys are errors.
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Sorted `key=value` lines with shortest round-trip numbers; input to the hash.
std::string canonical_config(const ScenarioConfig& config);

/// 64-bit FNV-1a of `canonical_config`, as 16 lowercase hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace avcredit
