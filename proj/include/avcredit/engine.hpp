#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avcredit/auction.hpp"
#include "avcredit/safety.hpp"
#include "avcredit/types.hpp"

namespace avcredit {

enum class ControllerMode { auction, qp };

std::string to_string(ControllerMode mode);

struct AgentSpec {
  double x0{0.0};
  double y0{0.0};
  double theta0{0.0};
  double goal_x{0.0};
  double y_ref{0.0};
  double alpha{1.0};
};

struct NominalGains {
  double kx{0.5};
  double ky{2.5};
  double ktheta{2.0};
};

/// Full description of one closed-loop run. Defaults are the four-robot
/// crossing experiment's shared parameters; `lambda` has no published value.
struct ScenarioConfig {
  std::vector<AgentSpec> agents;
  double v{0.1};
  double d{0.12};
  NominalGains gains;
  double kappa1{1.2};
  double kappa2{1.2};
  double lambda{50.0};
  double gamma{8.0};
  double k{5.0};
  double dt{0.033};
  double duration{180.0};
  bool stop_at_goals{true};
  double goal_tolerance{0.05};
  ControllerMode controller{ControllerMode::auction};
  AuctionOptions auction;
  std::optional<double> omega_max;

  void validate() const;
  BarrierParamsd barrier() const { return {d, lambda, kappa1, kappa2}; }
};

/// Goal-seeking, line-keeping heading controller.
double nominal_control(const AgentStated& state, double goal_x, double y_ref, const NominalGains& gains);

enum class TriggerReason { none, deficit_positive, active_set_change };

std::string to_string(TriggerReason reason);

struct TriggerDecision {
  bool fire{false};
  TriggerReason reason{TriggerReason::none};
};

/// Fires when the deficit turns positive or the active set changes to a
/// non-empty set.
TriggerDecision trigger_check(double deficit_now, double deficit_prev,
                              const std::vector<int>& active_now,
                              const std::vector<int>& active_prev);

struct EventRecord {
  int id{0};
  double t{0.0};
  TriggerReason reason{TriggerReason::none};
  std::vector<int> agents;
  std::vector<int> encounters;  // n_i at bid time, aligned with `agents`
  std::vector<Bid> bids;
  VectorXd credits;
  VectorXd payments;
  int iterations{0};
  bool converged{false};
};

struct StepRow {
  double t{0.0};
  std::vector<AgentStated> states;
  VectorXd omega_nominal;
  VectorXd omega_applied;
  VectorXd correction;  // Delta_i assigned this step (zero outside events)
  VectorXd cumulative_effort;
  double h_tilde{0.0};
  double deficit{0.0};
  std::vector<int> active;
  int event_id{-1};
};

struct FeasibilityRecord {
  double t{0.0};
  int agent{0};
  std::string kind;  // "saturation" or "uncontrollable"
  double required{0.0};
  double applied{0.0};
};

struct TrajectoryLog {
  std::vector<StepRow> rows;
  std::vector<AgentStated> final_states;
  VectorXd effort;
  double min_h_tilde{0.0};
  double min_distance{0.0};
  std::vector<FeasibilityRecord> feasibility;
  std::vector<std::string> warnings;
};

struct RunResult {
  TrajectoryLog log;
  std::vector<EventRecord> events;
};

/// Raised when the simulated state stops being finite.
class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint over the active pairs for one step, or nothing when no pair is active.
struct StepConstraint {
  ActiveSet active;
  std::optional<SafetyConstraintd> constraint;
};

StepConstraint evaluate_step(const std::vector<AgentStated>& states, const VectorXd& nominal,
                             const std::vector<AgentPair>& candidates, const ScenarioConfig& config);

/// Event-triggered closed-loop simulation.
RunResult run_scenario(const ScenarioConfig& config);

struct EffortSummary {
  VectorXd per_agent;
  double total{0.0};
};

EffortSummary effort_summary(const TrajectoryLog& log);

}  // namespace avcredit
