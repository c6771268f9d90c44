#include "avcredit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "avcredit/allocation.hpp"
#include "avcredit/dynamics.hpp"

namespace avcredit {
namespace {

double min_pair_distance(const std::vector<AgentStated>& states) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = i + 1; j < states.size(); ++j)
      best = std::min(best, (states[i].position() - states[j].position()).norm());
  return best;
}

std::vector<AgentPair> pairs_among(const std::vector<bool>& moving) {
  std::vector<AgentPair> out;
  const int n = static_cast<int>(moving.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (moving[i] && moving[j]) out.push_back({i, j});
  return out;
}

}  // namespace

std::string to_string(ControllerMode mode) {
  return mode == ControllerMode::auction ? "auction" : "qp";
}

std::string to_string(TriggerReason reason) {
  switch (reason) {
    case TriggerReason::deficit_positive: return "deficit-positive";
    case TriggerReason::active_set_change: return "active-set-change";
    case TriggerReason::none: break;
  }
  return "none";
}

void ScenarioConfig::validate() const {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  if (agents.size() < 2) throw InvalidInput("config: at least two agents are required");
  if (!positive(v)) throw InvalidInput("config: v must be positive");
  if (!positive(dt)) throw InvalidInput("config: dt must be positive");
  if (!positive(duration)) throw InvalidInput("config: duration must be positive");
  if (!positive(goal_tolerance)) throw InvalidInput("config: goal_tolerance must be positive");
  if (!positive(gains.kx) || !positive(gains.ky) || !positive(gains.ktheta)) {
    throw InvalidInput("config: controller gains must be positive");
  }
  barrier().validate();
  ValuationParams{1.0, gamma, k, 0}.validate();
  auction.validate();
  if (omega_max && !positive(*omega_max)) throw InvalidInput("config: omega_max must be positive");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    for (double x : {a.x0, a.y0, a.theta0, a.goal_x, a.y_ref}) {
      if (!std::isfinite(x)) throw InvalidInput("config: non-finite agent field");
    }
    if (!positive(a.alpha)) throw InvalidInput("config: agent alpha must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (agents[j].x0 == a.x0 && agents[j].y0 == a.y0) {
        throw InvalidInput("config: agents " + std::to_string(j + 1) + " and " +
                           std::to_string(i + 1) + " share an initial position");
      }
    }
  }
}

double nominal_control(const AgentStated& state, double goal_x, double y_ref, const NominalGains& gains) {
  const double heading = std::atan2(-gains.ky * (state.y - y_ref), gains.kx * (goal_x - state.x));
  return gains.ktheta * wrap_angle(heading - state.theta);
}

TriggerDecision trigger_check(double deficit_now, double deficit_prev,
                              const std::vector<int>& active_now,
                              const std::vector<int>& active_prev) {
  if (deficit_prev <= 0.0 && deficit_now > 0.0) return {true, TriggerReason::deficit_positive};
  if (!active_now.empty() && active_now != active_prev) return {true, TriggerReason::active_set_change};
  return {};
}

StepConstraint evaluate_step(const std::vector<AgentStated>& states, const VectorXd& nominal,
                             const std::vector<AgentPair>& candidates, const ScenarioConfig& config) {
  StepConstraint out;
  const BarrierParamsd barrier = config.barrier();
  out.active = active_set(states, nominal, candidates, config.v, barrier);
  if (!out.active.pairs.empty()) {
    out.constraint = assemble_constraint(states, nominal, out.active.pairs, config.v, barrier);
  }
  return out;
}

RunResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  const int n = static_cast<int>(config.agents.size());
  const BarrierParamsd barrier = config.barrier();
  const DynamicsParamsd dyn{config.v, config.dt};
  const std::vector<AgentPair> every_pair = all_pairs(n);

  std::vector<AgentStated> states;
  for (const AgentSpec& a : config.agents) states.emplace_back(a.x0, a.y0, a.theta0);
  std::vector<bool> moving(static_cast<std::size_t>(n), true);
  std::vector<int> encounters(static_cast<std::size_t>(n), 0);

  RunResult result;
  TrajectoryLog& log = result.log;
  log.effort = VectorXd::Zero(n);
  log.min_h_tilde = std::numeric_limits<double>::infinity();
  log.min_distance = std::numeric_limits<double>::infinity();

  double prev_deficit = 0.0;
  std::vector<int> prev_active;
  int event_id = -1;
  std::vector<int> event_agents;
  VectorXd held_credits;
  bool lse_warning_issued = false;

  const auto max_steps = static_cast<long>(std::ceil(config.duration / config.dt - 1e-9));
  for (long step_index = 0; step_index < max_steps; ++step_index) {
    if (config.stop_at_goals && std::none_of(moving.begin(), moving.end(), [](bool m) { return m; })) {
      break;
    }
    const double t = static_cast<double>(step_index) * config.dt;

    VectorXd nominal = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (moving[i]) {
        const AgentSpec& a = config.agents[i];
        nominal(i) = nominal_control(states[i], a.goal_x, a.y_ref, config.gains);
      }
    }

    const StepConstraint sc = evaluate_step(states, nominal, pairs_among(moving), config);
    const double deficit = sc.constraint ? sc.constraint->deficit : 0.0;
    const TriggerDecision trig = trigger_check(deficit, prev_deficit, sc.active.agents, prev_active);

    if (sc.active.empty()) {
      event_id = -1;
      event_agents.clear();
      held_credits.resize(0);
    } else if (trig.fire && config.controller == ControllerMode::auction) {
      EventRecord ev;
      ev.id = static_cast<int>(result.events.size());
      ev.t = t;
      ev.reason = trig.reason;
      ev.agents = sc.active.agents;
      std::vector<ValuationParams> valuations;
      for (int agent : ev.agents) {
        ev.encounters.push_back(encounters[agent]);
        valuations.push_back({config.agents[agent].alpha, config.gamma, config.k, encounters[agent]});
      }
      const AuctionOutcome outcome = run_auction(valuations, config.auction);
      ev.bids = outcome.bids;
      ev.credits = outcome.credits;
      ev.payments = outcome.payments;
      ev.iterations = outcome.iterations;
      ev.converged = outcome.converged;
      if (!outcome.converged) {
        log.warnings.push_back("auction at t=" + std::to_string(t) + " stopped at max_rounds without converging");
      }
      for (int agent : ev.agents) ++encounters[agent];
      event_id = ev.id;
      event_agents = ev.agents;
      held_credits = ev.credits;
      result.events.push_back(std::move(ev));

      const auto m = static_cast<double>(sc.active.pairs.size());
      if (!lse_warning_issued && m > 1 && std::log(m) / config.lambda > 0.5 * config.d * config.d) {
        log.warnings.push_back("lambda=" + std::to_string(config.lambda) +
                               " leaves a log-sum-exp gap above half of d^2 for " +
                               std::to_string(sc.active.pairs.size()) + " active pairs");
        lse_warning_issued = true;
      }
    }

    VectorXd applied = nominal;
    VectorXd correction = VectorXd::Zero(n);
    if (sc.constraint && deficit > 0.0) {
      const SafetyConstraintd& c = *sc.constraint;
      if (config.controller == ControllerMode::auction && event_id >= 0) {
        const VectorXd delta = credit_to_correction(held_credits, deficit);
        for (std::size_t q = 0; q < event_agents.size(); ++q) {
          const int agent = event_agents[q];
          correction(agent) = delta(static_cast<Eigen::Index>(q));
          try {
            applied(agent) = synthesize_control(nominal(agent), c.a_row(agent), correction(agent));
          } catch (const UncontrollableCorrection&) {
            log.feasibility.push_back({t, agent, "uncontrollable", correction(agent), 0.0});
          }
        }
      } else if (config.controller == ControllerMode::qp) {
        try {
          applied = qp_baseline(nominal, c.a_row, c.b);
          for (int i = 0; i < n; ++i) correction(i) = c.a_row(i) * (applied(i) - nominal(i));
        } catch (const UncontrollableCorrection&) {
          log.feasibility.push_back({t, -1, "uncontrollable", deficit, 0.0});
        }
      }
    }

    if (config.omega_max) {
      for (int i = 0; i < n; ++i) {
        const double clipped = std::clamp(applied(i), -*config.omega_max, *config.omega_max);
        if (clipped != applied(i)) {
          if (applied(i) != nominal(i)) {
            log.feasibility.push_back({t, i, "saturation", applied(i), clipped});
          }
          applied(i) = clipped;
        }
      }
    }

    StepRow row;
    row.t = t;
    row.states = states;
    row.omega_nominal = nominal;
    row.omega_applied = applied;
    row.correction = correction;
    row.h_tilde = aggregate_barrier(states, every_pair, barrier);
    row.deficit = deficit;
    row.active = sc.active.agents;
    row.event_id = event_id;
    log.min_h_tilde = std::min(log.min_h_tilde, row.h_tilde);
    log.min_distance = std::min(log.min_distance, min_pair_distance(states));

    for (int i = 0; i < n; ++i) log.effort(i) += std::abs(applied(i) - nominal(i)) * config.dt;
    row.cumulative_effort = log.effort;
    log.rows.push_back(std::move(row));

    for (int i = 0; i < n; ++i) {
      if (!moving[i]) continue;
      states[i] = step(states[i], ControlInputd{applied(i)}, dyn);
      if (!states[i].finite()) {
        std::ostringstream msg;
        msg << "agent " << i + 1 << " state became non-finite at t=" << t;
        throw SimulationFault(msg.str());
      }
      const AgentSpec& a = config.agents[i];
      if (std::hypot(states[i].x - a.goal_x, states[i].y - a.y_ref) <= config.goal_tolerance) {
        moving[i] = false;
      }
    }

    prev_deficit = deficit;
    prev_active = sc.active.agents;
  }

  log.final_states = states;
  log.min_h_tilde = std::min(log.min_h_tilde, aggregate_barrier(states, every_pair, barrier));
  log.min_distance = std::min(log.min_distance, min_pair_distance(states));
  return result;
}

EffortSummary effort_summary(const TrajectoryLog& log) {
  EffortSummary out;
  out.per_agent = log.effort;
  out.total = log.effort.sum();
  return out;
}

}  // namespace avcredit
