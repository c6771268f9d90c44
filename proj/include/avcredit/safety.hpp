#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <vector>

#include "avcredit/dynamics.hpp"
#include "avcredit/types.hpp"

namespace avcredit {

/// Pairwise distance barrier and its second-order HOCBF gains.
///
/// `d` is the minimum separation (m), `lambda` the log-sum-exp sharpness and
/// `kappa1`, `kappa2` the slopes of the two linear class-K functions.
template <typename Scalar>
struct BarrierParams {
  Scalar d{0.12};
  Scalar lambda{50};
  Scalar kappa1{1.2};
  Scalar kappa2{1.2};

  void validate() const {
    using std::isfinite;
    auto positive = [](Scalar s) { return s > 0 && isfinite(s); };
    if (!positive(d)) throw InvalidInput("barrier: d must be positive");
    if (!positive(lambda)) throw InvalidInput("barrier: lambda must be positive");
    if (!positive(kappa1) || !positive(kappa2)) throw InvalidInput("barrier: kappa gains must be positive");
  }
};

using BarrierParamsd = BarrierParams<double>;

/// Unordered agent pair stored as (first, second) with first < second when
/// produced by `all_pairs`.
struct AgentPair {
  int first{0};
  int second{1};
  auto operator<=>(const AgentPair&) const = default;
};

/// All pairs (i, j), i < j, in lexicographic order.
inline std::vector<AgentPair> all_pairs(int n) {
  std::vector<AgentPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.push_back({i, j});
  return pairs;
}

/// h, its drift Lie derivatives and the two non-zero mixed-derivative entries
/// of one pairwise barrier.
template <typename Scalar>
struct PairDerivatives {
  AgentPair pair;
  Scalar h{0};
  Scalar lf_h{0};
  Scalar lf2_h{0};
  Scalar lglf_i{0};
  Scalar lglf_j{0};
};

/// h = |pi - pj|^2 - d^2.
template <typename Scalar>
Scalar pair_barrier(const Vector2<Scalar>& pi, const Vector2<Scalar>& pj,
                    const BarrierParams<Scalar>& params) {
  return (pi - pj).squaredNorm() - params.d * params.d;
}

/// Derivatives of the pair barrier along the unicycle fields. Per-agent speeds
/// are accepted so a stationary agent can be modelled with speed zero.
template <typename Scalar>
PairDerivatives<Scalar> pair_derivatives(const AgentState<Scalar>& xi, const AgentState<Scalar>& xj,
                                         Scalar vi, Scalar vj, const BarrierParams<Scalar>& params,
                                         AgentPair pair = {}) {
  using std::cos;
  using std::sin;
  const Scalar dx = xi.x - xj.x;
  const Scalar dy = xi.y - xj.y;
  const Scalar dvx = vi * cos(xi.theta) - vj * cos(xj.theta);
  const Scalar dvy = vi * sin(xi.theta) - vj * sin(xj.theta);

  PairDerivatives<Scalar> out;
  out.pair = pair;
  out.h = dx * dx + dy * dy - params.d * params.d;
  out.lf_h = 2 * (dx * dvx + dy * dvy);
  out.lf2_h = 2 * (dvx * dvx + dvy * dvy);
  out.lglf_i = 2 * vi * (-dx * sin(xi.theta) + dy * cos(xi.theta));
  out.lglf_j = 2 * vj * (dx * sin(xj.theta) - dy * cos(xj.theta));
  return out;
}

template <typename Scalar>
PairDerivatives<Scalar> pair_derivatives(const AgentState<Scalar>& xi, const AgentState<Scalar>& xj,
                                         Scalar v, const BarrierParams<Scalar>& params,
                                         AgentPair pair = {}) {
  return pair_derivatives(xi, xj, v, v, params, pair);
}

/// Left-hand side of the per-pair second-order condition
///   L_f^2 h + L_G L_f h u + (k1 + k2) L_f h + k1 k2 h >= 0.
template <typename Scalar>
Scalar pair_condition(const PairDerivatives<Scalar>& pd, Scalar omega_i, Scalar omega_j,
                      const BarrierParams<Scalar>& params) {
  return pd.lf2_h + pd.lglf_i * omega_i + pd.lglf_j * omega_j +
         (params.kappa1 + params.kappa2) * pd.lf_h + params.kappa1 * params.kappa2 * pd.h;
}

/// Smooth minimum -1/lambda log sum exp(-lambda h_k), evaluated with a shift
/// by min(h) so the largest exponent is zero.
template <typename Derived>
typename Derived::Scalar lse_aggregate(const Eigen::MatrixBase<Derived>& h,
                                       typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log;
  if (h.size() == 0) throw InvalidInput("lse_aggregate: empty barrier list");
  if (!(lambda > 0)) throw InvalidInput("lse_aggregate: lambda must be positive");
  const Scalar h_min = h.minCoeff();
  Scalar sum{0};
  for (Eigen::Index k = 0; k < h.size(); ++k) sum += exp(-lambda * (h(k) - h_min));
  return h_min - log(sum) / lambda;
}

/// Chain-rule weights of `lse_aggregate`: w_k = exp(-lambda h_k) / sum_j exp(-lambda h_j).
template <typename Derived>
VectorX<typename Derived::Scalar> softmin_weights(const Eigen::MatrixBase<Derived>& h,
                                                  typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  if (h.size() == 0) throw InvalidInput("softmin_weights: empty barrier list");
  if (!(lambda > 0)) throw InvalidInput("softmin_weights: lambda must be positive");
  const Scalar h_min = h.minCoeff();
  VectorX<Scalar> w(h.size());
  for (Eigen::Index k = 0; k < h.size(); ++k) w(k) = exp(-lambda * (h(k) - h_min));
  return w / w.sum();
}

/// Aggregated affine safety condition a_row * u >= b for the joint angular
/// rates, together with the deficit of the nominal controls used at assembly.
template <typename Scalar>
struct SafetyConstraint {
  RowVectorX<Scalar> a_row;
  Scalar b{0};
  Scalar deficit{0};
  Scalar h_tilde{0};
  Scalar lf_h_tilde{0};
  Scalar lf2_h_tilde{0};
  /// Set when |a_row| < 1e-9: no control direction can change the condition.
  bool uncontrollable{false};
};

using SafetyConstraintd = SafetyConstraint<double>;

inline constexpr double kUncontrollableNorm = 1e-9;

/// S = b - a_row * u_nominal. Positive values mean the nominal controls are
/// jointly unsafe.
template <typename Scalar>
Scalar safety_deficit(const RowVectorX<Scalar>& a_row, Scalar b, const VectorX<Scalar>& nominal) {
  if (a_row.size() != nominal.size()) throw InvalidInput("safety_deficit: size mismatch");
  return b - a_row.dot(nominal.transpose());
}

template <typename Scalar>
Scalar safety_deficit(const SafetyConstraint<Scalar>& constraint) {
  return constraint.deficit;
}

/// Assembles the second-order condition on the log-sum-exp aggregate of the
/// listed pair barriers. `speeds` gives each agent's forward speed.
template <typename Scalar>
SafetyConstraint<Scalar> assemble_constraint(const std::vector<AgentState<Scalar>>& states,
                                             const VectorX<Scalar>& nominal,
                                             const std::vector<AgentPair>& pairs,
                                             const VectorX<Scalar>& speeds,
                                             const BarrierParams<Scalar>& params) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (pairs.empty()) throw InvalidInput("assemble_constraint: no barrier pairs");
  if (nominal.size() != n || speeds.size() != n) {
    throw InvalidInput("assemble_constraint: control/speed vector size mismatch");
  }
  for (const auto& s : states)
    if (!s.finite()) throw InvalidInput("assemble_constraint: non-finite state");

  const auto m = static_cast<Eigen::Index>(pairs.size());
  std::vector<PairDerivatives<Scalar>> pd;
  pd.reserve(pairs.size());
  VectorX<Scalar> h(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const AgentPair& p = pairs[static_cast<std::size_t>(k)];
    if (p.first < 0 || p.second < 0 || p.first >= n || p.second >= n || p.first == p.second) {
      throw InvalidInput("assemble_constraint: invalid agent pair");
    }
    pd.push_back(pair_derivatives(states[p.first], states[p.second], speeds(p.first),
                                  speeds(p.second), params, p));
    h(k) = pd.back().h;
  }

  const VectorX<Scalar> w = softmin_weights(h, params.lambda);

  Scalar lf{0};
  Scalar lf2_weighted{0};
  Scalar lf_sq{0};
  RowVectorX<Scalar> a = RowVectorX<Scalar>::Zero(n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& q = pd[static_cast<std::size_t>(k)];
    lf += w(k) * q.lf_h;
    lf2_weighted += w(k) * q.lf2_h;
    lf_sq += w(k) * q.lf_h * q.lf_h;
    // L_G h_k vanishes at relative degree two, so the weights' own
    // derivatives do not enter the mixed term.
    a(q.pair.first) += w(k) * q.lglf_i;
    a(q.pair.second) += w(k) * q.lglf_j;
  }

  SafetyConstraint<Scalar> out;
  out.h_tilde = lse_aggregate(h, params.lambda);
  out.lf_h_tilde = lf;
  out.lf2_h_tilde = lf2_weighted - params.lambda * (lf_sq - lf * lf);
  out.a_row = a;
  out.b = -out.lf2_h_tilde - (params.kappa1 + params.kappa2) * out.lf_h_tilde -
          params.kappa1 * params.kappa2 * out.h_tilde;
  out.deficit = safety_deficit(out.a_row, out.b, nominal);
  out.uncontrollable = out.a_row.norm() < Scalar(kUncontrollableNorm);
  return out;
}

/// Uniform-speed convenience overload.
template <typename Scalar>
SafetyConstraint<Scalar> assemble_constraint(const std::vector<AgentState<Scalar>>& states,
                                             const VectorX<Scalar>& nominal,
                                             const std::vector<AgentPair>& pairs, Scalar v,
                                             const BarrierParams<Scalar>& params) {
  const VectorX<Scalar> speeds =
      VectorX<Scalar>::Constant(static_cast<Eigen::Index>(states.size()), v);
  return assemble_constraint(states, nominal, pairs, speeds, params);
}

/// Agents and pairs whose per-pair condition fails under the nominal controls.
struct ActiveSet {
  std::vector<int> agents;  // sorted, unique
  std::vector<AgentPair> pairs;

  bool empty() const { return agents.empty(); }
  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

/// Tests each candidate pair; an agent is active if it belongs to any active pair.
template <typename Scalar>
ActiveSet active_set(const std::vector<AgentState<Scalar>>& states, const VectorX<Scalar>& nominal,
                     const std::vector<AgentPair>& candidates, Scalar v,
                     const BarrierParams<Scalar>& params) {
  if (nominal.size() != static_cast<Eigen::Index>(states.size())) {
    throw InvalidInput("active_set: control vector size mismatch");
  }
  ActiveSet out;
  for (const AgentPair& p : candidates) {
    const auto pd = pair_derivatives(states[p.first], states[p.second], v, params, p);
    if (pair_condition(pd, nominal(p.first), nominal(p.second), params) < 0) {
      out.pairs.push_back(p);
      out.agents.push_back(p.first);
      out.agents.push_back(p.second);
    }
  }
  std::sort(out.agents.begin(), out.agents.end());
  out.agents.erase(std::unique(out.agents.begin(), out.agents.end()), out.agents.end());
  return out;
}

template <typename Scalar>
ActiveSet active_set(const std::vector<AgentState<Scalar>>& states, const VectorX<Scalar>& nominal,
                     Scalar v, const BarrierParams<Scalar>& params) {
  return active_set(states, nominal, all_pairs(static_cast<int>(states.size())), v, params);
}

/// Smooth minimum over the given pairs' barrier values (monitoring helper).
template <typename Scalar>
Scalar aggregate_barrier(const std::vector<AgentState<Scalar>>& states,
                         const std::vector<AgentPair>& pairs, const BarrierParams<Scalar>& params) {
  VectorX<Scalar> h(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    h(static_cast<Eigen::Index>(k)) = pair_barrier(states[pairs[k].first].position(),
                                                   states[pairs[k].second].position(), params);
  }
  return lse_aggregate(h, params.lambda);
}

}  // namespace avcredit
