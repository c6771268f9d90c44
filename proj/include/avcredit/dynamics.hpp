#pragma once

#include <cmath>

#include "avcredit/types.hpp"

namespace avcredit {

/// Constant-speed unicycle parameters: forward speed v (m/s) and step dt (s).
template <typename Scalar>
struct DynamicsParams {
  Scalar v{0.1};
  Scalar dt{0.033};

  void validate() const {
    using std::isfinite;
    if (!(v > 0) || !isfinite(v)) throw InvalidInput("dynamics: v must be positive and finite");
    if (!(dt > 0) || !isfinite(dt)) throw InvalidInput("dynamics: dt must be positive and finite");
  }
};

using DynamicsParamsd = DynamicsParams<double>;

/// Drift field f(x) = (v cos theta, v sin theta, 0).
template <typename Scalar>
Vector3<Scalar> drift(const AgentState<Scalar>& state, Scalar v) {
  using std::cos;
  using std::sin;
  return {v * cos(state.theta), v * sin(state.theta), Scalar(0)};
}

template <typename Scalar>
Vector3<Scalar> drift(const AgentState<Scalar>& state, const DynamicsParams<Scalar>& params) {
  return drift(state, params.v);
}

/// Control field g(x); the angular rate only enters the heading.
template <typename Scalar>
Vector3<Scalar> control_field(const AgentState<Scalar>& /*state*/) {
  return {Scalar(0), Scalar(0), Scalar(1)};
}

namespace detail {

// Derivative of the raw (unwrapped) state vector under zero-order-hold omega.
template <typename Scalar>
Vector3<Scalar> unicycle_rate(const Vector3<Scalar>& s, Scalar v, Scalar omega) {
  using std::cos;
  using std::sin;
  return {v * cos(s(2)), v * sin(s(2)), omega};
}

}  // namespace detail

/// One classical RK4 step of x' = f(x) + g(x) omega with omega held constant.
/// The returned heading is wrapped to (-pi, pi].
template <typename Scalar>
AgentState<Scalar> step(const AgentState<Scalar>& state, const ControlInput<Scalar>& u,
                        const DynamicsParams<Scalar>& params) {
  using std::isfinite;
  if (!state.finite() || !isfinite(u.omega) || !isfinite(params.v)) {
    throw InvalidInput("dynamics::step: non-finite state or control");
  }
  // A zero speed is accepted here (pure rotation); scenarios require v > 0.
  if (!(params.dt > 0) || !isfinite(params.dt)) {
    throw InvalidInput("dynamics::step: dt must be positive and finite");
  }

  const Scalar h = params.dt;
  const Vector3<Scalar> s0 = state.as_vector();
  const Vector3<Scalar> k1 = detail::unicycle_rate(s0, params.v, u.omega);
  const Vector3<Scalar> k2 = detail::unicycle_rate<Scalar>(s0 + (h / 2) * k1, params.v, u.omega);
  const Vector3<Scalar> k3 = detail::unicycle_rate<Scalar>(s0 + (h / 2) * k2, params.v, u.omega);
  const Vector3<Scalar> k4 = detail::unicycle_rate<Scalar>(s0 + h * k3, params.v, u.omega);
  const Vector3<Scalar> s1 = s0 + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  return AgentState<Scalar>::from_vector(s1);
}

}  // namespace avcredit
