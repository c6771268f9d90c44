#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace avcredit {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Vector2d = Vector2<double>;
using Vector3d = Vector3<double>;
using VectorXd = VectorX<double>;
using RowVectorXd = RowVectorX<double>;

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  using std::fmod;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar two_pi = 2 * pi;
  Scalar wrapped = fmod(angle + pi, two_pi);
  if (wrapped < 0) wrapped += two_pi;
  wrapped -= pi;
  // fmod maps +pi to -pi; the interval is open at -pi.
  if (wrapped <= -pi) wrapped += two_pi;
  return wrapped;
}

/// Planar pose of one unicycle agent. Heading is kept in (-pi, pi].
template <typename Scalar>
struct AgentState {
  Scalar x{0};
  Scalar y{0};
  Scalar theta{0};

  AgentState() = default;
  AgentState(Scalar x_, Scalar y_, Scalar theta_)
      : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  static AgentState from_vector(const Vector3<Scalar>& v) {
    return AgentState(v(0), v(1), v(2));
  }
  Vector3<Scalar> as_vector() const { return {x, y, theta}; }
  Vector2<Scalar> position() const { return {x, y}; }

  bool finite() const {
    using std::isfinite;
    return isfinite(x) && isfinite(y) && isfinite(theta);
  }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

using AgentStated = AgentState<double>;

/// Angular-velocity command of one agent, rad/s.
template <typename Scalar>
struct ControlInput {
  Scalar omega{0};
  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

using ControlInputd = ControlInput<double>;

}  // namespace avcredit
