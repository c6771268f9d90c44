#include <doctest.h>

#include <cmath>
#include <numbers>

#include "avcredit/dynamics.hpp"

using namespace avcredit;

TEST_CASE("drift points along the heading at speed v") {
  CHECK(drift(AgentStated(0, 0, 0), 0.1).isApprox(Vector3d(0.1, 0, 0)));
  const Vector3d up = drift(AgentStated(0, 0, std::numbers::pi / 2), 0.1);
  CHECK(up(0) == doctest::Approx(0.0));
  CHECK(up(1) == doctest::Approx(0.1));
  const Vector3d diag = drift(AgentStated(1, -1, std::numbers::pi / 4), 0.1);
  CHECK(diag(0) == doctest::Approx(0.070711).epsilon(1e-5));
  CHECK(diag(1) == doctest::Approx(0.070711).epsilon(1e-5));
  CHECK(diag(2) == 0.0);
}

TEST_CASE("control field is the heading axis everywhere") {
  for (const AgentStated s : {AgentStated(0, 0, 0), AgentStated(5, 5, std::numbers::pi), AgentStated(-2, 3, 1)}) {
    CHECK(control_field(s) == Vector3d(0, 0, 1));
  }
}

TEST_CASE("headings are wrapped to (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
  CHECK(AgentStated(0, 0, 7.0).theta == doctest::Approx(7.0 - 2 * std::numbers::pi));
}

TEST_CASE("single steps") {
  SUBCASE("straight line") {
    const auto s = step(AgentStated(0, 0, 0), ControlInputd{0.0}, DynamicsParamsd{0.1, 0.1});
    CHECK(s.x == doctest::Approx(0.01));
    CHECK(s.y == doctest::Approx(0.0));
    CHECK(s.theta == 0.0);
  }
  SUBCASE("pure rotation") {
    const auto s = step(AgentStated(0, 0, 0), ControlInputd{1.0}, DynamicsParamsd{0.0, 0.5});
    CHECK(s.x == 0.0);
    CHECK(s.y == 0.0);
    CHECK(s.theta == doctest::Approx(0.5));
  }
  SUBCASE("matches a hand-written RK4 stage evaluation") {
    const double v = 0.1, w = 1.0, h = 0.033;
    auto rate = [&](double th) { return std::array<double, 3>{v * std::cos(th), v * std::sin(th), w}; };
    const auto k1 = rate(0.0);
    const auto k2 = rate(0.0 + h / 2 * k1[2]);
    const auto k3 = rate(0.0 + h / 2 * k2[2]);
    const auto k4 = rate(0.0 + h * k3[2]);
    const double x = h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    const double y = h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    const auto s = step(AgentStated(0, 0, 0), ControlInputd{w}, DynamicsParamsd{v, h});
    CHECK(std::abs(s.x - x) < 1e-12);
    CHECK(std::abs(s.y - y) < 1e-12);
    CHECK(std::abs(s.theta - h * w) < 1e-12);
  }
}

TEST_CASE("straight runs cover v t") {
  const DynamicsParamsd p{0.1, 0.033};
  AgentStated s(0.3, -0.2, 0.7);
  for (int k = 1; k <= 200; ++k) {
    s = step(s, ControlInputd{0.0}, p);
    const double travelled = (s.position() - Vector2d(0.3, -0.2)).norm();
    CHECK(std::abs(travelled - p.v * p.dt * k) <= 1e-8 * p.v * p.dt * k);
  }
}

TEST_CASE("constant turn rate traces a circle of radius v/|omega|") {
  const DynamicsParamsd p{0.1, 0.033};
  const double omega = 0.8;
  AgentStated s(0, 0, 0);
  const double radius = p.v / omega;
  const Vector2d centre(0.0, radius);
  for (int k = 0; k < 1000; ++k) {
    s = step(s, ControlInputd{omega}, p);
    CHECK(std::abs((s.position() - centre).norm() - radius) <= 1e-6 * radius);
  }
}

TEST_CASE("step is bit-for-bit repeatable and rejects bad input") {
  const DynamicsParamsd p;
  const AgentStated s(0.1, 0.2, 0.3);
  CHECK(step(s, ControlInputd{0.4}, p) == step(s, ControlInputd{0.4}, p));
  CHECK_THROWS_AS(step(s, ControlInputd{NAN}, p), InvalidInput);
  CHECK_THROWS_AS(step(s, ControlInputd{0.0}, DynamicsParamsd{0.1, 0.0}), InvalidInput);
}
