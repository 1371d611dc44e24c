#include "doctest.h"

#include "bohm/trajectory.hpp"
#include "bohm/transport1d.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace bohm;

TEST_SUITE("transport1d") {

TEST_CASE("cdf of the even oscillator superposition is 1/2 at the origin") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  for (double t : {0.0, 0.7, std::numbers::pi / 2, 2.2}) CHECK(cdf(*model, 0.0, t) == doctest::Approx(0.5).epsilon(1e-11));
  const double ref = oracle::simpson([](double s) { return std::norm(oracle::superposition_state(s, 0.9)); }, -10.0, 0.8, 2000);
  CHECK(cdf(*model, 0.8, 0.9) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("cdf table agrees with adaptive quadrature and inverts") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto table = CdfTable::build(*model, 1.1);
  CHECK(table.total() == doctest::Approx(1.0).epsilon(1e-11));
  for (double q : {-2.0, -0.4, 0.3, 1.5}) {
    CHECK(table(q) == doctest::Approx(cdf(*model, q, 1.1)).epsilon(1e-10));
    CHECK(table.leftmost_position(table(q)) == doctest::Approx(q).epsilon(1e-9));
  }
  CHECK(table(-100.0) == 0.0);
  CHECK(table(100.0) == table.total());
  CHECK_THROWS_AS(table.leftmost_position(1.5), Error);
}

TEST_CASE("transport is the identity at t = 0") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  for (double q0 : {-1.7, -0.2, 0.6, 2.3}) CHECK(transport_map(*model, q0, 0.0) == doctest::Approx(q0).epsilon(1e-9));
}

TEST_CASE("property: the transport map preserves the CDF level") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uq(-2.5, 2.5), ut(0.05, 2.5);
  for (int i = 0; i < 40; ++i) {
    const double q0 = uq(rng), t = ut(rng);
    const double q = transport_map(*model, q0, t);
    REQUIRE(cdf(*model, q, t) == doctest::Approx(cdf(*model, q0, 0.0)).epsilon(1e-9));
  }
}

TEST_CASE("transport map agrees with the guidance ODE away from nodes") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto initial = CdfTable::build(*model, 0.0);
  for (double t : {0.5, 1.0}) {
    const auto current = CdfTable::build(*model, t);
    for (double q0 : {-1.5, -0.6, 0.4, 1.3}) {
      const RealVec x{q0};
      const auto path = integrate(*model, PhysicalParams::unit(1), DomainSpec(1), {1e-6, {}, 10.0, t + 0.01},
                                  view(x), 0.0, {});
      REQUIRE(path.alive_at(t));
      REQUIRE(transport_map(initial, current, q0) == doctest::Approx(path.position_at(t)[0]).epsilon(1e-7));
    }
  }
}

TEST_CASE("levels 0 and 1 map to the ends of the line") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto a = CdfTable::build(*model, 0.0), b = CdfTable::build(*model, 1.0);
  CHECK(transport_map(a, b, -1e3) == -std::numeric_limits<double>::infinity());
  CHECK(transport_map(a, b, 1e3) == std::numeric_limits<double>::infinity());
}

TEST_CASE("standing wave on the circle carries no current") {
  PlaneWaveCircle standing({{1, Complex{1.0}}, {-1, Complex{1.0}}});
  const auto params = PhysicalParams::unit(1);
  CHECK(std::abs(boundary_current_integral(standing, params, 0.8)) <= 1e-14);
  for (double q0 : {0.1, 0.37, 0.8}) {
    const auto p = circle_transport(standing, params, q0, 0.6);
    CHECK(p.q == doctest::Approx(q0).epsilon(1e-9));
    CHECK(p.winding == 0);
  }
}

TEST_CASE("a single mode rotates the circle rigidly") {
  PlaneWaveCircle mode({{1, Complex{1.0}}});
  const auto params = PhysicalParams::unit(1);
  const double t = 0.37;
  CHECK(boundary_current_integral(mode, params, t) == doctest::Approx(2 * std::numbers::pi * t).epsilon(1e-10));
  for (double q0 : {0.05, 0.5, 0.93}) {
    const double level = q0 + 2 * std::numbers::pi * t;
    const auto p = circle_transport(mode, params, q0, t);
    CHECK(p.q == doctest::Approx(level - std::floor(level)).epsilon(1e-9));
    CHECK(p.winding == static_cast<long>(std::floor(level)));
  }
}

TEST_CASE("double zero leaves like s^{2/5}") {
  oracle::DoubleZeroModel model;
  const auto fit = node_scaling_fit(model, {1.0, 0.0}, 2);
  CHECK_FALSE(fit.not_a_node);
  CHECK(fit.expected == doctest::Approx(0.4));
  CHECK(std::abs(fit.exponent - 0.4) <= 0.03);
}

TEST_CASE("a regular point is flagged as not a node") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto fit = node_scaling_fit(*model, {0.5, 0.3}, 1);
  CHECK(fit.not_a_node);
}

TEST_CASE("scaling window must be usable") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  CHECK_THROWS_AS(node_scaling_fit(*model, {0.0, std::numbers::pi / 2}, 1, {1e-4, 1e-2, 4}), Error);
}

}
