#include "doctest.h"

#include "bohm/trajectory.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace bohm;

namespace {

const double kPi = std::numbers::pi;

KilledPath run1d(const WavefunctionModel& model, double q0, const StoppingRegions& r,
                 IntegratorConfig cfg = {}) {
  const RealVec x{q0};
  return integrate(model, PhysicalParams::unit(1), DomainSpec(1), r, view(x), 0.0, cfg);
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("uniform motion leaves the ball at (n - q0) / c") {
  oracle::UniformMotion model(RealVec{1.5, 0.0}, RealVec{0.0, 0.0}, 1.0);
  const auto params = PhysicalParams::unit(2);
  StoppingRegions r{1e-12, {}, 4.0, 10.0};
  const RealVec q0{1.0, 0.0};
  const auto path = integrate(model, params, DomainSpec(2), r, view(q0), 0.0, {});
  CHECK(path.status == PathStatus::Ok);
  CHECK(path.cause == StopCause::Ball);
  CHECK(path.stop_time == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(path.terminal()[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(path.position_at(1.0)[0] == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(path.alive_at(1.9));
  CHECK_FALSE(path.alive_at(2.1));
}

TEST_CASE("oscillator superposition: a path at the origin dies at the node") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const double N = model->norm_constant();
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto path = run1d(*model, 0.0, {eps, {}, 10.0, 3.0});
    CHECK(path.cause == StopCause::Node);
    CHECK(path.stop_time == doctest::Approx(kPi / 2 - std::asin(eps / (2 * N))).epsilon(1e-8));
    CHECK(path.terminal()[0] == 0.0);
  }
}

TEST_CASE("a path starting at a node is killed immediately") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto path = run1d(*model, 1.0, {1e-3, {}, 10.0, 3.0});
  CHECK(path.immediately_killed);
  CHECK(path.cause == StopCause::Node);
  CHECK(path.stop_time == 0.0);
}

TEST_CASE("cylindrical state circles the axis with period 2 pi r^2") {
  CylindricalHO3D model;
  const auto params = PhysicalParams::unit(3);
  const double r0 = 2.0, T = 2 * kPi * r0 * r0;
  StoppingRegions regions{1e-12, {}, 50.0, T};
  IntegratorConfig cfg;
  cfg.output_times = {T / 4, T / 2, T};
  const RealVec q0{r0, 0.0, 0.3};
  const auto path = integrate(model, params, DomainSpec(3), regions, view(q0), 0.0, cfg);
  CHECK(path.cause == StopCause::Horizon);
  double drift = 0.0;
  for (std::size_t i = 0; i < path.sample_count(); ++i) {
    const auto q = path.sample(i);
    drift = std::max(drift, std::abs(std::hypot(q[0], q[1]) - r0));
    REQUIRE(q[2] == doctest::Approx(0.3).epsilon(1e-12));
  }
  CHECK(drift <= 1e-8);
  const auto quarter = path.output(0);
  CHECK(quarter[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(quarter[1] == doctest::Approx(r0).epsilon(1e-7));
  const auto end = path.output(2);
  CHECK(end[0] == doctest::Approx(r0).epsilon(1e-7));
  CHECK(std::abs(end[1]) <= 1e-6);
}

TEST_CASE("property: mirror symmetry of the oscillator superposition") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  StoppingRegions r{1e-4, {}, 10.0, 2.0};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 2.5);
  for (int i = 0; i < 10; ++i) {
    const double q0 = u(rng);
    const auto a = run1d(*model, q0, r), b = run1d(*model, -q0, r);
    REQUIRE(a.cause == b.cause);
    REQUIRE(a.stop_time == doctest::Approx(b.stop_time).epsilon(1e-9));
    for (double t = 0.0; t < a.stop_time; t += 0.1) {
      REQUIRE(a.position_at(t)[0] == doctest::Approx(-b.position_at(t)[0]).epsilon(1e-8));
    }
  }
}

TEST_CASE("property: one-dimensional paths never cross") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  StoppingRegions r{1e-4, {}, 10.0, 1.5};
  std::vector<KilledPath> paths;
  for (double q0 = -2.5; q0 <= 2.5; q0 += 0.17) paths.push_back(run1d(*model, q0, r));
  for (double t = 0.05; t <= 1.5; t += 0.05) {
    double prev = -1e300;
    for (const auto& p : paths) {
      if (!p.alive_at(t)) continue;
      const double q = p.position_at(t)[0];
      REQUIRE(q > prev);
      prev = q;
    }
  }
}

TEST_CASE("property: shrinking the stopping regions never shortens a path") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 12; ++i) {
    const double q0 = u(rng);
    double prev = -1.0;
    for (auto [eps, n] : {std::pair{1e-2, 3.0}, std::pair{1e-3, 4.0}, std::pair{1e-4, 5.0}}) {
      const auto p = run1d(*model, q0, {eps, {}, n, 3.0});
      REQUIRE(p.stop_time >= prev - 1e-9);
      prev = p.stop_time;
    }
  }
}

TEST_CASE("ensembles do not depend on the worker count") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const auto params = PhysicalParams::unit(1);
  const auto samples = sample_initial(*model, 64, 77);
  StoppingRegions r{1e-3, {}, 4.0, 2.0};
  IntegratorConfig cfg;
  cfg.output_times = {0.5, 1.0};
  const auto one = run_ensemble(*model, params, DomainSpec(1), r, samples, cfg, 1);
  const auto four = run_ensemble(*model, params, DomainSpec(1), r, samples, cfg, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    REQUIRE(one[i].id == i);
    REQUIRE(one[i].stop_time == four[i].stop_time);
    REQUIRE(one[i].coords == four[i].coords);
    REQUIRE(one[i].outputs == four[i].outputs);
  }
}

TEST_CASE("output positions are NaN once the path is dead") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  IntegratorConfig cfg;
  cfg.output_times = {1.0, 2.0};
  const auto path = run1d(*model, 0.0, {1e-3, {}, 10.0, 3.0}, cfg);
  CHECK(path.output(0)[0] == 0.0);
  CHECK(std::isnan(path.output(1)[0]));
}

TEST_CASE("stopping statistics and intervals") {
  std::vector<KilledPath> paths(10);
  for (std::size_t i = 0; i < 10; ++i) {
    paths[i].stop_time = 1.0;
    paths[i].cause = StopCause::Horizon;
  }
  paths[0].cause = StopCause::Node;
  paths[1].cause = StopCause::Ball;
  paths[2].status = PathStatus::StepSizeUnderflow;
  paths[3].cause = StopCause::Node;
  paths[3].immediately_killed = true;
  const auto s = stopping_statistics(paths);
  CHECK(s.count == 10);
  CHECK(s.node == 2);
  CHECK(s.ball == 1);
  CHECK(s.failed == 1);
  CHECK(s.immediate == 1);
  CHECK(s.horizon == 6);
  CHECK(s.p_hat == doctest::Approx(0.4));
  CHECK(s.p_dynamic == doctest::Approx(0.3));
  CHECK(s.sigma_hat == doctest::Approx(std::sqrt(0.4 * 0.6 / 10)));
  CHECK(s.interval.lo < 0.4);
  CHECK(s.interval.hi > 0.4);
  const auto zero = proportion_interval(0, 300);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(0.01));
  const auto wilson = proportion_interval(50, 100);
  CHECK(wilson.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(wilson.hi == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK_THROWS_AS(stopping_statistics({}), Error);
  CHECK_THROWS_AS(proportion_interval(0, 0), Error);
}

TEST_CASE("integrate validates its inputs") {
  const auto model = HermiteSuperposition1D::ground_plus_second();
  const RealVec q0{0.5}, q2{0.5, 0.5};
  const auto params = PhysicalParams::unit(1);
  StoppingRegions r{1e-3, {}, 5.0, 1.0};
  CHECK_THROWS_AS(integrate(*model, params, DomainSpec(1), r, view(q0), 1.0, {}), Error);
  CHECK_THROWS_AS(integrate(*model, params, DomainSpec(1), r, view(q2), 0.0, {}), Error);
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(integrate(*model, params, DomainSpec(1), r, view(q0), 0.0, bad), Error);
}

}
