#include "doctest.h"

#include "bohm/stats.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace bohm;

TEST_SUITE("stats") {

TEST_CASE("KS statistic agrees with the brute-force oracle") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.2, 1.1);
  std::vector<double> x;
  for (int i = 0; i < 500; ++i) x.push_back(g(rng));
  auto cdf = [](double q) { return oracle::normal_cdf(q); };
  CHECK(ks_statistic(x, cdf) == doctest::Approx(oracle::ks_bruteforce(x, cdf)).epsilon(1e-14));
  CHECK(ks_threshold(10000) == doctest::Approx(std::sqrt(std::log(40.0) / 20000.0) + 0.005));
  CHECK(ks_threshold(100, 100) > ks_threshold(100));
}

TEST_CASE("two-sample KS") {
  CHECK(ks_statistic_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_statistic_two_sample({1, 2, 3}, {4, 5, 6}) == 1.0);
  CHECK(ks_statistic_two_sample({1, 3}, {2, 4}) == doctest::Approx(0.5));
}

TEST_CASE("equivariance holds for initial draws") {
  const auto sup = HermiteSuperposition1D::ground_plus_second();
  const auto s = sample_initial(*sup, 5000, 3);
  const auto rep = equivariance_test(s.configurations, s.configurations.size(), *sup, 0.0);
  CHECK(rep.pass);
  CHECK(rep.ks <= rep.ks_threshold);
  CHECK(rep.killed_fraction == 0.0);
}

TEST_CASE("negative control: frozen positions fail at a later time") {
  const auto sup = HermiteSuperposition1D::ground_plus_second();
  const auto s = sample_initial(*sup, 5000, 3);
  const auto rep = equivariance_test(s.configurations, s.configurations.size(), *sup, 1.0);
  CHECK_FALSE(rep.pass);
  CHECK(rep.ks > 3.0 * rep.ks_threshold);
}

TEST_CASE("two-dimensional equivariance uses reference draws") {
  const auto params = PhysicalParams::unit(2);
  FreeGaussianPacket packet(params, 1.0, RealVec{0.0, 0.0}, RealVec{1.0, 0.0});
  const auto at_one = sample_initial(packet, 3000, 9, {.time = 1.0});
  EquivarianceOptions opts;
  opts.seed = 17;
  const auto good = equivariance_test(at_one.configurations, 3000, packet, 1.0, opts);
  CHECK(good.pass);
  CHECK(good.marginal_ks.size() == 2);
  const auto at_zero = sample_initial(packet, 3000, 9);
  CHECK_FALSE(equivariance_test(at_zero.configurations, 3000, packet, 1.0, opts).pass);
}

TEST_CASE("too few alive paths") {
  const auto sup = HermiteSuperposition1D::ground_plus_second();
  const auto s = sample_initial(*sup, 50, 3);
  CHECK_THROWS_AS(equivariance_test(s.configurations, 50, *sup, 0.0), Error);
}

TEST_CASE("entropy functional vanishes for stationary moduli") {
  const auto p1 = PhysicalParams::unit(1);
  HermiteSuperposition1D ground({Complex{1.0}});
  const auto s = sample_initial(ground, 200, 1);
  const auto paths = run_ensemble(ground, p1, DomainSpec(1), {1e-6, {}, 10.0, 1.0}, s, {});
  const auto rep = entropy_functional(paths, ground, p1, 1.0);
  CHECK(rep.mean_abs <= 1e-12);
  CHECK(rep.pass);
  CHECK(rep.paths == 200);

  PlaneWaveCircle wave({{2, Complex{1.0}}});
  const auto sc = sample_initial(wave, 200, 1);
  DomainSpec circle(1, {}, PeriodicBox{0.0, 1.0});
  const auto cpaths = run_ensemble(wave, p1, circle, {1e-6, {}, 10.0, 1.0}, sc, {});
  CHECK(entropy_functional(cpaths, wave, p1, 1.0).mean_abs <= 1e-12);
}

TEST_CASE("entropy functional of the oscillator superposition stays below its bound") {
  const auto sup = HermiteSuperposition1D::ground_plus_second();
  const auto p1 = PhysicalParams::unit(1);
  const auto s = sample_initial(*sup, 500, 5);
  const auto paths = run_ensemble(*sup, p1, DomainSpec(1), {1e-3, {}, 5.0, 1.0}, s, {});
  const auto rep = entropy_functional(paths, *sup, p1, 1.0);
  CHECK(rep.mean_abs > 0.0);
  CHECK(rep.bound > rep.mean_abs);
  CHECK(rep.pass);
}

TEST_CASE("initial killed mass of the oscillator superposition") {
  const auto sup = HermiteSuperposition1D::ground_plus_second();
  const auto p1 = PhysicalParams::unit(1);
  // Outside K^n only: twice the Gaussian-weighted tail beyond n.
  const double n = 2.0;
  const double tail = 2.0 * oracle::simpson([](double q) { return std::norm(oracle::superposition_state(q, 0.0)); }, n, 12.0, 4000);
  CHECK(initial_killed_mass(*sup, p1, DomainSpec(1), {1e-300, {}, n, 1.0}) ==
        doctest::Approx(tail).epsilon(1e-6));
  const double with_node = initial_killed_mass(*sup, p1, DomainSpec(1), {1e-2, {}, 10.0, 1.0});
  CHECK(with_node > 0.0);
  CHECK(with_node < 1e-3);
}

TEST_CASE("global existence report") {
  StoppingRegions r1{1e-2, {}, 4.0, 3.0}, r2{1e-3, {}, 5.0, 3.0};
  StoppingStatistics s1, s2;
  s1.count = s2.count = 100;
  s1.p_hat = 0.05;
  s1.sigma_hat = 0.02;
  s2.p_hat = 0.0;
  BoundTerms b1{1e-2, {}, 4.0, 3.0, 0.01, 0.02, 0.0, 0.005};
  BoundTerms b2{1e-3, {}, 5.0, 3.0, 0.001, 0.002, 0.0, 0.0005};
  const auto rep = global_existence_report({r1, r2}, {s1, s2}, {b1, b2});
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].sum == doctest::Approx(0.035));
  CHECK(rep.rows[0].margin == doctest::Approx(0.035 - (0.05 - 0.06)));
  CHECK(rep.all_pass);
  CHECK(rep.sum_decreasing);
  BoundTerms wrong = b2;
  wrong.n = 6.0;
  try {
    global_existence_report({r1, r2}, {s1, s2}, {b1, wrong});
    FAIL("expected MismatchedParameters");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MismatchedParameters);
  }
}

}
