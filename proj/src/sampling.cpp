#include "bohm/rng.hpp"
#include "bohm/transport1d.hpp"
#include "bohm/wavefunction.hpp"

#include <numbers>

namespace bohm {

namespace {

EnsembleSample sample_inverse_cdf(const WavefunctionModel& model, std::size_t count,
                                  std::uint64_t seed, double t) {
  const CdfTable table = CdfTable::build(model, t, 4096);
  EnsembleSample out{{}, seed, SamplingMethod::InverseCdf};
  out.configurations.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = open_uniform(stream_seed(seed, kStreamInverseCdf, i));
    out.configurations.push_back(RealVec{table.leftmost_position(u * table.total())});
  }
  return out;
}

EnsembleSample sample_rejection(const WavefunctionModel& model, const GaussianEnvelope& env,
                                std::size_t count, std::uint64_t seed) {
  const std::size_t d = model.dim();
  const double sigma2 = env.sigma * env.sigma;
  const double log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * sigma2);
  EnsembleSample out{{}, seed, SamplingMethod::Rejection};
  out.configurations.reserve(count);
  std::size_t tries = 0;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  for (std::size_t i = 0; i < count; ++i) {
    auto engine = make_engine(seed, kStreamRejection, i);
    normal.reset();
    std::size_t local = 0;
    while (true) {
      ++tries;
      if (++local > 100000) {
        fail(ErrorCode::EnvelopeFailure, "rejection acceptance rate below 1e-4");
      }
      RealVec x(d, 0.0);
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double z = normal(engine);
        x[k] = env.center[k] + env.sigma * z;
        r2 += z * z;
      }
      const double proposal = std::exp(log_norm - 0.5 * r2);
      const double target = model.evaluate(view(x), 0.0).abs2;
      if (uniform(engine) * env.bound * proposal <= target) {
        out.configurations.push_back(x);
        break;
      }
    }
  }
  if (static_cast<double>(count) < 1e-4 * static_cast<double>(tries)) {
    fail(ErrorCode::EnvelopeFailure, "rejection acceptance rate below 1e-4");
  }
  return out;
}

EnsembleSample sample_metropolis(const WavefunctionModel& model, std::size_t count,
                                 std::uint64_t seed, const SamplingOptions& options) {
  const std::size_t d = model.dim();
  const Box box = model.mass_box(options.time);
  auto engine = make_engine(seed, kStreamMetropolis, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  RealVec x(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) x[k] = 0.5 * (box.lo[k] + box.hi[k]);
  double px = model.evaluate(view(x), options.time).abs2;
  // Start from the densest point of a coarse scan if the box centre carries no mass.
  if (!(px > 0.0)) {
    for (std::size_t i = 0; i < 4096; ++i) {
      RealVec y(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) y[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * uniform(engine);
      const double py = model.evaluate(view(y), options.time).abs2;
      if (py > px) {
        x = y;
        px = py;
      }
    }
  }
  require(px > 0.0, ErrorCode::EnvelopeFailure, "Metropolis chain found no mass");

  auto advance = [&] {
    RealVec y = x;
    for (std::size_t k = 0; k < d; ++k) y[k] += options.metropolis_step * normal(engine);
    if (!box.contains(view(y))) return;
    const double py = model.evaluate(view(y), options.time).abs2;
    if (uniform(engine) * px < py) {
      x = y;
      px = py;
    }
  };
  for (std::size_t i = 0; i < options.metropolis_burn_in; ++i) advance();
  EnsembleSample out{{}, seed, SamplingMethod::Metropolis};
  out.configurations.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < std::max<std::size_t>(1, options.metropolis_thinning); ++k) advance();
    out.configurations.push_back(x);
  }
  return out;
}

}  // namespace

EnsembleSample sample_initial(const WavefunctionModel& model, std::size_t count,
                              std::uint64_t seed, const SamplingOptions& options) {
  require(count >= 1, ErrorCode::InvalidArgument, "sample count must be >= 1");
  if (model.dim() == 1) return sample_inverse_cdf(model, count, seed, options.time);
  const auto env = model.envelope();
  if (env && options.time == 0.0) return sample_rejection(model, *env, count, seed);
  return sample_metropolis(model, count, seed, options);
}

}  // namespace bohm
