#pragma once

// Guidance-equation integrator with stopping events (the killed process) and
// seeded ensembles.

#include "bohm/domain.hpp"
#include "bohm/wavefunction.hpp"

#include <string>
#include <vector>

namespace bohm {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.05;
  double initial_step = 1e-3;
  double min_step = 1e-14;
  double event_tol = 1e-9;
  std::size_t max_event_iters = 200;
  std::size_t max_steps = 2'000'000;
  /// Keep per-step dense-output coefficients (needed for crossing counts).
  bool store_dense = true;
  /// Keep every accepted step as a sample; otherwise only the end points.
  bool store_samples = true;
  /// Positions recorded exactly (from dense output) at these times while alive.
  std::vector<double> output_times;

  void validate() const;
};

enum class StopCause { Horizon, Node, Singular, Ball };

std::string_view to_string(StopCause c);

enum class PathStatus { Ok, StepSizeUnderflow, MaxSteps, NumericalError };

std::string_view to_string(PathStatus s);

/// One trajectory of the stopped process. After stop_time the path sits in the
/// cemetery state; positions are only defined on [t0, stop_time].
struct KilledPath {
  std::size_t id = 0;
  std::size_t dim = 0;
  RealVec q0;
  double t0 = 0.0;
  double stop_time = 0.0;
  StopCause cause = StopCause::Horizon;
  PathStatus status = PathStatus::Ok;
  std::string message;
  bool immediately_killed = false;  // q0 was not Interior
  bool escalated = false;           // node stop forced by a velocity evaluation at a node

  std::vector<double> times;   // sample times, strictly increasing
  std::vector<double> coords;  // dim values per sample
  std::vector<double> step_t0;
  std::vector<double> step_h;
  std::vector<double> dense;   // 5 * dim coefficients per accepted step
  std::vector<double> outputs; // dim values per requested output time, NaN once dead

  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t evaluations = 0;

  bool failed() const { return status != PathStatus::Ok; }
  std::size_t sample_count() const { return times.size(); }
  RealVec sample(std::size_t i) const;
  RealVec terminal() const { return sample(times.size() - 1); }
  bool has_dense() const { return !step_t0.empty(); }
  /// Alive at t: before the stop time, or at the horizon for paths that reached it.
  bool alive_at(double t) const;
  /// Position at t in [t0, stop_time] from dense output (linear between samples otherwise).
  RealVec position_at(double t) const;
  /// Requested output position k (see IntegratorConfig::output_times).
  RealVec output(std::size_t k) const;
};

/// Integrates dQ/dt = v(Q, t) from (q0, t0) to the first contact with N^eps, S^delta,
/// the complement of K^n, or the horizon T = regions.horizon.
KilledPath integrate(const WavefunctionModel& model, const PhysicalParams& params,
                     const DomainSpec& spec, const StoppingRegions& regions,
                     std::span<const double> q0, double t0, const IntegratorConfig& config);

/// One path per configuration, computed on `threads` workers; the result does not
/// depend on the worker count. Per-path failures are recorded, never thrown.
std::vector<KilledPath> run_ensemble(const WavefunctionModel& model, const PhysicalParams& params,
                                     const DomainSpec& spec, const StoppingRegions& regions,
                                     const EnsembleSample& samples, const IntegratorConfig& config,
                                     std::size_t threads = 1);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% interval for a binomial proportion: Wilson score, or [0, 3/n] when k = 0.
Interval proportion_interval(std::size_t k, std::size_t n);

struct StoppingStatistics {
  std::size_t count = 0;
  std::size_t horizon = 0;
  std::size_t node = 0;
  std::size_t singular = 0;
  std::size_t ball = 0;
  std::size_t failed = 0;       // integration failures, counted as stopped
  std::size_t immediate = 0;    // killed at t0 (subset of the stop causes above)
  double p_hat = 0.0;           // P(tau < T), failures included
  double sigma_hat = 0.0;       // binomial standard error of p_hat
  Interval interval;
  double p_dynamic = 0.0;       // stops after t0 only
  Interval dynamic_interval;
  double immediate_fraction = 0.0;
  Interval immediate_interval;
};

/// Throws EmptyEnsemble for an empty path list.
StoppingStatistics stopping_statistics(const std::vector<KilledPath>& paths);

}  // namespace bohm
