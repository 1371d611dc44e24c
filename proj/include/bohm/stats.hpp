#pragma once

// Equivariance tests, the log-|psi| entropy functional and its bound, and the
// combined global-existence table.

#include "bohm/domain.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/wavefunction.hpp"

#include <optional>
#include <vector>

namespace bohm {

/// DKW 95% band plus a 0.005 allowance for the reference CDF.
double ks_threshold(std::size_t n);
/// Two-sample analogue for sizes n and m.
double ks_threshold(std::size_t n, std::size_t m);

/// Exact one-sample KS statistic of `x` (any order) against a continuous CDF.
double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf);
/// Two-sample KS statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

struct EquivarianceReport {
  double t = 0.0;
  double ks = 0.0;
  double l1 = 0.0;
  std::size_t samples = 0;          // alive paths used
  std::size_t total = 0;            // all paths
  double killed_fraction = 0.0;
  double ks_threshold = 0.0;
  double l1_reference = 0.0;        // expected L1 from sampling noise alone
  std::vector<double> marginal_ks;  // d >= 2
  bool pass = false;
};

struct EquivarianceOptions {
  /// When set, the reference density is |psi_t|^2 restricted to the surviving set
  /// (Interior points of these regions at time t) and renormalized.
  std::optional<DomainSpec> spec;
  std::optional<StoppingRegions> regions;
  std::optional<PhysicalParams> params;
  std::size_t bins = 40;
  std::size_t reference_samples = 20000;  // d >= 2
  std::uint64_t seed = 0;                 // d >= 2 reference draws
};

/// Compares positions of the alive paths at time t with |psi_t|^2. Throws TooFewAlive
/// below 100 alive paths.
EquivarianceReport equivariance_test(const std::vector<RealVec>& alive, std::size_t total,
                                     const WavefunctionModel& model, double t,
                                     const EquivarianceOptions& options = {});

/// Convenience: positions from paths alive at t (dense output or stored samples).
EquivarianceReport equivariance_test(const std::vector<KilledPath>& paths,
                                     const WavefunctionModel& model, double t,
                                     const EquivarianceOptions& options = {});

struct EntropyReport {
  double mean_abs = 0.0;  // empirical E|D|
  double std_error = 0.0;
  double max_abs = 0.0;
  double bound = 0.0;     // time-derivative term + mu * gradient term
  double time_term = 0.0;
  double gradient_term = 0.0;
  std::size_t paths = 0;
  std::size_t skipped = 0;  // failed paths
  bool pass = false;        // mean - 3 se <= bound
};

struct EntropyQuadrature {
  std::size_t space_panels = 64;
  std::size_t time_panels = 64;
  std::size_t points = 8;
};

/// D = log|psi(Q_s, s)| - log|psi_0(q0)| with s = min(tau, T).
EntropyReport entropy_functional(const std::vector<KilledPath>& paths,
                                 const WavefunctionModel& model, const PhysicalParams& params,
                                 double T, const EntropyQuadrature& quad = {});

/// |psi_0|^2-mass of the initial non-Interior set, by tensor Gauss quadrature over
/// the model's mass box.
double initial_killed_mass(const WavefunctionModel& model, const PhysicalParams& params,
                           const DomainSpec& spec, const StoppingRegions& regions,
                           std::size_t panels = 256);

struct BoundTerms {
  double epsilon = 0.0;
  std::vector<double> delta;
  double n = 0.0;
  double horizon = 0.0;
  double initial_mass = 0.0;  // P(G0 \ G0^{eps delta n})
  double nodal = 0.0;         // N(eps, delta, n)
  double singular = 0.0;      // S(delta)
  double infinity = 0.0;      // I(n)
};

struct ExistenceRow {
  StoppingRegions regions;
  StoppingStatistics stats;
  BoundTerms terms;
  double sum = 0.0;
  double margin = 0.0;  // sum - (p_hat - 3 sigma)
  bool pass = false;
};

struct ExistenceReport {
  std::vector<ExistenceRow> rows;
  bool all_pass = false;
  bool sum_decreasing = false;
};

/// One row per (regions, statistics, bounds) triple. Throws MismatchedParameters when
/// the ensemble's (eps, delta, n, T) disagree with the bound terms.
ExistenceReport global_existence_report(const std::vector<StoppingRegions>& regions,
                                        const std::vector<StoppingStatistics>& stats,
                                        const std::vector<BoundTerms>& bounds);

}  // namespace bohm
