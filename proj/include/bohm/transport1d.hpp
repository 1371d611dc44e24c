#pragma once

// One-dimensional transport by the cumulative distribution of |psi_t|^2:
// Q_t(q0) = min{q : F(q,t) = F(q0,0)}, its circle variant with boundary
// jumps, and local scaling fits near nodes.

#include "bohm/domain.hpp"
#include "bohm/wavefunction.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace bohm {

/// Monotone table of F(q,t) = int_lo^q |psi_t|^2, exact between nodes up to
/// the per-cell Gauss rule.
class CdfTable {
 public:
  /// Points with keep(q) == false contribute no mass (survivor conditioning).
  static CdfTable build(const WavefunctionModel& model, double t, std::size_t cells = 2048,
                        std::optional<std::pair<double, double>> range = std::nullopt,
                        std::function<bool(double)> keep = {});

  double time() const { return t_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double lower() const { return grid_.front(); }
  double upper() const { return grid_.back(); }
  /// Mass carried by the table (1 for a normalized unmasked state).
  double total() const { return values_.back(); }
  const std::vector<std::pair<double, double>>& plateaus() const { return plateaus_; }

  /// F(q); 0 left of the table, total() right of it.
  double operator()(double q) const;
  /// |psi_t(q)|^2 with the mask applied.
  double density(double q) const;
  /// Smallest q with F(q) = level. Throws LevelOutOfRange unless 0 <= level <= total().
  double leftmost_position(double level) const;

 private:
  double cell_mass(std::size_t cell, double to) const;

  const WavefunctionModel* model_ = nullptr;
  double t_ = 0.0;
  std::function<bool(double)> keep_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<std::pair<double, double>> plateaus_;
};

/// Adaptive quadrature of |psi_t|^2 from the left end of the mass box to q (abs. error <= 1e-12).
double cdf(const WavefunctionModel& model, double q, double t);

/// Q_t(q0) from precomputed tables at times 0 and t. Returns -inf / +inf when the
/// level F(q0,0) is 0 / 1.
double transport_map(const CdfTable& initial, const CdfTable& current, double q0);

/// Convenience overload that builds both tables.
double transport_map(const WavefunctionModel& model, double q0, double t);

/// A(t) = int_0^t j_s(lo) ds, the current through the circle's base point.
double boundary_current_integral(const WavefunctionModel& model, const PhysicalParams& params,
                                 double t);

struct CirclePosition {
  double q = 0.0;      // position in [lo, hi)
  double level = 0.0;  // F(q0,0) + A(t), not reduced
  long winding = 0;    // floor(level): net number of wraps through the base point
};

/// Position on the periodic interval following the level F(q0,0) + A(t) (mod 1).
CirclePosition circle_transport(const WavefunctionModel& model, const PhysicalParams& params,
                                double q0, double t);

/// Same, reusing tables: `initial` at time 0 and `current` at time t, with A(t) supplied.
CirclePosition circle_transport(const CdfTable& initial, const CdfTable& current, double q0,
                                double boundary_integral);

struct NodePoint {
  double q = 0.0;
  double t = 0.0;
};

struct ScalingWindow {
  double s_min = 1e-4;
  double s_max = 1e-2;
  std::size_t points = 16;
};

struct ScalingFit {
  double exponent = 0.0;
  double expected = 0.0;             // 2 / (2k + 1)
  double prefactor = 0.0;            // C in |Q - q*| ~ C s^exponent (free fit)
  double prefactor_fixed = 0.0;      // C with the exponent pinned to `expected`
  bool not_a_node = false;
  std::vector<double> s;
  std::vector<double> displacement;  // Q_{t*+s}(q*) - q*
};

/// Log-log fit of |Q_{t*+s}(q*) - q*| against s over a geometric window.
/// Throws DegenerateWindow if fewer than 8 points are usable.
ScalingFit node_scaling_fit(const WavefunctionModel& model, NodePoint node, int order,
                            const ScalingWindow& window = {});

}  // namespace bohm
