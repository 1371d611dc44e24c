#include "bohm/transport1d.hpp"

#include <algorithm>
#include <limits>

namespace bohm {

namespace {

constexpr std::size_t kCellPoints = 10;
constexpr double kPlateauDensity = 1e-14;

double density_at(const WavefunctionModel& model, double q, double t) {
  const double x[1] = {q};
  return model.evaluate(x, t).abs2;
}

std::pair<double, double> default_range(const WavefunctionModel& model, double t) {
  const Box box = model.mass_box(t);
  return {box.lo[0], box.hi[0]};
}

}  // namespace

CdfTable CdfTable::build(const WavefunctionModel& model, double t, std::size_t cells,
                         std::optional<std::pair<double, double>> range,
                         std::function<bool(double)> keep) {
  require(model.dim() == 1, ErrorCode::InvalidArgument, "CdfTable needs a 1D model");
  require(cells >= 8, ErrorCode::InvalidArgument, "CdfTable needs at least 8 cells");
  const auto [lo, hi] = range ? *range : default_range(model, t);
  require(hi > lo, ErrorCode::InvalidArgument, "empty CdfTable range");

  CdfTable table;
  table.model_ = &model;
  table.t_ = t;
  table.keep_ = std::move(keep);
  table.grid_.resize(cells + 1);
  table.values_.assign(cells + 1, 0.0);
  const double h = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i <= cells; ++i) table.grid_[i] = lo + h * static_cast<double>(i);
  table.grid_.back() = hi;

  const auto& rule = gauss_legendre(kCellPoints);
  std::optional<double> plateau_start;
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = table.grid_[c];
    const double b = table.grid_[c + 1];
    double mass = 0.0;
    double peak = 0.0;
    for (std::size_t k = 0; k < kCellPoints; ++k) {
      const double x = a + 0.5 * (b - a) * (rule.nodes[k] + 1.0);
      const double rho = table.density(x);
      peak = std::max(peak, rho);
      mass += 0.5 * (b - a) * rule.weights[k] * rho;
    }
    table.values_[c + 1] = table.values_[c] + mass;
    if (peak < kPlateauDensity) {
      if (!plateau_start) plateau_start = a;
    } else if (plateau_start) {
      table.plateaus_.emplace_back(*plateau_start, a);
      plateau_start.reset();
    }
  }
  if (plateau_start) table.plateaus_.emplace_back(*plateau_start, hi);
  return table;
}

double CdfTable::density(double q) const {
  if (keep_ && !keep_(q)) return 0.0;
  return density_at(*model_, q, t_);
}

double CdfTable::cell_mass(std::size_t cell, double to) const {
  const double a = grid_[cell];
  if (to <= a) return 0.0;
  const auto& rule = gauss_legendre(kCellPoints);
  double mass = 0.0;
  for (std::size_t k = 0; k < kCellPoints; ++k) {
    const double x = a + 0.5 * (to - a) * (rule.nodes[k] + 1.0);
    mass += 0.5 * (to - a) * rule.weights[k] * density(x);
  }
  return mass;
}

double CdfTable::operator()(double q) const {
  if (q <= grid_.front()) return 0.0;
  if (q >= grid_.back()) return values_.back();
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), q);
  const std::size_t cell = static_cast<std::size_t>(it - grid_.begin()) - 1;
  return values_[cell] + cell_mass(cell, q);
}

double CdfTable::leftmost_position(double level) const {
  const double slack = 1e-13;
  if (level < -slack || level > total() + slack) {
    fail(ErrorCode::LevelOutOfRange, "CDF level outside [0, total]");
  }
  level = std::clamp(level, 0.0, total());
  const auto it = std::lower_bound(values_.begin(), values_.end(), level);
  if (it == values_.begin()) return grid_.front();
  const std::size_t cell = static_cast<std::size_t>(it - values_.begin()) - 1;

  // f(a) < 0 <= f(b); shrinking the bracket onto {f >= 0} picks the leftmost root.
  double a = grid_[cell];
  double b = grid_[cell + 1];
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = values_[cell] + cell_mass(cell, x) - level;
    if (f >= 0.0) {
      b = x;
    } else {
      a = x;
    }
    const double rho = density(x);
    double next = rho > 0.0 ? x - f / rho : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || b - a <= 1e-15 * (1.0 + std::abs(a))) {
      return next;
    }
    x = next;
  }
  return 0.5 * (a + b);
}

double cdf(const WavefunctionModel& model, double q, double t) {
  require(model.dim() == 1, ErrorCode::InvalidArgument, "cdf needs a 1D model");
  const auto [lo, hi] = default_range(model, t);
  const double upper = std::min(q, hi);
  if (upper <= lo) return 0.0;
  return integrate_adaptive([&](double x) { return density_at(model, x, t); }, lo, upper, 1e-12);
}

double transport_map(const CdfTable& initial, const CdfTable& current, double q0) {
  const double level = initial(q0);
  if (level <= 0.0) return -std::numeric_limits<double>::infinity();
  if (level >= initial.total()) return std::numeric_limits<double>::infinity();
  return current.leftmost_position(std::min(level, current.total()));
}

double transport_map(const WavefunctionModel& model, double q0, double t) {
  const CdfTable initial = CdfTable::build(model, 0.0);
  if (t == 0.0) return transport_map(initial, initial, q0);
  const CdfTable current = CdfTable::build(model, t);
  return transport_map(initial, current, q0);
}

double boundary_current_integral(const WavefunctionModel& model, const PhysicalParams& params,
                                 double t) {
  require(model.dim() == 1, ErrorCode::InvalidArgument, "boundary current needs a 1D model");
  const double base[1] = {model.mass_box(0.0).lo[0]};
  auto j = [&](double s) { return current(model.evaluate(base, s), params).j[0]; };
  if (t == 0.0) return 0.0;
  return t > 0.0 ? integrate_adaptive(j, 0.0, t, 1e-12) : -integrate_adaptive(j, t, 0.0, 1e-12);
}

CirclePosition circle_transport(const CdfTable& initial, const CdfTable& current, double q0,
                                double boundary_integral) {
  CirclePosition out;
  out.level = initial(q0) + boundary_integral;
  out.winding = static_cast<long>(std::floor(out.level));
  const double fraction = out.level - static_cast<double>(out.winding);
  out.q = current.leftmost_position(std::min(fraction * current.total(), current.total()));
  if (out.q >= current.upper()) out.q = current.lower();
  return out;
}

CirclePosition circle_transport(const WavefunctionModel& model, const PhysicalParams& params,
                                double q0, double t) {
  require(model.periodic(), ErrorCode::InvalidArgument, "circle transport needs a periodic model");
  const CdfTable initial = CdfTable::build(model, 0.0);
  const CdfTable current = CdfTable::build(model, t);
  return circle_transport(initial, current, q0, boundary_current_integral(model, params, t));
}

namespace {

// Mass between q* and q* + x at time t.
double local_mass(const WavefunctionModel& model, double q, double x, double t) {
  const auto& rule = gauss_legendre(24);
  double mass = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double y = q + 0.5 * x * (rule.nodes[k] + 1.0);
    mass += 0.5 * x * rule.weights[k] * density_at(model, y, t);
  }
  return mass;
}

// F(q,t0) - F(q,t1), integrating the density difference to avoid cancellation.
double level_shift(const WavefunctionModel& model, double q, double t0, double t1) {
  const double lo = std::min(model.mass_box(t0).lo[0], model.mass_box(t1).lo[0]);
  if (q <= lo) return 0.0;
  std::vector<double> x, w;
  composite_gauss(lo, q, 512, 12, x, w);
  double shift = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    shift += w[i] * (density_at(model, x[i], t0) - density_at(model, x[i], t1));
  }
  return shift;
}

// Displacement x with int_q^{q+x} rho_t = shift.
double solve_displacement(const WavefunctionModel& model, double q, double t, double shift) {
  if (shift == 0.0) return 0.0;
  const double sign = shift > 0.0 ? 1.0 : -1.0;
  const double target = std::abs(shift);
  auto mass = [&](double x) { return sign * local_mass(model, q, sign * x, t); };
  double hi = 1e-12;
  while (mass(hi) < target) {
    hi *= 2.0;
    if (hi > 10.0) fail(ErrorCode::DegenerateWindow, "displacement not bracketed");
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < target ? lo : hi) = mid;
  }
  return sign * 0.5 * (lo + hi);
}

}  // namespace

ScalingFit node_scaling_fit(const WavefunctionModel& model, NodePoint node, int order,
                            const ScalingWindow& window) {
  require(model.dim() == 1, ErrorCode::InvalidArgument, "scaling fit needs a 1D model");
  require(order >= 1, ErrorCode::InvalidArgument, "node order must be >= 1");
  require(window.s_min > 0.0 && window.s_max > window.s_min && window.points >= 2,
          ErrorCode::DegenerateWindow, "scaling window must satisfy 0 < s_min < s_max");

  ScalingFit fit;
  fit.expected = 2.0 / (2.0 * order + 1.0);
  std::vector<double> ls, lx;
  for (std::size_t i = 0; i < window.points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(window.points - 1);
    const double s = window.s_min * std::pow(window.s_max / window.s_min, u);
    const double shift = level_shift(model, node.q, node.t, node.t + s);
    const double x = solve_displacement(model, node.q, node.t + s, shift);
    fit.s.push_back(s);
    fit.displacement.push_back(x);
    if (std::isfinite(x) && std::abs(x) > 0.0) {
      ls.push_back(std::log(s));
      lx.push_back(std::log(std::abs(x)));
    }
  }
  if (ls.size() < 8) fail(ErrorCode::DegenerateWindow, "fewer than 8 usable points in window");

  const double n = static_cast<double>(ls.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    sx += ls[i];
    sy += lx[i];
    sxx += ls[i] * ls[i];
    sxy += ls[i] * lx[i];
  }
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.prefactor = std::exp((sy - fit.exponent * sx) / n);
  double log_c = 0.0;
  for (std::size_t i = 0; i < ls.size(); ++i) log_c += lx[i] - fit.expected * ls[i];
  fit.prefactor_fixed = std::exp(log_c / n);

  const double at[1] = {node.q};
  const double psi_abs = std::abs(model.evaluate(at, node.t).psi);
  fit.not_a_node =
      psi_abs > 1e-8 || std::abs(fit.exponent - 1.0) < std::abs(fit.exponent - fit.expected);
  return fit;
}

}  // namespace bohm
