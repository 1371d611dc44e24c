#include "bohm/flux.hpp"

#include <numbers>

namespace bohm {

SampledField SampledField::from_model(const WavefunctionModel& model, double t, const Box& box,
                                      std::vector<std::size_t> points) {
  const std::size_t d = model.dim();
  require(box.dim() == d && points.size() == d, ErrorCode::InvalidArgument,
          "sampling box and point counts must match the model dimension");
  SampledField field;
  field.lo = box.lo;
  field.hi = box.hi;
  field.points = std::move(points);
  std::size_t total = 1;
  for (auto n : field.points) {
    require(n >= 2, ErrorCode::InvalidArgument, "need at least two points per axis");
    total *= n;
  }
  field.psi.resize(total);
  field.grad.resize(total);
  std::vector<std::size_t> idx(d, 0);
  RealVec q(d, 0.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t a = 0; a < d; ++a) {
      q[a] = field.lo[a] + (static_cast<double>(idx[a]) + 0.5) * field.spacing(a);
    }
    const WavefieldSample s = model.evaluate(view(q), t);
    field.psi[flat] = s.psi;
    field.grad[flat] = s.grad;
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < field.points[a]) break;
      idx[a] = 0;
    }
  }
  return field;
}

void SampledField::scale(Complex c) {
  for (auto& z : psi) z *= c;
  for (auto& g : grad) {
    for (auto& z : g) z *= c;
  }
}

HardyResult hardy_check(const SampledField& field, const SingularHyperplane& plane) {
  const std::size_t d = field.points.size();
  require(d >= 3 && plane.dim() == d, ErrorCode::InvalidArgument,
          "Hardy check needs d >= 3 and a matching hyperplane");
  double w = 1.0;
  double h = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    w *= field.spacing(a);
    h = std::max(h, field.spacing(a));
  }
  HardyResult out;
  double shell_sup = 0.0;
  double shell_volume = 0.0;
  std::vector<std::size_t> idx(d, 0);
  RealVec q(d, 0.0);
  for (std::size_t flat = 0; flat < field.psi.size(); ++flat) {
    for (std::size_t a = 0; a < d; ++a) {
      q[a] = field.lo[a] + (static_cast<double>(idx[a]) + 0.5) * field.spacing(a);
    }
    const double rho = std::norm(field.psi[flat]);
    double g2 = 0.0;
    for (const auto& z : field.grad[flat]) g2 += std::norm(z);
    out.rhs += w * g2;
    const double r = plane.distance(view(q));
    if (r < h) {
      ++out.excluded;
      shell_sup = std::max(shell_sup, rho);
      shell_volume += w;
    } else {
      out.lhs += w * rho / (4.0 * r * r);
    }
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < field.points[a]) break;
      idx[a] = 0;
    }
  }
  // int_{|y|<h} 1/(4|y|^2) dy over the 3 normal directions is pi h; the remaining
  // d - 3 directions contribute the hyperplane's measure inside the box.
  double transverse = 1.0;
  if (d > 3) transverse = shell_volume / (4.0 / 3.0 * std::numbers::pi * h * h * h);
  out.shell_bound = std::numbers::pi * h * shell_sup * transverse;
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-6);
  if (out.shell_bound > 0.05 * out.lhs) {
    fail(ErrorCode::GridTooCoarse,
         "excluded shell may carry " + std::to_string(out.shell_bound) + " against lhs " +
             std::to_string(out.lhs) + "; refine the grid");
  }
  return out;
}

}  // namespace bohm
