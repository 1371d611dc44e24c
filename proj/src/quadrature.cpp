#include "bohm/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <mutex>

namespace bohm {

namespace {

GaussRule make_rule(std::size_t n) {
  GaussRule rule;
  const auto positive = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
  std::vector<double> x;
  for (double z : positive) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(n), z);
    rule.nodes.push_back(z);
    rule.weights.push_back(2.0 / ((1.0 - z * z) * dp * dp));
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(std::size_t points) {
  require(points >= 1, ErrorCode::InvalidArgument, "Gauss rule needs at least one point");
  static std::mutex mutex;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, make_rule(points)).first;
  return it->second;
}

void composite_gauss(double a, double b, std::size_t panels, std::size_t points,
                     std::vector<double>& x, std::vector<double>& w) {
  const auto& rule = gauss_legendre(points);
  x.clear();
  w.clear();
  x.reserve(panels * points);
  w.reserve(panels * points);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double left = a + h * static_cast<double>(p);
    for (std::size_t i = 0; i < points; ++i) {
      x.push_back(left + 0.5 * h * (rule.nodes[i] + 1.0));
      w.push_back(0.5 * h * rule.weights[i]);
    }
  }
}

namespace {

double adaptive_gk(const std::function<double(double)>& f, double a, double b, double tol,
                   int depth, double& err_total) {
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || depth >= 40) {
    err_total += err;
    return value;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_gk(f, a, mid, 0.5 * tol, depth + 1, err_total) +
         adaptive_gk(f, mid, b, 0.5 * tol, depth + 1, err_total);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double* error_estimate) {
  double err = 0.0;
  const double value = a == b ? 0.0 : adaptive_gk(f, a, b, abs_tol, 0, err);
  if (error_estimate) *error_estimate = err;
  return value;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

bool Box::contains(std::span<const double> q) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (q[i] < lo[i] || q[i] > hi[i]) return false;
  }
  return true;
}

void for_each_box_node(const Box& box, std::size_t panels, std::size_t points,
                       const std::function<void(std::span<const double>, double)>& visit) {
  const std::size_t d = box.dim();
  std::vector<std::vector<double>> xs(d), ws(d);
  for (std::size_t i = 0; i < d; ++i) composite_gauss(box.lo[i], box.hi[i], panels, points, xs[i], ws[i]);
  const std::size_t per_axis = panels * points;
  std::vector<std::size_t> idx(d, 0);
  RealVec q(d, 0.0);
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      q[i] = xs[i][idx[i]];
      w *= ws[i][idx[i]];
    }
    visit(view(q), w);
    std::size_t axis = 0;
    while (axis < d && ++idx[axis] == per_axis) idx[axis++] = 0;
    if (axis == d) break;
  }
}

}  // namespace bohm
