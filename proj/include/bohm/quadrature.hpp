#pragma once

#include "bohm/core.hpp"

#include <functional>
#include <vector>

namespace bohm {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule; safe to call from several threads.
const GaussRule& gauss_legendre(std::size_t points);

/// Composite rule: `panels` equal panels on [a, b], `points` Gauss nodes each.
void composite_gauss(double a, double b, std::size_t panels, std::size_t points,
                     std::vector<double>& x, std::vector<double>& w);

/// Adaptive Gauss-Kronrod (15-point) integration to the requested absolute error.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double* error_estimate = nullptr);

/// Axis-aligned box in R^d.
struct Box {
  RealVec lo;
  RealVec hi;

  std::size_t dim() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> q) const;
};

/// Visits every node of a tensor-product composite Gauss rule over `box`.
void for_each_box_node(const Box& box, std::size_t panels, std::size_t points,
                       const std::function<void(std::span<const double>, double)>& visit);

}  // namespace bohm
