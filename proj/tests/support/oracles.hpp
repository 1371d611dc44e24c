#pragma once

// Independent closed forms and brute-force quadratures used as test oracles.
// Nothing here calls into the library's numerics.

#include "bohm/wavefunction.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

using bohm::Complex;
using std::numbers::pi;
inline const Complex I{0.0, 1.0};

/// Oscillator eigenfunctions from explicit Hermite polynomials, k <= 4.
inline double hermite_phi(int k, double q) {
  double h = 0.0;
  switch (k) {
    case 0: h = 1.0; break;
    case 1: h = 2.0 * q; break;
    case 2: h = 4.0 * q * q - 2.0; break;
    case 3: h = 8.0 * q * q * q - 12.0 * q; break;
    case 4: h = 16.0 * q * q * q * q - 48.0 * q * q + 12.0; break;
    default: return std::nan("");
  }
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return h * std::exp(-0.5 * q * q) / std::sqrt(std::pow(2.0, k) * fact * std::sqrt(pi));
}

/// The ground plus second excited state, written out and normalized by hand:
/// ||e^{-q^2/2}(1 + (1 - 2q^2) e^{-2it})||^2 = 3 sqrt(pi).
inline Complex superposition_state(double q, double t) {
  return std::pow(pi, -0.25) / std::sqrt(3.0) * std::exp(-0.5 * q * q) * std::exp(-0.5 * I * t) *
         (1.0 + (1.0 - 2.0 * q * q) * std::exp(-2.0 * I * t));
}

/// Textbook free packet, hbar = m = 1.
inline Complex free_gaussian_1d(double x, double t, double sigma0, double x0, double p) {
  const Complex s = 1.0 + I * t / (sigma0 * sigma0);
  const double xi = x - x0 - p * t;
  return std::pow(pi * sigma0 * sigma0, -0.25) / std::sqrt(s) *
         std::exp(-xi * xi / (2.0 * sigma0 * sigma0 * s) + I * p * (x - x0) - 0.5 * I * p * p * t);
}

/// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Brute-force KS distance: the empirical CDF of sorted `x` against `cdf`.
inline double ks_bruteforce(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  double d = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(i / n - f));
  }
  return d;
}

/// psi = c(t) g(q) [(q - 1)^2 + i h t], g = pi^{-1/4} e^{-q^2/2}: a double zero at
/// (1, 0) that the flow leaves like |s|^{2/5}. Not a Schroedinger solution.
class DoubleZeroModel final : public bohm::WavefunctionModel {
 public:
  explicit DoubleZeroModel(double h = 1.0) : h_(h) {}
  std::size_t dim() const override { return 1; }
  std::string family() const override { return "test_double_zero"; }
  bohm::WavefieldSample evaluate(std::span<const double> qs, double t) const override {
    const double q = qs[0];
    // int g^2 (q-1)^4 = E[(q-1)^4] for q ~ N(0, 1/2) = 3/4 + 3 + 1.
    const double A = 4.75;
    const double c = 1.0 / std::sqrt(A + h_ * h_ * t * t);
    const double dc = -h_ * h_ * t * c * c * c;
    const double g = std::pow(pi, -0.25) * std::exp(-0.5 * q * q);
    const Complex w{(q - 1.0) * (q - 1.0), h_ * t};
    bohm::WavefieldSample s;
    s.psi = c * g * w;
    s.grad.push_back(c * g * (-q * w + 2.0 * (q - 1.0)));
    s.dpsi_dt = dc * g * w + c * g * I * h_;
    s.abs2 = std::norm(s.psi);
    return s;
  }
  bohm::Box mass_box(double) const override { return bohm::Box{{-9.0}, {9.0}}; }

 private:
  double h_;
};

/// Static psi = (x + i y^2) e^{-r^2/2}; j = e^{-r^2}(-y^2, 2xy, 0) and the flux through
/// the sphere |q| = delta over (0, T) is T (pi/2) delta^4 e^{-delta^2}.
class QuadraticVanishing3D final : public bohm::WavefunctionModel {
 public:
  std::size_t dim() const override { return 3; }
  std::string family() const override { return "test_quadratic_vanishing"; }
  bohm::WavefieldSample evaluate(std::span<const double> q, double) const override {
    const double x = q[0], y = q[1], z = q[2];
    const double e = std::exp(-0.5 * (x * x + y * y + z * z));
    const Complex w{x, y * y};
    bohm::WavefieldSample s;
    s.psi = w * e;
    s.grad.push_back((1.0 - x * w) * e);
    s.grad.push_back((2.0 * I * y - y * w) * e);
    s.grad.push_back(-z * w * e);
    s.dpsi_dt = 0.0;
    s.abs2 = std::norm(s.psi);
    return s;
  }
  bohm::Box mass_box(double) const override { return bohm::Box{{-9, -9, -9}, {9, 9, 9}}; }
};

inline double quadratic_vanishing_flux(double delta, double T) {
  return T * pi / 2.0 * std::pow(delta, 4) * std::exp(-delta * delta);
}

/// Rigid translation psi = f(q - c t) e^{i c.q} with f a unit Gaussian of width s:
/// v = c everywhere (hbar = m = 1). Not a Schroedinger solution.
class UniformMotion final : public bohm::WavefunctionModel {
 public:
  UniformMotion(bohm::RealVec c, bohm::RealVec center, double s) : c_(c), center_(center), s_(s) {}
  std::size_t dim() const override { return c_.size(); }
  std::string family() const override { return "test_uniform_motion"; }
  bohm::WavefieldSample evaluate(std::span<const double> q, double t) const override {
    double r2 = 0.0, phase = 0.0;
    std::vector<double> xi(dim());
    for (std::size_t a = 0; a < dim(); ++a) {
      xi[a] = q[a] - center_[a] - c_[a] * t;
      r2 += xi[a] * xi[a];
      phase += c_[a] * q[a];
    }
    const double norm = std::pow(pi * s_ * s_, -0.25 * static_cast<double>(dim()));
    bohm::WavefieldSample out;
    out.psi = norm * std::exp(-r2 / (2.0 * s_ * s_)) * std::exp(I * phase);
    Complex dt{};
    for (std::size_t a = 0; a < dim(); ++a) {
      out.grad.push_back(out.psi * (-xi[a] / (s_ * s_) + I * c_[a]));
      dt += out.psi * xi[a] * c_[a] / (s_ * s_);
    }
    out.dpsi_dt = dt;
    out.abs2 = std::norm(out.psi);
    return out;
  }
  bohm::Box mass_box(double t) const override {
    bohm::Box b;
    for (std::size_t a = 0; a < dim(); ++a) {
      b.lo.push_back(center_[a] + c_[a] * t - 10.0 * s_);
      b.hi.push_back(center_[a] + c_[a] * t + 10.0 * s_);
    }
    return b;
  }
  std::optional<bohm::GaussianEnvelope> envelope() const override {
    return bohm::GaussianEnvelope{center_, s_ / std::sqrt(2.0), 1.0};
  }

 private:
  bohm::RealVec c_;
  bohm::RealVec center_;
  double s_;
};

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
