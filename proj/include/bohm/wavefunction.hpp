#pragma once

// Wavefunction models: psi, its spatial gradient and time derivative, plus the
// Bohmian fields derived from them (velocity, current) and initial sampling.

#include "bohm/core.hpp"
#include "bohm/domain.hpp"
#include "bohm/quadrature.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bohm {

struct WavefieldSample {
  Complex psi{};
  ComplexVec grad;
  Complex dpsi_dt{};
  double abs2 = 0.0;
};

/// Normal density N(center, sigma^2 I) together with a constant `bound` such that
/// |psi_0|^2 <= bound * N everywhere (rejection-sampling envelope).
struct GaussianEnvelope {
  RealVec center;
  double sigma = 1.0;
  double bound = 1.0;
};

enum class SamplingMethod { InverseCdf, Rejection, Metropolis };

std::string_view to_string(SamplingMethod m);

class WavefunctionModel {
 public:
  virtual ~WavefunctionModel() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string family() const = 0;
  virtual WavefieldSample evaluate(std::span<const double> q, double t) const = 0;

  /// Box carrying all but a negligible (< 1e-14) part of |psi_t|^2.
  virtual Box mass_box(double t) const = 0;
  virtual bool periodic() const { return false; }
  /// Multiplicative constant applied to the stored state so that ||psi_0|| = 1.
  virtual double norm_constant() const { return 1.0; }
  virtual std::optional<GaussianEnvelope> envelope() const { return std::nullopt; }
  /// Potential V(q) of the Hamiltonian the model evolves under, when known.
  virtual std::optional<double> potential(std::span<const double> /*q*/) const {
    return std::nullopt;
  }

  SamplingMethod sampling_method() const;
};

using ModelPtr = std::shared_ptr<const WavefunctionModel>;

/// Superposition of 1D harmonic-oscillator eigenstates (hbar = m = omega = 1).
class HermiteSuperposition1D final : public WavefunctionModel {
 public:
  /// Coefficients multiply the normalized eigenfunctions phi_k. The state is
  /// normalized by quadrature of |psi_0|^2; the applied factor is norm_constant().
  explicit HermiteSuperposition1D(std::vector<Complex> coefficients);

  /// e^{-q^2/2} e^{-it/2} [1 + (1 - 2q^2) e^{-2it}], ground plus second excited state.
  static std::shared_ptr<HermiteSuperposition1D> ground_plus_second();

  std::size_t dim() const override { return 1; }
  std::string family() const override { return "hermite_superposition_1d"; }
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double t) const override;
  double norm_constant() const override { return norm_constant_; }
  std::optional<double> potential(std::span<const double> q) const override {
    return 0.5 * q[0] * q[0];
  }

  const std::vector<Complex>& coefficients() const { return coefficients_; }

 private:
  std::vector<Complex> coefficients_;  // normalized
  double norm_constant_ = 1.0;
};

/// Normalized 1D oscillator eigenfunctions phi_0..phi_{count-1} and derivatives at q.
void hermite_functions(double q, std::size_t count, std::vector<double>& phi,
                       std::vector<double>& dphi);

/// Free Gaussian packet, psi_0 ~ exp(-(q-c)^2 / (2 sigma0^2) + i p.(q-c)/hbar) per axis.
class FreeGaussianPacket final : public WavefunctionModel {
 public:
  FreeGaussianPacket(PhysicalParams params, double sigma0, RealVec center, RealVec momentum);

  std::size_t dim() const override { return center_.size(); }
  std::string family() const override { return "free_gaussian"; }
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double t) const override;
  std::optional<GaussianEnvelope> envelope() const override;
  std::optional<double> potential(std::span<const double>) const override { return 0.0; }

  double sigma0() const { return sigma0_; }
  const RealVec& center() const { return center_; }
  const RealVec& momentum() const { return momentum_; }
  /// Standard deviation of |psi_t|^2 along `axis`.
  double spread(std::size_t axis, double t) const;

 private:
  PhysicalParams params_;
  double sigma0_;
  RealVec center_;
  RealVec momentum_;
};

/// Weighted sum of free Gaussian packets whose parameters describe the state at
/// time t_ref (so the packets may be run backwards for t < t_ref). Normalized by
/// quadrature over the mass box at t = 0.
class FreeGaussianSum final : public WavefunctionModel {
 public:
  struct Component {
    Complex weight{1.0, 0.0};
    double sigma0 = 1.0;
    RealVec center;
    RealVec momentum;
  };

  FreeGaussianSum(PhysicalParams params, std::vector<Component> components, double t_ref = 0.0);

  std::size_t dim() const override { return params_.dim(); }
  std::string family() const override { return "free_gaussian_sum"; }
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double t) const override;
  double norm_constant() const override { return norm_constant_; }
  std::optional<double> potential(std::span<const double>) const override { return 0.0; }

  double t_ref() const { return t_ref_; }

 private:
  PhysicalParams params_;
  std::vector<Component> components_;
  std::vector<FreeGaussianPacket> packets_;
  double t_ref_;
  double norm_constant_ = 1.0;
};

/// 3D oscillator state r e^{-(r^2+z^2)/2} e^{i phi} e^{-5it/2} (cylindrical r), normalized.
class CylindricalHO3D final : public WavefunctionModel {
 public:
  std::size_t dim() const override { return 3; }
  std::string family() const override { return "cylindrical_ho_3d"; }
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double t) const override;
  std::optional<GaussianEnvelope> envelope() const override;
  std::optional<double> potential(std::span<const double> q) const override {
    return 0.5 * (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
  }
};

/// Free motion on the circle (0,1): sum_k c_k e^{2 pi i k q} e^{-i E_k t / hbar}.
class PlaneWaveCircle final : public WavefunctionModel {
 public:
  /// Modes (k, c_k); coefficients are rescaled so that sum |c_k|^2 = 1.
  PlaneWaveCircle(std::vector<std::pair<int, Complex>> modes, double hbar = 1.0,
                  double mass = 1.0);

  std::size_t dim() const override { return 1; }
  std::string family() const override { return "plane_wave_circle"; }
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double) const override;
  bool periodic() const override { return true; }
  double norm_constant() const override { return norm_constant_; }
  std::optional<double> potential(std::span<const double>) const override { return 0.0; }

  double energy(int k) const;
  const std::vector<std::pair<int, Complex>>& modes() const { return modes_; }

 private:
  std::vector<std::pair<int, Complex>> modes_;
  double hbar_;
  double mass_;
  double norm_constant_ = 1.0;
};

/// Node floor below which the velocity field is treated as undefined.
inline constexpr double kNodeFloor = 1e-300;

/// v_k = (hbar/m_k) Im(grad_k psi / psi). Throws NodeEvaluation if |psi|^2 <= kNodeFloor.
RealVec velocity(const WavefieldSample& sample, const PhysicalParams& params);

struct Current {
  RealVec j;        // spatial current
  RealVec spacetime;  // (j, |psi|^2)
};

/// j_k = (hbar/m_k) Im(conj(psi) grad_k psi); defined at nodes as well.
Current current(const WavefieldSample& sample, const PhysicalParams& params);

/// i hbar d/dt psi - H psi with H psi obtained from centred second differences of
/// the model's own gradient; used to verify analytic families.
Complex schrodinger_residual(const WavefunctionModel& model, const PhysicalParams& params,
                             std::span<const double> q, double t, double h = 1e-5);

struct EnsembleSample {
  std::vector<RealVec> configurations;
  std::uint64_t seed = 0;
  SamplingMethod method = SamplingMethod::InverseCdf;
};

struct SamplingOptions {
  double time = 0.0;
  std::size_t metropolis_burn_in = 2000;
  std::size_t metropolis_thinning = 20;
  double metropolis_step = 0.5;
};

/// i.i.d. draws from |psi_t|^2 (t = options.time, default 0). Deterministic given seed.
EnsembleSample sample_initial(const WavefunctionModel& model, std::size_t count,
                              std::uint64_t seed, const SamplingOptions& options = {});

}  // namespace bohm
