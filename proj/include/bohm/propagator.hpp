#pragma once

// Strang split-step Fourier solver for i hbar psi_t = (-sum hbar^2/(2 m_k) Laplace_k + V) psi
// on a tensor grid, frame storage, and a grid-backed wavefunction model.

#include "bohm/domain.hpp"
#include "bohm/wavefunction.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bohm {

/// Periodic: the box is a torus. Padded: the state must stay away from the box edge
/// (mass in the outer layer is monitored). Dirichlet: 1D half-line [lo, hi] with
/// psi(lo) = 0, realized by odd reflection about lo on a doubled periodic grid.
enum class GridBoundary { Periodic, Padded, Dirichlet };

std::string_view to_string(GridBoundary b);

struct GridSpec {
  RealVec lo;
  RealVec hi;
  std::vector<std::size_t> points;
  GridBoundary boundary = GridBoundary::Padded;
  double dt = 1e-3;
  std::size_t frame_stride = 10;

  std::size_t dim() const { return lo.size(); }
  std::size_t size() const;
  double spacing(std::size_t axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(points[axis]); }
  double cell_volume() const;
  /// Coordinate of grid index i along `axis`; nodes are lo + i * spacing, hi excluded.
  double coordinate(std::size_t axis, std::size_t i) const;
  /// Throws InvalidArgument unless every axis has >= 16 points and a nonempty range.
  void validate() const;
  /// The periodic grid the solver actually runs on (the doubled grid for Dirichlet).
  GridSpec computational() const;
};

struct GridState {
  double t = 0.0;
  std::vector<Complex> amplitudes;  // row-major over the computational grid, last axis fastest
  double norm = 1.0;
};

using Potential = std::function<double(std::span<const double>)>;

struct FrameStore;

class SplitStepPropagator {
 public:
  SplitStepPropagator(GridSpec grid, PhysicalParams params, Potential potential = {});
  ~SplitStepPropagator();
  SplitStepPropagator(const SplitStepPropagator&) = delete;
  SplitStepPropagator& operator=(const SplitStepPropagator&) = delete;

  const GridSpec& grid() const { return grid_; }
  const GridSpec& computational() const { return comp_; }
  const PhysicalParams& params() const { return params_; }

  /// Samples model(., t) on the computational grid (odd-extended for Dirichlet).
  GridState sample(const WavefunctionModel& model, double t = 0.0) const;

  /// One Strang step. Throws UnstableStep if the norm drifts by more than 1e-10.
  GridState step(const GridState& state, double dt) const;

  /// Runs to time T storing every frame_stride-th step (plus the final one).
  /// Padded grids abort with OutOfDomain once the edge layer holds more than 1e-6.
  FrameStore propagate(const GridState& initial, double T) const;

  /// d/dq_k psi for every axis by multiplication with i k in Fourier space.
  std::vector<std::vector<Complex>> gradient_spectral(const std::vector<Complex>& psi) const;
  /// psi_t = -(i/hbar) H psi, with the kinetic part applied spectrally.
  std::vector<Complex> time_derivative(const std::vector<Complex>& psi) const;

  double norm(const std::vector<Complex>& psi) const;
  /// (psi, H0 psi) and (psi, V psi).
  double kinetic_energy(const std::vector<Complex>& psi) const;
  double potential_energy(const std::vector<Complex>& psi) const;
  double energy(const std::vector<Complex>& psi) const {
    return kinetic_energy(psi) + potential_energy(psi);
  }
  /// ||grad psi||^2 = sum_k int |d_k psi|^2.
  double gradient_norm2(const std::vector<Complex>& psi) const;
  /// Fraction of |psi|^2 in the outer 5% of each axis.
  double edge_mass(const std::vector<Complex>& psi) const;

 private:
  struct Fft;
  void forward(std::vector<Complex>& data) const;
  void backward(std::vector<Complex>& data) const;  // normalized inverse
  double wavenumber(std::size_t axis, std::size_t i) const;

  GridSpec grid_;
  GridSpec comp_;
  PhysicalParams params_;
  Potential potential_;
  std::vector<double> v_values_;
  std::vector<double> kinetic_;  // sum_k hbar^2 k^2 / (2 m_k) per Fourier index
  std::unique_ptr<Fft> fft_;
};

/// Stored frames psi(t_i) and psi_t(t_i) on the computational grid.
struct FrameStore {
  GridSpec grid;  // the physical grid; frames live on grid.computational()
  std::vector<double> times;
  std::vector<std::vector<Complex>> psi;
  std::vector<std::vector<Complex>> dpsi_dt;

  /// Little-endian binary file; see README for the layout.
  void write(const std::string& path) const;
  static FrameStore read(const std::string& path);
};

struct KineticAction {
  double gradient_integral = 0.0;  // int_0^T ||grad psi_t||^2 dt
  double kinetic_integral = 0.0;   // int_0^T (psi_t, H0 psi_t) dt
  std::vector<double> energy;      // (psi_t, H psi_t) per frame
};

/// Trapezoidal time integrals over the frames in [0, T]. Throws InsufficientFrames
/// unless at least two frames cover [0, T].
KineticAction kinetic_action(const SplitStepPropagator& propagator, const FrameStore& frames,
                             double T);

/// Wavefunction backed by stored frames: spectral interpolation in space and cubic
/// Hermite interpolation (from psi and psi_t) in time.
class GridBackedModel final : public WavefunctionModel {
 public:
  GridBackedModel(std::shared_ptr<const FrameStore> frames, Potential potential = {});

  std::size_t dim() const override { return frames_->grid.dim(); }
  std::string family() const override { return "grid_backed"; }
  /// Throws OutOfDomain outside the stored box or time range.
  WavefieldSample evaluate(std::span<const double> q, double t) const override;
  Box mass_box(double t) const override;
  bool periodic() const override { return frames_->grid.boundary == GridBoundary::Periodic; }
  std::optional<double> potential(std::span<const double> q) const override;

  const FrameStore& frames() const { return *frames_; }

 private:
  void spectral_sum(const std::vector<Complex>& hat, std::span<const double> q, Complex& value,
                    ComplexVec* grad) const;

  std::shared_ptr<const FrameStore> frames_;
  Potential potential_;
  GridSpec comp_;
  std::vector<std::vector<Complex>> psi_hat_;
  std::vector<std::vector<Complex>> dpsi_hat_;
};

}  // namespace bohm
