#pragma once

// Physical parameters, configuration-space geometry and the stopping-region
// classifier for the killed process.

#include "bohm/core.hpp"

#include <array>
#include <optional>
#include <vector>

namespace bohm {

/// Action scale, particle masses and space dimension per particle.
class PhysicalParams {
 public:
  /// Throws InvalidArgument unless hbar > 0, every mass > 0 and nu * N >= 1.
  PhysicalParams(double hbar, std::vector<double> masses, std::size_t nu);

  /// hbar = 1, a single particle of unit mass moving in `dim` dimensions.
  static PhysicalParams unit(std::size_t dim);

  double hbar() const { return hbar_; }
  const std::vector<double>& masses() const { return masses_; }
  std::size_t nu() const { return nu_; }
  std::size_t particles() const { return masses_.size(); }
  std::size_t dim() const { return nu_ * masses_.size(); }
  /// Mass of the particle owning configuration axis `axis`.
  double mass_of_axis(std::size_t axis) const { return masses_[axis / nu_]; }
  /// hbar / min(masses); recomputed on every call.
  double mu() const;

 private:
  double hbar_;
  std::vector<double> masses_;
  std::size_t nu_;
};

/// Codimension-3 hyperplane {q : y(q) = a} with y(q)_i = <normal_i, q>.
class SingularHyperplane {
 public:
  /// Normals must be pairwise orthogonal unit d-vectors to 1e-12.
  SingularHyperplane(std::array<RealVec, 3> normals, std::array<double, 3> offset);

  std::size_t dim() const { return normals_[0].size(); }
  const std::array<RealVec, 3>& normals() const { return normals_; }
  const std::array<double, 3>& offset() const { return offset_; }

  /// y(q) - a.
  std::array<double, 3> relative(std::span<const double> q) const;
  double distance(std::span<const double> q) const;
  /// Closest point of the hyperplane to the origin.
  RealVec anchor() const;

 private:
  std::array<RealVec, 3> normals_;
  std::array<double, 3> offset_;
};

struct PeriodicBox {
  double lo = 0.0;
  double hi = 1.0;
};

class DomainSpec {
 public:
  explicit DomainSpec(std::size_t dim, std::vector<SingularHyperplane> hyperplanes = {},
                      std::optional<PeriodicBox> periodic = std::nullopt);

  std::size_t dim() const { return dim_; }
  const std::vector<SingularHyperplane>& hyperplanes() const { return hyperplanes_; }
  const std::optional<PeriodicBox>& periodic() const { return periodic_; }

 private:
  std::size_t dim_;
  std::vector<SingularHyperplane> hyperplanes_;
  std::optional<PeriodicBox> periodic_;
};

/// (epsilon, delta, n, T): node threshold, tube radii per hyperplane, ball radius, horizon.
struct StoppingRegions {
  double epsilon = 1e-3;
  std::vector<double> delta;
  double n = 10.0;
  double horizon = 1.0;

  void validate(const DomainSpec& spec) const;
};

enum class RegionClass { Interior, NodeRegion, SingularRegion, OutsideBall };

std::string_view to_string(RegionClass c);

struct SingularDistances {
  std::vector<double> per_plane;
  double minimum = 0.0;  // +inf when there are no hyperplanes
};

SingularDistances dist_to_singular(const DomainSpec& spec, std::span<const double> q);

/// Priority: SingularRegion > OutsideBall > NodeRegion > Interior.
/// N^eps and S^delta are closed (<=), K^n is open so |q| = n is already outside.
RegionClass classify(const DomainSpec& spec, const PhysicalParams& params,
                     const StoppingRegions& regions, std::span<const double> q, double t,
                     double psi_abs);

}  // namespace bohm
