#pragma once

// Absolute flux of J = (j, |psi|^2) through space-time surfaces, the nodal cube
// cover, crossing-probability checks against ensembles, and the Hardy check.

#include "bohm/domain.hpp"
#include "bohm/quadrature.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/wavefunction.hpp"

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace bohm {

/// Quadrature node on a space-time surface with unit normal (normal_space, normal_time).
struct SurfaceNode {
  RealVec q;
  double t = 0.0;
  RealVec normal_space;
  double normal_time = 0.0;
  double weight = 0.0;
};

enum class SurfaceKind { SphereLateral, SingularTube, NodalCubeFaces, TimeSlice, PlaneLateral };

std::string_view to_string(SurfaceKind k);

/// Surface that can emit its quadrature nodes at any refinement level (level 0 is
/// the coarsest; each level doubles the node density per direction).
struct FluxSurface {
  SurfaceKind kind = SurfaceKind::TimeSlice;
  std::string label;
  double t0 = 0.0;
  double t1 = 0.0;
  std::function<void(std::size_t level, const std::function<void(const SurfaceNode&)>&)> visit;
};

/// {|q| = radius} x (t0, t1). Supported for d <= 3.
FluxSurface sphere_lateral(std::size_t dim, double radius, double t0, double t1);
/// {q_axis = position} restricted to `box` in the other axes, times (t0, t1); normal +e_axis.
FluxSurface plane_lateral(std::size_t axis, double position, const Box& box, double t0, double t1);
/// {|y(q) - a| = delta} inside K^n, times (t0, t1).
FluxSurface singular_tube(const SingularHyperplane& plane, double delta, double n, double t0,
                          double t1);
/// box x {t}; normal +e_t, so the flux is the mass in the box.
FluxSurface time_slice(const Box& box, double t);

struct FluxQuadrature {
  std::size_t min_level = 1;
  std::size_t max_level = 5;
  double rel_tol = 1e-3;       // stop refining once successive levels agree to this
  double divergence_tol = 0.05;  // QuadratureDivergence beyond this at max_level
  double abs_floor = 1e-14;    // differences below this count as converged
};

struct FluxResult {
  double value = 0.0;   // int |J.U| dsigma
  double signed_value = 0.0;
  double error = 0.0;   // |finest - previous level|
  std::size_t level = 0;
};

/// Absolute flux with a two-level refinement error estimate.
FluxResult absolute_flux(const WavefunctionModel& model, const PhysicalParams& params,
                         const FluxSurface& surface, const FluxQuadrature& quad = {});

struct InfinityIntegral {
  FluxResult flux;      // I(n)
  double tilde = 0.0;   // I~(n) = int int |psi| |grad psi|
  double bound = 0.0;   // mu * I~(n)
};

InfinityIntegral infinity_integral(const WavefunctionModel& model, const PhysicalParams& params,
                                   double n, double T, const FluxQuadrature& quad = {});

/// S(delta): summed absolute flux through the tubes around every hyperplane.
/// Throws NotApplicable when the domain has no hyperplanes.
FluxResult singular_integral(const WavefunctionModel& model, const PhysicalParams& params,
                             const DomainSpec& spec, const std::vector<double>& delta, double n,
                             double T, const FluxQuadrature& quad = {});

/// Space-time region for the cover: the box [lo, hi] x [t0, t1], with points inside
/// any tube (dist <= delta_l) or outside K^n excluded.
struct CoverRegion {
  RealVec lo;
  RealVec hi;
  double t0 = 0.0;
  double t1 = 1.0;
  double n = std::numeric_limits<double>::infinity();
  const DomainSpec* spec = nullptr;
  std::vector<double> delta;
};

struct NodalCube {
  std::vector<long> index;  // lattice index, spatial axes then time
  bool sign_change = false;
  bool minimized = false;
  double min_abs = 0.0;
  RealVec argmin;           // spatial part of the minimizer
  double argmin_t = 0.0;
};

struct NodalCubeCover {
  double epsilon = 0.0;
  std::size_t dim = 0;      // spatial dimension
  RealVec origin;           // lattice origin (space then time)
  CoverRegion region;
  std::vector<NodalCube> cubes;    // retained (minimizer below threshold)
  std::vector<NodalCube> suspects; // sign change on Re and Im but no minimizer found
  double threshold = 1e-3;

  /// Space-time volume of the retained cubes.
  double measure() const;
};

struct CoverOptions {
  double threshold = 1e-3;  // retain when min |psi| < threshold * max |psi'| * eps
  std::size_t newton_iters = 30;
};

NodalCubeCover build_nodal_cover(const WavefunctionModel& model, double epsilon,
                                 const CoverRegion& region, const CoverOptions& options = {});

/// Faces of the cover not shared by two retained cubes (the time-boundary planes
/// of the region are excluded).
FluxSurface nodal_faces(const NodalCubeCover& cover);

/// N(eps, delta, n): absolute flux through the exterior faces of the cover.
FluxResult nodal_integral(const WavefunctionModel& model, const PhysicalParams& params,
                          const NodalCubeCover& cover, const FluxQuadrature& quad = {});

struct CrossingReport {
  std::size_t paths = 0;
  std::size_t crossing_paths = 0;  // paths with at least one crossing
  std::size_t crossings = 0;       // total crossings
  double p_hat = 0.0;
  double sigma_hat = 0.0;
  Interval interval;
  double flux = 0.0;
  double margin = 0.0;             // flux - (p_hat - 3 sigma)
  bool pass = false;
};

/// Surface as the zero set of level(q, t) within (t0, t1).
struct CrossingSurface {
  std::function<double(std::span<const double>, double)> level;
  double t0 = 0.0;
  double t1 = 0.0;
};

CrossingSurface sphere_crossing(double radius, double t0, double t1);
CrossingSurface plane_crossing(std::size_t axis, double position, double t0, double t1);

/// Counts crossings on the dense output of every path while alive and compares the
/// crossing probability with the flux: PASS iff p_hat - 3 sigma <= flux.
CrossingReport crossing_bound_check(const std::vector<KilledPath>& paths,
                                    const CrossingSurface& surface, double flux);

/// Net outflow int_{dM} j.u ds of a box at time t (Gauss rule per face).
double box_outflow(const WavefunctionModel& model, const PhysicalParams& params, const Box& box,
                   double t, std::size_t panels = 8);

/// Cell-centred tensor grid holding psi and its gradient.
struct SampledField {
  RealVec lo;
  RealVec hi;
  std::vector<std::size_t> points;
  std::vector<Complex> psi;
  std::vector<ComplexVec> grad;

  double spacing(std::size_t axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(points[axis]);
  }
  static SampledField from_model(const WavefunctionModel& model, double t, const Box& box,
                                 std::vector<std::size_t> points);
  void scale(Complex c);
};

struct HardyResult {
  double lhs = 0.0;          // int |psi|^2 / (4 |y - a|^2), shell excluded
  double rhs = 0.0;          // int |grad psi|^2
  double shell_bound = 0.0;  // bound on the excluded shell's contribution to lhs
  double ratio = 0.0;        // lhs / rhs
  std::size_t excluded = 0;
  bool holds = false;        // lhs <= rhs (1 + 1e-6)
};

/// Throws GridTooCoarse when the shell bound exceeds 5% of lhs, InvalidArgument for d < 3.
HardyResult hardy_check(const SampledField& field, const SingularHyperplane& plane);

}  // namespace bohm
