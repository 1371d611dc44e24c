#include "bohm/flux.hpp"

#include <algorithm>
#include <set>

namespace bohm {

namespace {

// psi and its space-time gradient (grad psi, d psi/dt) at a lattice point.
struct SpaceTimeSample {
  Complex psi;
  std::vector<Complex> grad;
};

class CoverBuilder {
 public:
  CoverBuilder(const WavefunctionModel& model, double epsilon, const CoverRegion& region,
               const CoverOptions& options)
      : model_(model), eps_(epsilon), region_(region), options_(options), d_(model.dim()), D_(d_ + 1) {
    for (std::size_t a = 0; a < D_; ++a) {
      lower_.push_back(a < d_ ? region.lo[a] : region.t0);
      upper_.push_back(a < d_ ? region.hi[a] : region.t1);
      counts_.push_back(static_cast<long>(std::ceil((upper_[a] - lower_[a]) / eps_ - 1e-9)));
    }
  }

  NodalCubeCover build() {
    NodalCubeCover cover;
    cover.epsilon = eps_;
    cover.dim = d_;
    cover.region = region_;
    cover.threshold = options_.threshold;
    for (double x : lower_) cover.origin.push_back(x);
    long top = 1;
    while (std::any_of(counts_.begin(), counts_.end(), [&](long c) { return c > top; })) top *= 2;
    std::vector<long> start(D_, 0);
    search(start, top, cover);
    return cover;
  }

 private:
  SpaceTimeSample eval(const std::vector<double>& x) const {
    const WavefieldSample s = model_.evaluate(std::span<const double>(x.data(), d_), x[d_]);
    SpaceTimeSample out{s.psi, {}};
    out.grad.assign(s.grad.begin(), s.grad.end());
    out.grad.push_back(s.dpsi_dt);
    return out;
  }

  static double grad_norm(const SpaceTimeSample& s) {
    double g = 0.0;
    for (const auto& z : s.grad) g += std::norm(z);
    return std::sqrt(g);
  }

  bool in_region(const std::vector<double>& x) const {
    const std::span<const double> q(x.data(), d_);
    if (norm(q) >= region_.n) return false;
    if (region_.spec && !region_.spec->hyperplanes().empty()) {
      const auto dist = dist_to_singular(*region_.spec, q);
      for (std::size_t l = 0; l < dist.per_plane.size(); ++l) {
        if (dist.per_plane[l] <= region_.delta[l]) return false;
      }
    }
    return true;
  }

  // Corners and centre of the clipped block [lo, hi].
  std::vector<std::vector<double>> probe_points(const std::vector<double>& lo,
                                                const std::vector<double>& hi) const {
    std::vector<std::vector<double>> pts;
    for (std::size_t mask = 0; mask < (std::size_t{1} << D_); ++mask) {
      std::vector<double> x(D_);
      for (std::size_t a = 0; a < D_; ++a) x[a] = (mask >> a) & 1 ? hi[a] : lo[a];
      pts.push_back(x);
    }
    std::vector<double> c(D_);
    for (std::size_t a = 0; a < D_; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
    pts.push_back(c);
    return pts;
  }

  void search(const std::vector<long>& start, long size, NodalCubeCover& cover) {
    std::vector<double> lo(D_), hi(D_);
    for (std::size_t a = 0; a < D_; ++a) {
      if (start[a] >= counts_[a]) return;
      lo[a] = lower_[a] + eps_ * static_cast<double>(start[a]);
      hi[a] = std::min(upper_[a], lower_[a] + eps_ * static_cast<double>(start[a] + size));
    }
    // Blocks entirely outside K^n carry no part of the region.
    double near2 = 0.0;
    for (std::size_t a = 0; a < d_; ++a) {
      const double c = std::clamp(0.0, lo[a], hi[a]);
      near2 += c * c;
    }
    if (std::sqrt(near2) >= region_.n) return;

    const auto pts = probe_points(lo, hi);
    std::vector<SpaceTimeSample> samples;
    samples.reserve(pts.size());
    for (const auto& p : pts) samples.push_back(eval(p));
    double gmax = 0.0;
    for (const auto& s : samples) gmax = std::max(gmax, grad_norm(s));
    double half_diag = 0.0;
    for (std::size_t a = 0; a < D_; ++a) half_diag += 0.25 * (hi[a] - lo[a]) * (hi[a] - lo[a]);
    half_diag = std::sqrt(half_diag);

    if (size > 1) {
      if (std::abs(samples.back().psi) > 2.0 * gmax * half_diag) return;
      const long half = size / 2;
      for (std::size_t mask = 0; mask < (std::size_t{1} << D_); ++mask) {
        std::vector<long> child = start;
        for (std::size_t a = 0; a < D_; ++a) {
          if ((mask >> (D_ - 1 - a)) & 1) child[a] += half;
        }
        search(child, half, cover);
      }
      return;
    }
    leaf(start, lo, hi, pts, samples, gmax, half_diag, cover);
  }

  void leaf(const std::vector<long>& index, const std::vector<double>& lo,
            const std::vector<double>& hi, const std::vector<std::vector<double>>& pts,
            const std::vector<SpaceTimeSample>& samples, double gmax, double half_diag,
            NodalCubeCover& cover) {
    if (std::abs(samples.back().psi) > 2.0 * gmax * half_diag) return;
    NodalCube cube;
    cube.index = index;
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Complex z = samples[i].psi;
      re_lo = std::min(re_lo, z.real());
      re_hi = std::max(re_hi, z.real());
      im_lo = std::min(im_lo, z.imag());
      im_hi = std::max(im_hi, z.imag());
      if (std::abs(z) < std::abs(samples[best].psi)) best = i;
    }
    cube.sign_change = re_lo < 0.0 && re_hi > 0.0 && im_lo < 0.0 && im_hi > 0.0;

    // Minimum-norm Gauss-Newton on (Re psi, Im psi) = 0 inside the cube.
    std::vector<double> x = pts[best];
    SpaceTimeSample s = samples[best];
    std::vector<double> best_x = x;
    double best_abs = std::abs(s.psi);
    for (std::size_t it = 0; it < options_.newton_iters && best_abs > 0.0; ++it) {
      double a11 = 0.0, a12 = 0.0, a22 = 0.0;
      for (const auto& g : s.grad) {
        a11 += g.real() * g.real();
        a12 += g.real() * g.imag();
        a22 += g.imag() * g.imag();
      }
      const double reg = 1e-14 * (a11 + a22) + 1e-300;
      a11 += reg;
      a22 += reg;
      const double det = a11 * a22 - a12 * a12;
      if (!(det > 0.0)) break;
      const double y1 = (a22 * s.psi.real() - a12 * s.psi.imag()) / det;
      const double y2 = (-a12 * s.psi.real() + a11 * s.psi.imag()) / det;
      for (std::size_t a = 0; a < D_; ++a) {
        x[a] = std::clamp(x[a] - (s.grad[a].real() * y1 + s.grad[a].imag() * y2), lo[a], hi[a]);
      }
      s = eval(x);
      if (std::abs(s.psi) < best_abs) {
        best_abs = std::abs(s.psi);
        best_x = x;
      } else if (std::abs(s.psi) > 2.0 * best_abs) {
        break;
      }
    }
    cube.min_abs = best_abs;
    cube.argmin.assign(best_x.begin(), best_x.begin() + static_cast<long>(d_));
    cube.argmin_t = best_x[d_];
    cube.minimized = best_abs < options_.threshold * gmax * eps_ && in_region(best_x);
    if (cube.minimized) {
      cover.cubes.push_back(std::move(cube));
    } else if (cube.sign_change) {
      cover.suspects.push_back(std::move(cube));
    }
  }

  const WavefunctionModel& model_;
  double eps_;
  CoverRegion region_;
  CoverOptions options_;
  std::size_t d_;
  std::size_t D_;
  std::vector<double> lower_, upper_;
  std::vector<long> counts_;
};

}  // namespace

double NodalCubeCover::measure() const {
  return static_cast<double>(cubes.size()) * std::pow(epsilon, static_cast<double>(dim + 1));
}

NodalCubeCover build_nodal_cover(const WavefunctionModel& model, double epsilon,
                                 const CoverRegion& region, const CoverOptions& options) {
  require(epsilon > 0.0, ErrorCode::InvalidArgument, "cover side must be > 0");
  require(region.lo.size() == model.dim() && region.hi.size() == model.dim(),
          ErrorCode::InvalidArgument, "cover region dimension differs from the model");
  require(region.t1 > region.t0, ErrorCode::InvalidArgument, "cover region needs t1 > t0");
  for (std::size_t a = 0; a < model.dim(); ++a) {
    require(region.hi[a] > region.lo[a], ErrorCode::InvalidArgument, "cover region is empty");
  }
  if (region.spec) {
    require(region.delta.size() == region.spec->hyperplanes().size(), ErrorCode::InvalidArgument,
            "cover region needs one delta per hyperplane");
  }
  return CoverBuilder(model, epsilon, region, options).build();
}

FluxSurface nodal_faces(const NodalCubeCover& cover) {
  FluxSurface s;
  s.kind = SurfaceKind::NodalCubeFaces;
  s.label = "nodal cover eps=" + std::to_string(cover.epsilon);
  s.t0 = cover.region.t0;
  s.t1 = cover.region.t1;
  s.visit = [cover](std::size_t level, const std::function<void(const SurfaceNode&)>& f) {
    const std::size_t d = cover.dim;
    const std::size_t D = d + 1;
    const double eps = cover.epsilon;
    std::set<std::vector<long>> retained;
    for (const auto& c : cover.cubes) retained.insert(c.index);
    std::vector<double> upper(D);
    for (std::size_t a = 0; a < D; ++a) upper[a] = a < d ? cover.region.hi[a] : cover.region.t1;
    const std::size_t panels = std::size_t{1} << level;
    SurfaceNode node;
    for (const auto& cube : cover.cubes) {
      for (std::size_t axis = 0; axis < D; ++axis) {
        for (int side = 0; side < 2; ++side) {
          std::vector<long> nb = cube.index;
          nb[axis] += side == 0 ? -1 : 1;
          if (retained.count(nb)) continue;
          const double pos = cover.origin[axis] + eps * static_cast<double>(cube.index[axis] + side);
          if (axis == d && (pos <= cover.region.t0 + 1e-12 || pos >= cover.region.t1 - 1e-12)) {
            continue;
          }
          if (pos > upper[axis]) continue;
          Box face;
          for (std::size_t a = 0; a < D; ++a) {
            if (a == axis) continue;
            const double lo = cover.origin[a] + eps * static_cast<double>(cube.index[a]);
            face.lo.push_back(lo);
            face.hi.push_back(std::min(upper[a], lo + eps));
          }
          node.normal_space.assign(d, 0.0);
          node.normal_time = 0.0;
          const double sign = side == 0 ? -1.0 : 1.0;
          if (axis < d) {
            node.normal_space[axis] = sign;
          } else {
            node.normal_time = sign;
          }
          for_each_box_node(face, panels, 4, [&](std::span<const double> other, double w) {
            RealVec x(D, 0.0);
            for (std::size_t a = 0, k = 0; a < D; ++a) x[a] = a == axis ? pos : other[k++];
            node.q.assign(x.begin(), x.begin() + static_cast<long>(d));
            node.t = x[d];
            node.weight = w;
            f(node);
          });
        }
      }
    }
  };
  return s;
}

FluxResult nodal_integral(const WavefunctionModel& model, const PhysicalParams& params,
                          const NodalCubeCover& cover, const FluxQuadrature& quad) {
  if (cover.cubes.empty()) return {};
  return absolute_flux(model, params, nodal_faces(cover), quad);
}

}  // namespace bohm
