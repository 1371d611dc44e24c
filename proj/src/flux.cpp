#include "bohm/flux.hpp"

#include <algorithm>
#include <numbers>

namespace bohm {

using std::numbers::pi;

namespace {

constexpr std::size_t kPanelPoints = 6;

std::size_t panels_at(std::size_t level) { return std::size_t{1} << level; }

void time_rule(double t0, double t1, std::size_t level, std::vector<double>& t,
               std::vector<double>& w) {
  composite_gauss(t0, t1, panels_at(level), kPanelPoints, t, w);
}

// Points on S^2: Gauss in cos(theta), trapezoid in phi.
struct SphereRule {
  std::vector<std::array<double, 3>> dir;
  std::vector<double> weight;  // sums to 4 pi
};

SphereRule sphere_rule(std::size_t level) {
  SphereRule rule;
  std::vector<double> u, wu;
  composite_gauss(-1.0, 1.0, panels_at(level), 8, u, wu);
  const std::size_t m = 16 * panels_at(level);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
    for (std::size_t k = 0; k < m; ++k) {
      const double phi = 2.0 * pi * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
      rule.dir.push_back({s * std::cos(phi), s * std::sin(phi), u[i]});
      rule.weight.push_back(wu[i] * 2.0 * pi / static_cast<double>(m));
    }
  }
  return rule;
}

// Orthonormal basis of the complement of the hyperplane normals.
std::vector<RealVec> complement_basis(const SingularHyperplane& plane) {
  const std::size_t d = plane.dim();
  std::vector<RealVec> basis(plane.normals().begin(), plane.normals().end());
  std::vector<RealVec> extra;
  for (std::size_t e = 0; e < d && basis.size() < d; ++e) {
    RealVec v(d, 0.0);
    v[e] = 1.0;
    for (const auto& b : basis) {
      const double c = dot(view(v), view(b));
      for (std::size_t i = 0; i < d; ++i) v[i] -= c * b[i];
    }
    const double len = norm(view(v));
    if (len < 1e-8) continue;
    for (auto& x : v) x /= len;
    basis.push_back(v);
    extra.push_back(v);
  }
  return extra;
}

}  // namespace

std::string_view to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::SphereLateral: return "sphere_lateral";
    case SurfaceKind::SingularTube: return "singular_tube";
    case SurfaceKind::NodalCubeFaces: return "nodal_cube_faces";
    case SurfaceKind::TimeSlice: return "time_slice";
    case SurfaceKind::PlaneLateral: return "plane_lateral";
  }
  return "unknown";
}

FluxSurface sphere_lateral(std::size_t dim, double radius, double t0, double t1) {
  require(dim >= 1 && dim <= 3, ErrorCode::NotApplicable, "sphere surfaces are built for d <= 3");
  require(radius > 0.0 && t1 > t0, ErrorCode::InvalidArgument, "bad sphere surface");
  FluxSurface s;
  s.kind = SurfaceKind::SphereLateral;
  s.label = "sphere r=" + std::to_string(radius);
  s.t0 = t0;
  s.t1 = t1;
  s.visit = [dim, radius, t0, t1](std::size_t level, const std::function<void(const SurfaceNode&)>& f) {
    std::vector<double> tt, wt;
    time_rule(t0, t1, level, tt, wt);
    std::vector<std::pair<RealVec, double>> spatial;  // (unit normal, area weight)
    if (dim == 1) {
      spatial.emplace_back(RealVec{1.0}, 1.0);
      spatial.emplace_back(RealVec{-1.0}, 1.0);
    } else if (dim == 2) {
      const std::size_t m = 16 * panels_at(level);
      for (std::size_t k = 0; k < m; ++k) {
        const double phi = 2.0 * pi * static_cast<double>(k) / static_cast<double>(m);
        spatial.emplace_back(RealVec{std::cos(phi), std::sin(phi)},
                             radius * 2.0 * pi / static_cast<double>(m));
      }
    } else {
      const SphereRule rule = sphere_rule(level);
      for (std::size_t k = 0; k < rule.dir.size(); ++k) {
        const auto& u = rule.dir[k];
        spatial.emplace_back(RealVec{u[0], u[1], u[2]}, radius * radius * rule.weight[k]);
      }
    }
    SurfaceNode node;
    for (std::size_t i = 0; i < tt.size(); ++i) {
      for (const auto& [normal, area] : spatial) {
        node.t = tt[i];
        node.normal_space = normal;
        node.q = normal;
        for (auto& x : node.q) x *= radius;
        node.normal_time = 0.0;
        node.weight = wt[i] * area;
        f(node);
      }
    }
  };
  return s;
}

FluxSurface plane_lateral(std::size_t axis, double position, const Box& box, double t0, double t1) {
  require(axis < box.dim() && t1 > t0, ErrorCode::InvalidArgument, "bad plane surface");
  FluxSurface s;
  s.kind = SurfaceKind::PlaneLateral;
  s.label = "plane axis=" + std::to_string(axis);
  s.t0 = t0;
  s.t1 = t1;
  s.visit = [axis, position, box, t0, t1](std::size_t level,
                                          const std::function<void(const SurfaceNode&)>& f) {
    const std::size_t d = box.dim();
    std::vector<double> tt, wt;
    time_rule(t0, t1, level, tt, wt);
    Box face;
    for (std::size_t a = 0; a < d; ++a) {
      if (a == axis) continue;
      face.lo.push_back(box.lo[a]);
      face.hi.push_back(box.hi[a]);
    }
    SurfaceNode node;
    node.normal_space.assign(d, 0.0);
    node.normal_space[axis] = 1.0;
    auto emit = [&](std::span<const double> other, double w) {
      node.q.assign(d, 0.0);
      for (std::size_t a = 0, k = 0; a < d; ++a) node.q[a] = a == axis ? position : other[k++];
      for (std::size_t i = 0; i < tt.size(); ++i) {
        node.t = tt[i];
        node.weight = w * wt[i];
        f(node);
      }
    };
    if (d == 1) {
      emit({}, 1.0);
    } else {
      for_each_box_node(face, panels_at(level), kPanelPoints, emit);
    }
  };
  return s;
}

FluxSurface singular_tube(const SingularHyperplane& plane, double delta, double n, double t0,
                          double t1) {
  require(delta > 0.0 && n > 0.0 && t1 > t0, ErrorCode::InvalidArgument, "bad tube surface");
  FluxSurface s;
  s.kind = SurfaceKind::SingularTube;
  s.label = "tube delta=" + std::to_string(delta);
  s.t0 = t0;
  s.t1 = t1;
  const auto extra = complement_basis(plane);
  s.visit = [plane, extra, delta, n, t0, t1](std::size_t level,
                                             const std::function<void(const SurfaceNode&)>& f) {
    const std::size_t d = plane.dim();
    const std::size_t dc = extra.size();
    const RealVec anchor = plane.anchor();
    std::vector<double> tt, wt;
    time_rule(t0, t1, level, tt, wt);
    const SphereRule rule = sphere_rule(level);
    SurfaceNode node;
    for (std::size_t k = 0; k < rule.dir.size(); ++k) {
      RealVec normal(d, 0.0), base(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        for (int j = 0; j < 3; ++j) normal[i] += rule.dir[k][j] * plane.normals()[j][i];
        base[i] = anchor[i] + delta * normal[i];
      }
      const double area = delta * delta * rule.weight[k];
      const double base2 = dot(view(base), view(base));
      auto emit = [&](std::span<const double> sc, double w) {
        node.q = base;
        for (std::size_t j = 0; j < dc; ++j) {
          for (std::size_t i = 0; i < d; ++i) node.q[i] += sc[j] * extra[j][i];
        }
        if (norm(view(node.q)) >= n) return;
        node.normal_space = normal;
        node.normal_time = 0.0;
        for (std::size_t i = 0; i < tt.size(); ++i) {
          node.t = tt[i];
          node.weight = area * w * wt[i];
          f(node);
        }
      };
      if (base2 >= n * n) continue;
      if (dc == 0) {
        emit({}, 1.0);
      } else if (dc == 1) {
        const double r = std::sqrt(n * n - base2);
        std::vector<double> x, w;
        composite_gauss(-r, r, 2 * panels_at(level), kPanelPoints, x, w);
        for (std::size_t i = 0; i < x.size(); ++i) emit(std::span<const double>(&x[i], 1), w[i]);
      } else {
        Box box;
        for (std::size_t j = 0; j < dc; ++j) {
          box.lo.push_back(-n);
          box.hi.push_back(n);
        }
        for_each_box_node(box, 2 * panels_at(level), kPanelPoints, emit);
      }
    }
  };
  return s;
}

FluxSurface time_slice(const Box& box, double t) {
  FluxSurface s;
  s.kind = SurfaceKind::TimeSlice;
  s.label = "slice t=" + std::to_string(t);
  s.t0 = t;
  s.t1 = t;
  s.visit = [box, t](std::size_t level, const std::function<void(const SurfaceNode&)>& f) {
    SurfaceNode node;
    node.t = t;
    node.normal_space.assign(box.dim(), 0.0);
    node.normal_time = 1.0;
    for_each_box_node(box, 2 * panels_at(level), kPanelPoints, [&](std::span<const double> q, double w) {
      node.q = to_vec(q);
      node.weight = w;
      f(node);
    });
  };
  return s;
}

namespace {

struct LevelSums {
  double abs = 0.0;
  double sign = 0.0;
};

LevelSums flux_at_level(const WavefunctionModel& model, const PhysicalParams& params,
                        const FluxSurface& surface, std::size_t level) {
  LevelSums sums;
  surface.visit(level, [&](const SurfaceNode& node) {
    const WavefieldSample s = model.evaluate(view(node.q), node.t);
    const Current c = current(s, params);
    double ju = s.abs2 * node.normal_time;
    for (std::size_t a = 0; a < c.j.size(); ++a) ju += c.j[a] * node.normal_space[a];
    sums.abs += node.weight * std::abs(ju);
    sums.sign += node.weight * ju;
  });
  return sums;
}

}  // namespace

FluxResult absolute_flux(const WavefunctionModel& model, const PhysicalParams& params,
                         const FluxSurface& surface, const FluxQuadrature& quad) {
  require(surface.visit != nullptr, ErrorCode::InvalidArgument, "surface has no quadrature");
  require(quad.max_level >= 1 && quad.min_level >= 1 && quad.min_level <= quad.max_level,
          ErrorCode::InvalidArgument, "bad flux quadrature levels");
  LevelSums prev = flux_at_level(model, params, surface, quad.min_level - 1);
  FluxResult out;
  for (std::size_t level = quad.min_level; level <= quad.max_level; ++level) {
    const LevelSums cur = flux_at_level(model, params, surface, level);
    out.value = cur.abs;
    out.signed_value = cur.sign;
    out.error = std::abs(cur.abs - prev.abs);
    out.level = level;
    if (out.error <= std::max(quad.rel_tol * cur.abs, quad.abs_floor)) return out;
    prev = cur;
  }
  if (out.error > std::max(quad.divergence_tol * out.value, quad.abs_floor)) {
    fail(ErrorCode::QuadratureDivergence,
         "flux through " + surface.label + " did not stabilize (refinement change " +
             std::to_string(out.error) + " vs value " + std::to_string(out.value) + ")");
  }
  return out;
}

InfinityIntegral infinity_integral(const WavefunctionModel& model, const PhysicalParams& params,
                                   double n, double T, const FluxQuadrature& quad) {
  InfinityIntegral out;
  const FluxSurface sphere = sphere_lateral(model.dim(), n, 0.0, T);
  out.flux = absolute_flux(model, params, sphere, quad);
  sphere.visit(out.flux.level, [&](const SurfaceNode& node) {
    const WavefieldSample s = model.evaluate(view(node.q), node.t);
    double g2 = 0.0;
    for (const auto& g : s.grad) g2 += std::norm(g);
    out.tilde += node.weight * std::sqrt(s.abs2 * g2);
  });
  out.bound = params.mu() * out.tilde;
  return out;
}

FluxResult singular_integral(const WavefunctionModel& model, const PhysicalParams& params,
                             const DomainSpec& spec, const std::vector<double>& delta, double n,
                             double T, const FluxQuadrature& quad) {
  if (spec.hyperplanes().empty()) {
    fail(ErrorCode::NotApplicable, "no singular hyperplanes in the domain");
  }
  require(delta.size() == spec.hyperplanes().size(), ErrorCode::InvalidArgument,
          "delta needs one radius per hyperplane");
  FluxResult total;
  for (std::size_t l = 0; l < delta.size(); ++l) {
    const FluxResult r =
        absolute_flux(model, params, singular_tube(spec.hyperplanes()[l], delta[l], n, 0.0, T), quad);
    total.value += r.value;
    total.signed_value += r.signed_value;
    total.error += r.error;
    total.level = std::max(total.level, r.level);
  }
  return total;
}

CrossingSurface sphere_crossing(double radius, double t0, double t1) {
  return {[radius](std::span<const double> q, double) { return norm(q) - radius; }, t0, t1};
}

CrossingSurface plane_crossing(std::size_t axis, double position, double t0, double t1) {
  return {[axis, position](std::span<const double> q, double) { return q[axis] - position; }, t0, t1};
}

CrossingReport crossing_bound_check(const std::vector<KilledPath>& paths,
                                    const CrossingSurface& surface, double flux) {
  CrossingReport rep;
  rep.paths = paths.size();
  rep.flux = flux;
  constexpr std::size_t kProbes = 16;
  for (const auto& path : paths) {
    const double a = std::max(surface.t0, path.t0);
    const double b = std::min(surface.t1, path.stop_time);
    if (!(b > a)) continue;
    std::size_t count = 0;
    auto scan = [&](double ta, double tb) {
      double prev = surface.level(view(path.position_at(ta)), ta);
      for (std::size_t k = 1; k <= kProbes; ++k) {
        const double t = ta + (tb - ta) * static_cast<double>(k) / kProbes;
        const double g = surface.level(view(path.position_at(t)), t);
        if ((prev < 0.0) != (g < 0.0)) ++count;
        prev = g;
      }
    };
    if (path.has_dense()) {
      for (std::size_t k = 0; k < path.step_t0.size(); ++k) {
        const double lo = std::max(a, path.step_t0[k]);
        const double hi = std::min(b, path.step_t0[k] + path.step_h[k]);
        if (hi > lo) scan(lo, hi);
      }
    } else {
      for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double lo = std::max(a, path.times[k]);
        const double hi = std::min(b, path.times[k + 1]);
        if (hi > lo) scan(lo, hi);
      }
    }
    rep.crossings += count;
    if (count > 0) ++rep.crossing_paths;
  }
  if (rep.paths > 0) {
    const double n = static_cast<double>(rep.paths);
    rep.p_hat = static_cast<double>(rep.crossing_paths) / n;
    rep.sigma_hat = std::sqrt(rep.p_hat * (1.0 - rep.p_hat) / n);
    rep.interval = proportion_interval(rep.crossing_paths, rep.paths);
  }
  rep.margin = flux - (rep.p_hat - 3.0 * rep.sigma_hat);
  rep.pass = rep.margin >= 0.0;
  return rep;
}

double box_outflow(const WavefunctionModel& model, const PhysicalParams& params, const Box& box,
                   double t, std::size_t panels) {
  const std::size_t d = box.dim();
  double total = 0.0;
  for (std::size_t axis = 0; axis < d; ++axis) {
    Box face;
    for (std::size_t a = 0; a < d; ++a) {
      if (a == axis) continue;
      face.lo.push_back(box.lo[a]);
      face.hi.push_back(box.hi[a]);
    }
    for (int side = 0; side < 2; ++side) {
      const double position = side == 0 ? box.lo[axis] : box.hi[axis];
      const double sign = side == 0 ? -1.0 : 1.0;
      auto add = [&](std::span<const double> other, double w) {
        RealVec q(d, 0.0);
        for (std::size_t a = 0, k = 0; a < d; ++a) q[a] = a == axis ? position : other[k++];
        total += sign * w * current(model.evaluate(view(q), t), params).j[axis];
      };
      if (d == 1) {
        add({}, 1.0);
      } else {
        for_each_box_node(face, panels, 10, add);
      }
    }
  }
  return total;
}

}  // namespace bohm
