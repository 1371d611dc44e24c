#include "bohm/trajectory.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <limits>
#include <thread>

namespace bohm {

namespace {

// Dormand-Prince 5(4) with Hairer's dense output.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double contd5(const double* r, std::size_t d, std::size_t i, double s) {
  const double s1 = 1.0 - s;
  return r[i] + s * (r[d + i] + s1 * (r[2 * d + i] + s * (r[3 * d + i] + s1 * r[4 * d + i])));
}

enum class EventKind { Node = 0, Singular = 1, Ball = 2 };

class Integrator {
 public:
  Integrator(const WavefunctionModel& model, const PhysicalParams& params, const DomainSpec& spec,
             const StoppingRegions& regions, const IntegratorConfig& config, KilledPath& path)
      : model_(model), params_(params), spec_(spec), regions_(regions), config_(config), path_(path),
        d_(model.dim()) {}

  void run(std::span<const double> q0, double t0);

 private:
  RealVec field(double t, const RealVec& q, WavefieldSample& s) {
    ++path_.evaluations;
    s = model_.evaluate(view(q), t);
    RealVec v = velocity(s, params_);
    for (double x : v) {
      if (!std::isfinite(x)) fail(ErrorCode::NodeEvaluation, "non-finite velocity");
    }
    return v;
  }

  double event_value(EventKind kind, double t, const RealVec& q) {
    switch (kind) {
      case EventKind::Node:
        ++path_.evaluations;
        return std::abs(model_.evaluate(view(q), t).psi) - regions_.epsilon;
      case EventKind::Singular: {
        const auto dist = dist_to_singular(spec_, view(q));
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < dist.per_plane.size(); ++l) {
          g = std::min(g, dist.per_plane[l] - regions_.delta[l]);
        }
        return g;
      }
      case EventKind::Ball:
        return regions_.n - norm(view(q));
    }
    return 1.0;
  }

  RealVec dense_at(const std::vector<double>& r, double s) const {
    RealVec q(d_, 0.0);
    for (std::size_t i = 0; i < d_; ++i) q[i] = contd5(r.data(), d_, i, s);
    return q;
  }

  void push_sample(double t, const RealVec& q) {
    path_.times.push_back(t);
    path_.coords.insert(path_.coords.end(), q.begin(), q.end());
  }

  void record_outputs(double from, double to, const std::vector<double>& r, double t, double h) {
    for (std::size_t k = 0; k < config_.output_times.size(); ++k) {
      const double target = config_.output_times[k];
      if (target > from && target <= to) {
        const RealVec q = dense_at(r, (target - t) / h);
        std::copy(q.begin(), q.end(), path_.outputs.begin() + static_cast<long>(k * d_));
      }
    }
  }

  void stop(double t, const RealVec& q, StopCause cause) {
    path_.stop_time = t;
    path_.cause = cause;
    if (path_.times.empty() || path_.times.back() < t) {
      push_sample(t, q);
    } else {
      std::copy(q.begin(), q.end(), path_.coords.end() - static_cast<long>(d_));
    }
  }

  const WavefunctionModel& model_;
  const PhysicalParams& params_;
  const DomainSpec& spec_;
  const StoppingRegions& regions_;
  const IntegratorConfig& config_;
  KilledPath& path_;
  std::size_t d_;
};

StopCause cause_of(RegionClass c) {
  switch (c) {
    case RegionClass::NodeRegion: return StopCause::Node;
    case RegionClass::SingularRegion: return StopCause::Singular;
    case RegionClass::OutsideBall: return StopCause::Ball;
    case RegionClass::Interior: break;
  }
  return StopCause::Horizon;
}

void Integrator::run(std::span<const double> q0_span, double t0) {
  const double T = regions_.horizon;
  const RealVec q0 = to_vec(q0_span);
  path_.dim = d_;
  path_.q0 = q0;
  path_.t0 = t0;
  path_.outputs.assign(config_.output_times.size() * d_, std::numeric_limits<double>::quiet_NaN());
  push_sample(t0, q0);
  for (std::size_t k = 0; k < config_.output_times.size(); ++k) {
    if (config_.output_times[k] == t0) {
      std::copy(q0.begin(), q0.end(), path_.outputs.begin() + static_cast<long>(k * d_));
    }
  }

  WavefieldSample s_cur;
  s_cur = model_.evaluate(view(q0), t0);
  ++path_.evaluations;
  const RegionClass initial =
      classify(spec_, params_, regions_, view(q0), t0, std::abs(s_cur.psi));
  if (initial != RegionClass::Interior) {
    path_.immediately_killed = true;
    stop(t0, q0, cause_of(initial));
    return;
  }

  double t = t0;
  RealVec y = q0;
  RealVec k1;
  try {
    k1 = velocity(s_cur, params_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NodeEvaluation) throw;
    path_.escalated = true;
    stop(t, y, StopCause::Node);
    return;
  }

  const bool has_sing = !spec_.hyperplanes().empty();
  double h = std::min({config_.initial_step, config_.max_step, T - t});
  std::vector<double> r(5 * d_);
  RealVec k2, k3, k4, k5, k6, k7, ytmp(d_, 0.0), ynew(d_, 0.0);
  WavefieldSample s_tmp, s_new;
  auto stage = [&](double tc, std::initializer_list<std::pair<double, const RealVec*>> terms,
                   RealVec& out, WavefieldSample& sample) {
    for (std::size_t i = 0; i < d_; ++i) {
      double acc = y[i];
      for (const auto& [a, k] : terms) acc += h * a * (*k)[i];
      ytmp[i] = acc;
    }
    out = field(tc, ytmp, sample);
  };

  while (t < T) {
    if (path_.accepted_steps + path_.rejected_steps >= config_.max_steps) {
      path_.status = PathStatus::MaxSteps;
      path_.message = "step budget exhausted";
      stop(t, y, StopCause::Horizon);
      return;
    }
    h = std::min({h, config_.max_step, T - t});
    // Near-node guard: |psi| may fall quickly while the velocity grows like 1/|psi|.
    const double psi_abs = std::abs(s_cur.psi);
    {
      Complex total = s_cur.dpsi_dt;
      for (std::size_t i = 0; i < d_; ++i) total += k1[i] * s_cur.grad[i];
      const double rate = std::real(std::conj(s_cur.psi) * total) / psi_abs;  // d|psi|/dt
      const double eps = regions_.epsilon;
      if (psi_abs < 10.0 * eps && rate != 0.0) h = std::min(h, 0.1 * psi_abs / std::abs(rate));
      // Falling |psi|: do not step past the linear estimate of the N^eps contact,
      // otherwise a thin node window can be skipped between event probes.
      if (rate < 0.0) h = std::min(h, std::max(0.5 * (psi_abs - eps), eps) / -rate);
    }
    if (h < config_.min_step * std::max(1.0, std::abs(t))) {
      path_.status = PathStatus::StepSizeUnderflow;
      path_.message = "step size underflow at t = " + std::to_string(t);
      stop(t, y, StopCause::Horizon);
      return;
    }

    double err = 0.0;
    try {
      stage(t + c2 * h, {{a21, &k1}}, k2, s_tmp);
      stage(t + c3 * h, {{a31, &k1}, {a32, &k2}}, k3, s_tmp);
      stage(t + c4 * h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, k4, s_tmp);
      stage(t + c5 * h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, k5, s_tmp);
      stage(t + h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, k6, s_tmp);
      stage(t + h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}}, k7, s_new);
      ynew = ytmp;
      double sum = 0.0;
      for (std::size_t i = 0; i < d_; ++i) {
        const double e =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc =
            config_.abs_tol + config_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        sum += (e / sc) * (e / sc);
      }
      err = std::sqrt(sum / static_cast<double>(d_));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NodeEvaluation) throw;
      // A stage landed on a node: retry with a smaller step, stop if that is impossible.
      ++path_.rejected_steps;
      h *= 0.5;
      if (h < config_.min_step * std::max(1.0, std::abs(t))) {
        path_.escalated = true;
        stop(t, y, StopCause::Node);
        return;
      }
      continue;
    }

    if (!(err <= 1.0)) {
      ++path_.rejected_steps;
      const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= factor;
      continue;
    }

    ++path_.accepted_steps;
    for (std::size_t i = 0; i < d_; ++i) {
      const double dy = ynew[i] - y[i];
      const double bspl = h * k1[i] - dy;
      r[i] = y[i];
      r[d_ + i] = dy;
      r[2 * d_ + i] = bspl;
      r[3 * d_ + i] = dy - h * k7[i] - bspl;
      r[4 * d_ + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                           d7 * k7[i]);
    }
    if (config_.store_dense) {
      path_.step_t0.push_back(t);
      path_.step_h.push_back(h);
      path_.dense.insert(path_.dense.end(), r.begin(), r.end());
    }

    // Event scan on the dense output, then bisection inside the first bracket.
    constexpr double probes[] = {0.25, 0.5, 0.75, 1.0};
    double prev = 0.0;
    double hit = 2.0;
    StopCause hit_cause = StopCause::Horizon;
    for (double s : probes) {
      const RealVec q = s == 1.0 ? ynew : dense_at(r, s);
      const double ts = t + s * h;
      std::array<double, 3> g{};
      g[0] = s == 1.0 ? std::abs(s_new.psi) - regions_.epsilon : event_value(EventKind::Node, ts, q);
      g[1] = has_sing ? event_value(EventKind::Singular, ts, q) : 1.0;
      g[2] = event_value(EventKind::Ball, ts, q);
      for (int kind : {1, 2, 0}) {  // priority order for ties
        if (g[kind] > 0.0) continue;
        double lo = prev, hi = s;
        for (std::size_t it = 0; it < config_.max_event_iters; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double gm = event_value(static_cast<EventKind>(kind), t + mid * h, dense_at(r, mid));
          (gm > 0.0 ? lo : hi) = mid;
          if ((hi - lo) * h <= 1e-15 * std::max(1.0, std::abs(t))) {
            const double gh = event_value(static_cast<EventKind>(kind), t + hi * h, dense_at(r, hi));
            if (gh >= -config_.event_tol) break;
          }
        }
        if (hi < hit) {
          hit = hi;
          hit_cause = kind == 0 ? StopCause::Node : kind == 1 ? StopCause::Singular : StopCause::Ball;
        }
      }
      if (hit <= 1.0) break;
      prev = s;
    }

    if (hit <= 1.0) {
      const double te = t + hit * h;
      const RealVec qe = hit == 1.0 ? ynew : dense_at(r, hit);
      record_outputs(t, te, r, t, h);
      stop(te, qe, hit_cause);
      return;
    }

    record_outputs(t, t + h, r, t, h);
    const double t_next = t + h;
    t = (T - t_next <= 1e-14 * std::max(1.0, std::abs(T))) ? T : t_next;
    y = ynew;
    k1 = k7;
    s_cur = s_new;
    if (config_.store_samples || t >= T) push_sample(t, y);
    const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    h *= factor;
  }
  stop(T, y, StopCause::Horizon);
}

}  // namespace

std::string_view to_string(StopCause c) {
  switch (c) {
    case StopCause::Horizon: return "horizon";
    case StopCause::Node: return "node";
    case StopCause::Singular: return "singular";
    case StopCause::Ball: return "ball";
  }
  return "unknown";
}

std::string_view to_string(PathStatus s) {
  switch (s) {
    case PathStatus::Ok: return "ok";
    case PathStatus::StepSizeUnderflow: return "step_size_underflow";
    case PathStatus::MaxSteps: return "max_steps";
    case PathStatus::NumericalError: return "numerical_error";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  require(rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0 && initial_step > 0.0 &&
              min_step > 0.0 && event_tol > 0.0 && max_event_iters > 0 && max_steps > 0,
          ErrorCode::InvalidArgument, "integrator settings must be positive");
}

RealVec KilledPath::sample(std::size_t i) const {
  RealVec q(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) q[k] = coords[i * dim + k];
  return q;
}

bool KilledPath::alive_at(double t) const {
  if (t < t0) return false;
  if (cause == StopCause::Horizon && !failed()) return t <= stop_time;
  return t < stop_time;
}

RealVec KilledPath::position_at(double t) const {
  require(t >= t0 - 1e-15 && t <= stop_time + 1e-12, ErrorCode::InvalidArgument,
          "position requested outside the path's lifetime");
  if (has_dense()) {
    auto it = std::upper_bound(step_t0.begin(), step_t0.end(), t);
    const std::size_t k = it == step_t0.begin() ? 0 : static_cast<std::size_t>(it - step_t0.begin()) - 1;
    const double s = std::clamp((t - step_t0[k]) / step_h[k], 0.0, 1.0);
    RealVec q(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) q[i] = contd5(dense.data() + 5 * dim * k, dim, i, s);
    return q;
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return terminal();
  if (it == times.begin()) return sample(0);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  RealVec q(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    q[i] = (1.0 - w) * coords[(j - 1) * dim + i] + w * coords[j * dim + i];
  }
  return q;
}

RealVec KilledPath::output(std::size_t k) const {
  RealVec q(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) q[i] = outputs[k * dim + i];
  return q;
}

KilledPath integrate(const WavefunctionModel& model, const PhysicalParams& params,
                     const DomainSpec& spec, const StoppingRegions& regions,
                     std::span<const double> q0, double t0, const IntegratorConfig& config) {
  config.validate();
  regions.validate(spec);
  require(q0.size() == model.dim() && model.dim() == spec.dim() && params.dim() == spec.dim(),
          ErrorCode::InvalidArgument, "dimensions of model, params, domain and q0 must agree");
  require(t0 < regions.horizon, ErrorCode::InvalidArgument, "t0 must precede the horizon");
  KilledPath path;
  Integrator(model, params, spec, regions, config, path).run(q0, t0);
  return path;
}

std::vector<KilledPath> run_ensemble(const WavefunctionModel& model, const PhysicalParams& params,
                                     const DomainSpec& spec, const StoppingRegions& regions,
                                     const EnsembleSample& samples, const IntegratorConfig& config,
                                     std::size_t threads) {
  config.validate();
  regions.validate(spec);
  const std::size_t count = samples.configurations.size();
  std::vector<KilledPath> paths(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      KilledPath& path = paths[i];
      try {
        path = integrate(model, params, spec, regions, view(samples.configurations[i]), 0.0, config);
      } catch (const std::exception& e) {
        path = KilledPath{};
        path.dim = model.dim();
        path.q0 = samples.configurations[i];
        path.times = {0.0};
        path.coords.assign(path.q0.begin(), path.q0.end());
        path.status = PathStatus::NumericalError;
        path.message = e.what();
      }
      path.id = i;
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, count));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return paths;
}

Interval proportion_interval(std::size_t k, std::size_t n) {
  require(n > 0, ErrorCode::EmptyEnsemble, "proportion of an empty sample");
  const double nn = static_cast<double>(n);
  if (k == 0) return {0.0, std::min(1.0, 3.0 / nn)};
  const double z = 1.959963984540054;
  const double p = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

StoppingStatistics stopping_statistics(const std::vector<KilledPath>& paths) {
  if (paths.empty()) fail(ErrorCode::EmptyEnsemble, "no paths to summarize");
  StoppingStatistics st;
  st.count = paths.size();
  for (const auto& p : paths) {
    if (p.failed()) {
      ++st.failed;
      continue;
    }
    if (p.immediately_killed) ++st.immediate;
    switch (p.cause) {
      case StopCause::Horizon: ++st.horizon; break;
      case StopCause::Node: ++st.node; break;
      case StopCause::Singular: ++st.singular; break;
      case StopCause::Ball: ++st.ball; break;
    }
  }
  const std::size_t stopped = st.count - st.horizon;
  const double n = static_cast<double>(st.count);
  st.p_hat = static_cast<double>(stopped) / n;
  st.sigma_hat = std::sqrt(st.p_hat * (1.0 - st.p_hat) / n);
  st.interval = proportion_interval(stopped, st.count);
  st.p_dynamic = static_cast<double>(stopped - st.immediate) / n;
  st.dynamic_interval = proportion_interval(stopped - st.immediate, st.count);
  st.immediate_fraction = static_cast<double>(st.immediate) / n;
  st.immediate_interval = proportion_interval(st.immediate, st.count);
  return st;
}

}  // namespace bohm
