#include "bohm/stats.hpp"

#include "bohm/transport1d.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numbers>

namespace bohm {

namespace {

const double kLog40 = std::log(2.0 / 0.05);

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

double ks_threshold(std::size_t n) {
  return std::sqrt(kLog40 / (2.0 * static_cast<double>(n))) + 0.005;
}

double ks_threshold(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return std::sqrt(kLog40 / 2.0 * (nn + mm) / (nn * mm)) + 0.005;
}

double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), ErrorCode::InvalidArgument, "KS statistic of an empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::InvalidArgument, "KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

EquivarianceReport equivariance_test(const std::vector<RealVec>& alive, std::size_t total,
                                     const WavefunctionModel& model, double t,
                                     const EquivarianceOptions& options) {
  if (alive.size() < 100) fail(ErrorCode::TooFewAlive, "fewer than 100 alive paths");
  require(total >= alive.size(), ErrorCode::InvalidArgument, "total below alive count");
  const std::size_t d = model.dim();
  EquivarianceReport rep;
  rep.t = t;
  rep.samples = alive.size();
  rep.total = total;
  rep.killed_fraction = 1.0 - static_cast<double>(alive.size()) / static_cast<double>(total);

  std::function<bool(std::span<const double>)> keep;
  if (options.regions) {
    require(options.spec.has_value(), ErrorCode::InvalidArgument, "survivor mask needs a domain");
    const DomainSpec spec = *options.spec;
    const StoppingRegions regions = *options.regions;
    const PhysicalParams params = options.params ? *options.params : PhysicalParams::unit(d);
    keep = [&model, spec, regions, params, t](std::span<const double> q) {
      const double psi_abs = std::abs(model.evaluate(q, t).psi);
      return classify(spec, params, regions, q, t, psi_abs) == RegionClass::Interior;
    };
  }

  if (d == 1) {
    std::function<bool(double)> keep1;
    if (keep) keep1 = [&keep](double q) { return keep(std::span<const double>(&q, 1)); };
    const CdfTable table = CdfTable::build(model, t, 4096, std::nullopt, keep1);
    const double mass = table.total();
    const double lo = table.lower(), hi = table.upper();
    std::vector<double> x;
    x.reserve(alive.size());
    for (const auto& q : alive) {
      double v = q[0];
      if (model.periodic()) v = lo + (v - lo) - (hi - lo) * std::floor((v - lo) / (hi - lo));
      x.push_back(v);
    }
    auto cdf_fn = [&](double q) { return table(q) / mass; };
    rep.ks = ks_statistic(x, cdf_fn);
    rep.ks_threshold = ks_threshold(alive.size());

    const std::size_t bins = std::max<std::size_t>(2, options.bins);
    std::vector<double> counts(bins, 0.0);
    for (double v : x) {
      const auto b = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
      counts[static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(bins) - 1))] += 1.0;
    }
    const double n = static_cast<double>(x.size());
    double prev = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double edge = lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(bins);
      const double f = b + 1 == bins ? 1.0 : cdf_fn(edge);
      const double p = f - prev;
      prev = f;
      rep.l1 += std::abs(counts[b] / n - p);
      rep.l1_reference += std::sqrt(2.0 / std::numbers::pi * std::max(0.0, p * (1.0 - p)) / n);
    }
    rep.pass = rep.ks <= rep.ks_threshold;
    return rep;
  }

  // d >= 2: two-sample tests against fresh draws from |psi_t|^2 on the surviving set.
  SamplingOptions sopt;
  sopt.time = t;
  const EnsembleSample fresh = sample_initial(model, options.reference_samples, options.seed, sopt);
  std::vector<RealVec> ref;
  for (const auto& q : fresh.configurations) {
    if (!keep || keep(view(q))) ref.push_back(q);
  }
  require(ref.size() >= 100, ErrorCode::TooFewAlive, "reference sample nearly all killed");
  rep.ks_threshold = ks_threshold(alive.size(), ref.size());
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> xa, xb;
    for (const auto& q : alive) xa.push_back(q[a]);
    for (const auto& q : ref) xb.push_back(q[a]);
    rep.marginal_ks.push_back(ks_statistic_two_sample(xa, xb));
  }
  rep.ks = *std::max_element(rep.marginal_ks.begin(), rep.marginal_ks.end());

  const auto per_axis = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(options.bins), 1.0 / static_cast<double>(d)))));
  RealVec lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  const std::vector<RealVec>* both[] = {&alive, &ref};
  for (const auto* set : both) {
    for (const auto& q : *set) {
      for (std::size_t a = 0; a < d; ++a) {
        lo[a] = std::min(lo[a], q[a]);
        hi[a] = std::max(hi[a], q[a]);
      }
    }
  }
  auto bin_of = [&](const RealVec& q) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < d; ++a) {
      const double width = hi[a] - lo[a];
      auto b = width > 0.0 ? static_cast<long>((q[a] - lo[a]) / width * static_cast<double>(per_axis)) : 0L;
      b = std::clamp<long>(b, 0, static_cast<long>(per_axis) - 1);
      flat = flat * per_axis + static_cast<std::size_t>(b);
    }
    return flat;
  };
  std::map<std::size_t, std::pair<double, double>> hist;
  for (const auto& q : alive) hist[bin_of(q)].first += 1.0;
  for (const auto& q : ref) hist[bin_of(q)].second += 1.0;
  const double na = static_cast<double>(alive.size()), nb = static_cast<double>(ref.size());
  for (const auto& [bin, c] : hist) {
    rep.l1 += std::abs(c.first / na - c.second / nb);
    const double p = (c.first + c.second) / (na + nb);
    rep.l1_reference += std::sqrt(2.0 / std::numbers::pi * p * (1.0 - p) * (1.0 / na + 1.0 / nb));
  }
  rep.pass = rep.ks <= rep.ks_threshold;
  return rep;
}

EquivarianceReport equivariance_test(const std::vector<KilledPath>& paths,
                                     const WavefunctionModel& model, double t,
                                     const EquivarianceOptions& options) {
  std::vector<RealVec> alive;
  for (const auto& p : paths) {
    if (p.alive_at(t)) alive.push_back(p.position_at(t));
  }
  return equivariance_test(alive, paths.size(), model, t, options);
}

EntropyReport entropy_functional(const std::vector<KilledPath>& paths,
                                 const WavefunctionModel& model, const PhysicalParams& params,
                                 double T, const EntropyQuadrature& quad) {
  EntropyReport rep;
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : paths) {
    if (p.failed()) {
      ++rep.skipped;
      continue;
    }
    const double end = std::min(p.stop_time, T);
    const RealVec q_end = p.position_at(end);
    const double a = std::abs(model.evaluate(view(q_end), end).psi);
    const double b = std::abs(model.evaluate(view(p.q0), p.t0).psi);
    const double dval = std::abs(std::log(a) - std::log(b));
    sum += dval;
    sum2 += dval * dval;
    rep.max_abs = std::max(rep.max_abs, dval);
    ++rep.paths;
  }
  if (rep.paths > 0) {
    const double n = static_cast<double>(rep.paths);
    rep.mean_abs = sum / n;
    const double var = rep.paths > 1 ? std::max(0.0, (sum2 - n * rep.mean_abs * rep.mean_abs) / (n - 1.0)) : 0.0;
    rep.std_error = std::sqrt(var / n);
  }

  Box box = model.mass_box(0.0);
  const Box box_t = model.mass_box(T);
  for (std::size_t a = 0; a < box.dim(); ++a) {
    box.lo[a] = std::min(box.lo[a], box_t.lo[a]);
    box.hi[a] = std::max(box.hi[a], box_t.hi[a]);
  }
  std::vector<double> tt, wt;
  composite_gauss(0.0, T, quad.time_panels, quad.points, tt, wt);
  for (std::size_t i = 0; i < tt.size(); ++i) {
    for_each_box_node(box, quad.space_panels, quad.points, [&](std::span<const double> q, double w) {
      const WavefieldSample s = model.evaluate(q, tt[i]);
      double g2 = 0.0;
      for (const auto& z : s.grad) g2 += std::norm(z);
      rep.time_term += wt[i] * w * std::abs(std::real(std::conj(s.psi) * s.dpsi_dt));
      rep.gradient_term += wt[i] * w * g2;
    });
  }
  rep.bound = rep.time_term + params.mu() * rep.gradient_term;
  rep.pass = rep.mean_abs - 3.0 * rep.std_error <= rep.bound;
  return rep;
}

double initial_killed_mass(const WavefunctionModel& model, const PhysicalParams& params,
                           const DomainSpec& spec, const StoppingRegions& regions,
                           std::size_t panels) {
  const std::size_t d = model.dim();
  const std::size_t per_axis = std::max<std::size_t>(8, panels >> (2 * (d - 1)));
  // Cells whose Gauss nodes disagree on the classification are bisected along every axis.
  const std::size_t max_depth = d == 1 ? 24 : d == 2 ? 8 : d == 3 ? 3 : 0;
  const Box box = model.mass_box(0.0);

  std::function<double(const RealVec&, const RealVec&, std::size_t)> cell =
      [&](const RealVec& lo, const RealVec& hi, std::size_t depth) {
        double killed = 0.0;
        bool any_killed = false, any_alive = false;
        for_each_box_node(Box{lo, hi}, 1, 4, [&](std::span<const double> q, double w) {
          const WavefieldSample s = model.evaluate(q, 0.0);
          if (classify(spec, params, regions, q, 0.0, std::abs(s.psi)) != RegionClass::Interior) {
            killed += w * s.abs2;
            any_killed = true;
          } else {
            any_alive = true;
          }
        });
        const std::size_t children = std::size_t{1} << d;
        // Corners catch a region boundary that falls between a cell edge and its outer nodes.
        for (std::size_t c = 0; c < children && !(any_killed && any_alive); ++c) {
          RealVec q(d, 0.0);
          for (std::size_t a = 0; a < d; ++a) q[a] = (c >> a & 1) ? hi[a] : lo[a];
          const double psi_abs = std::abs(model.evaluate(view(q), 0.0).psi);
          if (classify(spec, params, regions, view(q), 0.0, psi_abs) != RegionClass::Interior) any_killed = true;
          else any_alive = true;
        }
        if (!(any_killed && any_alive) || depth >= max_depth) return killed;
        double sum = 0.0;
        for (std::size_t c = 0; c < children; ++c) {
          RealVec clo = lo, chi = hi;
          for (std::size_t a = 0; a < d; ++a) {
            const double mid = 0.5 * (lo[a] + hi[a]);
            if (c >> a & 1) clo[a] = mid;
            else chi[a] = mid;
          }
          sum += cell(clo, chi, depth + 1);
        }
        return sum;
      };

  double mass = 0.0;
  std::vector<std::size_t> idx(d, 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(static_cast<double>(per_axis), static_cast<double>(d)));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    RealVec lo(d, 0.0), hi(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t i = rest % per_axis;
      rest /= per_axis;
      const double h = (box.hi[a] - box.lo[a]) / static_cast<double>(per_axis);
      lo[a] = box.lo[a] + h * static_cast<double>(i);
      hi[a] = lo[a] + h;
    }
    mass += cell(lo, hi, 0);
  }
  return mass;
}

ExistenceReport global_existence_report(const std::vector<StoppingRegions>& regions,
                                        const std::vector<StoppingStatistics>& stats,
                                        const std::vector<BoundTerms>& bounds) {
  if (regions.size() != stats.size() || regions.size() != bounds.size()) {
    fail(ErrorCode::MismatchedParameters, "ensemble and bound schedules differ in length");
  }
  ExistenceReport rep;
  rep.all_pass = true;
  rep.sum_decreasing = true;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    const auto& b = bounds[i];
    bool match = same(r.epsilon, b.epsilon) && same(r.n, b.n) && same(r.horizon, b.horizon) &&
                 r.delta.size() == b.delta.size();
    for (std::size_t l = 0; match && l < r.delta.size(); ++l) match = same(r.delta[l], b.delta[l]);
    if (!match) {
      fail(ErrorCode::MismatchedParameters,
           "row " + std::to_string(i) + ": ensemble (eps, delta, n, T) differ from the bound terms");
    }
    ExistenceRow row;
    row.regions = r;
    row.stats = stats[i];
    row.terms = b;
    row.sum = b.initial_mass + b.nodal + b.singular + b.infinity;
    row.margin = row.sum - (stats[i].p_hat - 3.0 * stats[i].sigma_hat);
    row.pass = row.margin >= 0.0;
    rep.all_pass = rep.all_pass && row.pass;
    if (i > 0 && !(row.sum < rep.rows.back().sum)) rep.sum_decreasing = false;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace bohm
