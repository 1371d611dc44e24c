#include "bohm/cli.hpp"

#include "bohm/flux.hpp"
#include "bohm/rng.hpp"
#include "bohm/stats.hpp"
#include "bohm/transport1d.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

namespace bohm {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) fail(ErrorCode::Io, "cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "missing input " + path.string() + " (run the producing subcommand first)");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

json regions_json(const StoppingRegions& r) {
  return {{"epsilon", r.epsilon}, {"delta", r.delta}, {"n", r.n}, {"horizon", r.horizon}};
}

StoppingRegions regions_from(const json& j) {
  StoppingRegions r;
  r.epsilon = j.at("epsilon").get<double>();
  r.delta = j.at("delta").get<std::vector<double>>();
  r.n = j.at("n").get<double>();
  r.horizon = j.at("horizon").get<double>();
  return r;
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json stats_json(const StoppingStatistics& s) {
  return {{"count", s.count},
          {"horizon", s.horizon},
          {"node", s.node},
          {"singular", s.singular},
          {"ball", s.ball},
          {"failed", s.failed},
          {"immediate", s.immediate},
          {"p_hat", s.p_hat},
          {"sigma_hat", s.sigma_hat},
          {"interval", interval_json(s.interval)},
          {"p_dynamic", s.p_dynamic},
          {"dynamic_interval", interval_json(s.dynamic_interval)},
          {"immediate_fraction", s.immediate_fraction},
          {"immediate_interval", interval_json(s.immediate_interval)}};
}

StoppingStatistics stats_from(const json& j) {
  StoppingStatistics s;
  s.count = j.at("count").get<std::size_t>();
  s.horizon = j.at("horizon").get<std::size_t>();
  s.node = j.at("node").get<std::size_t>();
  s.singular = j.at("singular").get<std::size_t>();
  s.ball = j.at("ball").get<std::size_t>();
  s.failed = j.at("failed").get<std::size_t>();
  s.immediate = j.at("immediate").get<std::size_t>();
  s.p_hat = j.at("p_hat").get<double>();
  s.sigma_hat = j.at("sigma_hat").get<double>();
  s.interval = {j.at("interval")[0].get<double>(), j.at("interval")[1].get<double>()};
  s.p_dynamic = j.at("p_dynamic").get<double>();
  s.immediate_fraction = j.at("immediate_fraction").get<double>();
  return s;
}

std::string join_delta(const std::vector<double>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? ";" : "") + fmt(d[i]);
  return s;
}

Box cover_box(const Scenario& sc, const StoppingRegions& r) {
  if (sc.flux.cover_box) return *sc.flux.cover_box;
  Box box = sc.model->mass_box(0.0);
  const Box late = sc.model->mass_box(r.horizon);
  for (std::size_t a = 0; a < box.dim(); ++a) {
    box.lo[a] = std::min(box.lo[a], late.lo[a]);
    box.hi[a] = std::max(box.hi[a], late.hi[a]);
    if (!sc.model->periodic()) {
      box.lo[a] = std::max(box.lo[a], -r.n);
      box.hi[a] = std::min(box.hi[a], r.n);
    }
  }
  return box;
}

}  // namespace

json cmd_simulate(const Scenario& sc, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  const std::size_t d = sc.model->dim();
  const EnsembleSample ens = sample_initial(*sc.model, sc.samples, sc.seed);
  json rows = json::array();
  for (std::size_t i = 0; i < sc.schedule.size(); ++i) {
    const StoppingRegions& r = sc.schedule[i];
    const auto paths = run_ensemble(*sc.model, sc.params, sc.domain, r, ens, sc.integrator, opt.threads);
    const StoppingStatistics st = stopping_statistics(paths);

    std::vector<std::string> header{"id"};
    for (std::size_t a = 0; a < d; ++a) header.push_back("q0_" + std::to_string(a));
    for (const char* h : {"stop_time", "cause", "status", "immediately_killed", "escalated"}) header.push_back(h);
    for (std::size_t a = 0; a < d; ++a) header.push_back("q_end_" + std::to_string(a));
    CsvWriter pcsv(opt.out_dir / ("paths_row" + std::to_string(i) + ".csv"), header);
    for (const auto& p : paths) {
      std::vector<std::string> cells{std::to_string(p.id)};
      for (double x : p.q0) cells.push_back(fmt(x));
      cells.push_back(fmt(p.stop_time));
      cells.emplace_back(to_string(p.cause));
      cells.emplace_back(to_string(p.status));
      cells.push_back(p.immediately_killed ? "1" : "0");
      cells.push_back(p.escalated ? "1" : "0");
      for (double x : p.terminal()) cells.push_back(fmt(x));
      pcsv.row(cells);
    }

    json row = {{"regions", regions_json(r)}, {"stats", stats_json(st)}};
    if (!sc.integrator.output_times.empty()) {
      std::vector<std::string> h2{"id", "t"};
      for (std::size_t a = 0; a < d; ++a) h2.push_back("q_" + std::to_string(a));
      CsvWriter ocsv(opt.out_dir / ("positions_row" + std::to_string(i) + ".csv"), h2);
      json equi = json::array();
      for (std::size_t k = 0; k < sc.integrator.output_times.size(); ++k) {
        const double t = sc.integrator.output_times[k];
        std::vector<RealVec> alive;
        for (const auto& p : paths) {
          const RealVec q = p.output(k);
          if (!std::isfinite(q[0])) continue;
          alive.push_back(q);
          std::vector<std::string> cells{std::to_string(p.id), fmt(t)};
          for (double x : q) cells.push_back(fmt(x));
          ocsv.row(cells);
        }
        EquivarianceOptions eo;
        eo.spec = sc.domain;
        eo.regions = r;
        eo.params = sc.params;
        eo.seed = stream_seed(sc.seed, kStreamReference, k);
        try {
          const auto rep = equivariance_test(alive, paths.size(), *sc.model, t, eo);
          equi.push_back({{"t", t}, {"ks", rep.ks}, {"ks_threshold", rep.ks_threshold}, {"l1", rep.l1},
                          {"l1_reference", rep.l1_reference}, {"killed_fraction", rep.killed_fraction},
                          {"samples", rep.samples}, {"pass", rep.pass}});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::TooFewAlive) throw;
          equi.push_back({{"t", t}, {"error", e.what()}});
        }
      }
      row["equivariance"] = equi;
    }
    if (sc.entropy) {
      const auto en = entropy_functional(paths, *sc.model, sc.params, r.horizon);
      row["entropy"] = {{"mean_abs", en.mean_abs}, {"std_error", en.std_error}, {"max_abs", en.max_abs},
                        {"bound", en.bound}, {"time_term", en.time_term},
                        {"gradient_term", en.gradient_term}, {"paths", en.paths}, {"pass", en.pass}};
    }
    rows.push_back(row);
  }
  if (sc.frames) sc.frames->write((opt.out_dir / "frames.bin").string());
  json summary = {{"scenario", sc.name}, {"seed", sc.seed}, {"samples", sc.samples},
                  {"family", sc.model->family()}, {"rows", rows}};
  write_json(opt.out_dir / "simulate.json", summary);
  return summary;
}

json cmd_flux(const Scenario& sc, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  FluxQuadrature quad;
  quad.max_level = sc.flux.max_level;
  quad.rel_tol = sc.flux.rel_tol;
  CsvWriter csv(opt.out_dir / "flux_table.csv",
                {"row", "epsilon", "delta", "n", "horizon", "initial_mass", "nodal", "singular",
                 "infinity", "infinity_bound", "sum"});
  json rows = json::array();
  for (std::size_t i = 0; i < sc.schedule.size(); ++i) {
    const StoppingRegions& r = sc.schedule[i];
    BoundTerms b;
    b.epsilon = r.epsilon;
    b.delta = r.delta;
    b.n = r.n;
    b.horizon = r.horizon;
    b.initial_mass = initial_killed_mass(*sc.model, sc.params, sc.domain, r);
    json row = {{"regions", regions_json(r)}};
    double inf_bound = 0.0;
    bool sphere_inside = true;
    if (sc.frames) {
      const Box box = sc.model->mass_box(0.0);
      for (std::size_t a = 0; a < box.dim(); ++a) {
        sphere_inside = sphere_inside && box.lo[a] <= -r.n && r.n <= box.hi[a];
      }
    }
    if (!sphere_inside) {
      row["infinity"] = {{"skipped", "sphere |q| = n leaves the stored grid"}};
    } else if (!sc.model->periodic() && sc.model->dim() <= 3) {
      const auto inf = infinity_integral(*sc.model, sc.params, r.n, r.horizon, quad);
      b.infinity = inf.flux.value;
      inf_bound = inf.bound;
      row["infinity"] = {{"value", inf.flux.value}, {"error", inf.flux.error}, {"tilde", inf.tilde},
                         {"bound", inf.bound}};
    }
    if (!sc.domain.hyperplanes().empty()) {
      const auto s = singular_integral(*sc.model, sc.params, sc.domain, r.delta, r.n, r.horizon, quad);
      b.singular = s.value;
      row["singular"] = {{"value", s.value}, {"error", s.error}};
    }
    if (sc.flux.nodal) {
      const Box box = cover_box(sc, r);
      CoverRegion region{box.lo, box.hi, 0.0, r.horizon, r.n, &sc.domain, r.delta};
      CoverOptions co;
      co.threshold = sc.flux.cover_threshold;
      const auto cover = build_nodal_cover(*sc.model, r.epsilon, region, co);
      const auto nod = nodal_integral(*sc.model, sc.params, cover, quad);
      b.nodal = nod.value;
      row["nodal"] = {{"value", nod.value}, {"error", nod.error}, {"cubes", cover.cubes.size()},
                      {"suspects", cover.suspects.size()}, {"measure", cover.measure()}};
    }
    const double sum = b.initial_mass + b.nodal + b.singular + b.infinity;
    row["initial_mass"] = b.initial_mass;
    row["terms"] = {{"initial_mass", b.initial_mass}, {"nodal", b.nodal}, {"singular", b.singular},
                    {"infinity", b.infinity}};
    row["sum"] = sum;
    csv.row({std::to_string(i), fmt(r.epsilon), join_delta(r.delta), fmt(r.n), fmt(r.horizon),
             fmt(b.initial_mass), fmt(b.nodal), fmt(b.singular), fmt(b.infinity), fmt(inf_bound),
             fmt(sum)});
    rows.push_back(row);
  }
  json summary = {{"scenario", sc.name}, {"family", sc.model->family()}, {"rows", rows}};
  write_json(opt.out_dir / "flux.json", summary);
  return summary;
}

json cmd_transport(const Scenario& sc, const RunOptions& opt) {
  if (sc.model->dim() != 1) fail(ErrorCode::NotApplicable, "transport needs a 1D model");
  std::filesystem::create_directories(opt.out_dir);
  std::vector<double> times = sc.transport.times;
  if (times.empty()) times = sc.integrator.output_times;
  if (times.empty()) times = {sc.schedule.front().horizon};
  std::vector<double> q0 = sc.transport.q0;
  if (q0.empty()) {
    const Box box = sc.model->mass_box(0.0);
    const std::size_t m = sc.transport.grid_points ? sc.transport.grid_points : 101;
    for (std::size_t i = 0; i < m; ++i) {
      q0.push_back(box.lo[0] + (box.hi[0] - box.lo[0]) * (static_cast<double>(i) + 0.5) / static_cast<double>(m));
    }
  }
  std::sort(q0.begin(), q0.end());
  const bool circle = sc.model->periodic();
  const CdfTable initial = CdfTable::build(*sc.model, 0.0, sc.transport.cells);
  CsvWriter csv(opt.out_dir / "transport.csv", {"t", "q0", "Q", "level", "winding"});
  json per_time = json::array();
  for (double t : times) {
    const CdfTable current = CdfTable::build(*sc.model, t, sc.transport.cells);
    const double A = circle ? boundary_current_integral(*sc.model, sc.params, t) : 0.0;
    bool monotone = true;
    double prev_key = -std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    double prev_q = std::numeric_limits<double>::quiet_NaN();
    std::size_t jumps = 0;
    for (double x : q0) {
      double Q, level, key;
      long winding = 0;
      if (circle) {
        const auto cp = circle_transport(initial, current, x, A);
        Q = cp.q;
        level = cp.level;
        winding = cp.winding;
        key = cp.level;
        jumps += winding != 0;
      } else {
        Q = transport_map(initial, current, x);
        level = initial(x);
        key = Q;
      }
      if (key < prev_key) monotone = false;
      prev_key = key;
      if (!circle && std::isfinite(prev_q) && std::isfinite(Q)) max_gap = std::max(max_gap, Q - prev_q);
      prev_q = Q;
      csv.row({fmt(t), fmt(x), fmt(Q), fmt(level), std::to_string(winding)});
    }
    json entry = {{"t", t}, {"monotone", monotone}, {"plateaus", current.plateaus().size()}};
    if (circle) {
      entry["boundary_integral"] = A;
      entry["wrapped_points"] = jumps;
    } else {
      entry["max_gap"] = max_gap;
    }
    per_time.push_back(entry);
  }
  json summary = {{"scenario", sc.name}, {"family", sc.model->family()}, {"points", q0.size()},
                  {"times", per_time}};
  write_json(opt.out_dir / "transport.json", summary);
  return summary;
}

json cmd_report(const Scenario& sc, const RunOptions& opt) {
  const json sim = read_json(opt.out_dir / "simulate.json");
  const json flux = read_json(opt.out_dir / "flux.json");
  std::vector<StoppingRegions> regions;
  std::vector<StoppingStatistics> stats;
  std::vector<BoundTerms> bounds;
  try {
    for (const auto& row : sim.at("rows")) {
      regions.push_back(regions_from(row.at("regions")));
      stats.push_back(stats_from(row.at("stats")));
    }
    for (const auto& row : flux.at("rows")) {
      const StoppingRegions r = regions_from(row.at("regions"));
      BoundTerms b;
      b.epsilon = r.epsilon;
      b.delta = r.delta;
      b.n = r.n;
      b.horizon = r.horizon;
      const json& t = row.at("terms");
      b.initial_mass = t.at("initial_mass").get<double>();
      b.nodal = t.at("nodal").get<double>();
      b.singular = t.at("singular").get<double>();
      b.infinity = t.at("infinity").get<double>();
      bounds.push_back(b);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("malformed simulate/flux output: ") + e.what());
  }
  const ExistenceReport rep = global_existence_report(regions, stats, bounds);
  CsvWriter csv(opt.out_dir / "report.csv",
                {"row", "epsilon", "delta", "n", "horizon", "p_hat", "sigma_hat", "initial_mass",
                 "nodal", "singular", "infinity", "sum", "margin", "pass"});
  json rows = json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    csv.row({std::to_string(i), fmt(r.regions.epsilon), join_delta(r.regions.delta), fmt(r.regions.n),
             fmt(r.regions.horizon), fmt(r.stats.p_hat), fmt(r.stats.sigma_hat),
             fmt(r.terms.initial_mass), fmt(r.terms.nodal), fmt(r.terms.singular),
             fmt(r.terms.infinity), fmt(r.sum), fmt(r.margin), r.pass ? "1" : "0"});
    rows.push_back({{"regions", regions_json(r.regions)}, {"p_hat", r.stats.p_hat},
                    {"sigma_hat", r.stats.sigma_hat}, {"sum", r.sum}, {"margin", r.margin},
                    {"pass", r.pass}});
  }
  json summary = {{"scenario", sc.name}, {"rows", rows}, {"all_pass", rep.all_pass},
                  {"sum_decreasing", rep.sum_decreasing}};
  write_json(opt.out_dir / "report.json", summary);
  return summary;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Validation:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MismatchedParameters:
    case ErrorCode::NotApplicable:
    case ErrorCode::Io:
      return 2;
    default:
      return 3;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bohmian trajectory and flux laboratory"};
  app.require_subcommand(1);
  std::string scenario_arg;
  std::string out_dir = "out";
  std::size_t threads = 1;
  std::vector<std::string> overrides;
  const char* names[] = {"simulate", "flux", "transport", "report", "validate"};
  const char* help[] = {"run ensembles of the killed process", "compute the bound terms per schedule row",
                        "evaluate the 1D CDF transport map", "merge simulate and flux outputs",
                        "check a scenario without running it"};
  for (std::size_t i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--scenario", scenario_arg, "scenario file or bundled scenario name")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--override", overrides, "key.path=value (repeatable)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    json doc = load_scenario_document(scenario_arg);
    for (const auto& o : overrides) apply_override(doc, o);
    const Scenario sc = parse_scenario(doc);
    RunOptions opt{out_dir, threads};
    if (cmd == "validate") {
      out << "scenario " << sc.name << ": ok (" << sc.model->family() << ", d = " << sc.model->dim()
          << ", " << sc.schedule.size() << " schedule rows)\n";
      return 0;
    }
    json summary;
    if (cmd == "simulate") summary = cmd_simulate(sc, opt);
    else if (cmd == "flux") summary = cmd_flux(sc, opt);
    else if (cmd == "transport") summary = cmd_transport(sc, opt);
    else summary = cmd_report(sc, opt);
    out << cmd << ": wrote " << out_dir << '\n';
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace bohm
