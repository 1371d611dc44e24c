#include "bohm/scenario.hpp"

#include <fstream>
#include <sstream>

namespace bohm {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  fail(ErrorCode::Validation, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& need(const json& obj, const std::string& path, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) invalid(join(path, key), "required field missing");
  return *v;
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected a number");
  return v.get<double>();
}

double get_double(const json& obj, const std::string& path, const std::string& key, double fallback) {
  const json* v = find(obj, key);
  return v ? as_double(*v, join(path, key)) : fallback;
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    invalid(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::size_t get_size(const json& obj, const std::string& path, const std::string& key,
                     std::size_t fallback) {
  const json* v = find(obj, key);
  return v ? static_cast<std::size_t>(as_uint(*v, join(path, key))) : fallback;
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) invalid(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) invalid(path, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

RealVec as_vec(const json& v, const std::string& path) {
  const auto xs = as_doubles(v, path);
  if (xs.empty() || xs.size() > kMaxDim) invalid(path, "expected 1 to 9 coordinates");
  return RealVec(xs.begin(), xs.end());
}

Complex as_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) {
    return {as_double(v[0], path + "[0]"), as_double(v[1], path + "[1]")};
  }
  invalid(path, "expected a number or [re, im]");
}

void expect_object(const json& v, const std::string& path) {
  if (!v.is_object()) invalid(path, "expected an object");
}

std::size_t model_dim(const json& model, const std::string& path) {
  expect_object(model, path);
  const json& fam = need(model, path, "family");
  if (!fam.is_string()) invalid(join(path, "family"), "expected a string");
  const std::string family = fam.get<std::string>();
  if (family == "hermite_superposition_1d" || family == "plane_wave_circle") return 1;
  if (family == "cylindrical_ho_3d") return 3;
  if (family == "free_gaussian") return as_vec(need(model, path, "center"), join(path, "center")).size();
  if (family == "free_gaussian_sum") {
    const json& comps = need(model, path, "components");
    if (!comps.is_array() || comps.empty()) invalid(join(path, "components"), "expected a nonempty array");
    const std::string p = join(path, "components") + "[0]";
    expect_object(comps[0], p);
    return as_vec(need(comps[0], p, "center"), join(p, "center")).size();
  }
  if (family == "grid_backed") {
    const std::string g = join(path, "grid");
    expect_object(need(model, path, "grid"), g);
    return as_vec(need(model["grid"], g, "lo"), join(g, "lo")).size();
  }
  invalid(join(path, "family"), "unknown model family '" + family + "'");
}

PhysicalParams parse_params(const json* physics, std::size_t dim) {
  if (!physics) return PhysicalParams::unit(dim);
  const std::string path = "physics";
  expect_object(*physics, path);
  const double hbar = get_double(*physics, path, "hbar", 1.0);
  std::vector<double> masses{1.0};
  if (const json* m = find(*physics, "masses")) masses = as_doubles(*m, join(path, "masses"));
  const std::size_t nu = get_size(*physics, path, "nu", dim / std::max<std::size_t>(1, masses.size()));
  if (nu * masses.size() != dim) invalid(join(path, "nu"), "nu * particles must equal the model dimension");
  try {
    return PhysicalParams(hbar, masses, nu);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

Potential named_potential(const json& model, const std::string& path) {
  const json* v = find(model, "potential");
  const std::string name = v ? (v->is_string() ? v->get<std::string>() : "") : "free";
  if (name == "free") return {};
  if (name == "harmonic") {
    return [](std::span<const double> q) { return 0.5 * dot(q, q); };
  }
  invalid(join(path, "potential"), "expected \"free\" or \"harmonic\"");
}

ModelPtr parse_model(const json& model, const std::string& path, const PhysicalParams& params,
                     std::shared_ptr<const FrameStore>* frames) {
  const std::string family = model["family"].get<std::string>();
  try {
    if (family == "hermite_superposition_1d") {
      if (const json* preset = find(model, "preset")) {
        if (*preset != "ground_plus_second") invalid(join(path, "preset"), "only \"ground_plus_second\" is known");
        return HermiteSuperposition1D::ground_plus_second();
      }
      const json& cs = need(model, path, "coefficients");
      if (!cs.is_array() || cs.empty()) invalid(join(path, "coefficients"), "expected a nonempty array");
      std::vector<Complex> coeffs;
      for (std::size_t i = 0; i < cs.size(); ++i) {
        coeffs.push_back(as_complex(cs[i], join(path, "coefficients") + "[" + std::to_string(i) + "]"));
      }
      return std::make_shared<HermiteSuperposition1D>(coeffs);
    }
    if (family == "free_gaussian") {
      return std::make_shared<FreeGaussianPacket>(
          params, as_double(need(model, path, "sigma0"), join(path, "sigma0")),
          as_vec(model["center"], join(path, "center")),
          as_vec(need(model, path, "momentum"), join(path, "momentum")));
    }
    if (family == "free_gaussian_sum") {
      std::vector<FreeGaussianSum::Component> comps;
      const json& cs = model["components"];
      for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string p = join(path, "components") + "[" + std::to_string(i) + "]";
        expect_object(cs[i], p);
        FreeGaussianSum::Component c;
        if (const json* w = find(cs[i], "weight")) c.weight = as_complex(*w, join(p, "weight"));
        c.sigma0 = as_double(need(cs[i], p, "sigma0"), join(p, "sigma0"));
        c.center = as_vec(need(cs[i], p, "center"), join(p, "center"));
        c.momentum = as_vec(need(cs[i], p, "momentum"), join(p, "momentum"));
        comps.push_back(std::move(c));
      }
      return std::make_shared<FreeGaussianSum>(params, comps, get_double(model, path, "t_ref", 0.0));
    }
    if (family == "cylindrical_ho_3d") return std::make_shared<CylindricalHO3D>();
    if (family == "plane_wave_circle") {
      const json& ms = need(model, path, "modes");
      if (!ms.is_array() || ms.empty()) invalid(join(path, "modes"), "expected a nonempty array");
      std::vector<std::pair<int, Complex>> modes;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string p = join(path, "modes") + "[" + std::to_string(i) + "]";
        expect_object(ms[i], p);
        const json& k = need(ms[i], p, "k");
        if (!k.is_number_integer()) invalid(join(p, "k"), "expected an integer");
        modes.emplace_back(k.get<int>(), as_complex(need(ms[i], p, "c"), join(p, "c")));
      }
      return std::make_shared<PlaneWaveCircle>(modes, params.hbar(), params.masses()[0]);
    }
    if (family == "grid_backed") {
      const std::string gp = join(path, "grid");
      const json& g = model["grid"];
      GridSpec grid;
      grid.lo = as_vec(g["lo"], join(gp, "lo"));
      grid.hi = as_vec(need(g, gp, "hi"), join(gp, "hi"));
      for (double p : as_doubles(need(g, gp, "points"), join(gp, "points"))) {
        grid.points.push_back(static_cast<std::size_t>(p));
      }
      const std::string b = g.value("boundary", std::string("padded"));
      if (b == "periodic") grid.boundary = GridBoundary::Periodic;
      else if (b == "padded") grid.boundary = GridBoundary::Padded;
      else if (b == "dirichlet") grid.boundary = GridBoundary::Dirichlet;
      else invalid(join(gp, "boundary"), "expected periodic, padded or dirichlet");
      grid.dt = get_double(g, gp, "dt", 1e-3);
      grid.frame_stride = get_size(g, gp, "frame_stride", 10);
      if (grid.lo.size() != grid.hi.size() || grid.lo.size() != grid.points.size()) {
        invalid(gp, "lo, hi and points must have equal length");
      }
      try {
        grid.validate();
      } catch (const Error& e) {
        invalid(gp, e.what());
      }
      const json& init = need(model, path, "initial");
      const std::string ip = join(path, "initial");
      if (model_dim(init, ip) != grid.dim()) invalid(ip, "dimension differs from the grid");
      const ModelPtr initial = parse_model(init, ip, params, nullptr);
      const double horizon = as_double(need(model, path, "horizon"), join(path, "horizon"));
      if (!(horizon > 0.0)) invalid(join(path, "horizon"), "must be > 0");
      const Potential v = named_potential(model, path);
      SplitStepPropagator prop(grid, params, v);
      auto store = std::make_shared<FrameStore>(prop.propagate(prop.sample(*initial, 0.0), horizon));
      if (frames) *frames = store;
      return std::make_shared<GridBackedModel>(store, v);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Validation) throw;
    if (e.code() == ErrorCode::InvalidArgument) invalid(path, e.what());
    throw;
  }
  invalid(join(path, "family"), "unknown model family '" + family + "'");
}

DomainSpec parse_domain(const json* domain, std::size_t dim, bool periodic_model) {
  std::vector<SingularHyperplane> planes;
  std::optional<PeriodicBox> periodic;
  if (periodic_model) periodic = PeriodicBox{0.0, 1.0};
  if (domain) {
    const std::string path = "domain";
    expect_object(*domain, path);
    if (const json* hs = find(*domain, "hyperplanes")) {
      if (!hs->is_array()) invalid(join(path, "hyperplanes"), "expected an array");
      for (std::size_t i = 0; i < hs->size(); ++i) {
        const std::string p = join(path, "hyperplanes") + "[" + std::to_string(i) + "]";
        expect_object((*hs)[i], p);
        const json& ns = need((*hs)[i], p, "normals");
        if (!ns.is_array() || ns.size() != 3) invalid(join(p, "normals"), "expected three normals");
        std::array<RealVec, 3> normals;
        for (std::size_t k = 0; k < 3; ++k) {
          normals[k] = as_vec(ns[k], join(p, "normals") + "[" + std::to_string(k) + "]");
          if (normals[k].size() != dim) invalid(join(p, "normals"), "normal dimension differs from the model");
        }
        std::array<double, 3> offset{0.0, 0.0, 0.0};
        if (const json* o = find((*hs)[i], "offset")) {
          const auto xs = as_doubles(*o, join(p, "offset"));
          if (xs.size() != 3) invalid(join(p, "offset"), "expected three numbers");
          std::copy(xs.begin(), xs.end(), offset.begin());
        }
        try {
          planes.emplace_back(normals, offset);
        } catch (const Error& e) {
          invalid(p, e.what());
        }
      }
    }
    if (const json* pb = find(*domain, "periodic")) {
      expect_object(*pb, join(path, "periodic"));
      periodic = PeriodicBox{get_double(*pb, join(path, "periodic"), "lo", 0.0),
                             get_double(*pb, join(path, "periodic"), "hi", 1.0)};
    }
  }
  try {
    return DomainSpec(dim, planes, periodic);
  } catch (const Error& e) {
    invalid("domain", e.what());
  }
}

std::vector<StoppingRegions> parse_schedule(const json& regions, const DomainSpec& domain) {
  const std::string path = "regions";
  expect_object(regions, path);
  const auto eps = as_doubles(need(regions, path, "epsilon"), join(path, "epsilon"));
  const auto ns = as_doubles(need(regions, path, "n"), join(path, "n"));
  const double horizon = as_double(need(regions, path, "horizon"), join(path, "horizon"));
  const std::size_t planes = domain.hyperplanes().size();
  std::vector<std::vector<double>> deltas;
  if (const json* d = find(regions, "delta")) {
    const std::string dp = join(path, "delta");
    if (d->is_number()) {
      deltas.push_back(std::vector<double>(planes, d->get<double>()));
    } else if (d->is_array()) {
      for (std::size_t i = 0; i < d->size(); ++i) {
        const std::string p = dp + "[" + std::to_string(i) + "]";
        if ((*d)[i].is_number()) {
          deltas.push_back(std::vector<double>(planes, (*d)[i].get<double>()));
        } else {
          deltas.push_back(as_doubles((*d)[i], p));
          if (deltas.back().size() != planes) invalid(p, "expected one radius per hyperplane");
        }
      }
    } else {
      invalid(dp, "expected a number or an array");
    }
  } else if (planes > 0) {
    invalid(join(path, "delta"), "required when the domain has hyperplanes");
  }
  if (eps.empty()) invalid(join(path, "epsilon"), "schedule must be nonempty");
  if (ns.empty()) invalid(join(path, "n"), "schedule must be nonempty");
  if (deltas.empty()) deltas.emplace_back();
  const std::size_t rows = std::max({eps.size(), ns.size(), deltas.size()});
  auto check = [&](std::size_t size, const char* key) {
    if (size != 1 && size != rows) {
      invalid(join(path, key), "schedule length " + std::to_string(size) + " differs from " +
                                   std::to_string(rows) + " (use 1 to broadcast)");
    }
  };
  check(eps.size(), "epsilon");
  check(ns.size(), "n");
  check(deltas.size(), "delta");
  std::vector<StoppingRegions> out;
  for (std::size_t i = 0; i < rows; ++i) {
    StoppingRegions r;
    r.epsilon = eps[eps.size() == 1 ? 0 : i];
    r.n = ns[ns.size() == 1 ? 0 : i];
    r.delta = deltas[deltas.size() == 1 ? 0 : i];
    r.horizon = horizon;
    try {
      r.validate(domain);
    } catch (const Error& e) {
      invalid(path + "[row " + std::to_string(i) + "]", e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

IntegratorConfig parse_integrator(const json* v) {
  IntegratorConfig c;
  if (!v) return c;
  const std::string path = "integrator";
  expect_object(*v, path);
  c.rel_tol = get_double(*v, path, "rel_tol", c.rel_tol);
  c.abs_tol = get_double(*v, path, "abs_tol", c.abs_tol);
  c.max_step = get_double(*v, path, "max_step", c.max_step);
  c.initial_step = get_double(*v, path, "initial_step", c.initial_step);
  c.min_step = get_double(*v, path, "min_step", c.min_step);
  c.event_tol = get_double(*v, path, "event_tol", c.event_tol);
  c.max_steps = get_size(*v, path, "max_steps", c.max_steps);
  c.store_dense = get_bool(*v, path, "store_dense", c.store_dense);
  c.store_samples = get_bool(*v, path, "store_samples", c.store_samples);
  if (const json* o = find(*v, "output_times")) c.output_times = as_doubles(*o, join(path, "output_times"));
  try {
    c.validate();
  } catch (const Error& e) {
    invalid(path, e.what());
  }
  return c;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) invalid("scenario", "expected a JSON object");
  Scenario s;
  const json& name = need(doc, "", "name");
  if (!name.is_string() || name.get<std::string>().empty()) invalid("name", "expected a nonempty string");
  s.name = name.get<std::string>();
  s.seed = as_uint(need(doc, "", "seed"), "seed");
  s.samples = get_size(doc, "", "samples", 1000);
  if (s.samples == 0) invalid("samples", "must be > 0");

  const json& model = need(doc, "", "model");
  const std::size_t dim = model_dim(model, "model");
  s.params = parse_params(find(doc, "physics"), dim);
  s.model = parse_model(model, "model", s.params, &s.frames);
  s.domain = parse_domain(find(doc, "domain"), dim, s.model->periodic());
  s.schedule = parse_schedule(need(doc, "", "regions"), s.domain);
  s.integrator = parse_integrator(find(doc, "integrator"));
  s.entropy = get_bool(doc, "", "entropy", false);

  if (const json* f = find(doc, "flux")) {
    const std::string path = "flux";
    expect_object(*f, path);
    s.flux.nodal = get_bool(*f, path, "nodal", s.flux.nodal);
    s.flux.cover_threshold = get_double(*f, path, "cover_threshold", s.flux.cover_threshold);
    s.flux.max_level = get_size(*f, path, "max_level", s.flux.max_level);
    s.flux.rel_tol = get_double(*f, path, "rel_tol", s.flux.rel_tol);
    if (const json* b = find(*f, "cover_box")) {
      const std::string bp = join(path, "cover_box");
      expect_object(*b, bp);
      Box box{as_vec(need(*b, bp, "lo"), join(bp, "lo")), as_vec(need(*b, bp, "hi"), join(bp, "hi"))};
      if (box.lo.size() != dim || box.hi.size() != dim) invalid(bp, "dimension differs from the model");
      s.flux.cover_box = box;
    }
  }
  if (const json* t = find(doc, "transport")) {
    const std::string path = "transport";
    expect_object(*t, path);
    if (const json* ts = find(*t, "times")) s.transport.times = as_doubles(*ts, join(path, "times"));
    if (const json* q = find(*t, "q0")) s.transport.q0 = as_doubles(*q, join(path, "q0"));
    s.transport.grid_points = get_size(*t, path, "grid_points", 0);
    s.transport.cells = get_size(*t, path, "cells", s.transport.cells);
    for (double x : s.transport.times) {
      if (x < 0.0) invalid(join(path, "times"), "times must be >= 0");
    }
  }
  return s;
}

std::filesystem::path bundled_scenario_dir() { return BOHMLAB_SCENARIO_DIR; }

json load_scenario_document(const std::string& name_or_path) {
  std::filesystem::path p = name_or_path;
  if (!std::filesystem::is_regular_file(p)) {
    const auto bundled = bundled_scenario_dir() / (name_or_path + ".json");
    if (!std::filesystem::is_regular_file(bundled)) {
      fail(ErrorCode::Io, "scenario '" + name_or_path + "' is neither a file nor a bundled scenario");
    }
    p = bundled;
  }
  std::ifstream in(p);
  if (!in) fail(ErrorCode::Io, "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Validation, p.string() + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::Validation, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream ks(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ks, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    if (p.empty()) fail(ErrorCode::Validation, "override key '" + key + "' has an empty segment");
    if (node->is_array()) {
      if (p.find_first_not_of("0123456789") != std::string::npos) {
        fail(ErrorCode::Validation, "override key '" + key + "': '" + p + "' is not an index");
      }
      const std::size_t idx = std::stoul(p);
      if (idx >= node->size()) fail(ErrorCode::Validation, "override key '" + key + "': index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) *node = json::object();
      node = &(*node)[p];
    }
  }
  *node = value;
}

}  // namespace bohm
