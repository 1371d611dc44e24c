#pragma once

// Scenario files: JSON documents naming a model, domain, stopping-region
// schedule, integrator settings and the single seed every random stream derives from.

#include "bohm/domain.hpp"
#include "bohm/propagator.hpp"
#include "bohm/trajectory.hpp"
#include "bohm/wavefunction.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bohm {

struct FluxSettings {
  bool nodal = true;
  std::optional<Box> cover_box;  // defaults to the mass box at t = 0, clipped to [-n, n]
  double cover_threshold = 1e-3;
  std::size_t max_level = 5;
  double rel_tol = 1e-3;
};

struct TransportSettings {
  std::vector<double> times;
  std::vector<double> q0;          // explicit starting points
  std::size_t grid_points = 0;     // or this many evenly spaced points in the mass box
  std::size_t cells = 2048;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  ModelPtr model;
  PhysicalParams params = PhysicalParams::unit(1);
  DomainSpec domain{1};
  /// One entry per schedule row (eps_i, delta_i, n_i, T).
  std::vector<StoppingRegions> schedule;
  IntegratorConfig integrator;
  FluxSettings flux;
  TransportSettings transport;
  bool entropy = false;
  /// Frames behind a grid-backed model (written by `simulate`).
  std::shared_ptr<const FrameStore> frames;
};

/// Parses and validates a scenario document. Errors are Validation errors whose
/// message starts with the offending field path, e.g. "model.family: ...".
Scenario parse_scenario(const nlohmann::json& document);

/// Loads `name_or_path`: an existing file, or the name of a bundled scenario.
nlohmann::json load_scenario_document(const std::string& name_or_path);

/// Applies "a.b.c=value" (value parsed as JSON when possible, else taken as a string).
void apply_override(nlohmann::json& document, const std::string& assignment);

/// Directory holding the bundled scenarios.
std::filesystem::path bundled_scenario_dir();

}  // namespace bohm
