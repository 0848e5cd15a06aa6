#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmn/scenario.hpp"

namespace pmn {

/// Everything a simulation run needs besides method choices. Loaded from a
/// single JSON file; dBm/dB fields are converted to SI here and nowhere else.
struct ExperimentConfig {
  Scenario scenario;
  double dt = 0.5;
  double qs = 5.0;
  std::vector<TargetState> targets;
  int frames = 10;
  double init_sigma_r = 10.0;  // m, initial state std for position
  double init_sigma_v = 5.0;   // m/s
  bool init_estimate_error = true;
  double region_half_width = 200.0;  // nodes and training targets live in [-w, w]^2
  std::uint64_t layout_seed = 1;     // used when nodes are generated rather than listed

  MotionModel motion() const { return build_motion_model(dt, qs); }
};

/// Parses the config schema documented in README.md. Throws
/// std::invalid_argument on malformed or inconsistent input.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full-scale defaults: 28 GHz, 32 nodes in a 400 m square, three targets.
nlohmann::json default_config_json();

/// Uniform node layout in [-half, half]^2 with random array orientation.
std::vector<SensingNode> random_layout(int count, double half_width, std::uint64_t seed);

/// Stable hex digest of the scenario geometry and link budget.
std::string scenario_fingerprint(const Scenario& sc);

}  // namespace pmn
