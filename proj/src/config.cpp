#include "pmn/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pmn {
namespace {

Vec2 vec2(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(std::string(what) + " must be a 2-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::vector<SensingNode> random_layout(int count, double half_width, std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, "layout"));
  std::vector<SensingNode> nodes(static_cast<std::size_t>(count));
  for (auto& n : nodes) {
    n.position = {rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width)};
    const double phi = rng.uniform(0.0, std::numbers::pi);
    n.axis = {std::cos(phi), std::sin(phi)};
  }
  return nodes;
}

nlohmann::json default_config_json() {
  return {
      {"bs_position", {0.0, 0.0}},
      {"carrier_hz", 28e9},
      {"gamma0_db", -61.4},
      {"noise_dbm", -90.0},
      {"pt_dbm", 30.0},
      {"pmin_dbm", 20.0},
      {"nmax", 4},
      {"base_sigma", {2.0, 1.0, 1.0}},
      {"snr_distance", "target_to_node"},
      {"dt", 0.5},
      {"qs", 5.0},
      {"frames", 10},
      {"init_sigma_r", 10.0},
      {"init_sigma_v", 5.0},
      {"node_layout", {{"count", 32}, {"half_width", 200.0}, {"seed", 1}}},
      {"targets",
       {{{"position", {124.0, 124.0}}, {"velocity", {-10.0, 0.0}}},
        {{"position", {-134.0, 134.0}}, {"velocity", {0.0, -10.0}}},
        {{"position", {-144.0, -144.0}}, {"velocity", {10.0, 0.0}}}}},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    Scenario& sc = cfg.scenario;
    sc.bs_position = j.contains("bs_position") ? vec2(j.at("bs_position"), "bs_position") : Vec2::Zero();
    sc.c = get_or(j, "c", 299792458.0);
    if (j.contains("wavelength")) {
      sc.wavelength = j.at("wavelength").get<double>();
    } else {
      sc.wavelength = sc.c / get_or(j, "carrier_hz", 28e9);
    }
    sc.gamma0 = db_to_linear(get_or(j, "gamma0_db", -61.4));
    sc.sigma2 = dbm_to_watt(get_or(j, "noise_dbm", -90.0));
    sc.Pt = dbm_to_watt(get_or(j, "pt_dbm", 30.0));
    sc.Pmin = dbm_to_watt(get_or(j, "pmin_dbm", 20.0));
    sc.Nmax = get_or(j, "nmax", 4);
    if (j.contains("base_sigma")) {
      const auto& bs = j.at("base_sigma");
      if (!bs.is_array() || bs.size() != 3) throw std::invalid_argument("base_sigma must have 3 entries");
      for (int i = 0; i < 3; ++i) {
        const double s = bs[static_cast<std::size_t>(i)].get<double>();
        sc.base_cov(i) = s * s;
      }
    } else {
      sc.base_cov = Vec3(4.0, 1.0, 1.0);
    }
    const std::string dist = get_or<std::string>(j, "snr_distance", "target_to_node");
    if (dist == "target_to_node") {
      sc.snr_distance = SnrDistance::kTargetToNode;
    } else if (dist == "half_round_trip") {
      sc.snr_distance = SnrDistance::kHalfRoundTrip;
    } else {
      throw std::invalid_argument("snr_distance must be target_to_node or half_round_trip");
    }

    cfg.region_half_width = 200.0;
    if (j.contains("nodes")) {
      for (const auto& n : j.at("nodes")) {
        SensingNode node;
        node.position = vec2(n.at("position"), "node position");
        node.axis = n.contains("axis") ? vec2(n.at("axis"), "node axis").normalized() : Vec2::UnitX();
        sc.nodes.push_back(node);
      }
      if (j.contains("region_half_width")) cfg.region_half_width = j.at("region_half_width").get<double>();
    } else if (j.contains("node_layout")) {
      const auto& lay = j.at("node_layout");
      cfg.region_half_width = get_or(lay, "half_width", 200.0);
      cfg.layout_seed = get_or<std::uint64_t>(lay, "seed", 1);
      sc.nodes = random_layout(get_or(lay, "count", 32), cfg.region_half_width, cfg.layout_seed);
    } else {
      throw std::invalid_argument("config needs either 'nodes' or 'node_layout'");
    }

    cfg.dt = get_or(j, "dt", 0.5);
    cfg.qs = get_or(j, "qs", 5.0);
    cfg.frames = get_or(j, "frames", 10);
    cfg.init_sigma_r = get_or(j, "init_sigma_r", 10.0);
    cfg.init_sigma_v = get_or(j, "init_sigma_v", 5.0);
    cfg.init_estimate_error = get_or(j, "init_estimate_error", true);
    if (!j.contains("targets") || j.at("targets").empty()) throw std::invalid_argument("config needs at least one target");
    for (const auto& t : j.at("targets")) {
      cfg.targets.push_back(
          TargetState::from(vec2(t.at("position"), "target position"), vec2(t.at("velocity"), "target velocity")));
    }
    if (cfg.frames < 1) throw std::invalid_argument("frames must be >= 1");
    (void)cfg.motion();
    sc.validate(static_cast<int>(cfg.targets.size()));
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string scenario_fingerprint(const Scenario& sc) {
  std::ostringstream os;
  os.precision(17);
  os << sc.bs_position.transpose() << '|' << sc.wavelength << '|' << sc.c << '|' << sc.gamma0 << '|' << sc.sigma2
     << '|' << sc.Pt << '|' << sc.Pmin << '|' << sc.Nmax << '|' << sc.base_cov.transpose() << '|'
     << static_cast<int>(sc.snr_distance);
  for (const auto& n : sc.nodes) os << '|' << n.position.transpose() << ',' << n.axis.transpose();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pmn
