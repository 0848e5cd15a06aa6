#pragma once

#include <cstdint>
#include <vector>

#include "pmn/config.hpp"
#include "pmn/dan.hpp"
#include "pmn/fisher.hpp"
#include "pmn/selection.hpp"

namespace pmn {

// Random single-target selection problems drawn from a scenario. Used to
// build training sets and the benchmark / convergence workloads.

struct InstanceOptions {
  double half_width = 200.0;   // target positions uniform in [-w, w]^2
  double min_clearance = 10.0;  // from every node and the base station
  double speed = 10.0;         // m/s, random heading
  double power_lo = 0.1;       // W
  double power_hi = 0.8;       // W
  double warm_prior_fraction = 0.5;  // share of instances whose prior follows one tracked frame
};

/// Per-target power range a tracker can actually produce for Q targets.
InstanceOptions instance_options_for(const ExperimentConfig& cfg);

struct SelectionInstance {
  SelectionContext ctx;
  TargetState s_pred;
};

SelectionInstance random_instance(const Scenario& sc, const MotionModel& model, const FisherState& j0,
                                  const InstanceOptions& opt, RandomStream& rng);

/// Copy of `base` with `nodes` randomly placed nodes and the given budget.
Scenario desk_scenario(const Scenario& base, int nodes, int nmax, double half_width, std::uint64_t seed);

/// Instances labelled by exhaustive search, started from the uniform point.
std::vector<TrainingSample> make_training_set(const Scenario& sc, const MotionModel& model, const FisherState& j0,
                                              const InstanceOptions& opt, int count, std::uint64_t seed,
                                              std::vector<TargetState>* states = nullptr);

}  // namespace pmn
