#include "pmn/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmn/baselines.hpp"
#include "pmn/parallel.hpp"

namespace pmn {

InstanceOptions instance_options_for(const ExperimentConfig& cfg) {
  InstanceOptions opt;
  opt.half_width = cfg.region_half_width;
  const int Q = std::max<int>(1, static_cast<int>(cfg.targets.size()));
  opt.power_lo = cfg.scenario.Pmin;
  opt.power_hi = std::max(cfg.scenario.Pmin, cfg.scenario.Pt - (Q - 1) * cfg.scenario.Pmin);
  return opt;
}

namespace {

Vec2 clear_position(const Scenario& sc, const InstanceOptions& opt, RandomStream& rng) {
  for (;;) {
    const Vec2 r{rng.uniform(-opt.half_width, opt.half_width), rng.uniform(-opt.half_width, opt.half_width)};
    bool ok = (r - sc.bs_position).norm() > opt.min_clearance;
    for (const auto& n : sc.nodes) ok = ok && (r - n.position).norm() > opt.min_clearance;
    if (ok) return r;
  }
}

}  // namespace

SelectionInstance random_instance(const Scenario& sc, const MotionModel& model, const FisherState& j0,
                                  const InstanceOptions& opt, RandomStream& rng) {
  const Vec2 pos = clear_position(sc, opt, rng);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Vec2 vel{opt.speed * std::cos(heading), opt.speed * std::sin(heading)};
  const double p = rng.uniform(opt.power_lo, opt.power_hi);
  const bool warm = rng.uniform(0.0, 1.0) < opt.warm_prior_fraction;

  SelectionInstance out;
  out.s_pred = TargetState::from(pos, vel, 1);
  FisherState prev = j0;
  if (warm) {
    // One frame already tracked with the nearest nodes at the same power.
    const TargetState before = TargetState::from(pos - model.dt * vel, vel, 0);
    const MeasInfoSet m0 = meas_info_set(sc, before);
    prev = fim(prior_info(model, j0), nearest_select(sc, before, sc.Nmax), p, m0);
  }
  out.ctx.Jp = prior_info(model, prev);
  out.ctx.info = meas_info_set(sc, out.s_pred);
  out.ctx.power = p;
  out.ctx.nmax = sc.Nmax;
  return out;
}

Scenario desk_scenario(const Scenario& base, int nodes, int nmax, double half_width, std::uint64_t seed) {
  Scenario sc = base;
  sc.nodes = random_layout(nodes, half_width, seed);
  sc.Nmax = nmax;
  return sc;
}

std::vector<TrainingSample> make_training_set(const Scenario& sc, const MotionModel& model, const FisherState& j0,
                                              const InstanceOptions& opt, int count, std::uint64_t seed,
                                              std::vector<TargetState>* states) {
  std::vector<TrainingSample> data(static_cast<std::size_t>(std::max(0, count)));
  std::vector<SelectionInstance> inst;
  inst.reserve(data.size());
  RandomStream rng(derive_seed(seed, "training-instances"));
  for (std::size_t i = 0; i < data.size(); ++i) inst.push_back(random_instance(sc, model, j0, opt, rng));
  if (states != nullptr) {
    states->clear();
    for (const auto& in : inst) states->push_back(in.s_pred);
  }
  parallel_for(data.size(), [&](std::size_t i) {
    data[i].ctx = inst[i].ctx;
    data[i].u0 = uniform_start(sc.node_count(), sc.Nmax);
    data[i].label = exhaustive_select(inst[i].ctx);
  });
  return data;
}

}  // namespace pmn
