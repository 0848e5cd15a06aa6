#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmn/baselines.hpp"
#include "pmn/cli.hpp"
#include "pmn/config.hpp"
#include "pmn/csv.hpp"
#include "pmn/dan_io.hpp"
#include "pmn/errors.hpp"
#include "pmn/instances.hpp"
#include "pmn/manifest.hpp"
#include "pmn/tracker.hpp"

namespace fs = std::filesystem;

namespace pmn {
namespace {

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

ExperimentConfig load_effective_config(const CliOptions& opt, RunManifest& manifest) {
  ExperimentConfig cfg;
  if (opt.config.empty()) {
    const nlohmann::json j = default_config_json();
    manifest.add_input("config", j.dump());
    cfg = config_from_json(j);
  } else {
    manifest.set_config(opt.config);
    cfg = load_config(opt.config);
  }
  if (opt.nmax) cfg.scenario.Nmax = *opt.nmax;
  if (opt.frames) cfg.frames = *opt.frames;
  cfg.scenario.validate(static_cast<int>(cfg.targets.size()));
  if (cfg.frames < 1) throw std::invalid_argument("frames must be >= 1");
  return cfg;
}

fs::path params_path(const CliOptions& opt) { return opt.params.empty() ? opt.out / "dan_params.json" : opt.params; }

std::string tag_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <typename Fn>
int guarded(RunManifest& manifest, Fn&& fn) {
  int code = 0;
  try {
    code = fn();
  } catch (const EnumerationCapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = 1;
  }
  manifest.finish(code);
  return code;
}

void prepare(RunManifest& manifest, const CliOptions& opt) {
  fs::create_directories(opt.out);
  manifest.set_seed(opt.seed);
  manifest.set_arguments(opt.argv);
}

}  // namespace

std::vector<double> parse_sweep(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sweep value '" + item + "'");
    }
    if (used != item.size()) throw std::invalid_argument("bad sweep value '" + item + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
    throw std::invalid_argument("sweep must be a value or start:step:stop with step > 0 and stop >= start");
  }
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = parts[0] + i * parts[1];
    if (v > parts[2] + 1e-9 * std::max(1.0, std::abs(parts[2]))) break;
    out.push_back(v);
  }
  return out;
}

int cmd_track(const CliOptions& opt) {
  RunManifest manifest("track", opt.out);
  return guarded(manifest, [&] {
    prepare(manifest, opt);
    ExperimentConfig cfg = load_effective_config(opt, manifest);
    const MotionModel model = cfg.motion();

    std::vector<SelectorKind> selectors;
    for (const auto& m : opt.methods) selectors.push_back(parse_selector(m));
    const PowerKind power = parse_power(opt.power);

    std::optional<DanParams> dan;
    if (std::find(selectors.begin(), selectors.end(), SelectorKind::kDan) != selectors.end()) {
      const fs::path pp = params_path(opt);
      if (!fs::exists(pp)) {
        throw std::runtime_error("DAN parameters not found at " + pp.string() +
                                 "; run the train command first (pmn_sim train --config <file> --out <dir>)");
      }
      manifest.add_input("dan_params", read_file(pp));
      dan = load_params(pp);
    }

    struct Point {
      double pt_dbm;
      double noise_dbm;
    };
    const double base_pt = 10.0 * std::log10(cfg.scenario.Pt * 1e3);
    const double base_noise = 10.0 * std::log10(cfg.scenario.sigma2 * 1e3);
    std::vector<Point> points;
    const std::vector<double> pts = opt.pt_dbm.empty() ? std::vector<double>{base_pt} : parse_sweep(opt.pt_dbm);
    const std::vector<double> noises =
        opt.noise_dbm.empty() ? std::vector<double>{base_noise} : parse_sweep(opt.noise_dbm);
    for (double pt : pts) {
      for (double nz : noises) points.push_back({pt, nz});
    }

    const fs::path summary_path = opt.out / "rmse_summary.csv";
    std::ofstream summary = open_out(summary_path);
    summary << "pt_dbm,noise_dbm,method,power,nmc,frames,nmax,rmse\n";
    for (const Point& pt : points) {
      Scenario sc = cfg.scenario;
      sc.Pt = dbm_to_watt(pt.pt_dbm);
      sc.sigma2 = dbm_to_watt(pt.noise_dbm);
      for (SelectorKind sel : selectors) {
        TrackConfig tc;
        tc.frames = cfg.frames;
        tc.seed = opt.seed;
        tc.init_sigma_r = cfg.init_sigma_r;
        tc.init_sigma_v = cfg.init_sigma_v;
        tc.init_estimate_error = cfg.init_estimate_error;
        tc.ao.selector = sel;
        tc.ao.power = power;
        tc.ao.max_rounds = opt.ao_rounds;
        tc.ao.dan = dan;
        const auto runs = monte_carlo(sc, model, cfg.targets, tc, opt.nmc);
        const double rmse = monte_carlo_rmse(runs);
        summary << fmt_num(pt.pt_dbm) << ',' << fmt_num(pt.noise_dbm) << ',' << to_string(sel) << ','
                << to_string(power) << ',' << opt.nmc << ',' << cfg.frames << ',' << sc.Nmax << ',' << fmt_num(rmse)
                << '\n';
        if (opt.traces) {
          const fs::path tp = opt.out / ("track_" + to_string(sel) + "_pt" + tag_number(pt.pt_dbm) + "_noise" +
                                         tag_number(pt.noise_dbm) + ".csv");
          std::ofstream os = open_out(tp);
          write_track_header(os);
          for (const auto& r : runs) write_track_rows(os, r);
          manifest.add_output(tp);
        }
        std::cout << "pt_dbm=" << pt.pt_dbm << " noise_dbm=" << pt.noise_dbm << " method=" << to_string(sel)
                  << " rmse=" << rmse << '\n';
      }
    }
    manifest.add_output(summary_path);
    return 0;
  });
}

int cmd_train(const CliOptions& opt) {
  RunManifest manifest("train", opt.out);
  return guarded(manifest, [&] {
    prepare(manifest, opt);
    const ExperimentConfig cfg = load_effective_config(opt, manifest);
    const MotionModel model = cfg.motion();
    const FisherState j0 = initial_fisher(cfg.init_sigma_r, cfg.init_sigma_v);

    TrainConfig tc;
    tc.lr = opt.lr;
    tc.n_train = opt.n_train;
    tc.epochs = opt.epochs;
    tc.seed = derive_seed(opt.seed, "sgd-shuffle");
    tc.batch = opt.batch;
    tc.validate();

    std::vector<TargetState> states;
    const auto data = make_training_set(cfg.scenario, model, j0, instance_options_for(cfg), tc.n_train,
                                        derive_seed(opt.seed, "training-set"), &states);
    const std::string scenario_hash = scenario_fingerprint(cfg.scenario);
    const fs::path dataset_path = opt.out / "dataset.jsonl";
    std::string dataset_hash;
    {
      std::ofstream os = open_out(dataset_path);
      dataset_hash = write_dataset(os, data, states, scenario_hash);
    }
    manifest.add_output(dataset_path);

    const TrainResult res = train_dan(data, DanParams::defaults(10), tc);
    ParamsProvenance prov;
    prov.seed = opt.seed;
    prov.scenario_fingerprint = scenario_hash;
    prov.dataset_fingerprint = dataset_hash;
    prov.n_train = tc.n_train;
    prov.epochs = tc.epochs;
    prov.lr = tc.lr;
    prov.initial_loss = res.initial_loss;
    prov.final_loss = res.final_loss();
    const fs::path pp = params_path(opt);
    save_params(pp, res.params, prov);
    manifest.add_output(pp);

    const fs::path loss_path = opt.out / "loss_curve.csv";
    std::ofstream loss = open_out(loss_path);
    loss << "epoch,loss\n0," << fmt_num(res.initial_loss) << '\n';
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) loss << e + 1 << ',' << fmt_num(res.epoch_loss[e]) << '\n';
    manifest.add_output(loss_path);
    std::cout << "trained on " << data.size() << " samples: loss " << res.initial_loss << " -> " << res.final_loss()
              << '\n';
    return 0;
  });
}

int cmd_converge(const CliOptions& opt) {
  RunManifest manifest("converge", opt.out);
  return guarded(manifest, [&] {
    prepare(manifest, opt);
    const ExperimentConfig cfg = load_effective_config(opt, manifest);
    const MotionModel model = cfg.motion();
    const Scenario& sc = cfg.scenario;

    DanParams dan = DanParams::defaults(10);
    const fs::path pp = params_path(opt);
    if (fs::exists(pp)) {
      manifest.add_input("dan_params", read_file(pp));
      dan = load_params(pp);
      manifest.note("dan_params", "trained");
    } else {
      std::cerr << "warning: " << pp.string() << " not found; DAN runs with untrained defaults\n";
      manifest.note("dan_params", "untrained defaults");
    }

    const TargetState s_pred = predict_state(model, cfg.targets.front());
    SelectionContext ctx;
    ctx.Jp = prior_info(model, initial_fisher(cfg.init_sigma_r, cfg.init_sigma_v));
    ctx.info = meas_info_set(sc, s_pred);
    ctx.power = sc.Pt / static_cast<double>(cfg.targets.size());
    ctx.nmax = sc.Nmax;
    if (ctx.nmax < 1) throw std::invalid_argument("empty selection: Nmax must be >= 1");
    const Vec u0 = uniform_start(ctx.nodes(), ctx.nmax);

    MMConfig mm;
    const MMResult ma1 = mm_admm_select(ctx, u0, MajorizerVariant::kTrace, mm);
    const MMResult ma2 = mm_admm_select(ctx, u0, MajorizerVariant::kMaxEig, mm);
    const DanRun run = dan_forward(ctx, u0, dan);
    for (const MMResult* r : {&ma1, &ma2}) {
      const auto& c = r->trace.cost_per_iter;
      for (std::size_t i = 1; i < c.size(); ++i) {
        if (c[i] > c[i - 1] + 1e-8) throw std::runtime_error("MM cost trace is not monotone; refusing to write it");
      }
    }
    const fs::path path = opt.out / "converge_trace.csv";
    std::ofstream os = open_out(path);
    os << "method,iteration,cost,residual\n";
    write_trace_rows(os, "mm-admm-1", ma1.trace);
    write_trace_rows(os, "mm-admm-2", ma2.trace);
    write_trace_rows(os, "dan", run.trace);
    manifest.add_output(path);
    return 0;
  });
}

namespace {

struct Timing {
  double min_s = 0.0;
  double median_s = 0.0;
};

template <typename Fn>
Timing time_it(int repeat, Fn&& fn) {
  std::vector<double> t;
  for (int r = 0; r < repeat; ++r) {
    const auto a = std::chrono::steady_clock::now();
    fn();
    const auto b = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double>(b - a).count());
  }
  std::sort(t.begin(), t.end());
  const std::size_t n = t.size();
  return {t.front(), n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2])};
}

}  // namespace

int cmd_bench(const CliOptions& opt) {
  RunManifest manifest("bench", opt.out);
  return guarded(manifest, [&] {
    prepare(manifest, opt);
    if (opt.repeat < 1) throw std::invalid_argument("--repeat must be >= 1");
    const ExperimentConfig cfg = load_effective_config(opt, manifest);
    const MotionModel model = cfg.motion();
    const FisherState j0 = initial_fisher(cfg.init_sigma_r, cfg.init_sigma_v);
    DanParams dan = DanParams::defaults(10);
    const fs::path pp = params_path(opt);
    if (fs::exists(pp)) dan = load_params(pp);

    const fs::path path = opt.out / "bench.csv";
    std::ofstream os = open_out(path);
    os << "method,n,q,repeat,min_s,median_s\n";
    bool dan_faster = true;
    for (int N : opt.bench_nodes) {
      const Scenario sc = desk_scenario(cfg.scenario, N, cfg.scenario.Nmax, cfg.region_half_width,
                                        derive_seed(opt.seed, "bench-layout", static_cast<std::uint64_t>(N)));
      RandomStream rng(derive_seed(opt.seed, "bench-instance", static_cast<std::uint64_t>(N)));
      const SelectionInstance inst = random_instance(sc, model, j0, instance_options_for(cfg), rng);
      const Vec u0 = uniform_start(N, sc.Nmax);
      MMConfig mm;
      const Timing t_dan = time_it(opt.repeat, [&] { dan_forward(inst.ctx, u0, dan); });
      const Timing t_ma1 = time_it(opt.repeat, [&] { mm_admm_select(inst.ctx, u0, MajorizerVariant::kTrace, mm); });
      const Timing t_ma2 = time_it(opt.repeat, [&] { mm_admm_select(inst.ctx, u0, MajorizerVariant::kMaxEig, mm); });
      const Timing t_near = time_it(opt.repeat, [&] { nearest_select(sc, inst.s_pred, sc.Nmax); });
      const bool es_ok = SubsetIter::count(N, sc.Nmax) <= kDefaultEnumerationCap;
      const Timing t_es = es_ok ? time_it(opt.repeat, [&] { exhaustive_select(inst.ctx); }) : Timing{};
      auto row = [&](const char* m, const Timing& t) {
        os << m << ',' << N << ",1," << opt.repeat << ',' << fmt_num(t.min_s) << ',' << fmt_num(t.median_s) << '\n';
      };
      row("dan", t_dan);
      row("mm-admm-1", t_ma1);
      row("mm-admm-2", t_ma2);
      if (es_ok) row("es", t_es);
      row("nearest", t_near);
      dan_faster = dan_faster && t_dan.min_s < std::min(t_ma1.min_s, t_ma2.min_s);
    }

    const int Q = opt.bench_targets;
    Scenario sc = cfg.scenario;
    RandomStream rng(derive_seed(opt.seed, "bench-power"));
    PowerProblem prob;
    prob.Pt = sc.Pt;
    prob.Pmin = std::min(sc.Pmin, sc.Pt / Q);
    for (int q = 0; q < Q; ++q) {
      const SelectionInstance inst = random_instance(sc, model, j0, instance_options_for(cfg), rng);
      prob.targets.push_back({inst.ctx.Jp, aggregate_info(nearest_select(sc, inst.s_pred, sc.Nmax), inst.ctx.info)});
    }
    const Timing t_fp = time_it(opt.repeat, [&] { solve_water_level(prob); });
    const Timing t_or = time_it(opt.repeat, [&] { oracle_power(prob); });
    os << "fpwf,0," << Q << ',' << opt.repeat << ',' << fmt_num(t_fp.min_s) << ',' << fmt_num(t_fp.median_s) << '\n';
    os << "oracle,0," << Q << ',' << opt.repeat << ',' << fmt_num(t_or.min_s) << ',' << fmt_num(t_or.median_s) << '\n';
    manifest.add_output(path);
    const bool fp_faster = t_fp.min_s < t_or.min_s;
    manifest.note("dan_faster_than_mm", dan_faster);
    manifest.note("fpwf_faster_than_oracle", fp_faster);
    if (!dan_faster) std::cerr << "check failed: DAN was not faster than MM-ADMM at every N\n";
    if (!fp_faster) std::cerr << "check failed: FP-WF was not faster than the projected-gradient oracle\n";
    return (dan_faster && fp_faster) ? 0 : 4;
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Sensing-node selection and power allocation simulator"};
  app.require_subcommand(1);
  CliOptions opt;
  for (int i = 0; i < argc; ++i) opt.argv.emplace_back(argv[i]);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "scenario JSON (defaults built in)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "master seed");
    sub->add_option("--nmax", opt.nmax, "nodes selected per target");
    sub->add_option("--params", opt.params, "DAN parameter file (default <out>/dan_params.json)");
  };

  auto* track = app.add_subcommand("track", "Monte-Carlo tracking RMSE per method");
  common(track);
  track->add_option("--methods", opt.methods, "dan, mm-admm-1, mm-admm-2, es, nearest")->delimiter(',');
  track->add_option("--power", opt.power, "fpwf, oracle or equal");
  track->add_option("--nmc", opt.nmc, "Monte-Carlo trials");
  track->add_option("--frames", opt.frames, "tracking frames");
  track->add_option("--pt-dbm", opt.pt_dbm, "total power in dBm, or start:step:stop");
  track->add_option("--noise-dbm", opt.noise_dbm, "noise power in dBm, or start:step:stop");
  track->add_option("--ao-rounds", opt.ao_rounds, "alternating-optimisation rounds");
  track->add_flag("!--no-traces", opt.traces, "skip per-trial CSV files");

  auto* train = app.add_subcommand("train", "Generate labelled instances and train the unfolded network");
  common(train);
  train->add_option("--n-train", opt.n_train, "training instances");
  train->add_option("--epochs", opt.epochs, "passes over the data");
  train->add_option("--lr", opt.lr, "SGD step");
  train->add_option("--batch", opt.batch, "samples per SGD step");

  auto* converge = app.add_subcommand("converge", "Per-iteration cost traces on one instance");
  common(converge);

  auto* bench = app.add_subcommand("bench", "Relative wall-clock of selectors and allocators");
  common(bench);
  bench->add_option("--repeat", opt.repeat, "timed repetitions");
  bench->add_option("--nodes", opt.bench_nodes, "node counts")->delimiter(',');
  bench->add_option("--targets", opt.bench_targets, "targets for the power benchmark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (track->parsed()) return cmd_track(opt);
  if (train->parsed()) return cmd_train(opt);
  if (converge->parsed()) return cmd_converge(opt);
  return cmd_bench(opt);
}

}  // namespace pmn
