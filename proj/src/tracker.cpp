#include "pmn/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pmn/baselines.hpp"
#include "pmn/csv.hpp"
#include "pmn/errors.hpp"
#include "pmn/parallel.hpp"
#include "pmn/power.hpp"

namespace pmn {

SelectorKind parse_selector(const std::string& name) {
  if (name == "dan") return SelectorKind::kDan;
  if (name == "mm-admm-1") return SelectorKind::kMmAdmm1;
  if (name == "mm-admm-2") return SelectorKind::kMmAdmm2;
  if (name == "es") return SelectorKind::kEs;
  if (name == "nearest") return SelectorKind::kNearest;
  throw std::invalid_argument("unknown selector '" + name + "' (dan, mm-admm-1, mm-admm-2, es, nearest)");
}

PowerKind parse_power(const std::string& name) {
  if (name == "fpwf") return PowerKind::kFpwf;
  if (name == "oracle") return PowerKind::kOracle;
  if (name == "equal") return PowerKind::kEqual;
  throw std::invalid_argument("unknown power allocator '" + name + "' (fpwf, oracle, equal)");
}

std::string to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::kDan: return "dan";
    case SelectorKind::kMmAdmm1: return "mm-admm-1";
    case SelectorKind::kMmAdmm2: return "mm-admm-2";
    case SelectorKind::kEs: return "es";
    case SelectorKind::kNearest: return "nearest";
  }
  return "unknown";
}

std::string to_string(PowerKind kind) {
  switch (kind) {
    case PowerKind::kFpwf: return "fpwf";
    case PowerKind::kOracle: return "oracle";
    case PowerKind::kEqual: return "equal";
  }
  return "unknown";
}

void AoConfig::validate() const {
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("AO tolerance must be non-negative");
  if (selector == SelectorKind::kDan && !dan) {
    throw std::invalid_argument("the dan selector needs trained parameters (run the train command first)");
  }
}

double ao_objective(const std::vector<TargetFrame>& frame, const std::vector<Vec>& u, const Vec& p) {
  double total = 0.0;
  for (std::size_t q = 0; q < frame.size(); ++q) {
    total += cost_logdet(fim(frame[q].Jp, u[q], p(static_cast<Eigen::Index>(q)), frame[q].info));
  }
  return total;
}

Vec select_nodes(const TargetFrame& t, const Scenario& sc, double p, const AoConfig& cfg) {
  SelectionContext ctx{t.Jp, t.info, p, sc.Nmax};
  switch (cfg.selector) {
    case SelectorKind::kEs:
      return exhaustive_select(ctx);
    case SelectorKind::kNearest:
      return nearest_select(sc, t.s_pred, sc.Nmax);
    case SelectorKind::kMmAdmm1:
    case SelectorKind::kMmAdmm2: {
      const auto variant = cfg.selector == SelectorKind::kMmAdmm1 ? MajorizerVariant::kTrace : MajorizerVariant::kMaxEig;
      return binarize(mm_admm_select(ctx, uniform_start(ctx.nodes(), sc.Nmax), variant, cfg.mm).u, sc.Nmax);
    }
    case SelectorKind::kDan: {
      const DanRun run = dan_forward(ctx, uniform_start(ctx.nodes(), sc.Nmax), *cfg.dan);
      return binarize(run.u_layers.back(), sc.Nmax);
    }
  }
  throw std::logic_error("unhandled selector");
}

namespace {

Vec allocate(const std::vector<TargetFrame>& frame, const std::vector<Vec>& u, const Scenario& sc, PowerKind kind) {
  const auto Q = static_cast<int>(frame.size());
  if (kind == PowerKind::kEqual) return Vec::Constant(Q, sc.Pt / Q);
  PowerProblem prob;
  prob.Pt = sc.Pt;
  prob.Pmin = sc.Pmin;
  for (int q = 0; q < Q; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    prob.targets.push_back({frame[qi].Jp, aggregate_info(u[qi], frame[qi].info)});
  }
  return kind == PowerKind::kFpwf ? solve_water_level(prob).power.p : oracle_power(prob).p;
}

}  // namespace

AoResult ao_optimize(const std::vector<TargetFrame>& frame, const Scenario& sc, const AoConfig& cfg) {
  cfg.validate();
  const auto Q = static_cast<int>(frame.size());
  if (Q == 0) throw std::invalid_argument("no targets to optimise");
  AoResult out;
  for (const auto& t : frame) out.u.push_back(nearest_select(sc, t.s_pred, sc.Nmax));
  out.p = Vec::Constant(Q, std::max(sc.Pt / Q, sc.Pmin));
  double obj = ao_objective(frame, out.u, out.p);

  for (int round = 0; round < cfg.max_rounds; ++round) {
    const double start = obj;
    std::vector<Vec> u_new(out.u.size());
    for (int q = 0; q < Q; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      u_new[qi] = select_nodes(frame[qi], sc, out.p(q), cfg);
      const double before = cost_logdet(fim(frame[qi].Jp, out.u[qi], out.p(q), frame[qi].info));
      const double after = cost_logdet(fim(frame[qi].Jp, u_new[qi], out.p(q), frame[qi].info));
      if (after > before) u_new[qi] = out.u[qi];
    }
    out.u = std::move(u_new);
    obj = ao_objective(frame, out.u, out.p);
    out.objective.push_back(obj);

    const Vec p_new = allocate(frame, out.u, sc, cfg.power);
    const double obj_p = ao_objective(frame, out.u, p_new);
    if (obj_p <= obj) {
      out.p = p_new;
      obj = obj_p;
    }
    out.objective.push_back(obj);
    out.rounds = round + 1;
    if (std::abs(start - obj) <= cfg.tol * std::max(1.0, std::abs(start))) break;
  }
  return out;
}

Posterior ekf_update(const TargetState& s_pred, const Mat4& P_pred, const std::vector<MeasurementUse>& meas) {
  Posterior post{s_pred, P_pred};
  if (meas.empty()) return post;
  const auto m = static_cast<Eigen::Index>(3 * meas.size());
  Mat H(m, 4);
  Vec innov(m);
  Vec R(m);
  for (std::size_t i = 0; i < meas.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(3 * i);
    H.middleRows(r, 3) = meas[i].H;
    Vec3 d = meas[i].z.as_vector() - meas[i].predicted.as_vector();
    d(0) = std::remainder(d(0), 2.0 * std::numbers::pi);
    if (d(0) <= -std::numbers::pi) d(0) += 2.0 * std::numbers::pi;
    innov.segment(r, 3) = d;
    R.segment(r, 3) = meas[i].cov_diag;
  }
  const Mat S = H * P_pred * H.transpose() + Mat(R.asDiagonal());
  const Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("innovation covariance is not positive definite");
  const Mat K = llt.solve(H * P_pred).transpose();
  post.s.x = s_pred.x + K * innov;
  const Mat4 IKH = Mat4::Identity() - K * H;
  Mat4 P = IKH * P_pred * IKH.transpose() + K * R.asDiagonal() * K.transpose();
  post.P = 0.5 * (P + P.transpose());
  return post;
}

double TrackRecord::position_error(int frame_index, int target) const {
  const TrackRow& row = rows.at(static_cast<std::size_t>(frame_index * targets + target));
  const Vec4 e = row.truth - row.estimate;
  return std::hypot(e(0), e(2));
}

TrackRecord run_tracking(const Scenario& sc, const MotionModel& model, const std::vector<TargetState>& targets0,
                         const TrackConfig& cfg, int trial) {
  cfg.ao.validate();
  const auto Q = static_cast<int>(targets0.size());
  sc.validate(Q);
  if (cfg.frames < 1) throw std::invalid_argument("frames must be >= 1");
  const auto t_idx = static_cast<std::uint64_t>(trial);
  RandomStream truth_rng(derive_seed(cfg.seed, "truth", t_idx));
  RandomStream meas_rng(derive_seed(cfg.seed, "measurement", t_idx));
  RandomStream init_rng(derive_seed(cfg.seed, "initial-estimate", t_idx));

  const FisherState j0 = initial_fisher(cfg.init_sigma_r, cfg.init_sigma_v);
  const Mat4 P0 = pcrlb(j0);
  std::vector<TargetState> truth = targets0;
  std::vector<Posterior> est(static_cast<std::size_t>(Q));
  std::vector<FisherState> J(static_cast<std::size_t>(Q), j0);
  for (int q = 0; q < Q; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    est[qi].s = targets0[qi];
    if (cfg.init_estimate_error) est[qi].s.x += init_rng.gaussian(P0);
    est[qi].P = P0;
  }

  TrackRecord rec;
  rec.trial = trial;
  rec.frames = cfg.frames;
  rec.targets = Q;
  for (int k = 1; k <= cfg.frames; ++k) {
    std::vector<TargetFrame> frame(static_cast<std::size_t>(Q));
    std::vector<Mat4> P_pred(static_cast<std::size_t>(Q));
    for (int q = 0; q < Q; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      truth[qi] = sample_transition(model, truth[qi], truth_rng);
      frame[qi].s_pred = predict_state(model, est[qi].s);
      P_pred[qi] = model.G * est[qi].P * model.G.transpose() + model.Qn;
      frame[qi].Jp = prior_info(model, J[qi]);
      frame[qi].info = meas_info_set(sc, frame[qi].s_pred);
    }
    const AoResult ao = ao_optimize(frame, sc, cfg.ao);
    rec.ao_objective.push_back(ao.objective);

    for (int q = 0; q < Q; ++q) {
      const auto qi = static_cast<std::size_t>(q);
      const double p = ao.p(q);
      std::vector<MeasurementUse> meas;
      std::vector<int> selected;
      for (int n = 0; n < sc.node_count(); ++n) {
        if (ao.u[qi](n) < 0.5) continue;
        selected.push_back(n);
        MeasurementUse mu;
        mu.z = sample_measurement(sc, p, truth[qi], n, meas_rng);
        mu.predicted = true_measurement(sc, frame[qi].s_pred, n);
        mu.H = measurement_jacobian(sc, frame[qi].s_pred, n);
        mu.cov_diag = measurement_covariance(sc, p, frame[qi].s_pred, n).diag;
        meas.push_back(mu);
      }
      est[qi] = ekf_update(frame[qi].s_pred, P_pred[qi], meas);
      est[qi].s.frame = k;
      J[qi] = fim(frame[qi].Jp, ao.u[qi], p, frame[qi].info);
      J[qi].frame = k;

      TrackRow row;
      row.trial = trial;
      row.frame = k;
      row.target = q;
      row.truth = truth[qi].x;
      row.estimate = est[qi].s.x;
      row.pcrlb_trace = pcrlb(J[qi]).trace();
      row.cost = cost_logdet(J[qi]);
      row.selected = std::move(selected);
      row.power = p;
      rec.rows.push_back(std::move(row));
    }
  }
  return rec;
}

std::vector<TrackRecord> monte_carlo(const Scenario& sc, const MotionModel& model,
                                     const std::vector<TargetState>& targets0, const TrackConfig& cfg, int nmc) {
  if (nmc < 1) throw std::invalid_argument("need at least one Monte-Carlo trial");
  std::vector<TrackRecord> runs(static_cast<std::size_t>(nmc));
  parallel_for(runs.size(), [&](std::size_t i) {
    runs[i] = run_tracking(sc, model, targets0, cfg, static_cast<int>(i));
  });
  return runs;
}

double monte_carlo_rmse(const std::vector<TrackRecord>& runs) {
  if (runs.empty()) throw std::invalid_argument("no runs to average");
  const int K = runs.front().frames;
  const int Q = runs.front().targets;
  for (const auto& r : runs) {
    if (r.frames != K || r.targets != Q) throw std::invalid_argument("runs have different frame or target counts");
  }
  double total = 0.0;
  for (int q = 0; q < Q; ++q) {
    for (int k = 0; k < K; ++k) {
      double sq = 0.0;
      for (const auto& r : runs) {
        const double e = r.position_error(k, q);
        sq += e * e;
      }
      total += std::sqrt(sq / static_cast<double>(runs.size()));
    }
  }
  return total / (static_cast<double>(Q) * K);
}

void write_track_header(std::ostream& os) {
  os << "trial,frame,target,true_rx,true_vx,true_ry,true_vy,est_rx,est_vx,est_ry,est_vy,pcrlb_trace,cost,"
        "selected_nodes,power\n";
}

void write_track_rows(std::ostream& os, const TrackRecord& rec) {
  for (const auto& row : rec.rows) {
    os << row.trial << ',' << row.frame << ',' << row.target;
    for (int i = 0; i < 4; ++i) os << ',' << fmt_num(row.truth(i));
    for (int i = 0; i < 4; ++i) os << ',' << fmt_num(row.estimate(i));
    os << ',' << fmt_num(row.pcrlb_trace) << ',' << fmt_num(row.cost) << ',';
    for (std::size_t i = 0; i < row.selected.size(); ++i) os << (i ? ";" : "") << row.selected[i];
    os << ',' << fmt_num(row.power) << '\n';
  }
}

}  // namespace pmn
