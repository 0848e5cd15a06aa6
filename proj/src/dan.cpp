#include "pmn/dan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pmn/mm_admm.hpp"
#include "pmn/parallel.hpp"

namespace pmn {

void DanParams::validate() const {
  if (alpha_bar.empty()) throw std::invalid_argument("DAN needs at least one layer");
  if (!(alpha_lo > 0.0 && alpha_lo <= alpha_hi)) throw std::invalid_argument("need 0 < alpha_lo <= alpha_hi");
  for (double a : alpha_bar) {
    if (!(a >= alpha_lo && a <= alpha_hi)) throw std::invalid_argument("alpha_bar entry outside [alpha_lo, alpha_hi]");
  }
  auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!open_unit(beta1) || !open_unit(beta2) || !open_unit(eta1) || !open_unit(eta_a)) {
    throw std::invalid_argument("beta1, beta2, eta1, eta_a must lie in (0,1)");
  }
  if (!(beta1 < std::sqrt(beta2))) throw std::invalid_argument("beta1 must be below sqrt(beta2)");
  if (!(beta1 * eta1 < 1.0)) throw std::invalid_argument("beta1 * eta1 must be below 1");
  if (!(rho_a > 0.0) || !(rho >= 0.0) || !(gamma > 0.0)) throw std::invalid_argument("rho_a, gamma must be positive");
  if (admm_iters < 1 || !(tol > 0.0)) throw std::invalid_argument("bad inner-loop settings");
}

DanParams DanParams::defaults(int layers) {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  DanParams p;
  p.alpha_bar.assign(static_cast<std::size_t>(layers), 0.15);
  return p;
}

LayerState LayerState::start(const Vec& u0) {
  return LayerState{u0, Vec::Zero(u0.size()), Vec::Zero(u0.size()), 0};
}

LayerState dan_layer(const LayerState& state, const SelectionContext& ctx, const DanParams& params,
                     LayerDiagnostics* diag) {
  const int l = state.layer + 1;
  if (l > params.layers()) throw std::invalid_argument("layer index beyond alpha_bar");
  const Vec d = grad_u(ctx.fisher(state.u), ctx.power, ctx.info);

  const double b1 = params.beta1 * std::pow(params.eta1, l);
  LayerState next;
  next.layer = l;
  next.m_hat = b1 * state.m_hat + (1.0 - b1) * d;
  next.v_hat = params.beta2 * state.v_hat + (1.0 - params.beta2) * d.cwiseAbs2();

  const double alpha = params.alpha_bar[static_cast<std::size_t>(l - 1)] / std::sqrt(static_cast<double>(l));
  AdmmProblem prob;
  prob.anchor = state.u;
  prob.gradient = next.m_hat;
  prob.rho = params.rho;
  prob.rho_al = params.rho_a * std::pow(params.eta_a, l);
  prob.phi = (next.v_hat.cwiseAbs().cwiseSqrt() / alpha).array() + prob.rho_al;
  prob.d_gamma = penalty_value_grad(state.u.cwiseMax(0.0), params.gamma).grad;

  AdmmState inner = admm_inner(prob, params.admm_iters, params.tol);
  next.u = inner.u;
  if (diag != nullptr) {
    diag->grad = d;
    diag->phi_inv = prob.phi.cwiseInverse();
    diag->v_minus_z = inner.v - inner.z;
    diag->delta_u = next.u - state.u;
    diag->cost = ctx.cost(next.u);
    diag->admm_iterations = inner.iterations;
  }
  return next;
}

DanRun dan_forward(const SelectionContext& ctx, const Vec& u0, const DanParams& params) {
  params.validate();
  if (u0.size() != ctx.nodes()) throw std::invalid_argument("start point length does not match node count");
  if (std::abs(u0.sum() - ctx.nmax) > 1e-8) throw std::invalid_argument("start point must satisfy 1^T u = nmax");
  DanRun run;
  LayerState s = LayerState::start(u0);
  run.trace.record(ctx.cost(u0), u0, 0.0);
  for (int l = 0; l < params.layers(); ++l) {
    LayerDiagnostics diag;
    s = dan_layer(s, ctx, params, &diag);
    run.u_layers.push_back(s.u);
    run.trace.record(diag.cost, s.u, diag.delta_u.cwiseAbs().maxCoeff());
    run.layers.push_back(std::move(diag));
  }
  run.trace.converged = run.trace.residual.back() < params.tol;
  return run;
}

int learning_rate_increases(const DanRun& run) {
  int count = 0;
  for (std::size_t l = 1; l < run.layers.size(); ++l) {
    const Vec& prev = run.layers[l - 1].phi_inv;
    const Vec& cur = run.layers[l].phi_inv;
    for (Eigen::Index i = 0; i < cur.size(); ++i) {
      if (cur(i) > prev(i)) ++count;
    }
  }
  return count;
}

// ---------------------------------------------------------------- training

void TrainConfig::validate() const {
  if (!(lr > 0.0) || n_train < 1 || epochs < 1 || !(fd_step > 0.0) || batch < 1) {
    throw std::invalid_argument("training configuration values must be positive");
  }
}

double dan_loss(const TrainingSample& sample, const DanParams& params) {
  const DanRun run = dan_forward(sample.ctx, sample.u0, params);
  double total = 0.0;
  for (const Vec& u : run.u_layers) total += (sample.label - u).squaredNorm();
  return total / static_cast<double>(run.u_layers.size());
}

double mean_loss(const std::vector<TrainingSample>& data, const DanParams& params) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  std::vector<double> loss(data.size());
  parallel_for(data.size(), [&](std::size_t i) { loss[i] = dan_loss(data[i], params); });
  return std::accumulate(loss.begin(), loss.end(), 0.0) / static_cast<double>(data.size());
}

Vec learnables(const DanParams& params) {
  Vec theta(params.layers() + 1);
  for (int l = 0; l < params.layers(); ++l) theta(l) = params.alpha_bar[static_cast<std::size_t>(l)];
  theta(params.layers()) = params.beta1;
  return theta;
}

DanParams with_learnables(const DanParams& params, const Vec& theta) {
  if (theta.size() != params.layers() + 1) throw std::invalid_argument("learnable vector has the wrong length");
  DanParams out = params;
  for (int l = 0; l < params.layers(); ++l) out.alpha_bar[static_cast<std::size_t>(l)] = theta(l);
  out.beta1 = theta(params.layers());
  return out;
}

DanParams project_params(const DanParams& params) {
  DanParams out = params;
  for (double& a : out.alpha_bar) a = std::clamp(a, params.alpha_lo, params.alpha_hi);
  const double hi = std::min(0.999, std::sqrt(params.beta2) - 1e-3);
  out.beta1 = std::clamp(params.beta1, 1e-6, hi);
  return out;
}

DanParams sgd_step(const DanParams& params, const Vec& grad, double lr) {
  return project_params(with_learnables(params, learnables(params) - lr * grad));
}

namespace {

// Probe parameters for coordinate k, direction sign; stays inside the valid
// region so validate() accepts it.
DanParams probe(const DanParams& params, int k, double h) {
  Vec theta = learnables(params);
  theta(k) += h;
  return with_learnables(params, theta);
}

// Largest symmetric step that keeps both probes valid.
double probe_step(const DanParams& params, int k, double fd_step) {
  const double x = learnables(params)(k);
  double lo = params.alpha_lo, hi = params.alpha_hi;
  if (k == params.layers()) {
    lo = 0.0;
    hi = std::min(1.0 / params.eta1, std::sqrt(params.beta2));
  }
  const double room = std::min(x - lo, hi - x);
  return std::min(fd_step, 0.5 * room);
}

}  // namespace

Vec loss_gradient(const TrainingSample& sample, const DanParams& params, double fd_step) {
  const int K = params.layers() + 1;
  Vec g = Vec::Zero(K);
  for (int k = 0; k < K; ++k) {
    const double h = probe_step(params, k, fd_step);
    if (h <= 0.0) continue;
    g(k) = (dan_loss(sample, probe(params, k, h)) - dan_loss(sample, probe(params, k, -h))) / (2.0 * h);
  }
  return g;
}

TrainResult train_dan(const std::vector<TrainingSample>& data, const DanParams& init, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("training dataset is empty");
  cfg.validate();
  init.validate();
  TrainResult result;
  result.params = project_params(init);
  result.initial_loss = mean_loss(data, result.params);

  std::mt19937_64 shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const int K = result.params.layers() + 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t count = std::min(order.size() - start, static_cast<std::size_t>(cfg.batch));
      const DanParams& p = result.params;
      // One slot per (sample, coordinate, sign) probe.
      std::vector<double> losses(count * static_cast<std::size_t>(K) * 2);
      std::vector<double> steps(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) steps[static_cast<std::size_t>(k)] = probe_step(p, k, cfg.fd_step);
      parallel_for(losses.size(), [&](std::size_t slot) {
        const std::size_t s = slot / (static_cast<std::size_t>(K) * 2);
        const int k = static_cast<int>((slot / 2) % static_cast<std::size_t>(K));
        const double h = steps[static_cast<std::size_t>(k)];
        if (h <= 0.0) {
          losses[slot] = 0.0;
          return;
        }
        const double sign = (slot % 2 == 0) ? 1.0 : -1.0;
        losses[slot] = dan_loss(data[order[start + s]], probe(p, k, sign * h));
      });
      Vec grad = Vec::Zero(K);
      for (std::size_t s = 0; s < count; ++s) {
        for (int k = 0; k < K; ++k) {
          const double h = steps[static_cast<std::size_t>(k)];
          if (h <= 0.0) continue;
          const std::size_t base = (s * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)) * 2;
          grad(k) += (losses[base] - losses[base + 1]) / (2.0 * h);
        }
      }
      grad /= static_cast<double>(count);
      result.params = sgd_step(result.params, grad, cfg.lr);
    }
    result.epoch_loss.push_back(mean_loss(data, result.params));
  }
  return result;
}

// ------------------------------------------------------------------ regret

Vec regret_reference(const SelectionContext& ctx, const DanParams& params, const Vec& es_label, const Vec& mm_output) {
  const double a = relaxed_objective(ctx, es_label, params.rho, params.gamma);
  const double b = relaxed_objective(ctx, mm_output, params.rho, params.gamma);
  return (a <= b) ? es_label : mm_output;
}

double regret_c1(const RegretConstants& k, const DanParams& p) {
  const double sb2 = std::sqrt(p.beta2);
  return std::sqrt(1.0 - p.beta2) * k.D_u1 * k.D_delta / (p.alpha_lo * (1.0 - sb2) * (1.0 - p.beta1));
}

double regret_c2(const RegretConstants& k, const DanParams& p) {
  const double b1 = p.beta1, b2 = p.beta2, e1 = p.eta1, ea = p.eta_a, ra = p.rho_a;
  const double sb2 = std::sqrt(b2), s1b2 = std::sqrt(1.0 - b2);
  const double am = p.alpha_lo, ap = p.alpha_hi;
  // Shared factor sqrt(1-b2) D_u1 D_delta / (alpha^- (1 - sqrt b2) (1 - b1)).
  const double adam = s1b2 * k.D_u1 * k.D_delta / (am * (1.0 - sb2) * (1.0 - b1));

  double c2 = 0.0;
  c2 += 2.0 * ra * k.D_delta * ea / (1.0 - b1);
  c2 += adam;
  c2 += ap * (3.0 + b1) * k.D_u1 /
        (2.0 * (1.0 - b1) * (1.0 - b1) * (1.0 - b1 / sb2) * s1b2 * (1.0 - e1 * e1));
  c2 += ra * k.D_phi * (k.D_b1 + k.D_b2) / (2.0 * (1.0 - ea) * (1.0 - b1));
  c2 += k.D_u1 * k.D_phi / (2.0 * (1.0 - e1) * (1.0 - b1) * (1.0 - b1));
  c2 += b1 * adam / (2.0 * (1.0 - e1) * (1.0 - e1));
  c2 += b1 * ra * k.D_delta / (2.0 * (1.0 - e1 * ea) * (1.0 - b1));
  c2 += ra * adam / (2.0 * (1.0 - ea) * (1.0 - ea));
  c2 += ra * ra * k.D_delta / (2.0 * (1.0 - ea * ea) * (1.0 - b1));
  c2 += 3.0 * ra * ra * k.D_phi * k.D_b2 / (2.0 * (1.0 - ea * ea) * (1.0 - b1));
  c2 += 3.0 * k.D_u1 * k.D_u1 * k.D_phi / ((1.0 - e1 * e1) * std::pow(1.0 - b1, 3));
  c2 += 3.0 * ra * ra * k.D_b1 * k.D_b1 * k.D_phi / ((1.0 - ea * ea) * (1.0 - b1));
  c2 += k.D_du2 * k.D_phi / (1.0 - b1);
  const double lead = ra * k.D_b1 / ((1.0 - ea) * (1.0 - ea));
  c2 += (k.D_u1 / ((1.0 - b1) * (1.0 - e1) * (1.0 - e1)) + lead) * adam / 2.0;
  c2 += (k.D_u1 / ((1.0 - b1) * (1.0 - e1) * (1.0 - ea)) + lead) * k.D_delta * ra / (2.0 * (1.0 - b1));
  return c2;
}

RegretReport regret_bound_check(const DanRun& run, const SelectionContext& ctx, const DanParams& params,
                                const Vec& u_star) {
  if (run.u_layers.empty() || run.layers.size() != run.u_layers.size()) {
    throw std::invalid_argument("regret check needs per-layer outputs and diagnostics");
  }
  for (const auto& d : run.layers) {
    if (d.grad.size() == 0 || d.phi_inv.size() == 0 || d.v_minus_z.size() == 0 || d.delta_u.size() == 0) {
      throw std::invalid_argument("regret check needs complete layer diagnostics");
    }
  }
  RegretReport rep;
  const int N = ctx.nodes();
  rep.constants.D_delta = 2.0 * std::min(ctx.nmax, N - ctx.nmax);
  for (const auto& d : run.layers) {
    rep.constants.D_u1 = std::max(rep.constants.D_u1, d.grad.lpNorm<1>());
    rep.constants.D_phi = std::max(rep.constants.D_phi, d.phi_inv.maxCoeff());
    rep.constants.D_b1 = std::max(rep.constants.D_b1, d.v_minus_z.lpNorm<1>());
    rep.constants.D_b2 = std::max(rep.constants.D_b2, d.v_minus_z.squaredNorm());
    rep.constants.D_du2 = std::max(rep.constants.D_du2, d.delta_u.squaredNorm());
  }
  const double g_star = relaxed_objective(ctx, u_star, params.rho, params.gamma);
  for (const Vec& u : run.u_layers) rep.R_L += relaxed_objective(ctx, u, params.rho, params.gamma) - g_star;
  rep.C1 = regret_c1(rep.constants, params);
  rep.C2 = regret_c2(rep.constants, params);
  rep.bound = rep.C1 * std::sqrt(static_cast<double>(run.u_layers.size())) + rep.C2;
  rep.lr_increases = learning_rate_increases(run);
  return rep;
}

}  // namespace pmn
