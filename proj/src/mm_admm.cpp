#include "pmn/mm_admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmn {
namespace {

void check_feasible(const Vec& u, int nmax) {
  if (std::abs(u.sum() - nmax) > 1e-8) throw std::invalid_argument("start point must satisfy 1^T u = nmax");
  if (u.minCoeff() < -1e-12 || u.maxCoeff() > 1.0 + 1e-12) throw std::invalid_argument("start point must lie in [0,1]^N");
}

}  // namespace

void MMConfig::validate() const {
  if (!(rho >= 0.0) || !(gamma > 0.0) || !(rho_a > 0.0) || !(tol > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("MM configuration values must be positive");
  }
  if (!(eta_a > 0.0 && eta_a < 1.0)) throw std::invalid_argument("eta_a must lie in (0,1)");
  if (mm_iters < 1 || admm_iters < 1) throw std::invalid_argument("iteration caps must be >= 1");
}

double choose_T(const Mat& Hu, MajorizerVariant variant) {
  if (Hu.rows() != Hu.cols()) throw std::invalid_argument("Hessian must be square");
  if (Hu.size() == 0) return 0.0;
  switch (variant) {
    case MajorizerVariant::kTrace:
      return Hu.trace();
    case MajorizerVariant::kMaxEig: {
      Eigen::SelfAdjointEigenSolver<Mat> es(Hu, Eigen::EigenvaluesOnly);
      return std::max(0.0, es.eigenvalues().maxCoeff());
    }
  }
  return Hu.trace();
}

Vec admm_u_update(const Vec& anchor, const Vec& phi, const Vec& d_m) {
  if (phi.size() != anchor.size() || d_m.size() != anchor.size()) throw std::invalid_argument("size mismatch in u-update");
  if (!(phi.minCoeff() > 0.0)) throw std::invalid_argument("Phi diagonal must be positive");
  const Vec inv = phi.cwiseInverse();
  const double nu = inv.dot(d_m) / inv.sum();
  return anchor - inv.cwiseProduct(d_m - Vec::Constant(d_m.size(), nu));
}

Vec admm_v_update(const Vec& u_next, const Vec& z, const Vec& d_gamma, double rho, double rho_al) {
  if (!(rho_al > 0.0)) throw std::invalid_argument("rho_al must be positive");
  return (-(rho / rho_al) * d_gamma + u_next + z).cwiseMax(0.0).cwiseMin(1.0);
}

double augmented_lagrangian(const AdmmProblem& prob, const Vec& u, const Vec& v, const Vec& z) {
  const Vec du = u - prob.anchor;
  const Vec t = prob.phi.array() - prob.rho_al;
  return prob.gradient.dot(du) + 0.5 * du.dot(t.cwiseProduct(du)) + prob.rho * prob.d_gamma.dot(v) +
         0.5 * prob.rho_al * (u - v + z).squaredNorm();
}

AdmmState admm_inner(const AdmmProblem& prob, int max_iters, double tol, bool record_lagrangian) {
  AdmmState s;
  s.u = prob.anchor;
  s.v = prob.anchor.cwiseMax(0.0).cwiseMin(1.0);
  s.z = Vec::Zero(prob.anchor.size());
  for (int m = 0; m < max_iters; ++m) {
    // Exact minimiser of the augmented Lagrangian in u: the proximal term is
    // centred on v - z, measured from the anchor.
    const Vec d_m = prob.gradient - prob.rho_al * (s.v - s.z - prob.anchor);
    Vec u_next = admm_u_update(prob.anchor, prob.phi, d_m);
    s.v = admm_v_update(u_next, s.z, prob.d_gamma, prob.rho, prob.rho_al);
    s.z += u_next - s.v;
    const double step = (u_next - s.u).cwiseAbs().maxCoeff();
    s.u = std::move(u_next);
    s.iterations = m + 1;
    if (record_lagrangian) s.lagrangian.push_back(augmented_lagrangian(prob, s.u, s.v, s.z));
    if (step < tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

MMResult mm_admm_select(const SelectionContext& ctx, const Vec& u0, MajorizerVariant variant, const MMConfig& cfg) {
  cfg.validate();
  if (u0.size() != ctx.nodes()) throw std::invalid_argument("start point length does not match node count");
  check_feasible(u0, ctx.nmax);

  MMResult out;
  Vec u = u0;
  double obj = relaxed_objective(ctx, u, cfg.rho, cfg.gamma);
  out.trace.record(ctx.cost(u), u, 0.0);
  out.objective.push_back(obj);

  for (int l = 1; l <= cfg.mm_iters; ++l) {
    const FisherState J = ctx.fisher(u);
    AdmmProblem prob;
    prob.anchor = u;
    prob.gradient = grad_u(J, ctx.power, ctx.info);
    const Mat H = hess_u(J, ctx.power, ctx.info);
    double c_t = choose_T(H, variant);
    prob.d_gamma = penalty_value_grad(u.cwiseMax(0.0), cfg.gamma).grad;
    prob.rho = cfg.rho;
    prob.rho_al = cfg.rho_a * std::pow(cfg.eta_a, l);

    // C_T I >= H_u holds at the anchor only; if the step leaves the region
    // where the quadratic bound is valid, enlarge C_T until the relaxed
    // objective does not increase.
    bool accepted = false;
    Vec candidate;
    double cand_obj = obj;
    for (int b = 0; b <= cfg.max_backtracks; ++b) {
      prob.phi = Vec::Constant(u.size(), c_t + cfg.epsilon + prob.rho_al);
      candidate = admm_inner(prob, cfg.admm_iters, cfg.tol).u;
      cand_obj = relaxed_objective(ctx, candidate, cfg.rho, cfg.gamma);
      if (cand_obj <= obj + 1e-12 * std::max(1.0, std::abs(obj))) {
        accepted = true;
        break;
      }
      c_t = 2.0 * std::max(c_t, 1.0);
      ++out.backtracks;
    }
    out.c_t.push_back(c_t);
    {
      Eigen::SelfAdjointEigenSolver<Mat> es(Mat::Identity(H.rows(), H.cols()) * c_t - H, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, H.norm())) out.majorizer_dominates = false;
    }
    if (!accepted) {
      out.trace.converged = true;
      break;
    }
    const double residual = (candidate - u).cwiseAbs().maxCoeff();
    u = std::move(candidate);
    obj = cand_obj;
    out.trace.record(ctx.cost(u), u, residual);
    out.objective.push_back(obj);
    if (residual < cfg.tol) {
      out.trace.converged = true;
      break;
    }
  }
  out.u = u;
  return out;
}

}  // namespace pmn
