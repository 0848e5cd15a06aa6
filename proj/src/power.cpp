#include "pmn/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmn/errors.hpp"
#include "pmn/fisher.hpp"

namespace pmn {
namespace {

struct Traces {
  double jp = 0.0;  // tr(A^-1 Jp)
  double st = 0.0;  // tr(A^-1 St)
};

Traces traces(const Mat4& Jp, const Mat4& St, double p) {
  const Mat4 A = Jp + p * St;
  const Eigen::LLT<Mat4> llt(A);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Jp + p St is not positive definite");
  return {llt.solve(Jp).trace(), llt.solve(St).trace()};
}

}  // namespace

void PowerProblem::validate() const {
  if (targets.empty()) throw std::invalid_argument("power problem has no targets");
  if (!(Pmin >= 0.0) || !(Pt > 0.0)) throw std::invalid_argument("power limits must be non-negative");
  if (size() * Pmin > Pt * (1.0 + 1e-12)) throw std::invalid_argument("Q * Pmin exceeds the total budget");
  for (const auto& t : targets) {
    if (Eigen::LLT<Mat4>(t.Jp).info() != Eigen::Success) throw std::invalid_argument("prior information must be SPD");
    Eigen::SelfAdjointEigenSolver<Mat4> es(t.St, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().maxCoeff() > 0.0)) {
      throw std::invalid_argument("aggregate measurement information is zero; select at least one node");
    }
  }
}

double power_objective(const PowerProblem& prob, const Vec& p) {
  double total = 0.0;
  for (int q = 0; q < prob.size(); ++q) {
    const auto& t = prob.targets[static_cast<std::size_t>(q)];
    total -= cost_logdet(Mat4(t.Jp + p(q) * t.St));
  }
  return total;
}

double fixed_point_ratio(const Mat4& Jp, const Mat4& St, double p) {
  const Traces tr = traces(Jp, St, p);
  return tr.jp / tr.st;
}

double fp_power_update(const Mat4& Jp, const Mat4& St, double mu_wf, double p_prev, double Pmin) {
  return std::max(mu_wf - fixed_point_ratio(Jp, St, p_prev), Pmin);
}

double target_power(const Mat4& Jp, const Mat4& St, double mu_wf, double Pmin, double p_start, double tol, int cap) {
  // At an unfloored fixed point tr(A^-1 St) = 4 / mu_wf, and tr(A^-1 St)
  // falls as p grows, so the sign of h brackets the root.
  auto h = [&](double p) { return traces(Jp, St, p).st - 4.0 / mu_wf; };
  if (!(mu_wf > Pmin) || h(Pmin) <= 0.0) return Pmin;
  double lo = Pmin, hi = mu_wf;
  double p = std::clamp(p_start, lo, hi);
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cap; ++it) {
    double cand = mu_wf - fixed_point_ratio(Jp, St, p);
    if (!(cand > lo && cand < hi) || std::abs(cand - p) > 0.5 * last_step) cand = 0.5 * (lo + hi);
    const double step = std::abs(cand - p);
    if (h(cand) > 0.0) {
      lo = cand;
    } else {
      hi = cand;
    }
    p = cand;
    last_step = step;
    if (step <= tol * std::max(1.0, p) || hi - lo <= tol * std::max(1.0, hi)) break;
  }
  return p;
}

namespace {

// Level mu with sum_q max(mu - c_q, Pmin) = Pt. The left side is piecewise
// linear in mu with kinks at c_q + Pmin, so walk the sorted kinks.
double level_for_offsets(const Vec& c, double Pt, double Pmin) {
  std::vector<double> s(c.data(), c.data() + c.size());
  std::sort(s.begin(), s.end());
  const auto Q = static_cast<int>(s.size());
  double sum = 0.0;
  double mu = 0.0;
  for (int k = 1; k <= Q; ++k) {
    sum += s[static_cast<std::size_t>(k - 1)];
    mu = (Pt - (Q - k) * Pmin + sum) / k;
    if (k == Q || mu <= s[static_cast<std::size_t>(k)] + Pmin) break;
  }
  return mu;
}

}  // namespace

WaterLevel bisect_water_level(const PowerProblem& prob) {
  prob.validate();
  const int Q = prob.size();
  WaterLevel out;
  if (Q * prob.Pmin >= prob.Pt * (1.0 - 1e-12)) {
    out.power.p = Vec::Constant(Q, prob.Pmin);
    out.power.all_floored = true;
    return out;
  }
  Vec warm = Vec::Constant(Q, prob.Pt / Q);
  auto powers_at = [&](double mu) {
    Vec p(Q);
    for (int q = 0; q < Q; ++q) {
      const auto& t = prob.targets[static_cast<std::size_t>(q)];
      p(q) = target_power(t.Jp, t.St, mu, prob.Pmin, warm(q), 1e-14);
    }
    return p;
  };

  double lam = 0.0;
  for (const auto& t : prob.targets) {
    const RayleighBounds rb = rayleigh_bounds(t.Jp, t.St);
    lam = std::max(lam, std::isfinite(rb.lambda_max) ? rb.lambda_max : rb.lambda_min);
  }
  double lo = 0.0, hi = prob.Pt + lam;
  Vec p_hi = powers_at(hi);
  for (int grow = 0; p_hi.sum() < prob.Pt && grow < 200; ++grow) {
    lo = hi;
    hi *= 2.0;
    p_hi = powers_at(hi);
  }
  if (p_hi.sum() < prob.Pt) throw std::runtime_error("water-level bracket could not be expanded");

  Vec p = p_hi;
  double mu = hi;
  for (int it = 0; it < 200; ++it) {
    mu = 0.5 * (lo + hi);
    p = powers_at(mu);
    warm = p;
    ++out.bisections;
    const double excess = p.sum() - prob.Pt;
    if (std::abs(excess) <= 1e-13 * prob.Pt) break;
    if (excess > 0.0) {
      hi = mu;
    } else {
      lo = mu;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  out.mu_wf = mu;
  out.power.p = p;
  out.power.all_floored = (p.array() <= prob.Pmin).all();
  return out;
}

WaterLevel solve_water_level(const PowerProblem& prob) {
  prob.validate();
  const int Q = prob.size();
  WaterLevel out;
  if (Q * prob.Pmin >= prob.Pt * (1.0 - 1e-12)) {
    out.power.p = Vec::Constant(Q, prob.Pmin);
    out.power.all_floored = true;
    return out;
  }

  // Joint iteration: freeze each target's ratio at the current power, solve
  // the level in closed form, repeat.
  Vec p = Vec::Constant(Q, prob.Pt / Q);
  Vec c(Q);
  bool converged = false;
  for (int it = 0; it < kJointIterationCap && !converged; ++it) {
    for (int q = 0; q < Q; ++q) {
      // tr(A^-1 Jp) = 4 - p tr(A^-1 St), so one solve gives the ratio.
      const auto& t = prob.targets[static_cast<std::size_t>(q)];
      const Eigen::LLT<Mat4> llt(Mat4(t.Jp + p(q) * t.St));
      if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Jp + p St is not positive definite");
      const double st = llt.solve(t.St).trace();
      c(q) = 4.0 / st - p(q);
    }
    out.mu_wf = level_for_offsets(c, prob.Pt, prob.Pmin);
    const Vec next = (out.mu_wf - c.array()).max(prob.Pmin).matrix();
    converged = (next - p).cwiseAbs().maxCoeff() <= 1e-13 * prob.Pt;
    p = next;
    ++out.fixed_point_iterations;
  }
  if (!converged) {
    const int sweeps = out.fixed_point_iterations;
    out = bisect_water_level(prob);
    out.fixed_point_iterations = sweeps;
    return out;
  }
  out.power.p = p;
  out.power.all_floored = (p.array() <= prob.Pmin).all();
  return out;
}

RayleighBounds rayleigh_bounds(const Mat4& Jp, const Mat4& St) {
  const Eigen::LLT<Mat4> llt(Jp);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("prior information is not positive definite");
  const Mat4 L = llt.matrixL();
  // Eigenvalues of L^-1 St L^-T are the reciprocals of those of St^-1 Jp.
  const Mat4 Li = L.triangularView<Eigen::Lower>().solve(Mat4::Identity());
  const Mat4 W = Li * St * Li.transpose();
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (W + W.transpose()), Eigen::EigenvaluesOnly);
  const double mu_max = es.eigenvalues().maxCoeff();
  const double mu_min = es.eigenvalues().minCoeff();
  if (!(mu_max > 0.0)) throw std::invalid_argument("St has no positive eigenvalue");
  RayleighBounds rb;
  rb.lambda_min = 1.0 / mu_max;
  rb.lambda_max = (mu_min > 1e-12 * mu_max) ? 1.0 / mu_min : std::numeric_limits<double>::infinity();
  return rb;
}

}  // namespace pmn
