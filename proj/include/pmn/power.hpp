#pragma once

#include <vector>

#include "pmn/types.hpp"

namespace pmn {

/// One target's share of the power problem: prior information and the
/// aggregate (power-normalised) information of its selected nodes.
struct PowerTarget {
  Mat4 Jp = Mat4::Identity();
  Mat4 St = Mat4::Zero();
};

struct PowerProblem {
  std::vector<PowerTarget> targets;
  double Pt = 1.0;
  double Pmin = 0.0;

  int size() const { return static_cast<int>(targets.size()); }
  /// Rejects Q * Pmin > Pt, non-SPD Jp, and St without a positive eigenvalue.
  void validate() const;
};

struct PowerVec {
  Vec p;
  bool all_floored = false;  // budget could not be exhausted above the floor
};

/// sum_q log det(Jp_q + p_q St_q).
double power_objective(const PowerProblem& prob, const Vec& p);

/// tr((Jp + p St)^-1 Jp) / tr((Jp + p St)^-1 St).
double fixed_point_ratio(const Mat4& Jp, const Mat4& St, double p);

/// max(mu - ratio(p_prev), Pmin).
double fp_power_update(const Mat4& Jp, const Mat4& St, double mu_wf, double p_prev, double Pmin);

/// Converged fixed point of fp_power_update for one target at water level
/// mu_wf. The plain iteration can overshoot, so each step is kept inside a
/// shrinking bracket around the root and falls back to bisection.
double target_power(const Mat4& Jp, const Mat4& St, double mu_wf, double Pmin, double p_start, double tol = 1e-10,
                    int cap = 100);

struct WaterLevel {
  double mu_wf = 0.0;
  PowerVec power;
  int fixed_point_iterations = 0;
  int bisections = 0;  // non-zero only when the joint iteration stalled
};

inline constexpr int kJointIterationCap = 200;

/// Water level mu_wf and powers with sum p = Pt. Iterates the fixed-point
/// map for all targets at once, re-solving the level exactly after each
/// sweep; if that has not settled after kJointIterationCap sweeps, falls
/// back to bisection on mu_wf with each target's fixed point converged.
WaterLevel solve_water_level(const PowerProblem& prob);

/// Bisection on mu_wf; every probe converges each target's fixed point.
/// Termination follows from p_q(mu_wf) being nondecreasing.
WaterLevel bisect_water_level(const PowerProblem& prob);

/// Eigenvalue range of St^-1 Jp (restricted to St's range when singular).
/// lambda_max is +infinity when St is rank deficient.
struct RayleighBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};
RayleighBounds rayleigh_bounds(const Mat4& Jp, const Mat4& St);

}  // namespace pmn
