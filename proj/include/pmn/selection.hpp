#pragma once

#include <ostream>
#include <vector>

#include "pmn/fisher.hpp"
#include "pmn/types.hpp"

namespace pmn {

/// One target's node-selection instance at fixed power.
struct SelectionContext {
  Mat4 Jp = Mat4::Identity();
  MeasInfoSet info;
  double power = 1.0;
  int nmax = 1;

  int nodes() const { return info.size(); }
  FisherState fisher(const Vec& u) const { return fim(Jp, u, power, info); }
  double cost(const Vec& u) const { return cost_logdet(fisher(u)); }
};

/// Per-iteration (MM) or per-layer (DAN) record of a selector run.
struct SelectTrace {
  std::vector<double> cost_per_iter;  // cost_logdet at each iterate
  std::vector<Vec> u_per_iter;
  std::vector<double> residual;  // ||u_{l+1} - u_l||_inf; 0 for the initial entry
  bool converged = false;

  void record(double cost, const Vec& u, double residual_value);
  std::size_t size() const { return cost_per_iter.size(); }
};

/// CSV rows "method,iteration,cost,residual" (no header).
void write_trace_rows(std::ostream& os, const char* method, const SelectTrace& trace);

/// Smoothed l0 surrogate sum_n (1 - exp(-gamma u_n)) and its gradient.
struct PenaltyEval {
  double value = 0.0;
  Vec grad;
};
PenaltyEval penalty_value_grad(const Vec& u, double gamma);

/// cost_logdet(u) + rho * P_gamma(u): the relaxed objective both selectors
/// descend on.
double relaxed_objective(const SelectionContext& ctx, const Vec& u, double rho, double gamma);

/// Exactly `nmax` ones at the largest entries; ties go to the lower index.
Vec binarize(const Vec& u, int nmax);

/// Feasible interior start nmax/N * 1.
Vec uniform_start(int nodes, int nmax);

}  // namespace pmn
