#include "pmn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pmn/csv.hpp"

namespace pmn {

void SelectTrace::record(double cost, const Vec& u, double residual_value) {
  cost_per_iter.push_back(cost);
  u_per_iter.push_back(u);
  residual.push_back(residual_value);
}

void write_trace_rows(std::ostream& os, const char* method, const SelectTrace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << method << ',' << i << ',' << fmt_num(trace.cost_per_iter[i]) << ',' << fmt_num(trace.residual[i]) << '\n';
  }
}

PenaltyEval penalty_value_grad(const Vec& u, double gamma) {
  if (u.size() > 0 && u.minCoeff() < -1e-6) throw std::invalid_argument("penalty requires u >= 0");
  PenaltyEval out;
  const Eigen::ArrayXd e = (-gamma * u.array().max(0.0)).exp();
  out.value = (1.0 - e).sum();
  out.grad = (gamma * e).matrix();
  return out;
}

double relaxed_objective(const SelectionContext& ctx, const Vec& u, double rho, double gamma) {
  const Eigen::ArrayXd e = (-gamma * u.array().max(0.0)).exp();
  return ctx.cost(u) + rho * (1.0 - e).sum();
}

Vec binarize(const Vec& u, int nmax) {
  const auto n = static_cast<int>(u.size());
  if (nmax < 0 || nmax > n) throw std::invalid_argument("nmax out of range for binarize");
  if (!u.allFinite()) throw std::invalid_argument("binarize requires finite entries");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return u(a) > u(b); });
  Vec out = Vec::Zero(n);
  for (int i = 0; i < nmax; ++i) out(idx[static_cast<std::size_t>(i)]) = 1.0;
  return out;
}

Vec uniform_start(int nodes, int nmax) {
  if (nodes < 1 || nmax < 1 || nmax > nodes) throw std::invalid_argument("need 1 <= nmax <= nodes");
  return Vec::Constant(nodes, static_cast<double>(nmax) / nodes);
}

}  // namespace pmn
