#include "pmn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pmn/errors.hpp"
#include "pmn/parallel.hpp"

namespace pmn {

SubsetIter::SubsetIter(int n, int k) : n_(n), k_(k) {
  if (n < 0 || k < 0 || k > n) throw std::invalid_argument("need 0 <= k <= n");
  idx_.resize(static_cast<std::size_t>(k));
  std::iota(idx_.begin(), idx_.end(), 0);
}

void SubsetIter::next() {
  if (done_) return;
  int i = k_ - 1;
  while (i >= 0 && idx_[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
  if (i < 0) {
    done_ = true;
    return;
  }
  ++idx_[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k_; ++j) idx_[static_cast<std::size_t>(j)] = idx_[static_cast<std::size_t>(j - 1)] + 1;
}

double SubsetIter::count(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

namespace {

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> subset;
};

}  // namespace

Vec exhaustive_select(const SelectionContext& ctx, double cap) {
  const int N = ctx.nodes();
  const int K = ctx.nmax;
  if (K < 1 || K > N) throw std::invalid_argument("need 1 <= nmax <= N");
  const double total = SubsetIter::count(N, K);
  if (total > cap) {
    throw EnumerationCapExceeded("exhaustive search over " + std::to_string(static_cast<long long>(total)) +
                                 " subsets exceeds the cap; lower the node count or Nmax");
  }
  std::vector<Mat4> scaled(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) scaled[static_cast<std::size_t>(n)] = ctx.power * ctx.info[n];

  // Split on the first element: every subset whose smallest index is `first`
  // belongs to one task, so per-task winners reduce in lexicographic order.
  const int tasks = N - K + 1;
  std::vector<Best> best(static_cast<std::size_t>(tasks));
  parallel_for(static_cast<std::size_t>(tasks), [&](std::size_t t) {
    const int first = static_cast<int>(t);
    const Mat4 base = ctx.Jp + scaled[t];
    Best& b = best[t];
    SubsetIter rest(N - first - 1, K - 1);
    for (; !rest.done(); rest.next()) {
      Mat4 J = base;
      for (int r : rest.current()) J += scaled[static_cast<std::size_t>(first + 1 + r)];
      const double c = cost_logdet(J);
      if (c < b.cost) {
        b.cost = c;
        b.subset.assign(1, first);
        for (int r : rest.current()) b.subset.push_back(first + 1 + r);
      }
    }
  });
  const Best* win = &best[0];
  for (const Best& b : best) {
    if (b.cost < win->cost) win = &b;
  }
  Vec u = Vec::Zero(N);
  for (int n : win->subset) u(n) = 1.0;
  return u;
}

Vec nearest_select(const Scenario& sc, const TargetState& s_pred, int nmax) {
  const int N = sc.node_count();
  if (nmax < 1 || nmax > N) throw std::invalid_argument("need 1 <= nmax <= N");
  std::vector<double> dist(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    dist[static_cast<std::size_t>(n)] = (s_pred.position() - sc.nodes[static_cast<std::size_t>(n)].position).norm();
  }
  std::vector<int> idx(static_cast<std::size_t>(N));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)]; });
  Vec u = Vec::Zero(N);
  for (int i = 0; i < nmax; ++i) u(idx[static_cast<std::size_t>(i)]) = 1.0;
  return u;
}

Vec project_power(const Vec& y, double Pt, double Pmin) {
  const auto Q = y.size();
  const double budget = Pt - static_cast<double>(Q) * Pmin;
  if (budget < -1e-12 * Pt) throw std::invalid_argument("Q * Pmin exceeds the total budget");
  const Vec w = (y.array() - Pmin).matrix();
  const Vec clipped = w.cwiseMax(0.0);
  if (clipped.sum() <= budget) return (clipped.array() + Pmin).matrix();
  // Euclidean projection of w onto {w >= 0, sum w = budget}.
  std::vector<double> s(w.data(), w.data() + Q);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (Eigen::Index i = 0; i < Q; ++i) {
    cumsum += s[static_cast<std::size_t>(i)];
    const double t = (cumsum - budget) / static_cast<double>(i + 1);
    if (s[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  return ((w.array() - theta).max(0.0) + Pmin).matrix();
}

PowerVec oracle_power(const PowerProblem& prob) {
  prob.validate();
  const int Q = prob.size();
  auto gradient = [&](const Vec& p) {
    Vec g(Q);
    for (int q = 0; q < Q; ++q) {
      const auto& t = prob.targets[static_cast<std::size_t>(q)];
      const Eigen::LLT<Mat4> llt(Mat4(t.Jp + p(q) * t.St));
      g(q) = llt.solve(t.St).trace();
    }
    return g;
  };

  Vec p = project_power(Vec::Constant(Q, prob.Pt / Q), prob.Pt, prob.Pmin);
  double f = power_objective(prob, p);
  Vec g = gradient(p);
  double step = 1.0 / std::max(1e-12, g.norm());
  Vec p_old = p, g_old = g;
  for (int it = 0; it < 100000; ++it) {
    if ((project_power(p + g, prob.Pt, prob.Pmin) - p).norm() < 1e-9) break;
    if (it > 0) {
      // Barzilai-Borwein step for a concave objective: s^T s / -(s^T y).
      const Vec s = p - p_old;
      const Vec y = g - g_old;
      const double sy = s.dot(y);
      if (sy < 0.0) step = s.squaredNorm() / -sy;
    }
    Vec cand;
    double f_cand = f;
    bool improved = false;
    for (int bt = 0; bt < 60; ++bt) {
      cand = project_power(p + step * g, prob.Pt, prob.Pmin);
      f_cand = power_objective(prob, cand);
      if (f_cand >= f + 1e-4 * g.dot(cand - p)) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || (cand - p).norm() == 0.0) break;
    p_old = p;
    g_old = g;
    p = cand;
    f = f_cand;
    g = gradient(p);
  }
  PowerVec out;
  out.p = p;
  out.all_floored = (p.array() <= prob.Pmin).all();
  return out;
}

}  // namespace pmn
