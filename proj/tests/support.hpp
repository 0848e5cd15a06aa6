#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pmn/config.hpp"
#include "pmn/fisher.hpp"
#include "pmn/rng.hpp"
#include "pmn/selection.hpp"

namespace pmn::fixtures {

inline Mat4 random_spd(RandomStream& rng, double floor = 0.5) {
  Mat4 B;
  for (int i = 0; i < 16; ++i) B(i) = rng.normal();
  return B * B.transpose() + floor * Mat4::Identity();
}

inline Mat4 random_psd(RandomStream& rng, int rank) {
  Eigen::Matrix<double, 4, Eigen::Dynamic> B(4, rank);
  for (int i = 0; i < B.size(); ++i) B(i) = rng.normal();
  return B * B.transpose();
}

inline MeasInfoSet random_info(RandomStream& rng, int n, int rank = 3) {
  MeasInfoSet m;
  for (int i = 0; i < n; ++i) m.mbar.push_back(random_psd(rng, rank));
  return m;
}

/// Feasible interior point with entries in (0,1) summing to nmax.
inline Vec random_feasible(RandomStream& rng, int n, int nmax) {
  Vec u(n);
  for (int i = 0; i < n; ++i) u(i) = rng.uniform(0.05, 0.95);
  for (int it = 0; it < 100; ++it) {
    u.array() += (nmax - u.sum()) / n;
    u = u.cwiseMax(0.0).cwiseMin(1.0);
    if (std::abs(u.sum() - nmax) < 1e-13) break;
  }
  return u;
}

/// Default link budget with a random layout of `nodes` nodes.
inline ExperimentConfig desk_config(int nodes, int nmax, std::uint64_t layout_seed = 1) {
  nlohmann::json j = default_config_json();
  j["node_layout"] = {{"count", nodes}, {"half_width", 200.0}, {"seed", layout_seed}};
  j["nmax"] = nmax;
  return config_from_json(j);
}

/// log det through an LU factorisation, independent of the library's
/// Cholesky path.
inline double lu_cost(const Mat4& J) { return -std::log(J.fullPivLu().determinant()); }

/// Bitmask enumeration of all nmax-subsets; returns the lowest cost subset
/// as a 0/1 vector and its cost.
inline std::pair<Vec, double> brute_force_subset(const SelectionContext& ctx) {
  const int N = ctx.nodes();
  double best = std::numeric_limits<double>::infinity();
  Vec arg = Vec::Zero(N);
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    if (__builtin_popcount(mask) != ctx.nmax) continue;
    Mat4 J = ctx.Jp;
    Vec u = Vec::Zero(N);
    for (int n = 0; n < N; ++n) {
      if (mask & (1u << n)) {
        J += ctx.power * ctx.info[n];
        u(n) = 1.0;
      }
    }
    const double c = lu_cost(J);
    if (c < best) {
      best = c;
      arg = u;
    }
  }
  return {arg, best};
}

/// Central difference gradient of f at x.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace pmn::fixtures
