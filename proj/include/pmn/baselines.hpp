#pragma once

#include <cstdint>
#include <vector>

#include "pmn/power.hpp"
#include "pmn/scenario.hpp"
#include "pmn/selection.hpp"

namespace pmn {

/// Lexicographic enumeration of the k-subsets of {0..n-1}.
class SubsetIter {
 public:
  SubsetIter(int n, int k);

  bool done() const { return done_; }
  const std::vector<int>& current() const { return idx_; }
  void next();

  /// C(n, k) as a double (exact below 2^53).
  static double count(int n, int k);

 private:
  int n_;
  int k_;
  std::vector<int> idx_;
  bool done_ = false;
};

inline constexpr double kDefaultEnumerationCap = 1e6;

/// Best Nmax-subset by cost_logdet; ties go to the lexicographically first
/// subset. Throws EnumerationCapExceeded when C(N, Nmax) > cap.
Vec exhaustive_select(const SelectionContext& ctx, double cap = kDefaultEnumerationCap);

/// The Nmax nodes closest to the predicted position; ties to the lower index.
Vec nearest_select(const Scenario& sc, const TargetState& s_pred, int nmax);

/// Projection onto {p >= Pmin, sum p <= Pt}.
Vec project_power(const Vec& y, double Pt, double Pmin);

/// Projected-gradient ascent on sum_q log det(Jp_q + p_q St_q).
PowerVec oracle_power(const PowerProblem& prob);

}  // namespace pmn
