#pragma once

#include <vector>

#include "pmn/scenario.hpp"
#include "pmn/types.hpp"

namespace pmn {

/// Information matrix of one target at one frame.
struct FisherState {
  Mat4 J = Mat4::Identity();
  int frame = 0;
};

/// Per-node power-normalised measurement information H^T Sigma_bar^-1 H.
struct MeasInfoSet {
  std::vector<Mat4> mbar;

  int size() const { return static_cast<int>(mbar.size()); }
  const Mat4& operator[](int n) const { return mbar[static_cast<std::size_t>(n)]; }
};

/// Inverse of diag(sr^2, sv^2, sr^2, sv^2).
FisherState initial_fisher(double sigma_r, double sigma_v);

/// (Qn + G J_prev^-1 G^T)^-1. Throws std::invalid_argument if J_prev is not SPD.
Mat4 prior_info(const MotionModel& model, const FisherState& j_prev);

MeasInfoSet meas_info_set(const Scenario& sc, const TargetState& s_pred);

/// sum_n u_n * mbar_n.
Mat4 aggregate_info(const Vec& u, const MeasInfoSet& m);

/// Jp + p * sum_n u_n mbar_n.
FisherState fim(const Mat4& Jp, const Vec& u, double p, const MeasInfoSet& m);

/// J^-1. Throws NotPositiveDefinite when J is singular or indefinite.
Mat4 pcrlb(const FisherState& J);

/// -log det J (= log det of the PCRLB).
double cost_logdet(const FisherState& J);
double cost_logdet(const Mat4& J);

/// n-th entry: -tr(J^-1 p mbar_n).
Vec grad_u(const FisherState& J, double p, const MeasInfoSet& m);

/// (m, n) entry: tr(J^-1 M_m J^-1 M_n) with M_n = p mbar_n.
Mat hess_u(const FisherState& J, double p, const MeasInfoSet& m);

/// Cholesky-based SPD inverse; throws NotPositiveDefinite on failure.
Mat4 spd_inverse(const Mat4& A);

}  // namespace pmn
