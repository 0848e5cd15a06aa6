#include "pmn/fisher.hpp"

#include <cmath>
#include <stdexcept>

#include "pmn/errors.hpp"

namespace pmn {
namespace {

Eigen::LLT<Mat4> checked_llt(const Mat4& A) {
  Eigen::LLT<Mat4> llt(A);
  if (llt.info() != Eigen::Success || !A.allFinite()) {
    throw NotPositiveDefinite("matrix is not symmetric positive-definite");
  }
  return llt;
}

bool is_symmetric(const Mat4& A) { return (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + A.cwiseAbs().maxCoeff()); }

}  // namespace

Mat4 spd_inverse(const Mat4& A) {
  Mat4 inv = checked_llt(A).solve(Mat4::Identity());
  return 0.5 * (inv + inv.transpose());
}

FisherState initial_fisher(double sigma_r, double sigma_v) {
  if (!(sigma_r > 0.0) || !(sigma_v > 0.0)) throw std::invalid_argument("initial standard deviations must be positive");
  FisherState f;
  f.J = Vec4(1.0 / (sigma_r * sigma_r), 1.0 / (sigma_v * sigma_v), 1.0 / (sigma_r * sigma_r), 1.0 / (sigma_v * sigma_v))
            .asDiagonal();
  return f;
}

Mat4 prior_info(const MotionModel& model, const FisherState& j_prev) {
  if (!is_symmetric(j_prev.J)) throw std::invalid_argument("previous information matrix is not symmetric");
  Mat4 cov;
  try {
    cov = spd_inverse(j_prev.J);
  } catch (const NotPositiveDefinite&) {
    throw std::invalid_argument("previous information matrix is not positive-definite");
  }
  const Mat4 predicted = model.Qn + model.G * cov * model.G.transpose();
  return spd_inverse(0.5 * (predicted + predicted.transpose()));
}

MeasInfoSet meas_info_set(const Scenario& sc, const TargetState& s_pred) {
  MeasInfoSet out;
  out.mbar.reserve(sc.nodes.size());
  for (int n = 0; n < sc.node_count(); ++n) {
    const Mat34 H = measurement_jacobian(sc, s_pred, n);
    const Vec3 w = power_free_covariance(sc, s_pred, n).cwiseInverse();
    Mat4 m = H.transpose() * w.asDiagonal() * H;
    out.mbar.push_back(0.5 * (m + m.transpose()));
  }
  return out;
}

Mat4 aggregate_info(const Vec& u, const MeasInfoSet& m) {
  if (u.size() != m.size()) throw std::invalid_argument("selection length does not match node count");
  Mat4 s = Mat4::Zero();
  for (int n = 0; n < m.size(); ++n) {
    if (u(n) != 0.0) s += u(n) * m[n];
  }
  return s;
}

FisherState fim(const Mat4& Jp, const Vec& u, double p, const MeasInfoSet& m) {
  if (!(p > 0.0)) throw std::invalid_argument("power must be positive");
  FisherState f;
  f.J = Jp + p * aggregate_info(u, m);
  return f;
}

Mat4 pcrlb(const FisherState& J) { return spd_inverse(J.J); }

double cost_logdet(const Mat4& J) {
  const Eigen::LLT<Mat4> llt = checked_llt(J);
  return -2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double cost_logdet(const FisherState& J) { return cost_logdet(J.J); }

Vec grad_u(const FisherState& J, double p, const MeasInfoSet& m) {
  const Mat4 Ji = spd_inverse(J.J);
  Vec g(m.size());
  for (int n = 0; n < m.size(); ++n) g(n) = -p * Ji.cwiseProduct(m[n]).sum();
  return g;
}

Mat hess_u(const FisherState& J, double p, const MeasInfoSet& m) {
  const Mat4 Ji = spd_inverse(J.J);
  // Symmetrised factors S_n = L^T M_n L with J^-1 = L L^T make the Hessian
  // a Frobenius Gram matrix, hence exactly symmetric and PSD.
  const Eigen::LLT<Mat4> llt(Ji);
  const Mat4 L = llt.matrixL();
  const int N = m.size();
  Mat S(16, N);
  for (int n = 0; n < N; ++n) {
    const Mat4 s = p * (L.transpose() * m[n] * L);
    S.col(n) = Eigen::Map<const Eigen::Matrix<double, 16, 1>>(s.data());
  }
  Mat H = S.transpose() * S;
  return 0.5 * (H + H.transpose());
}

}  // namespace pmn
