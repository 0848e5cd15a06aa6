#pragma once

#include <vector>

#include "pmn/selection.hpp"
#include "pmn/types.hpp"

namespace pmn {

/// Choice of the scaled-identity majorizer C_T * I for the Hessian.
enum class MajorizerVariant {
  kTrace,   // MA-I: C_T = tr(H_u)
  kMaxEig,  // MA-II: C_T = lambda_max(H_u)
};

struct MMConfig {
  double rho = 1.0;      // l0-penalty weight
  double gamma = 1e4;    // penalty smoothing
  double rho_a = 1e2;    // ADMM penalty base; rho_a * eta_a^l at outer step l
  double eta_a = 0.99;
  int mm_iters = 30;
  int admm_iters = 200;
  double tol = 1e-6;       // on ||delta u||_inf, both loops
  double epsilon = 1e-8;   // added to C_T so Phi stays positive
  int max_backtracks = 40;  // C_T doublings when the quadratic bound fails

  void validate() const;
};

/// The inner problem of one MM step: minimise the quadratic surrogate plus the
/// linearised penalty over {1^T u = 1^T anchor} x [0,1]^N.
struct AdmmProblem {
  Vec anchor;    // u^(l), feasible
  Vec gradient;  // first-order term (d_u for MM-ADMM, momentum for DAN)
  Vec phi;       // diagonal of T + rho_al I
  Vec d_gamma;   // penalty gradient at the anchor
  double rho = 1.0;
  double rho_al = 1.0;
};

struct AdmmState {
  Vec u, v, z;
  int iterations = 0;
  bool converged = false;
  std::vector<double> lagrangian;  // filled when requested
};

double choose_T(const Mat& Hu, MajorizerVariant variant);

/// anchor - Phi^-1 (d_m - nu 1), nu chosen so the entry sum is preserved.
/// Throws std::invalid_argument if any phi entry is non-positive.
Vec admm_u_update(const Vec& anchor, const Vec& phi, const Vec& d_m);

/// clip(-(rho / rho_al) d_gamma + u_next + z, 0, 1).
Vec admm_v_update(const Vec& u_next, const Vec& z, const Vec& d_gamma, double rho, double rho_al);

/// Surrogate augmented Lagrangian, dropping terms constant in (u, v, z).
double augmented_lagrangian(const AdmmProblem& prob, const Vec& u, const Vec& v, const Vec& z);

AdmmState admm_inner(const AdmmProblem& prob, int max_iters, double tol, bool record_lagrangian = false);

struct MMResult {
  Vec u;
  SelectTrace trace;
  std::vector<double> objective;  // cost + rho * P_gamma per entry of trace
  std::vector<double> c_t;        // C_T actually used per outer step
  int backtracks = 0;
  bool majorizer_dominates = true;  // C_T I >= H_u held at every anchor
};

/// Outer MM loop with inner ADMM. u0 must satisfy 1^T u0 = nmax, u0 in [0,1]^N.
MMResult mm_admm_select(const SelectionContext& ctx, const Vec& u0, MajorizerVariant variant, const MMConfig& cfg);

}  // namespace pmn
