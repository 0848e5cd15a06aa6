#pragma once

#include <vector>

#include "pmn/rng.hpp"
#include "pmn/types.hpp"

namespace pmn {

/// Near-constant-velocity kinematics for the state [r_x, v_x, r_y, v_y].
struct MotionModel {
  double dt = 0.0;
  double qs = 0.0;
  Mat4 G = Mat4::Identity();
  Mat4 Qn = Mat4::Zero();
};

struct TargetState {
  Vec4 x = Vec4::Zero();
  int frame = 0;

  Vec2 position() const { return {x(0), x(2)}; }
  Vec2 velocity() const { return {x(1), x(3)}; }
  static TargetState from(const Vec2& position, const Vec2& velocity, int frame = 0);
};

struct SensingNode {
  Vec2 position = Vec2::Zero();
  Vec2 axis = Vec2::UnitX();  // unit vector along the receive array
};

/// Which distance enters the SNR path-loss term.
enum class SnrDistance {
  kTargetToNode,   // ||r - r_n||
  kHalfRoundTrip,  // (||r - r_n|| + ||r - r_BS||) / 2
};

/// Network geometry and link budget. SI units throughout (W, m, s, Hz).
struct Scenario {
  Vec2 bs_position = Vec2::Zero();
  std::vector<SensingNode> nodes;
  double wavelength = 0.0;
  double c = 299792458.0;
  double gamma0 = 0.0;  // linear path gain at the reference distance
  double sigma2 = 0.0;  // receiver noise power
  double Pt = 0.0;
  double Pmin = 0.0;
  int Nmax = 1;
  Vec3 base_cov = Vec3::Ones();  // diagonal of the unit-SNR error covariance
  SnrDistance snr_distance = SnrDistance::kTargetToNode;

  int node_count() const { return static_cast<int>(nodes.size()); }

  /// Throws std::invalid_argument when the invariants do not hold for
  /// `targets` simultaneously tracked targets.
  void validate(int targets) const;
};

struct Measurement {
  double theta = 0.0;  // angle of arrival, rad, in [0, pi]
  double tau = 0.0;    // bistatic delay, s
  double mu = 0.0;     // Doppler, Hz

  Vec3 as_vector() const { return {theta, tau, mu}; }
};

/// Throws std::invalid_argument unless dt > 0 and qs > 0.
MotionModel build_motion_model(double dt, double qs);

TargetState predict_state(const MotionModel& model, const TargetState& s);

TargetState sample_transition(const MotionModel& model, const TargetState& s, RandomStream& rng);

Measurement true_measurement(const Scenario& sc, const TargetState& s, int node);

/// Analytic d[theta, tau, mu]/dx at `s`.
Mat34 measurement_jacobian(const Scenario& sc, const TargetState& s, int node);

struct MeasurementCovariance {
  Vec3 diag;        // Sigma at the given power
  Vec3 power_free;  // Sigma * p
};

MeasurementCovariance measurement_covariance(const Scenario& sc, double p, const TargetState& s, int node);

/// Power-independent covariance diagonal (Sigma_bar); no power argument.
Vec3 power_free_covariance(const Scenario& sc, const TargetState& s, int node);

double snr(const Scenario& sc, double p, const TargetState& s, int node);

Measurement sample_measurement(const Scenario& sc, double p, const TargetState& s_true, int node,
                               RandomStream& rng);

/// dBm -> W and dB -> linear, used only at config boundaries.
double dbm_to_watt(double dbm);
double db_to_linear(double db);

}  // namespace pmn
