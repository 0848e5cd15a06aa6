#include "pmn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pmn/errors.hpp"

namespace pmn {
namespace {

constexpr double kCoincident = 1e-9;  // m

struct Geometry {
  Vec2 to_node;  // r - r_n
  Vec2 to_bs;    // r - r_BS
  double d_node;
  double d_bs;
};

Geometry geometry(const Scenario& sc, const TargetState& s, int node) {
  if (node < 0 || node >= sc.node_count()) {
    throw std::out_of_range("node index " + std::to_string(node) + " out of range");
  }
  Geometry g;
  g.to_node = s.position() - sc.nodes[static_cast<std::size_t>(node)].position;
  g.to_bs = s.position() - sc.bs_position;
  g.d_node = g.to_node.norm();
  g.d_bs = g.to_bs.norm();
  if (!(g.d_node > kCoincident) || !(g.d_bs > kCoincident)) {
    throw SingularGeometry("target coincides with node " + std::to_string(node) + " or the base station");
  }
  return g;
}

double snr_distance(const Scenario& sc, const Geometry& g) {
  switch (sc.snr_distance) {
    case SnrDistance::kTargetToNode:
      return g.d_node;
    case SnrDistance::kHalfRoundTrip:
      return 0.5 * (g.d_node + g.d_bs);
  }
  return g.d_node;
}

}  // namespace

TargetState TargetState::from(const Vec2& position, const Vec2& velocity, int frame) {
  TargetState s;
  s.x << position.x(), velocity.x(), position.y(), velocity.y();
  s.frame = frame;
  return s;
}

void Scenario::validate(int targets) const {
  if (nodes.empty()) throw std::invalid_argument("scenario has no sensing nodes");
  if (Nmax < 1 || Nmax > node_count()) {
    throw std::invalid_argument("Nmax must lie in [1, N]; got " + std::to_string(Nmax));
  }
  if (!(wavelength > 0.0) || !(c > 0.0) || !(gamma0 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("wavelength, c, gamma0 and sigma2 must be positive");
  }
  if (!(Pmin > 0.0) || Pt < targets * Pmin) {
    throw std::invalid_argument("power budget must satisfy Pt >= Q * Pmin with Pmin > 0");
  }
  if (!(base_cov.minCoeff() > 0.0)) throw std::invalid_argument("base covariance must be positive");
  for (const auto& n : nodes) {
    if (std::abs(n.axis.norm() - 1.0) > 1e-12) throw std::invalid_argument("node array axis must be a unit vector");
  }
}

MotionModel build_motion_model(double dt, double qs) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(qs > 0.0)) throw std::invalid_argument("process noise intensity must be positive");
  MotionModel m;
  m.dt = dt;
  m.qs = qs;
  Eigen::Matrix2d f;
  f << 1.0, dt, 0.0, 1.0;
  Eigen::Matrix2d q;
  q << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
  m.G.setZero();
  m.Qn.setZero();
  m.G.block<2, 2>(0, 0) = f;
  m.G.block<2, 2>(2, 2) = f;
  m.Qn.block<2, 2>(0, 0) = qs * q;
  m.Qn.block<2, 2>(2, 2) = qs * q;
  return m;
}

TargetState predict_state(const MotionModel& model, const TargetState& s) {
  TargetState out;
  out.x = model.G * s.x;
  out.frame = s.frame + 1;
  return out;
}

TargetState sample_transition(const MotionModel& model, const TargetState& s, RandomStream& rng) {
  TargetState out = predict_state(model, s);
  out.x += rng.gaussian(model.Qn);
  return out;
}

Measurement true_measurement(const Scenario& sc, const TargetState& s, int node) {
  const Geometry g = geometry(sc, s, node);
  const Vec2& axis = sc.nodes[static_cast<std::size_t>(node)].axis;
  const Vec2 v = s.velocity();
  Measurement m;
  m.theta = std::acos(std::clamp(axis.dot(g.to_node) / g.d_node, -1.0, 1.0));
  m.tau = (g.d_node + g.d_bs) / sc.c;
  m.mu = (v.dot(g.to_node) / g.d_node + v.dot(g.to_bs) / g.d_bs) / sc.wavelength;
  return m;
}

Mat34 measurement_jacobian(const Scenario& sc, const TargetState& s, int node) {
  const Geometry g = geometry(sc, s, node);
  const Vec2& axis = sc.nodes[static_cast<std::size_t>(node)].axis;
  const Vec2 v = s.velocity();
  const Vec2 a = g.to_node / g.d_node;
  const Vec2 b = g.to_bs / g.d_bs;

  // theta is the unsigned angle between the array axis and r - r_n; its
  // gradient is the rotated unit vector over the distance, signed by the
  // side of the axis the target is on.
  const double cross = axis.x() * g.to_node.y() - axis.y() * g.to_node.x();
  const double side = cross >= 0.0 ? 1.0 : -1.0;
  const Vec2 dtheta = side * Vec2(-g.to_node.y(), g.to_node.x()) / (g.d_node * g.d_node);

  const Vec2 dtau = (a + b) / sc.c;

  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  const Vec2 dmu_r = ((I - a * a.transpose()) * v / g.d_node + (I - b * b.transpose()) * v / g.d_bs) / sc.wavelength;
  const Vec2 dmu_v = (a + b) / sc.wavelength;

  Mat34 H = Mat34::Zero();
  H(0, 0) = dtheta.x();
  H(0, 2) = dtheta.y();
  H(1, 0) = dtau.x();
  H(1, 2) = dtau.y();
  H(2, 0) = dmu_r.x();
  H(2, 1) = dmu_v.x();
  H(2, 2) = dmu_r.y();
  H(2, 3) = dmu_v.y();
  return H;
}

double snr(const Scenario& sc, double p, const TargetState& s, int node) {
  if (!(p > 0.0)) throw std::invalid_argument("transmit power must be positive");
  const double d = snr_distance(sc, geometry(sc, s, node));
  return p * sc.gamma0 / (sc.sigma2 * d * d);
}

Vec3 power_free_covariance(const Scenario& sc, const TargetState& s, int node) {
  const double d = snr_distance(sc, geometry(sc, s, node));
  return sc.base_cov * (sc.sigma2 * d * d / sc.gamma0);
}

MeasurementCovariance measurement_covariance(const Scenario& sc, double p, const TargetState& s, int node) {
  if (!(p > 0.0)) throw std::invalid_argument("transmit power must be positive");
  MeasurementCovariance out;
  out.power_free = power_free_covariance(sc, s, node);
  out.diag = out.power_free / p;
  return out;
}

Measurement sample_measurement(const Scenario& sc, double p, const TargetState& s_true, int node,
                               RandomStream& rng) {
  const Measurement truth = true_measurement(sc, s_true, node);
  const Vec3 sd = measurement_covariance(sc, p, s_true, node).diag.cwiseSqrt();
  Measurement m = truth;
  m.theta += sd(0) * rng.normal();
  m.tau += sd(1) * rng.normal();
  m.mu += sd(2) * rng.normal();
  return m;
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace pmn
