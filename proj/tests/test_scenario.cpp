#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pmn/config.hpp"
#include "pmn/errors.hpp"
#include "pmn/scenario.hpp"
#include "support.hpp"

using namespace pmn;

namespace {

Scenario single_node_scenario(Vec2 node = {0, 0}, Vec2 axis = {1, 0}) {
  Scenario sc;
  sc.bs_position = {0, 0};
  sc.nodes = {SensingNode{node, axis}};
  sc.wavelength = sc.c / 28e9;
  sc.gamma0 = std::pow(10.0, -6.14);
  sc.sigma2 = 1e-12;
  sc.Pt = 1.0;
  sc.Pmin = 0.1;
  sc.Nmax = 1;
  sc.base_cov = {4, 1, 1};
  return sc;
}

}  // namespace

TEST(MotionModel, TransitionRowMatchesKinematics) {
  const MotionModel m = build_motion_model(0.5, 5.0);
  EXPECT_DOUBLE_EQ(m.G(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.G(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.G(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(m.G(0, 3), 0.0);
  EXPECT_NEAR(m.G.determinant(), 1.0, 1e-15);
}

TEST(MotionModel, ProcessNoiseBlockValues) {
  const MotionModel m = build_motion_model(0.5, 5.0);
  EXPECT_NEAR(m.Qn(0, 0), 5.0 * 0.125 / 3.0, 1e-15);
  EXPECT_NEAR(m.Qn(0, 0), 0.208333, 1e-6);
  EXPECT_DOUBLE_EQ(m.Qn(0, 1), 0.625);
  EXPECT_DOUBLE_EQ(m.Qn(1, 1), 2.5);
  EXPECT_DOUBLE_EQ(m.Qn(0, 2), 0.0);
  EXPECT_TRUE(m.Qn.isApprox(m.Qn.transpose()));
  EXPECT_EQ(Eigen::LLT<Mat4>(m.Qn).info(), Eigen::Success);
}

TEST(MotionModel, RejectsNonPositiveInputs) {
  EXPECT_THROW(build_motion_model(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(build_motion_model(0.0, 1.0), std::invalid_argument);
  const MotionModel tiny = build_motion_model(1.0, 1e-12);
  EXPECT_LT(tiny.Qn.cwiseAbs().maxCoeff(), 1e-11);
}

TEST(PredictState, LinearKinematics) {
  const MotionModel m = build_motion_model(0.5, 5.0);
  TargetState s;
  s.x << 124, -10, 124, 0;
  const TargetState p = predict_state(m, s);
  EXPECT_TRUE(p.x.isApprox(Vec4(119, -10, 124, 0)));
  EXPECT_EQ(p.frame, 1);
  EXPECT_TRUE(predict_state(m, TargetState{}).x.isZero());
  s.x << -134, 0, 134, -10;
  EXPECT_TRUE(predict_state(m, s).x.isApprox(Vec4(-134, 0, 129, -10)));
}

TEST(SampleTransition, NoiselessLimitAndDeterminism) {
  const MotionModel m = build_motion_model(0.5, 1e-14);
  TargetState s = TargetState::from({10, 20}, {1, -1});
  RandomStream a(3);
  EXPECT_LT((sample_transition(m, s, a).x - predict_state(m, s).x).norm(), 1e-6);

  const MotionModel m5 = build_motion_model(0.5, 5.0);
  RandomStream r1(42), r2(42);
  EXPECT_EQ(sample_transition(m5, s, r1).x, sample_transition(m5, s, r2).x);
}

TEST(SampleTransition, EmpiricalCovarianceMatchesQn) {
  const MotionModel m = build_motion_model(0.5, 5.0);
  const TargetState s = TargetState::from({0, 0}, {3, 4});
  const Vec4 mean = predict_state(m, s).x;
  RandomStream rng(7);
  Mat4 cov = Mat4::Zero();
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Vec4 e = sample_transition(m, s, rng).x - mean;
    cov += e * e.transpose();
  }
  cov /= draws;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double scale = std::sqrt(m.Qn(i, i) * m.Qn(j, j));
      if (m.Qn(i, j) != 0.0) {
        EXPECT_NEAR(cov(i, j), m.Qn(i, j), 0.05 * std::abs(m.Qn(i, j))) << i << "," << j;
      } else {
        EXPECT_LT(std::abs(cov(i, j)), 0.05 * scale) << i << "," << j;
      }
    }
  }
}

TEST(TrueMeasurement, AngleDelayDoppler) {
  Scenario sc = single_node_scenario();
  const TargetState a = TargetState::from({100, 100}, {0, 0});
  EXPECT_NEAR(true_measurement(sc, a, 0).theta, std::numbers::pi / 4, 1e-15);

  const TargetState b = TargetState::from({0, 150}, {0, 0});
  EXPECT_NEAR(true_measurement(sc, b, 0).tau, 300.0 / sc.c, 1e-20);

  const TargetState c = TargetState::from({100, 0}, {10, 0});
  EXPECT_NEAR(sc.wavelength, 0.0107069, 1e-7);
  EXPECT_NEAR(true_measurement(sc, c, 0).mu, 1867.96, 0.01);
}

TEST(TrueMeasurement, CoincidentTargetIsSingular) {
  Scenario sc = single_node_scenario({50, 50});
  EXPECT_THROW(true_measurement(sc, TargetState::from({50, 50}, {1, 0}), 0), SingularGeometry);
  EXPECT_THROW(true_measurement(sc, TargetState::from({0, 0}, {1, 0}), 0), SingularGeometry);
  EXPECT_THROW(measurement_jacobian(sc, TargetState::from({50, 50}, {1, 0}), 0), SingularGeometry);
}

TEST(MeasurementJacobian, DelayRowAndVelocityIndependence) {
  Scenario sc = single_node_scenario();
  const TargetState s = TargetState::from({30, -40}, {5, 2});
  const Mat34 H = measurement_jacobian(sc, s, 0);
  const Vec2 unit = s.position().normalized();
  EXPECT_NEAR(H(1, 0), 2.0 / sc.c * unit.x(), 1e-20);
  EXPECT_NEAR(H(1, 2), 2.0 / sc.c * unit.y(), 1e-20);
  EXPECT_EQ(H(0, 1), 0.0);
  EXPECT_EQ(H(1, 1), 0.0);
  EXPECT_EQ(H(0, 3), 0.0);
  EXPECT_EQ(H(1, 3), 0.0);
}

TEST(MeasurementJacobian, MatchesFiniteDifferencesOnRandomGeometries) {
  RandomStream rng(11);
  double worst = 0.0;
  int checked = 0;
  while (checked < 100) {
    const double phi = rng.uniform(0, std::numbers::pi);
    Scenario sc = single_node_scenario({rng.uniform(-200, 200), rng.uniform(-200, 200)}, {std::cos(phi), std::sin(phi)});
    sc.bs_position = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const TargetState s = TargetState::from({rng.uniform(-200, 200), rng.uniform(-200, 200)},
                                            {rng.uniform(-15, 15), rng.uniform(-15, 15)});
    if ((s.position() - sc.nodes[0].position).norm() < 10 || (s.position() - sc.bs_position).norm() < 10) continue;
    const Mat34 H = measurement_jacobian(sc, s, 0);
    Mat34 fd;
    for (int k = 0; k < 4; ++k) {
      TargetState a = s, b = s;
      a.x(k) += 1e-4;
      b.x(k) -= 1e-4;
      fd.col(k) = (true_measurement(sc, a, 0).as_vector() - true_measurement(sc, b, 0).as_vector()) / 2e-4;
    }
    for (int r = 0; r < 3; ++r) {
      const double err = (H.row(r) - fd.row(r)).cwiseAbs().maxCoeff() / H.row(r).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
    }
    ++checked;
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(MeasurementCovariance, SnrValueAndBaseCovariance) {
  Scenario sc = single_node_scenario();
  const TargetState s = TargetState::from({200, 0}, {0, 0});
  const double v = snr(sc, 1.0, s, 0);
  EXPECT_NEAR(v, 18.11, 0.01);
  EXPECT_NEAR(10 * std::log10(v), 12.6, 0.05);
  const auto cov = measurement_covariance(sc, 1.0, s, 0);
  EXPECT_NEAR(cov.diag(0) * v, 4.0, 1e-12);
  EXPECT_NEAR(cov.diag(1) * v, 1.0, 1e-12);
  EXPECT_NEAR(cov.diag(2) * v, 1.0, 1e-12);
  EXPECT_TRUE(cov.power_free.isApprox(cov.diag * 1.0));
}

TEST(MeasurementCovariance, ScalesWithPowerAndDistance) {
  Scenario sc = single_node_scenario();
  const TargetState near = TargetState::from({100, 0}, {0, 0});
  const TargetState far = TargetState::from({200, 0}, {0, 0});
  const Vec3 c1 = measurement_covariance(sc, 0.3, near, 0).diag;
  const Vec3 c2 = measurement_covariance(sc, 0.6, near, 0).diag;
  EXPECT_TRUE(c2.isApprox(c1 / 2, 1e-14));
  EXPECT_TRUE(measurement_covariance(sc, 0.3, far, 0).diag.isApprox(4 * c1, 1e-14));
  EXPECT_TRUE(measurement_covariance(sc, 0.3, near, 0).power_free.isApprox(c1 * 0.3, 1e-14));
  EXPECT_THROW(measurement_covariance(sc, 0.0, near, 0), std::invalid_argument);
  EXPECT_THROW(measurement_covariance(sc, -1.0, near, 0), std::invalid_argument);
}

TEST(MeasurementCovariance, HalfRoundTripDistanceOption) {
  Scenario sc = single_node_scenario({100, 0});
  sc.snr_distance = SnrDistance::kHalfRoundTrip;
  const TargetState s = TargetState::from({100, 100}, {0, 0});
  const double d = 0.5 * (100.0 + std::hypot(100.0, 100.0));
  EXPECT_NEAR(snr(sc, 1.0, s, 0), sc.gamma0 / (sc.sigma2 * d * d), 1e-9);
}

TEST(SampleMeasurement, NoiselessLimitAndDeterminism) {
  Scenario sc = single_node_scenario({10, 0});
  const TargetState s = TargetState::from({80, 60}, {3, -2});
  sc.sigma2 = 1e-60;
  RandomStream rng(5);
  const Vec3 z = sample_measurement(sc, 1.0, s, 0, rng).as_vector();
  const Vec3 t = true_measurement(sc, s, 0).as_vector();
  EXPECT_LT(std::abs(z(0) - t(0)), 1e-10);
  EXPECT_LT(std::abs(z(1) - t(1)), 1e-10 * t(1));
  EXPECT_LT(std::abs(z(2) - t(2)), 1e-10);

  sc.sigma2 = 1e-12;
  RandomStream a(9), b(9);
  EXPECT_EQ(sample_measurement(sc, 1.0, s, 0, a).as_vector(), sample_measurement(sc, 1.0, s, 0, b).as_vector());
}

TEST(SampleMeasurement, EmpiricalCovarianceMatchesModel) {
  Scenario sc = single_node_scenario({10, 0});
  sc.sigma2 = 1e-9;  // low SNR so the angle noise is far from the [0, pi] edges
  const TargetState s = TargetState::from({80, 60}, {3, -2});
  const Vec3 t = true_measurement(sc, s, 0).as_vector();
  const Vec3 expect = measurement_covariance(sc, 0.5, s, 0).diag;
  RandomStream rng(13);
  Vec3 acc = Vec3::Zero();
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) acc += (sample_measurement(sc, 0.5, s, 0, rng).as_vector() - t).cwiseAbs2();
  acc /= draws;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(acc(i), expect(i), 0.05 * expect(i)) << i;
}

TEST(ScenarioValidation, RejectsBrokenInvariants) {
  Scenario sc = single_node_scenario();
  EXPECT_NO_THROW(sc.validate(1));
  sc.Pt = 0.15;
  EXPECT_THROW(sc.validate(2), std::invalid_argument);
  sc = single_node_scenario();
  sc.Nmax = 2;
  EXPECT_THROW(sc.validate(1), std::invalid_argument);
  sc = single_node_scenario({0, 0}, {1, 1});
  EXPECT_THROW(sc.validate(1), std::invalid_argument);
}

TEST(Config, DefaultsConvertUnitsAtTheBoundary) {
  const ExperimentConfig cfg = config_from_json(default_config_json());
  EXPECT_NEAR(cfg.scenario.Pt, 1.0, 1e-12);
  EXPECT_NEAR(cfg.scenario.Pmin, 0.1, 1e-12);
  EXPECT_NEAR(cfg.scenario.sigma2, 1e-12, 1e-24);
  EXPECT_NEAR(cfg.scenario.gamma0, std::pow(10.0, -6.14), 1e-15);
  EXPECT_EQ(cfg.scenario.node_count(), 32);
  EXPECT_EQ(cfg.targets.size(), 3u);
  EXPECT_TRUE(cfg.scenario.base_cov.isApprox(Vec3(4, 1, 1)));
  EXPECT_EQ(cfg.scenario.Nmax, 4);
}

TEST(Config, ExplicitNodesAndErrors) {
  nlohmann::json j = default_config_json();
  j.erase("node_layout");
  j["nodes"] = {{{"position", {1.0, 2.0}}, {"axis", {0.0, 1.0}}}, {{"position", {3.0, 4.0}}, {"axis", {1.0, 0.0}}}};
  j["nmax"] = 1;
  const ExperimentConfig cfg = config_from_json(j);
  ASSERT_EQ(cfg.scenario.node_count(), 2);
  EXPECT_TRUE(cfg.scenario.nodes[1].position.isApprox(Vec2(3, 4)));

  nlohmann::json bad = default_config_json();
  bad.erase("node_layout");
  EXPECT_THROW(config_from_json(bad), std::invalid_argument);
  bad = default_config_json();
  bad["targets"] = nlohmann::json::array();
  EXPECT_THROW(config_from_json(bad), std::invalid_argument);
  bad = default_config_json();
  bad["snr_distance"] = "sideways";
  EXPECT_THROW(config_from_json(bad), std::invalid_argument);
}

TEST(Config, FingerprintTracksGeometry) {
  ExperimentConfig a = fixtures::desk_config(16, 4, 1);
  ExperimentConfig b = fixtures::desk_config(16, 4, 1);
  ExperimentConfig c = fixtures::desk_config(16, 4, 2);
  EXPECT_EQ(scenario_fingerprint(a.scenario), scenario_fingerprint(b.scenario));
  EXPECT_NE(scenario_fingerprint(a.scenario), scenario_fingerprint(c.scenario));
}

TEST(Rng, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(7, "truth", 3), derive_seed(7, "truth", 3));
  EXPECT_NE(derive_seed(7, "truth", 3), derive_seed(7, "truth", 4));
  EXPECT_NE(derive_seed(7, "truth", 3), derive_seed(7, "measurement", 3));
  EXPECT_NE(derive_seed(7, "truth", 3), derive_seed(8, "truth", 3));
}

TEST(Rng, GaussianHonoursSemidefiniteCovariance) {
  Mat cov = Mat::Zero(3, 3);
  cov(0, 0) = 4.0;
  cov(0, 2) = cov(2, 0) = 2.0;
  cov(2, 2) = 1.0;  // rank one
  RandomStream rng(1);
  Mat acc = Mat::Zero(3, 3);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Vec x = rng.gaussian(cov);
    EXPECT_NEAR(x(1), 0.0, 1e-12);
    acc += x * x.transpose();
  }
  acc /= draws;
  EXPECT_NEAR(acc(0, 0), 4.0, 0.2);
  EXPECT_NEAR(acc(0, 2), 2.0, 0.1);
  EXPECT_NEAR(acc(2, 2), 1.0, 0.05);
}
