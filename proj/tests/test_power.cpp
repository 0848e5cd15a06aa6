#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmn/baselines.hpp"
#include "pmn/power.hpp"
#include "support.hpp"

using namespace pmn;

namespace {

PowerProblem random_problem(RandomStream& rng, int Q, double Pt, double Pmin) {
  PowerProblem prob;
  prob.Pt = Pt;
  prob.Pmin = Pmin;
  for (int q = 0; q < Q; ++q) {
    PowerTarget t;
    t.Jp = fixtures::random_spd(rng, 0.2) * rng.uniform(0.1, 5.0);
    for (int k = 0; k < 3; ++k) t.St += fixtures::random_psd(rng, 2) * rng.uniform(0.5, 20.0);
    prob.targets.push_back(t);
  }
  return prob;
}

// Textbook water-filling for p_q = max(mu - c_q, Pmin), sum p = Pt: walk
// the sorted levels until the active set stabilises.
Vec scalar_water_fill(const std::vector<double>& c, double Pt, double Pmin) {
  const int Q = static_cast<int>(c.size());
  std::vector<double> s = c;
  std::sort(s.begin(), s.end());
  double mu = 0.0;
  for (int k = Q; k >= 1; --k) {
    // the k lowest levels are active
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += s[static_cast<std::size_t>(i)];
    mu = (Pt - (Q - k) * Pmin + sum) / k;
    if (mu - s[static_cast<std::size_t>(k - 1)] >= Pmin) break;
  }
  Vec p(Q);
  for (int q = 0; q < Q; ++q) p(q) = std::max(mu - c[static_cast<std::size_t>(q)], Pmin);
  return p;
}

}  // namespace

TEST(PowerProblem, Validation) {
  RandomStream rng(1);
  PowerProblem prob = random_problem(rng, 3, 1.0, 0.4);
  EXPECT_THROW(prob.validate(), std::invalid_argument);
  prob.Pmin = 0.1;
  EXPECT_NO_THROW(prob.validate());
  prob.targets[1].St = Mat4::Zero();
  EXPECT_THROW(prob.validate(), std::invalid_argument);
}

TEST(FixedPoint, ScalarStructureGivesConstantRatio) {
  const Mat4 Jp = 3.0 * Mat4::Identity();
  const Mat4 St = 12.0 * Mat4::Identity();
  for (double p : {0.0, 0.1, 0.7, 5.0}) EXPECT_NEAR(fixed_point_ratio(Jp, St, p), 0.25, 1e-15);
  EXPECT_NEAR(fp_power_update(Jp, St, 1.0, 0.3, 0.0), 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(fp_power_update(Jp, St, 0.2, 0.3, 0.05), 0.05);
}

TEST(FixedPoint, HugeWaterLevelGivesNearlyMu) {
  RandomStream rng(2);
  const PowerProblem prob = random_problem(rng, 1, 1.0, 0.0);
  const double mu = 1e9;
  const double p = fp_power_update(prob.targets[0].Jp, prob.targets[0].St, mu, 1.0, 0.0);
  EXPECT_LT(std::abs(p - mu) / mu, 1e-6);
}

TEST(FixedPoint, TargetPowerIsStationaryAndMonotoneInMu) {
  RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PowerProblem prob = random_problem(rng, 1, 1.0, 0.01);
    const auto& t = prob.targets[0];
    double prev = -1.0;
    for (double mu : {0.01, 0.1, 0.5, 1.0, 3.0}) {
      const double p = target_power(t.Jp, t.St, mu, prob.Pmin, 0.5);
      EXPECT_NEAR(p, fp_power_update(t.Jp, t.St, mu, p, prob.Pmin), 1e-9);
      EXPECT_GE(p, prob.Pmin);
      EXPECT_GE(p, prev - 1e-12);
      prev = p;
    }
  }
}

TEST(WaterLevel, ScalarCaseMatchesClassicWaterFilling) {
  RandomStream rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int Q = 2 + trial % 5;
    PowerProblem prob;
    prob.Pt = rng.uniform(0.5, 2.0);
    prob.Pmin = 0.02;
    std::vector<double> c;
    for (int q = 0; q < Q; ++q) {
      const double a = rng.uniform(0.1, 2.0), s = rng.uniform(0.5, 10.0);
      prob.targets.push_back({a * Mat4::Identity(), s * Mat4::Identity()});
      c.push_back(a / s);
    }
    const WaterLevel wl = solve_water_level(prob);
    const Vec ref = scalar_water_fill(c, prob.Pt, prob.Pmin);
    EXPECT_LT((wl.power.p - ref).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
    EXPECT_NEAR(wl.power.p.sum(), prob.Pt, 1e-10);
  }
}

TEST(WaterLevel, SingleTargetTakesTheWholeBudget) {
  RandomStream rng(5);
  const PowerProblem prob = random_problem(rng, 1, 0.8, 0.01);
  EXPECT_NEAR(solve_water_level(prob).power.p(0), 0.8, 1e-10);
}

TEST(WaterLevel, IdenticalTargetsSplitEqually) {
  RandomStream rng(6);
  PowerProblem prob = random_problem(rng, 1, 1.2, 0.0);
  prob.targets.assign(4, prob.targets[0]);
  const Vec p = solve_water_level(prob).power.p;
  for (int q = 0; q < 4; ++q) EXPECT_NEAR(p(q), 0.3, 1e-10);
}

TEST(WaterLevel, FeasibleAndMatchesOracle) {
  RandomStream rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int Q = 2 + trial % 5;
    const PowerProblem prob = random_problem(rng, Q, 1.0, 0.01);
    const Vec p = solve_water_level(prob).power.p;
    EXPECT_NEAR(p.sum(), prob.Pt, 1e-9);
    EXPECT_GE(p.minCoeff(), prob.Pmin - 1e-12);
    const Vec po = oracle_power(prob).p;
    EXPECT_NEAR(power_objective(prob, p), power_objective(prob, po), 1e-6);
    EXPECT_LT((p - po).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Rayleigh, BoundsContainTheRatio) {
  RandomStream rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const PowerProblem prob = random_problem(rng, 1, 1.0, 0.0);
    const auto& t = prob.targets[0];
    const RayleighBounds rb = rayleigh_bounds(t.Jp, t.St);
    // Reference: eigenvalues of the symmetric pencil via a generalized solver.
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> es(t.Jp, t.St);
    EXPECT_NEAR(rb.lambda_min, es.eigenvalues().minCoeff(), 1e-8 * es.eigenvalues().maxCoeff());
    EXPECT_NEAR(rb.lambda_max, es.eigenvalues().maxCoeff(), 1e-8 * es.eigenvalues().maxCoeff());
    for (double p : {0.0, 0.3, 2.0}) {
      const double r = fixed_point_ratio(t.Jp, t.St, p);
      EXPECT_GE(r, rb.lambda_min * (1 - 1e-12));
      EXPECT_LE(r, rb.lambda_max * (1 + 1e-12));
    }
  }
}

TEST(Rayleigh, RankDeficientInformationHasUnboundedTop) {
  RandomStream rng(9);
  const Mat4 Jp = fixtures::random_spd(rng);
  const Mat4 St = fixtures::random_psd(rng, 2);
  const RayleighBounds rb = rayleigh_bounds(Jp, St);
  EXPECT_TRUE(std::isinf(rb.lambda_max));
  EXPECT_GT(rb.lambda_min, 0.0);
  EXPECT_GE(fixed_point_ratio(Jp, St, 0.5), rb.lambda_min);
}

TEST(WaterLevel, JointIterationAgreesWithNestedBisection) {
  RandomStream rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const PowerProblem prob = random_problem(rng, 2 + trial % 5, 1.0, 0.02);
    const WaterLevel joint = solve_water_level(prob);
    const WaterLevel nested = bisect_water_level(prob);
    EXPECT_GT(nested.bisections, 0);
    EXPECT_LT((joint.power.p - nested.power.p).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(joint.mu_wf, nested.mu_wf, 1e-8 * nested.mu_wf);
    // Each target sits at its own fixed point at the common level.
    for (int q = 0; q < prob.size(); ++q) {
      const auto& t = prob.targets[static_cast<std::size_t>(q)];
      EXPECT_NEAR(fp_power_update(t.Jp, t.St, joint.mu_wf, joint.power.p(q), prob.Pmin), joint.power.p(q), 1e-10);
    }
  }
}

TEST(WaterLevel, AllFlooredWhenBudgetOnlyCoversTheFloor) {
  RandomStream rng(11);
  const PowerProblem prob = random_problem(rng, 4, 1.0, 0.25);
  const WaterLevel wl = solve_water_level(prob);
  EXPECT_TRUE(wl.power.all_floored);
  EXPECT_EQ(wl.power.p, Vec::Constant(4, 0.25));
}
