// Copyright 2026 The dmpvs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dmpvs/dmp.hpp"
#include "dmpvs/errors.hpp"
#include "dmpvs/lyapunov.hpp"
#include "test_support.hpp"

namespace dmpvs {
namespace {

TEST(Canonical, StartsAtOne) { EXPECT_DOUBLE_EQ(Canonical(3.0, 1.0, 25.0, 3.0), 1.0); }

TEST(Canonical, OneTimeConstant) {
  EXPECT_NEAR(Canonical(25.0, 1.0, 25.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(Canonical(25.0, 1.0, 25.0), 0.36788, 1e-5);
}

TEST(Canonical, Semigroup) {
  const double a = Canonical(4.0, 1.3, 2.5), b = Canonical(7.0, 1.3, 2.5);
  EXPECT_NEAR(Canonical(11.0, 1.3, 2.5), a * b, 1e-15);
}

TEST(BuildBasis, ThreeCenters) {
  const BasisSet b = BuildBasis(3, 1.0);
  EXPECT_NEAR(b.centers(0), 1.0, 1e-15);
  EXPECT_NEAR(b.centers(1), 0.60653, 1e-5);
  EXPECT_NEAR(b.centers(2), 0.36788, 1e-5);
  // h_i = 1 / (c_{i+1} - c_i)^2, last width repeated.
  EXPECT_NEAR(b.widths(0), 1.0 / std::pow(1.0 - std::exp(-0.5), 2), 1e-12);
  EXPECT_NEAR(b.widths(1), 1.0 / std::pow(std::exp(-0.5) - std::exp(-1.0), 2), 1e-12);
  // Five significant figures, as usually quoted.
  EXPECT_NEAR(b.widths(0), 6.4589, 5e-4);
  EXPECT_NEAR(b.widths(1), 17.556, 2e-3);
  EXPECT_NEAR(b.widths(2), b.widths(1), 1e-12);
}

TEST(BuildBasis, EndCenters) {
  for (double a : {0.5, 1.0, 3.0}) {
    const BasisSet b = BuildBasis(25, a);
    EXPECT_DOUBLE_EQ(b.centers(0), 1.0);
    EXPECT_NEAR(b.centers(24), std::exp(-a), 1e-15);
  }
}

TEST(BuildBasis, NeedsTwoFunctions) { EXPECT_THROW(BuildBasis(1, 1.0), Error); }

TEST(Activations, SumToOne) {
  const BasisSet b = BuildBasis(25, 1.0);
  for (double z : {1.0, 0.8, 0.5, 0.37, 0.1, 1e-3, 1e-9}) {
    EXPECT_NEAR(b.Activations(z).sum(), 1.0, 1e-12) << z;
  }
}

TEST(Forcing, ZeroWeights) {
  const DmpModel m = testing::ZeroModel(DmpGains{});
  EXPECT_LT(Forcing(0.7, 0.4, m).norm(), 1e-15);
}

TEST(Forcing, DecaysWithPhase) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const DmpModel m = testing::RandomModel(rng, DmpGains{}, 50.0);
    const double z = 1e-6;
    EXPECT_LE(Forcing(z, z, m).norm(), m.ThetaBar() * kPsiBar * z * (1.0 + 1e-9));
  }
}

TEST(Forcing, UnitPsiBarIsNotABound) {
  // Rank-one blocks aligned with the active basis vector reach sqrt(2) Theta_bar z.
  DmpModel m = testing::ZeroModel(DmpGains{}, 10);
  const double z = 1e-6;
  const VectorX psi_p = m.basis_p.Activations(z);
  const VectorX psi_o = m.basis_o.Activations(z);
  m.theta_p = psi_p.normalized() * Vector3::UnitX().transpose();
  m.theta_o = psi_o.normalized() * Vector3::UnitY().transpose();
  EXPECT_NEAR(m.ThetaBar(), 1.0, 1e-12);
  EXPECT_GT(Forcing(z, z, m).norm(), 1.3 * m.ThetaBar() * z);
  EXPECT_LE(Forcing(z, z, m).norm(), kPsiBar * m.ThetaBar() * z * (1.0 + 1e-12));
}

TEST(DmpAccel, Equilibrium) {
  EXPECT_LT(DmpAccel(StateX{}, 0.3, 0.3, testing::ZeroModel(DmpGains{})).norm(), 1e-15);
}

TEST(DmpAccel, PositionExample) {
  StateX x;
  x.e_p(0) = 0.1;
  const Vector6 a = DmpAccel(x, 0.0, 0.0, testing::ZeroModel(DmpGains{}));
  EXPECT_NEAR(a(0), -0.784, 1e-12);
  EXPECT_LT(a.tail<5>().norm(), 1e-15);
}

TEST(DmpAccel, OrientationExample) {
  StateX x;
  x.e_p(5) = 0.2;
  const Vector6 a = DmpAccel(x, 0.0, 0.0, testing::ZeroModel(DmpGains{}));
  EXPECT_NEAR(a(5), -0.00128, 1e-12);
  EXPECT_LT(a.head<5>().norm(), 1e-15);
}

TEST(MinJerk, BoundaryConditions) {
  const MinJerkProfile a = MinJerk(0.0), b = MinJerk(1.0);
  EXPECT_DOUBLE_EQ(a.s, 0.0);
  EXPECT_DOUBLE_EQ(b.s, 1.0);
  EXPECT_DOUBLE_EQ(a.ds, 0.0);
  EXPECT_NEAR(b.ds, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(a.dds, 0.0);
  EXPECT_NEAR(b.dds, 0.0, 1e-12);
  EXPECT_NEAR(MinJerk(0.5).s, 0.5, 1e-15);
}

Pose StartPose() {
  return Pose{UnitQuaternion::AxisAngle(Vector3(1.0, 0.2, 0.1).normalized(), 2.6),
              Vector3(0.3, 0.2, 0.6), Frame::kWorld, Frame::kCamera};
}

TEST(MinJerkDemo, EndsAtGoal) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 5.0, 30.0);
  EXPECT_LT(d.samples.back().e_p.norm(), 1e-9);
  EXPECT_LT((d.samples.front().e_p - PoseError(StartPose(), testing::GoalPose())).norm(), 1e-12);
  EXPECT_NO_THROW(d.Validate());
}

TEST(MinJerkDemo, VelocitiesMatchFiniteDifferences) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 5.0, 200.0);
  const auto& s = d.samples;
  for (size_t k = 1; k + 1 < s.size(); k += 37) {
    const double h = s[k + 1].t - s[k - 1].t;
    const Vector3 dt = (s[k + 1].e_p.head<3>() - s[k - 1].e_p.head<3>()) / h;
    EXPECT_LT((dt - s[k].xi.head<3>()).norm(), 1e-4);
    const Vector6 dxi = (s[k + 1].xi - s[k - 1].xi) / h;
    EXPECT_LT((dxi - s[k].xi_dot).norm(), 1e-3);
  }
}

TEST(Demonstration, RejectsZeroLength) {
  Demonstration d;
  d.samples.resize(1);
  try {
    d.Validate();
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(LearnWeights, UnforcedDemoGivesZeroWeights) {
  const DmpModel zero = testing::ZeroModel(testing::DeskGains());
  Vector6 e0;
  e0 << 0.1, -0.05, 0.2, 0.1, 0.0, -0.2;
  const auto roll = Rollout(zero, e0, Vector6::Zero(), 20.0, 0.02);
  Demonstration demo;
  for (const RolloutSample& r : roll) {
    DemoSample s;
    s.t = r.t;
    s.e_p = r.x.e_p;
    s.xi = r.x.xi.vector();
    s.xi_dot = DmpAccel(r.x, 0.0, 0.0, zero);
    demo.samples.push_back(s);
  }
  const LearnResult r = LearnWeights(demo, testing::DeskGains(), {10, 10, 0.0});
  EXPECT_LT(r.model.ThetaBar(), 1e-6);
  EXPECT_LT(r.zero_objective, 1e-20);
}

TEST(LearnWeights, ObjectiveNotWorseThanZero) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 5.0, 30.0);
  const LearnResult r = LearnWeights(d, testing::DeskGains());
  EXPECT_LE(r.residual, r.zero_objective);
  EXPECT_NEAR(LearningObjective(d, r.model), r.residual, 1e-9 * (1.0 + r.residual));
}

TEST(LearnWeights, ReproducesMinJerk) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 2.5, 60.0);
  const LearnResult r = LearnWeights(d, testing::DeskGains());
  const auto roll = Rollout(r.model, d.samples.front().e_p, d.samples.front().xi, d.duration(),
                            1.0 / 60.0);
  double sq = 0.0, path = 0.0;
  for (size_t k = 0; k < d.samples.size(); ++k) {
    sq += (roll[k].x.e_p.head<3>() - d.samples[k].e_p.head<3>()).squaredNorm();
    if (k) path += (d.samples[k].e_p.head<3>() - d.samples[k - 1].e_p.head<3>()).norm();
  }
  EXPECT_LT(std::sqrt(sq / d.samples.size()), 0.02 * path);
  EXPECT_LT(roll.back().x.e_p.norm(), 1e-3);
}

TEST(LearnWeights, TooFewSamplesIsIllPosed) {
  Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 1.0, 5.0);
  try {
    LearnWeights(d, DmpGains{}, {25, 25, 0.0});
    FAIL() << "expected an ill-posed error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIllPosed);
  }
}

TEST(LearnWeights, RidgeShrinksWeights) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 5.0, 30.0);
  const LearnResult plain = LearnWeights(d, testing::DeskGains());
  const LearnResult ridge = LearnWeights(d, testing::DeskGains(), {25, 25, 1e3});
  EXPECT_LT(ridge.model.ThetaBar(), plain.model.ThetaBar());
}

TEST(LearnWeights, Deterministic) {
  const Demonstration d = MinJerkDemo(StartPose(), testing::GoalPose(), 5.0, 30.0);
  const LearnResult a = LearnWeights(d, testing::DeskGains());
  const LearnResult b = LearnWeights(d, testing::DeskGains());
  EXPECT_EQ(a.model.theta_p, b.model.theta_p);
  EXPECT_EQ(a.model.theta_o, b.model.theta_o);
}

TEST(DmpCertificate, DefaultGains) {
  const DmpCertificate c = DmpGainCertificate(DmpGains{}, 1.0);
  EXPECT_TRUE(c.passes());
  EXPECT_NEAR(c.lambda_d, 0.0016, 1e-6);
  EXPECT_DOUBLE_EQ(c.lambda_d, 1.0 / 625.0);
}

TEST(DmpCertificate, StrictBetaBound) {
  DmpGains g;
  g.beta_v = 3.0 * 1.0 / (8.0 * g.tau);
  g.alpha_v = 4.0 * g.beta_v;
  EXPECT_FALSE(DmpGainCertificate(g, 1.0).passes());
  EXPECT_FALSE(DmpGainCertificate(g, 1.0).beta_v_ok);
}

TEST(DmpCertificate, AlphaMustBeFourBeta) {
  DmpGains g;
  g.alpha_v = 141.0;
  EXPECT_FALSE(DmpGainCertificate(g, 1.0).passes());
  EXPECT_FALSE(DmpGainCertificate(g, 1.0).alpha_v_ok);
}

TEST(Rollout, TemporalScaling) {
  std::mt19937_64 rng(5);
  DmpModel m = testing::RandomModel(rng, testing::DeskGains(), 5.0);
  DmpModel m2 = m;
  m2.gains.tau *= 2.0;
  Vector6 e0;
  e0 << 0.2, -0.1, 0.05, 0.3, -0.2, 0.4;
  const auto a = Rollout(m, e0, Vector6::Zero(), 5.0, 0.005);
  const auto b = Rollout(m2, e0, Vector6::Zero(), 10.0, 0.01);
  ASSERT_EQ(a.size(), b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    EXPECT_LT((a[k].x.e_p - b[k].x.e_p).norm(), 1e-6) << k;
  }
}

TEST(Rollout, RotationNormRateMatchesAngularVelocity) {
  std::mt19937_64 rng(6);
  const DmpModel m = testing::RandomModel(rng, testing::DeskGains(), 5.0);
  Vector6 e0;
  e0 << 0.1, 0.1, 0.1, 0.8, -0.5, 0.6;
  const double dt = 1e-3;
  const auto r = Rollout(m, e0, Vector6::Zero(), 5.0, dt);
  for (size_t k = 1; k + 1 < r.size(); k += 50) {
    const Vector3 rv = r[k].x.e_p.tail<3>();
    const Vector3 rdot = (r[k + 1].x.e_p.tail<3>() - r[k - 1].x.e_p.tail<3>()) / (2.0 * dt);
    const double lhs = rv.dot(rdot);
    const double rhs = rv.dot(r[k].x.xi.angular);
    EXPECT_NEAR(lhs, rhs, 1e-5 * (1.0 + std::abs(rhs))) << k;
  }
}

TEST(Rollout, GlobalConvergenceAndForcingEnvelope) {
  std::mt19937_64 rng(7);
  const DmpGains g = testing::DeskGains();
  for (int trial = 0; trial < 20; ++trial) {
    const DmpModel m = testing::RandomModel(rng, g, 10.0);
    Vector6 e0 = testing::RandomVector6(rng, 1.0);
    e0 *= std::min(1.0, 1.0 / e0.norm()) * std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const auto r = Rollout(m, e0, testing::RandomVector6(rng, 0.2), 40.0, 1.0 / 30.0);
    EXPECT_LT(r.back().x.vector().norm(), 1e-3) << trial;
    for (const RolloutSample& s : r) {
      ASSERT_LE(s.forcing_norm,
                m.ThetaBar() * kPsiBar * std::max(s.z_p, s.z_o) * (1.0 + 1e-12) + 1e-15);
    }
  }
}

}  // namespace
}  // namespace dmpvs
