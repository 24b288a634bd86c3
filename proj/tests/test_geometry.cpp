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

#include <random>

#include "dmpvs/errors.hpp"
#include "dmpvs/geometry.hpp"
#include "test_support.hpp"

namespace dmpvs {
namespace {

using testing::kPi;

TEST(QuatLog, IdentityIsZero) {
  EXPECT_LT(QuatLog(UnitQuaternion::Identity()).norm(), 1e-15);
}

TEST(QuatLog, AxisAngleGivesAngleTimesAxis) {
  const Vector3 axis = Vector3(1.0, -2.0, 0.5).normalized();
  const Vector3 r = QuatLog(UnitQuaternion::AxisAngle(axis, 0.7));
  EXPECT_LT((r - 0.7 * axis).norm(), 1e-14);
}

TEST(QuatLog, DoubleCoverGivesSameLog) {
  const UnitQuaternion q = UnitQuaternion::AxisAngle(Vector3::UnitZ(), 1.2);
  const UnitQuaternion neg(-q.w(), -q.x(), -q.y(), -q.z());
  EXPECT_LT((QuatLog(q) - QuatLog(neg)).norm(), 1e-14);
}

TEST(QuatLog, NormNeverExceedsPi) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q = testing::RandomRotation(rng, 2.0 * kPi);
    EXPECT_LE(QuatLog(q).norm(), kPi + 1e-12);
  }
}

TEST(QuatExp, RoundTripsWithLog) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q = testing::RandomRotation(rng, kPi - 1e-3);
    const UnitQuaternion back = QuatExp(QuatLog(q));
    EXPECT_LT((back.matrix() - q.matrix()).norm(), 1e-12);
  }
}

TEST(QuatExp, SmallAnglesStayAccurate) {
  for (double a : {1e-3, 1e-7, 1e-10, 1e-14}) {
    const Vector3 r(a, -0.5 * a, 0.25 * a);
    const Vector3 back = QuatLog(QuatExp(r));
    EXPECT_LT((back - r).norm(), 1e-12 * std::max(1.0, r.norm())) << a;
  }
}

TEST(Pose, InverseComposesToIdentity) {
  std::mt19937_64 rng(5);
  const Pose a{testing::RandomRotation(rng, 2.0), Vector3(0.1, -0.2, 0.3), Frame::kWorld,
               Frame::kCamera};
  const Pose id = Compose(a, a.Inverse());
  EXPECT_LT(id.translation.norm(), 1e-15);
  EXPECT_LT(QuatLog(id.rotation).norm(), 1e-15);
  EXPECT_EQ(id.from, Frame::kWorld);
  EXPECT_EQ(id.to, Frame::kWorld);
}

TEST(Pose, ComposeRejectsBrokenFrameChain) {
  const Pose a = Pose::Identity(Frame::kWorld, Frame::kCamera);
  const Pose b = Pose::Identity(Frame::kDesired, Frame::kCamera);
  try {
    Compose(a, b);
    FAIL() << "expected a contract error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(PoseError, ZeroAtGoal) {
  const Pose goal = testing::GoalPose();
  const Pose cam{goal.rotation, goal.translation, Frame::kWorld, Frame::kCamera};
  EXPECT_LT(PoseError(cam, goal).norm(), 1e-15);
}

TEST(PoseError, TranslationIsExpressedInDesiredFrame) {
  const Pose goal = testing::GoalPose();
  // Moving the camera +x in the world is +x in the desired frame (Rx(pi)
  // keeps x), and moving it up in the world is -z in the desired frame.
  Pose cam{goal.rotation, goal.translation + Vector3(0.1, 0.0, 0.05), Frame::kWorld,
           Frame::kCamera};
  const Vector6 e = PoseError(cam, goal);
  EXPECT_NEAR(e(0), 0.1, 1e-15);
  EXPECT_NEAR(e(1), 0.0, 1e-15);
  EXPECT_NEAR(e(2), -0.05, 1e-15);
  EXPECT_LT(e.tail<3>().norm(), 1e-15);
}

TEST(PoseError, RotationAboutOpticalAxis) {
  const Pose goal = testing::GoalPose();
  const Pose rel{UnitQuaternion::AxisAngle(Vector3::UnitZ(), 0.3), Vector3::Zero(),
                 Frame::kDesired, Frame::kCamera};
  const Pose cam = Compose(goal, rel);
  const Vector6 e = PoseError(cam, goal);
  EXPECT_LT((e.tail<3>() - Vector3(0.0, 0.0, 0.3)).norm(), 1e-14);
}

TEST(PoseError, RejectsSwappedArguments) {
  const Pose goal = testing::GoalPose();
  EXPECT_THROW(PoseError(goal, goal), Error);
}

TEST(TwistToFrame, RotatesBothParts) {
  const FrameRotation r{UnitQuaternion::AxisAngle(Vector3::UnitZ(), kPi / 2), Frame::kCamera,
                        Frame::kDesired};
  const Twist xi{Vector3::UnitX(), Vector3::UnitX(), Frame::kCamera};
  const Twist out = TwistToFrame(xi, r);
  EXPECT_EQ(out.frame, Frame::kDesired);
  EXPECT_LT((out.linear - Vector3::UnitY()).norm(), 1e-15);
  EXPECT_LT((out.angular - Vector3::UnitY()).norm(), 1e-15);
}

TEST(TwistToFrame, RejectsWrongSourceFrame) {
  const FrameRotation r{UnitQuaternion::Identity(), Frame::kCamera, Frame::kDesired};
  const Twist xi{Vector3::UnitX(), Vector3::Zero(), Frame::kDesired};
  EXPECT_THROW(TwistToFrame(xi, r), Error);
}

TEST(CameraToDesired, MatchesRelativeRotation) {
  std::mt19937_64 rng(6);
  const Pose cam = testing::NearGoalPose(rng, 0.05, 0.4);
  const FrameRotation r = CameraToDesired(cam, testing::GoalPose());
  const Pose rel = RelativePose(cam, testing::GoalPose());
  EXPECT_LT((r.rotation.matrix() - rel.rotation.matrix()).norm(), 1e-14);
  EXPECT_EQ(r.source, Frame::kCamera);
  EXPECT_EQ(r.target, Frame::kDesired);
}

TEST(Skew, IsCrossProduct) {
  const Vector3 a(1.0, 2.0, 3.0), b(-0.5, 0.1, 4.0);
  EXPECT_LT((Skew(a) * b - a.cross(b)).norm(), 1e-15);
}

}  // namespace
}  // namespace dmpvs
