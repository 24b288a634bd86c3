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

#include "dmpvs/geometry.hpp"

#include <cmath>
#include <string>

#include "dmpvs/errors.hpp"

namespace dmpvs {

namespace {

constexpr double kSmallAngle = 1e-6;

void RequireChain(Frame expected, Frame actual, const char* what) {
  if (expected != actual) {
    Fail(ErrorKind::kContract, std::string(what) + ": expected frame '" +
                                   ToString(expected) + "', got '" +
                                   ToString(actual) + "'");
  }
}

}  // namespace

const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kDegenerate: return "degenerate configuration";
    case ErrorKind::kIllPosed: return "ill-posed learning";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kDiverged: return "diverged simulation";
  }
  return "unknown";
}

const char* ToString(Frame frame) {
  switch (frame) {
    case Frame::kWorld: return "world";
    case Frame::kCamera: return "camera";
    case Frame::kDesired: return "desired";
  }
  return "unknown";
}

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : UnitQuaternion(Eigen::Quaterniond(w, x, y, z)) {}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  Require(std::isfinite(n) && n > 0.0, "quaternion must be finite and nonzero");
  q_.coeffs() /= n;
}

UnitQuaternion::UnitQuaternion(const Matrix3& rotation)
    : UnitQuaternion(Eigen::Quaterniond(rotation)) {}

UnitQuaternion UnitQuaternion::AxisAngle(const Vector3& axis, double angle) {
  return UnitQuaternion(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

UnitQuaternion UnitQuaternion::Canonical() const {
  if (q_.w() < 0.0) return UnitQuaternion(Eigen::Quaterniond(-q_.coeffs()));
  return *this;
}

Pose Pose::Inverse() const {
  const UnitQuaternion inv = rotation.Inverse();
  return Pose{inv, -inv.Rotate(translation), to, from};
}

Pose Compose(const Pose& a_b, const Pose& b_c) {
  RequireChain(a_b.to, b_c.from, "pose composition");
  return Pose{a_b.rotation * b_c.rotation, a_b.Apply(b_c.translation),
              a_b.from, b_c.to};
}

Vector3 QuatLog(const UnitQuaternion& q_in) {
  const UnitQuaternion q = q_in.Canonical();
  const Vector3 v = q.vec();
  const double s = v.norm();
  const double angle = 2.0 * std::atan2(s, q.w());
  if (angle < kSmallAngle) return 2.0 * v / q.w();
  return angle * v / s;
}

UnitQuaternion QuatExp(const Vector3& r) {
  const double angle = r.norm();
  double half_sinc;  // sin(angle/2) / angle
  if (angle < kSmallAngle) {
    half_sinc = 0.5 - angle * angle / 48.0;
  } else {
    half_sinc = std::sin(0.5 * angle) / angle;
  }
  const Vector3 v = half_sinc * r;
  return UnitQuaternion(std::cos(0.5 * angle), v.x(), v.y(), v.z());
}

Pose RelativePose(const Pose& camera_in_world, const Pose& goal_in_world) {
  RequireChain(Frame::kWorld, camera_in_world.from, "pose error (camera)");
  RequireChain(Frame::kWorld, goal_in_world.from, "pose error (goal)");
  RequireChain(Frame::kCamera, camera_in_world.to, "pose error (camera)");
  RequireChain(Frame::kDesired, goal_in_world.to, "pose error (goal)");
  return Compose(goal_in_world.Inverse(), camera_in_world);
}

Vector6 PoseError(const Pose& camera_in_world, const Pose& goal_in_world) {
  const Pose rel = RelativePose(camera_in_world, goal_in_world);
  Vector6 e;
  e << rel.translation, QuatLog(rel.rotation);
  return e;
}

Twist TwistToFrame(const Twist& xi, const FrameRotation& rotation) {
  RequireChain(rotation.source, xi.frame, "twist frame change");
  return Twist{rotation.rotation.Rotate(xi.linear),
               rotation.rotation.Rotate(xi.angular), rotation.target};
}

FrameRotation CameraToDesired(const Pose& camera_in_world,
                              const Pose& goal_in_world) {
  return FrameRotation{RelativePose(camera_in_world, goal_in_world).rotation,
                       Frame::kCamera, Frame::kDesired};
}

Matrix3 Skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace dmpvs
