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

// Frames, unit quaternions (Hamilton convention, w first), the quaternion
// log/exp pair, pose errors and twist frame changes.

#ifndef DMPVS_GEOMETRY_HPP_
#define DMPVS_GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace dmpvs {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

enum class Frame { kWorld, kCamera, kDesired };

const char* ToString(Frame frame);

// Unit quaternion, normalized on construction and after every product.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Eigen::Quaterniond::Identity()) {}
  UnitQuaternion(double w, double x, double y, double z);
  explicit UnitQuaternion(const Eigen::Quaterniond& q);
  explicit UnitQuaternion(const Matrix3& rotation);

  static UnitQuaternion Identity() { return {}; }
  static UnitQuaternion AxisAngle(const Vector3& axis, double angle);

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }
  Vector3 vec() const { return q_.vec(); }
  const Eigen::Quaterniond& eigen() const { return q_; }

  Matrix3 matrix() const { return q_.toRotationMatrix(); }
  Vector3 Rotate(const Vector3& v) const { return q_ * v; }
  UnitQuaternion Inverse() const { return UnitQuaternion(q_.conjugate()); }
  // Representative of the same rotation with w >= 0.
  UnitQuaternion Canonical() const;

  friend UnitQuaternion operator*(const UnitQuaternion& a,
                                  const UnitQuaternion& b) {
    return UnitQuaternion(a.q_ * b.q_);
  }

 private:
  Eigen::Quaterniond q_;
};

// T_to^from: maps coordinates expressed in `to` into `from`,
//   p_from = R * p_to + t.
// So the camera pose in the world is Pose{world -> camera}.
struct Pose {
  UnitQuaternion rotation;
  Vector3 translation = Vector3::Zero();
  Frame from = Frame::kWorld;
  Frame to = Frame::kWorld;

  static Pose Identity(Frame from, Frame to) {
    return Pose{UnitQuaternion(), Vector3::Zero(), from, to};
  }

  Pose Inverse() const;
  Vector3 Apply(const Vector3& p_to) const {
    return rotation.Rotate(p_to) + translation;
  }
};

// (a -> b) then (b -> c) gives (a -> c). Frames must chain.
Pose Compose(const Pose& a_b, const Pose& b_c);

struct Twist {
  Vector3 linear = Vector3::Zero();   // m/s
  Vector3 angular = Vector3::Zero();  // rad/s
  Frame frame = Frame::kDesired;

  static Twist FromVector(const Vector6& v, Frame frame) {
    return Twist{v.head<3>(), v.tail<3>(), frame};
  }
  Vector6 vector() const {
    Vector6 out;
    out << linear, angular;
    return out;
  }
};

// Rotation that re-expresses vectors given in `source` coordinates in
// `target` coordinates.
struct FrameRotation {
  UnitQuaternion rotation;
  Frame source = Frame::kCamera;
  Frame target = Frame::kDesired;

  FrameRotation Inverse() const {
    return FrameRotation{rotation.Inverse(), target, source};
  }
};

// Common regulation state: pose error and the twist in the desired frame.
struct StateX {
  Vector6 e_p = Vector6::Zero();
  Twist xi;

  Vector12 vector() const {
    Vector12 out;
    out << e_p, xi.vector();
    return out;
  }
};

// r = 2 log(q) = angle * axis, after flipping q to w >= 0. ||r|| in [0, pi].
Vector3 QuatLog(const UnitQuaternion& q);
// Inverse of QuatLog for ||r|| <= pi.
UnitQuaternion QuatExp(const Vector3& r);

// e_p = [t_c^{c*}; 2 log q_c^{c*}] from two world-anchored poses.
Vector6 PoseError(const Pose& camera_in_world, const Pose& goal_in_world);

// Relative pose T_c^{c*} (desired -> camera).
Pose RelativePose(const Pose& camera_in_world, const Pose& goal_in_world);

// Rotates linear and angular parts independently. Throws on frame mismatch.
Twist TwistToFrame(const Twist& xi, const FrameRotation& rotation);

// Rotation taking camera-frame coordinates to desired-frame coordinates.
FrameRotation CameraToDesired(const Pose& camera_in_world,
                              const Pose& goal_in_world);

Matrix3 Skew(const Vector3& v);

}  // namespace dmpvs

#endif  // DMPVS_GEOMETRY_HPP_
