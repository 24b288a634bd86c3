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

#include "dmpvs/camera.hpp"

#include <cmath>
#include <string>

#include "dmpvs/errors.hpp"

namespace dmpvs {

void Intrinsics::Validate() const {
  if (!(fx > 0.0 && fy > 0.0)) Fail(ErrorKind::kConfig, "intrinsics: fx, fy must be > 0");
  if (!(width > 0.0 && height > 0.0)) {
    Fail(ErrorKind::kConfig, "intrinsics: image size must be > 0");
  }
}

Marker Marker::Square(double size) {
  const double h = 0.5 * size;
  return Marker{{Vector3(-h, -h, 0.0), Vector3(h, -h, 0.0), Vector3(h, h, 0.0),
                 Vector3(-h, h, 0.0)}};
}

void Marker::Validate() const {
  if (corners.size() < 3) Fail(ErrorKind::kConfig, "marker: need at least 3 points");
  const Vector3 a = corners[1] - corners[0];
  double best = 0.0;
  for (size_t i = 2; i < corners.size(); ++i) {
    best = std::max(best, a.cross(corners[i] - corners[0]).norm());
  }
  if (best < 1e-12) Fail(ErrorKind::kConfig, "marker: points are collinear");
}

FeatureObservation Project(const Marker& marker, const Pose& camera_in_world,
                           const Intrinsics& intrinsics, bool occluded) {
  const int m = marker.count();
  FeatureObservation obs;
  obs.s.resize(2 * m);
  obs.depths.resize(m);
  const Pose world_in_camera = camera_in_world.Inverse();
  bool visible = !occluded;
  for (int j = 0; j < m; ++j) {
    const Vector3 p = world_in_camera.Apply(marker.corners[j]);
    const double z = p.z();
    obs.depths(j) = z;
    obs.s(2 * j) = p.x() / z;
    obs.s(2 * j + 1) = p.y() / z;
    if (!(z > 0.0)) {
      visible = false;
      continue;
    }
    const double u = intrinsics.fx * obs.s(2 * j) + intrinsics.cx;
    const double v = intrinsics.fy * obs.s(2 * j + 1) + intrinsics.cy;
    if (u < 0.0 || u > intrinsics.width || v < 0.0 || v > intrinsics.height) {
      visible = false;
    }
  }
  obs.visible = visible;
  return obs;
}

MatrixX InteractionMatrix(const VectorX& s, const VectorX& depths) {
  const int m = static_cast<int>(depths.size());
  Require(s.size() == 2 * m, "interaction matrix: s must have 2m entries");
  MatrixX L(2 * m, 6);
  for (int j = 0; j < m; ++j) {
    const double z = depths(j);
    if (!(z > 0.0)) {
      Fail(ErrorKind::kContract,
           "interaction matrix: non-positive depth for point " + std::to_string(j));
    }
    const double x = s(2 * j);
    const double y = s(2 * j + 1);
    L.row(2 * j) << -1.0 / z, 0.0, x / z, x * y, -(1.0 + x * x), y;
    L.row(2 * j + 1) << 0.0, -1.0 / z, y / z, 1.0 + y * y, -x * y, -x;
  }
  return L;
}

}  // namespace dmpvs
