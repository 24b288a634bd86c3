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

// Pinhole projection of marker corners and the point-feature interaction
// matrix. Features are normalized image coordinates (x/Z, y/Z).

#ifndef DMPVS_CAMERA_HPP_
#define DMPVS_CAMERA_HPP_

#include <vector>

#include "dmpvs/geometry.hpp"

namespace dmpvs {

struct Intrinsics {
  double fx = 407.1;
  double fy = 407.1;
  double cx = 323.4;
  double cy = 205.6;
  double width = 640.0;
  double height = 420.0;

  void Validate() const;
};

struct Marker {
  std::vector<Vector3> corners;  // world frame, meters

  // Square of side `size` centered at the world origin in the z = 0 plane.
  static Marker Square(double size);
  int count() const { return static_cast<int>(corners.size()); }
  void Validate() const;
};

struct FeatureObservation {
  VectorX s;       // 2m normalized coordinates [x1 y1 x2 y2 ...]
  VectorX depths;  // m depths (meters)
  bool visible = false;

  int count() const { return static_cast<int>(depths.size()); }
};

FeatureObservation Project(const Marker& marker, const Pose& camera_in_world,
                           const Intrinsics& intrinsics, bool occluded);

// Stacked 2x6 point-feature blocks. Throws kContract on Z <= 0.
MatrixX InteractionMatrix(const VectorX& s, const VectorX& depths);

// Pixel distance to normalized units along x.
inline double PixelsToNormalized(double pixels, const Intrinsics& in) {
  return pixels / in.fx;
}

}  // namespace dmpvs

#endif  // DMPVS_CAMERA_HPP_
