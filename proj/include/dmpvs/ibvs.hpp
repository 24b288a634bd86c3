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

// Acceleration-level IBVS: u_dot = L_hat^+ (-kp e - kv e_dot_hat), with the
// interaction matrix approximated at the constant goal depth. Also the
// numerical bounds that feed the gain certificate.

#ifndef DMPVS_IBVS_HPP_
#define DMPVS_IBVS_HPP_

#include <cstdint>

#include "dmpvs/camera.hpp"
#include "dmpvs/geometry.hpp"

namespace dmpvs {

struct IbvsGains {
  double kp = 5.0;
  double kv = 10.0;
  double epsilon1 = 0.01;  // only enters the Lyapunov diagnostics

  void Validate() const;
};

enum class EdotEstimator { kModel, kFiniteDifference };

struct IbvsReference {
  VectorX s_star;  // 2m goal features
  VectorX z_star;  // m constant depths used for L_hat

  static IbvsReference FromGoal(const Marker& marker, const Pose& goal_in_world,
                                const Intrinsics& intrinsics);
  static IbvsReference WithScalarDepth(const VectorX& s_star, double depth);
  int count() const { return static_cast<int>(z_star.size()); }
};

// Marker, goal and camera model: everything needed to turn a pose error
// back into features.
struct ServoGeometry {
  Marker marker;
  Pose goal_in_world;
  Intrinsics intrinsics;
};

// Camera pose whose error w.r.t. the goal equals e_p.
Pose PoseFromError(const Pose& goal_in_world, const Vector6& e_p);

inline constexpr double kRankTolerance = 1e-8;

// Moore-Penrose inverse of a full-column-rank matrix via SVD.
// Throws kDegenerate when sigma_min < kRankTolerance.
MatrixX PseudoInverse(const MatrixX& L);
double MinSingularValue(const MatrixX& L);

MatrixX ApproxInteraction(const VectorX& s, const IbvsReference& ref);

VectorX FeatureError(const FeatureObservation& obs, const IbvsReference& ref);

// Model strategy: L_hat(s, Z*) xi_c.
VectorX EstimateEdot(const FeatureObservation& obs, const IbvsReference& ref,
                     const Twist& xi_camera);
// Backward difference over one control period.
VectorX EstimateEdotBackward(const VectorX& e_now, const VectorX& e_prev, double dt);

// Camera-frame acceleration.
Vector6 IbvsAccel(const VectorX& e_i, const VectorX& edot_hat,
                  const IbvsReference& ref, const VectorX& s,
                  const IbvsGains& gains);

struct RegionBounds {
  double k_lo = 0.0;
  double k_hi = 0.0;
  double l_bar = 0.0;
  double m_lo = 0.0;
  double m_hi = 0.0;
  int samples = 0;
  bool loop_gain_positive = false;  // k_lo > 0
};

struct GainCertificateResult {
  Eigen::Matrix2d matrix;
  double k_star = 0.0;
  double lambda_v = 0.0;
  bool passes() const { return lambda_v > 0.0; }
};

GainCertificateResult GainCertificate(const IbvsGains& gains, double k_lo,
                                      double k_hi, double l_bar);

// Block Jacobian of rho = [phi(e_p); L R xi] at x = 0 (4m x 12).
MatrixX StateJacobian(const ServoGeometry& geom, const IbvsReference& ref);

// Monte-Carlo bounds over camera poses with ||e_p|| <= radius.
RegionBounds EstimateRegionBounds(const ServoGeometry& geom,
                                  const IbvsReference& ref, double radius,
                                  int samples, std::uint64_t seed = 1);

// sup ||(L(s,Z) - L_hat(s,Z*)) xi_c|| over sampled poses and twists.
double EstimateChiBar(const ServoGeometry& geom, const IbvsReference& ref,
                      double radius, double twist_radius, int samples,
                      std::uint64_t seed = 1);

// Uniform samples from a ball of the given radius.
template <class Rng>
VectorX SampleBall(Rng& rng, int dim, double radius);
template <class Rng>
Vector6 SampleBall6(Rng& rng, double radius);

}  // namespace dmpvs

#include "dmpvs/detail/sampling.hpp"

#endif  // DMPVS_IBVS_HPP_
