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

// Combined position/orientation dynamic movement primitive driving the
// common state x = [e_p; xi] to zero:
//
//   tau^2 xi_dot = -Gamma e_p - tau Lambda xi + Theta^T Psi(z_p, z_o)
//
// with canonical phases tau z_dot = -alpha_z z, z(t0) = 1.

#ifndef DMPVS_DMP_HPP_
#define DMPVS_DMP_HPP_

#include <string>
#include <vector>

#include "dmpvs/geometry.hpp"

namespace dmpvs {

struct DmpGains {
  double alpha_v = 140.0;
  double beta_v = 35.0;
  double alpha_w = 4.0;
  double beta_w = 1.0;
  double tau = 25.0;
  double alpha_zp = 1.0;
  double alpha_zo = 1.0;

  Vector6 Gamma() const;   // diagonal
  Vector6 Lambda() const;  // diagonal
  void Validate() const;   // positivity only; see DmpGainCertificate
};

struct BasisSet {
  VectorX centers;
  VectorX widths;

  int count() const { return static_cast<int>(centers.size()); }
  // Normalized Gaussian activations psi_i / sum psi (sums to 1).
  VectorX Activations(double z) const;
};

struct DmpModel {
  MatrixX theta_p;  // N_p x 3
  MatrixX theta_o;  // N_o x 3
  BasisSet basis_p;
  BasisSet basis_o;
  DmpGains gains;

  // sqrt(lambda_max(Theta^T Theta)) of the block-diagonal weight matrix.
  double ThetaBar() const;
};

// ||Psi|| <= sqrt(z_p^2 + z_o^2) <= sqrt(2) * max(z_p, z_o).
inline constexpr double kPsiBar = 1.4142135623730951;

struct DemoSample {
  double t = 0.0;
  Vector6 e_p = Vector6::Zero();
  Vector6 xi = Vector6::Zero();
  Vector6 xi_dot = Vector6::Zero();
};

struct Demonstration {
  std::vector<DemoSample> samples;

  void Validate() const;
  double duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
  }
};

// exp(-alpha_z (t - t0) / tau).
double Canonical(double t, double alpha_z, double tau, double t0 = 0.0);

BasisSet BuildBasis(int count, double alpha_z);

Vector6 Forcing(double z_p, double z_o, const DmpModel& model);

// Desired-frame acceleration.
Vector6 DmpAccel(const StateX& x, double z_p, double z_o, const DmpModel& model);

struct LearnOptions {
  int n_p = 25;
  int n_o = 25;
  double ridge = 0.0;
};

struct LearnResult {
  DmpModel model;
  double residual = 0.0;       // objective at the optimum
  double zero_objective = 0.0;  // objective at Theta = 0
};

LearnResult LearnWeights(const Demonstration& demo, const DmpGains& gains,
                         const LearnOptions& options = {});

// Sum over samples of ||tau^2 xi_dot + Gamma e_p + tau Lambda xi - Theta^T Psi||^2.
double LearningObjective(const Demonstration& demo, const DmpModel& model);

// Minimum-jerk profile 10u^3 - 15u^4 + 6u^5 and its u-derivatives.
struct MinJerkProfile {
  double s, ds, dds;
};
MinJerkProfile MinJerk(double u);

// Straight-line translation and constant-axis geodesic rotation from
// `start` to `goal`, expressed as errors in the goal frame.
Demonstration MinJerkDemo(const Pose& start_in_world, const Pose& goal_in_world,
                          double duration, double rate_hz);

struct DmpCertificate {
  bool alpha_v_ok = false;
  bool alpha_w_ok = false;
  bool beta_v_ok = false;
  bool beta_w_ok = false;
  double lambda_d = 0.0;
  bool passes() const { return alpha_v_ok && alpha_w_ok && beta_v_ok && beta_w_ok; }
  std::string Describe() const;
};

DmpCertificate DmpGainCertificate(const DmpGains& gains, double epsilon2);

struct RolloutSample {
  double t = 0.0;
  StateX x;
  double z_p = 1.0;
  double z_o = 1.0;
  double forcing_norm = 0.0;
};

// Integrates the DMP on the relative pose (exact quaternion kinematics, RK4,
// continuous feedback). Samples at t = 0, dt, ..., duration.
std::vector<RolloutSample> Rollout(const DmpModel& model, const Vector6& e_p0,
                                   const Vector6& xi0, double duration, double dt);

}  // namespace dmpvs

#endif  // DMPVS_DMP_HPP_
