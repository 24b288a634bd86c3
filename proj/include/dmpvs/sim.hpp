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

// Fixed-step closed-loop simulation of an eye-in-hand camera driven by the
// switched DMP/IBVS controller.

#ifndef DMPVS_SIM_HPP_
#define DMPVS_SIM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmpvs/camera.hpp"
#include "dmpvs/dmp.hpp"
#include "dmpvs/ibvs.hpp"
#include "dmpvs/lyapunov.hpp"
#include "dmpvs/switchctl.hpp"

namespace dmpvs {

struct Occlusion {
  double start = 0.0;
  double end = 0.0;  // half-open [start, end)
};

// How the commanded acceleration enters the integrator within one tick.
enum class AccelHold {
  kContinuous,  // active law re-evaluated at every RK4 stage
  kZeroOrder,   // held at its tick-start value
};

enum class ControllerMode { kSwitched, kDmpOnly, kIbvsOnly, kNone };

struct Scenario {
  std::string name = "scenario";
  Pose initial_pose = Pose::Identity(Frame::kWorld, Frame::kCamera);
  Pose goal_pose = Pose::Identity(Frame::kWorld, Frame::kDesired);
  Twist initial_twist;  // desired frame
  Marker marker = Marker::Square(0.1);
  Intrinsics intrinsics;
  double dt = 1.0 / 30.0;
  double duration = 20.0;
  std::vector<Occlusion> occlusions;
  IbvsGains ibvs;
  EdotEstimator edot = EdotEstimator::kModel;
  std::string dmp_model_path;
  double epsilon2 = 1.0;
  bool reset_canonical_on_activation = false;
  SwitchConfig switching = SwitchConfig::Uniform(4, 0.42, 0.85);
  AccelHold accel_hold = AccelHold::kContinuous;
  ControllerMode mode = ControllerMode::kSwitched;
  double convergence_tolerance = 5e-3;  // on ||e_i||
  double region_radius = 0.05;          // IBVS region for certificates
  std::uint64_t seed = 1;

  bool Occluded(double t) const;
  int Ticks() const;
  ServoGeometry Geometry() const { return {marker, goal_pose, intrinsics}; }
  void Validate() const;
};

struct SimRecord {
  double t = 0.0;
  Subsystem active = Subsystem::kDmp;
  Vector6 e_p = Vector6::Zero();
  Vector6 xi = Vector6::Zero();   // desired frame
  Vector6 acc = Vector6::Zero();  // desired frame
  VectorX e_i;                    // NaN when not visible
  bool visible = false;
  double V_active = 0.0;
  double V_d = 0.0;
  double V_v = 0.0;  // NaN when not visible
  double z_p = 1.0;
  double z_o = 1.0;
  double forcing_norm = 0.0;
  std::optional<SwitchEvent> switch_event;
  int n_sigma = 0;
  double t_e = 0.0;
  double t_c = 0.0;
  bool iota_hi = false;
  double envelope = 0.0;
  bool within_envelope = true;
};

struct RunSummary {
  std::string scenario;
  int ticks = 0;
  double t_final = 0.0;
  Vector6 final_e_p = Vector6::Zero();
  Vector6 final_xi = Vector6::Zero();
  double final_state_norm = 0.0;
  bool final_visible = false;
  double final_feature_error = 0.0;  // ||e_i||, NaN when not visible
  std::vector<SwitchEvent> switches;
  double tau_a = 0.0;
  DwellReport dwell;
  std::vector<EnvelopeSegment> envelopes;
  bool envelopes_pass = true;
  double quat_norm_drift = 0.0;
  bool converged = false;
  bool diverged = false;
  std::string error;

  bool ok() const { return !diverged && converged && dwell.pass && envelopes_pass; }
};

struct RunResult {
  std::vector<SimRecord> records;
  RunSummary summary;
};

class Simulator {
 public:
  Simulator(Scenario scenario, DmpModel model);

  bool done() const { return tick_ >= ticks_; }
  // Emits the record for the current tick and advances one period.
  SimRecord Step();

  const Pose& pose() const { return pose_; }
  const Vector6& xi() const { return xi_; }
  double time() const { return tick_ * scenario_.dt; }
  StateX state() const;
  const SwitchState& switch_state() const { return sw_; }
  double quat_norm_drift() const { return drift_; }

 private:
  Vector6 ActiveAccel(Subsystem active, double t, const Pose& pose, const Vector6& xi,
                      const Vector6& fallback) const;
  double CanonicalP(double t) const;
  double CanonicalO(double t) const;

  Scenario scenario_;
  DmpModel model_;
  IbvsReference ref_;
  SwitchState sw_;
  Pose pose_;
  Vector6 xi_;
  int tick_ = 0;
  int ticks_ = 0;
  double t0_ = 0.0;  // canonical clock origin
  std::optional<VectorX> prev_e_i_;
  double drift_ = 0.0;
};

// Per-segment Lyapunov envelope check on a finished run; annotates records.
std::vector<EnvelopeSegment> CheckEnvelopes(std::vector<SimRecord>& records,
                                            const Scenario& scenario,
                                            const DmpModel& model);

// Runs to completion. Divergence is reported in the summary (records up to
// the failing tick are kept).
RunResult Run(const Scenario& scenario, const DmpModel& model);

}  // namespace dmpvs

#endif  // DMPVS_SIM_HPP_
