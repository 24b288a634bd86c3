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

// Visibility- and threshold-gated switching between the DMP and IBVS
// controllers, with average-dwell-time compensation and hysteresis on the
// feature-error threshold.

#ifndef DMPVS_SWITCHCTL_HPP_
#define DMPVS_SWITCHCTL_HPP_

#include <optional>
#include <span>
#include <vector>

#include "dmpvs/camera.hpp"
#include "dmpvs/geometry.hpp"
#include "dmpvs/subsystem.hpp"

namespace dmpvs {

struct SwitchConfig {
  VectorX iota_lo;  // tight re-entry threshold, normalized units (2m)
  VectorX iota_hi;  // loose stay-in threshold (2m)
  double mu = 1.0;
  double beta_lo = 0.77;
  double eps = 0.0077;
  int n0 = 1;
  int nbar = 4;
  std::optional<double> tau_a_override;
  bool compensation = true;  // false forces t_c = 0

  static SwitchConfig Uniform(int features, double lo, double hi);
  void Validate() const;
};

// ln(mu) / (beta_lo - eps), or the override.
double DwellTime(const SwitchConfig& cfg);
double DwellTimeFormula(double mu, double beta_lo, double eps);

struct SwitchEvent {
  double t = 0.0;
  Subsystem from = Subsystem::kDmp;
  Subsystem to = Subsystem::kIbvs;
  int n_sigma = 0;      // after the update
  double t_e = 0.0;     // after the update
  double t_c = 0.0;     // after the update
  bool compensation = false;  // this switch closed an Nbar-cycle
};

struct SwitchState {
  double t_d = 0.0;  // last tick with the DMP active
  double t_v = 0.0;  // last tick with IBVS active
  double t_vd = 0.0;  // time of the last IBVS -> DMP switch; t_c counts from here
  double t_e = 0.0;
  double t_c = 0.0;
  int n_sigma = 0;
  VectorX iota;
  Subsystem active = Subsystem::kDmp;
  int total_switches = 0;
  std::vector<SwitchEvent> log;

  static SwitchState Initial(const SwitchConfig& cfg);
  bool iota_is_hi(const SwitchConfig& cfg) const { return iota == cfg.iota_hi; }
};

// One control tick. `e_i` must be present whenever obs.visible.
// Returns the switch event if the active subsystem changed.
std::optional<SwitchEvent> Decide(SwitchState& state, const SwitchConfig& cfg,
                                  double t, const FeatureObservation& obs,
                                  const std::optional<VectorX>& e_i);

// True when every |e_i| component is within the threshold.
bool WithinThreshold(const VectorX& e_i, const VectorX& iota);

struct DwellReport {
  bool pass = true;
  double margin = 0.0;  // min over checked intervals of N0 + dt/tau_a - N
  int intervals = 0;
  double worst_start = 0.0;
  double worst_end = 0.0;
};

// Checks N(a, b) <= N0 + (b - a) / tau_a, counting switches in [a, b), over
// the whole horizon, every complete Nbar-switch cycle and the trailing
// partial cycle.
DwellReport VerifyDwell(std::span<const double> switch_times, int n0, int nbar,
                        double tau_a, double t_lo, double t_hi);

}  // namespace dmpvs

#endif  // DMPVS_SWITCHCTL_HPP_
