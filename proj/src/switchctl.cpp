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

#include "dmpvs/switchctl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dmpvs/errors.hpp"

namespace dmpvs {

SwitchConfig SwitchConfig::Uniform(int features, double lo, double hi) {
  SwitchConfig c;
  c.iota_lo = VectorX::Constant(2 * features, lo);
  c.iota_hi = VectorX::Constant(2 * features, hi);
  return c;
}

void SwitchConfig::Validate() const {
  if (iota_lo.size() == 0 || iota_lo.size() != iota_hi.size()) {
    Fail(ErrorKind::kConfig, "switching thresholds must be non-empty and equally sized");
  }
  if (!((iota_hi.array() > iota_lo.array()).all() && (iota_lo.array() > 0.0).all())) {
    Fail(ErrorKind::kConfig, "switching thresholds need 0 < iota_lo < iota_hi elementwise");
  }
  if (!(mu >= 1.0)) Fail(ErrorKind::kConfig, "mu must be >= 1");
  if (!(beta_lo > 0.0)) Fail(ErrorKind::kConfig, "beta_lo must be positive");
  if (!(eps > 0.0 && eps < beta_lo)) Fail(ErrorKind::kConfig, "eps must lie in (0, beta_lo)");
  if (n0 < 1) Fail(ErrorKind::kConfig, "N0 must be >= 1");
  if (nbar < 2) Fail(ErrorKind::kConfig, "Nbar must be > 1");
  if (tau_a_override && !(*tau_a_override >= 0.0 && std::isfinite(*tau_a_override))) {
    Fail(ErrorKind::kConfig, "tau_a override must be finite and non-negative");
  }
}

double DwellTimeFormula(double mu, double beta_lo, double eps) {
  Require(mu >= 1.0 && eps > 0.0 && eps < beta_lo, "dwell time needs mu >= 1, 0 < eps < beta_lo");
  return std::log(mu) / (beta_lo - eps);
}

double DwellTime(const SwitchConfig& cfg) {
  if (cfg.tau_a_override) return *cfg.tau_a_override;
  return DwellTimeFormula(cfg.mu, cfg.beta_lo, cfg.eps);
}

SwitchState SwitchState::Initial(const SwitchConfig& cfg) {
  SwitchState s;
  s.iota = cfg.iota_lo;
  return s;
}

bool WithinThreshold(const VectorX& e_i, const VectorX& iota) {
  Require(e_i.size() == iota.size(), "feature error and threshold sizes differ");
  return (e_i.array().abs() <= iota.array()).all();
}

std::optional<SwitchEvent> Decide(SwitchState& s, const SwitchConfig& cfg, double t,
                                  const FeatureObservation& obs,
                                  const std::optional<VectorX>& e_i) {
  Require(t >= std::max(s.t_d, s.t_v), "switching ticks must not go back in time");
  if (obs.visible && !e_i) {
    Fail(ErrorKind::kContract, "feature error required while features are visible");
  }
  // Blocking counts from the switch itself, not from the last IBVS tick, so a
  // closed cycle spans at least (N_sigma - N0) tau_a in switch times.
  const bool released = s.t_c <= 0.0 || t >= s.t_vd + s.t_c - 1e-9;
  const bool guard = obs.visible && WithinThreshold(*e_i, s.iota) && released;

  std::optional<SwitchEvent> ev;
  if (guard) {
    if (s.active == Subsystem::kDmp) {
      // The first switch has no earlier switch to measure from.
      if (s.total_switches > 0) s.t_e += s.t_d - s.t_v;
      s.n_sigma += 1;
      s.t_c = 0.0;
      s.iota = cfg.iota_hi;
      ev = SwitchEvent{t, Subsystem::kDmp, Subsystem::kIbvs, 0, 0, 0, false};
    }
    s.active = Subsystem::kIbvs;
    s.t_v = t;
  } else {
    if (s.active == Subsystem::kIbvs) {
      s.n_sigma += 1;
      if (s.total_switches > 0) s.t_e += s.t_v - s.t_d;
      ev = SwitchEvent{t, Subsystem::kIbvs, Subsystem::kDmp, 0, 0, 0, false};
      s.t_vd = t;
      if (s.n_sigma >= cfg.nbar) {
        const double tc = (s.n_sigma - cfg.n0) * DwellTime(cfg) - s.t_e;
        s.t_c = cfg.compensation ? std::max(0.0, tc) : 0.0;
        s.t_e = 0.0;
        s.n_sigma = 0;
        s.iota = cfg.iota_lo;
        ev->compensation = true;
      }
    }
    s.active = Subsystem::kDmp;
    s.t_d = t;
  }
  if (ev) {
    // DMP->IBVS can also close a cycle when Nbar is odd.
    if (ev->to == Subsystem::kIbvs && s.n_sigma >= cfg.nbar) {
      const double tc = (s.n_sigma - cfg.n0) * DwellTime(cfg) - s.t_e;
      s.t_c = cfg.compensation ? std::max(0.0, tc) : 0.0;
      s.t_e = 0.0;
      s.n_sigma = 0;
      s.iota = cfg.iota_lo;
      ev->compensation = true;
    }
    ev->n_sigma = s.n_sigma;
    ev->t_e = s.t_e;
    ev->t_c = s.t_c;
    s.total_switches += 1;
    s.log.push_back(*ev);
  }
  return ev;
}

namespace {

int CountIn(std::span<const double> times, double a, double b) {
  constexpr double kTol = 1e-9;
  int n = 0;
  for (double s : times) {
    if (s >= a - kTol && s < b - kTol) ++n;
  }
  return n;
}

}  // namespace

DwellReport VerifyDwell(std::span<const double> switch_times, int n0, int nbar,
                        double tau_a, double t_lo, double t_hi) {
  Require(std::is_sorted(switch_times.begin(), switch_times.end()),
          "switch log must be sorted");
  Require(nbar >= 1 && n0 >= 0 && tau_a >= 0.0 && t_hi >= t_lo,
          "invalid dwell verification inputs");
  DwellReport r;
  r.margin = std::numeric_limits<double>::infinity();
  auto check = [&](double a, double b, bool closed_end) {
    int n = CountIn(switch_times, a, b);
    if (closed_end) n += CountIn(switch_times, b, b + 2e-9);
    const double allowed =
        tau_a > 0.0 ? n0 + (b - a) / tau_a : std::numeric_limits<double>::infinity();
    const double m = allowed - n;
    ++r.intervals;
    if (m < r.margin) {
      r.margin = m;
      r.worst_start = a;
      r.worst_end = b;
    }
    if (m < -1e-9) r.pass = false;
  };
  check(t_lo, t_hi, true);
  const size_t k = switch_times.size();
  size_t start = 0;
  for (; start + nbar < k; start += nbar) {
    check(switch_times[start], switch_times[start + nbar], false);
  }
  if (start < k) check(switch_times[start], t_hi, true);
  return r;
}

}  // namespace dmpvs
