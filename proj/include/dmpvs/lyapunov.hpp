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

// Lyapunov functions of both subsystems, the multiple-Lyapunov constants
// relating them, the switched-system ultimate bound and per-segment decay
// envelope monitoring.

#ifndef DMPVS_LYAPUNOV_HPP_
#define DMPVS_LYAPUNOV_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dmpvs/dmp.hpp"
#include "dmpvs/ibvs.hpp"
#include "dmpvs/subsystem.hpp"

namespace dmpvs {

struct LyapunovReport {
  double t = 0.0;
  Subsystem active = Subsystem::kDmp;
  double V = 0.0;
  double envelope = 0.0;
  bool within_envelope = true;
};

struct MlfConstants {
  double gamma_v_lo = 0.0;
  double gamma_v_hi = 0.0;
  double gamma_d_lo = 0.0;
  double gamma_d_hi = 0.0;
  double kappa_lo = 0.0;
  double kappa_hi = 0.0;
  double mu = 1.0;
};

// P_d = [Gamma/2, eps2/4 I; eps2/4 I, tau^2/2 I].
Matrix12 DmpLyapunovMatrix(const DmpGains& gains, double epsilon2);
double LyapunovDmp(const StateX& x, const DmpGains& gains, double epsilon2);

// rho^T Q rho with rho = [e_i; e_dot_hat], M = (L_hat^+)^T L_hat^+ and
// Q = [M/2, eps1 M/4; eps1 M/4, M/2].
double LyapunovIbvs(const VectorX& e_i, const VectorX& edot_hat,
                    const IbvsReference& ref, const VectorX& s, double epsilon1);

// V_v evaluated at a common state: features re-projected at the pose given by
// e_p, e_dot_hat = L_hat(s, Z*) R xi.
double LyapunovIbvsAtState(const ServoGeometry& geom, const IbvsReference& ref,
                           const StateX& x, double epsilon1);

MlfConstants ComputeMlfConstants(const ServoGeometry& geom,
                                 const IbvsReference& ref,
                                 const DmpGains& gains_d, double epsilon1,
                                 double epsilon2, double region_radius,
                                 int samples = 2000, std::uint64_t seed = 7);

// sqrt(kappa_hi^(N0+1) b / (kappa_lo^(N0+2) eps)).
double UltimateBound(const MlfConstants& c, int n0, double b, double eps);

// Worst-case growth of the IBVS Lyapunov function along the nominal
// closed loop (exact depth), measured against exp(-rate t):
//   sup_t exp(rate t) ||exp(A t)||_Q^2,  A = [0 1; -kp -kv].
// +inf when `rate` exceeds the nominal decay.
double IbvsTransientFactor(const IbvsGains& gains, double rate);

// In x = [L_hat^+ e_i; xi_c] the IBVS loop reads x_dot = A0 x + r(x) with
// A0 = [0 I; -kp I, -kv I]. Returns ||r||_Q / ||x||_Q at one state (0 at x = 0).
// `acc` is the applied desired-frame acceleration.
double IbvsLinearizationDefect(const ServoGeometry& geom, const IbvsReference& ref,
                               const IbvsGains& gains, const Pose& camera,
                               const Twist& xi, const Vector6& acc);

struct EnvelopeAllowance {
  double offset = 0.0;  // added to V(t_start) before decay
  double floor = 0.0;   // additive floor
  std::optional<double> rate;  // overrides the global rate for this segment
  std::vector<double> growth;  // per-sample factor on the decaying term (empty = 1)
};

struct EnvelopeSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  int samples = 0;
  Subsystem active = Subsystem::kDmp;
  bool inconclusive = false;
  bool pass = true;
  double empirical_rate = 0.0;  // NaN when not estimable
  double worst_slack = 0.0;     // min over samples of envelope - V
};

using AllowanceFn =
    std::function<EnvelopeAllowance(std::span<const LyapunovReport> segment)>;

// Splits the log at switch times and checks, per segment,
//   V(t) <= (V(t0) + offset) exp(-rate (t - t0)) growth(t) + floor.
// Annotates envelope/within_envelope in `log`.
std::vector<EnvelopeSegment> EnvelopeCheck(std::span<LyapunovReport> log, double rate,
                                           std::span<const double> switch_times,
                                           const AllowanceFn& allowance = {});

}  // namespace dmpvs

#endif  // DMPVS_LYAPUNOV_HPP_
