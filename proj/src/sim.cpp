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

#include "dmpvs/sim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dmpvs/errors.hpp"

namespace dmpvs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PoseState {
  Eigen::Vector4d q;  // world -> camera rotation (w, x, y, z)
  Vector3 t;
  Vector6 xi;         // desired frame
};

PoseState Axpy(const PoseState& y, double h, const PoseState& k) {
  return PoseState{y.q + h * k.q, y.t + h * k.t, y.xi + h * k.xi};
}

Pose ToPose(const PoseState& s) {
  return Pose{UnitQuaternion(s.q(0), s.q(1), s.q(2), s.q(3)), s.t, Frame::kWorld,
              Frame::kCamera};
}

bool Usable(const FeatureObservation& obs, const IbvsReference& ref) {
  if ((obs.depths.array() <= 0.0).any()) return false;
  return MinSingularValue(ApproxInteraction(obs.s, ref)) >= kRankTolerance;
}

}  // namespace

bool Scenario::Occluded(double t) const {
  return std::any_of(occlusions.begin(), occlusions.end(),
                     [t](const Occlusion& o) { return t >= o.start && t < o.end; });
}

int Scenario::Ticks() const {
  return static_cast<int>(std::floor(duration / dt + 1e-9));
}

void Scenario::Validate() const {
  if (!(dt > 0.0 && std::isfinite(dt))) Fail(ErrorKind::kConfig, "dt must be positive");
  if (!(duration >= 0.0 && std::isfinite(duration))) {
    Fail(ErrorKind::kConfig, "duration must be finite and non-negative");
  }
  if (duration > 0.0 && duration < dt) Fail(ErrorKind::kConfig, "duration must be >= dt");
  for (size_t i = 0; i < occlusions.size(); ++i) {
    if (!(occlusions[i].end > occlusions[i].start)) {
      Fail(ErrorKind::kConfig, "occlusion intervals must have end > start");
    }
    if (i > 0 && occlusions[i].start < occlusions[i - 1].end) {
      Fail(ErrorKind::kConfig, "occlusion intervals must be sorted and non-overlapping");
    }
  }
  if (initial_pose.from != Frame::kWorld || initial_pose.to != Frame::kCamera ||
      goal_pose.from != Frame::kWorld || goal_pose.to != Frame::kDesired) {
    Fail(ErrorKind::kConfig, "scenario poses must be world->camera and world->desired");
  }
  if (initial_twist.frame != Frame::kDesired) {
    Fail(ErrorKind::kConfig, "initial twist must be given in the desired frame");
  }
  if (!(convergence_tolerance > 0.0)) Fail(ErrorKind::kConfig, "convergence tolerance must be positive");
  if (!(region_radius > 0.0)) Fail(ErrorKind::kConfig, "region radius must be positive");
  if (!(epsilon2 > 0.0)) Fail(ErrorKind::kConfig, "epsilon2 must be positive");
  intrinsics.Validate();
  marker.Validate();
  ibvs.Validate();
  switching.Validate();
  if (switching.iota_lo.size() != 2 * marker.count()) {
    Fail(ErrorKind::kConfig, "switching thresholds must have two entries per marker point");
  }
}

Simulator::Simulator(Scenario scenario, DmpModel model)
    : scenario_(std::move(scenario)), model_(std::move(model)) {
  scenario_.Validate();
  ref_ = IbvsReference::FromGoal(scenario_.marker, scenario_.goal_pose, scenario_.intrinsics);
  sw_ = SwitchState::Initial(scenario_.switching);
  pose_ = scenario_.initial_pose;
  xi_ = scenario_.initial_twist.vector();
  ticks_ = scenario_.Ticks();
}

StateX Simulator::state() const {
  StateX x;
  x.e_p = PoseError(pose_, scenario_.goal_pose);
  x.xi = Twist::FromVector(xi_, Frame::kDesired);
  return x;
}

double Simulator::CanonicalP(double t) const {
  return Canonical(t, model_.gains.alpha_zp, model_.gains.tau, t0_);
}
double Simulator::CanonicalO(double t) const {
  return Canonical(t, model_.gains.alpha_zo, model_.gains.tau, t0_);
}

Vector6 Simulator::ActiveAccel(Subsystem active, double t, const Pose& pose,
                               const Vector6& xi, const Vector6& fallback) const {
  if (active == Subsystem::kDmp) {
    StateX x;
    x.e_p = PoseError(pose, scenario_.goal_pose);
    x.xi = Twist::FromVector(xi, Frame::kDesired);
    return DmpAccel(x, CanonicalP(t), CanonicalO(t), model_);
  }
  const FeatureObservation obs =
      Project(scenario_.marker, pose, scenario_.intrinsics, false);
  if (!Usable(obs, ref_)) return fallback;
  const FrameRotation c_to_d = CameraToDesired(pose, scenario_.goal_pose);
  const Twist xi_c = TwistToFrame(Twist::FromVector(xi, Frame::kDesired), c_to_d.Inverse());
  const VectorX e_i = FeatureError(obs, ref_);
  const VectorX edot = EstimateEdot(obs, ref_, xi_c);
  const Vector6 acc_c = IbvsAccel(e_i, edot, ref_, obs.s, scenario_.ibvs);
  return TwistToFrame(Twist::FromVector(acc_c, Frame::kCamera), c_to_d).vector();
}

SimRecord Simulator::Step() {
  Require(!done(), "simulation already finished");
  const Scenario& sc = scenario_;
  const double t = tick_ * sc.dt;

  FeatureObservation obs = Project(sc.marker, pose_, sc.intrinsics, sc.Occluded(t));
  if (obs.visible && !Usable(obs, ref_)) obs.visible = false;
  std::optional<VectorX> e_i;
  VectorX edot;
  const FrameRotation c_to_d = CameraToDesired(pose_, sc.goal_pose);
  const Twist xi_c = TwistToFrame(Twist::FromVector(xi_, Frame::kDesired), c_to_d.Inverse());
  if (obs.visible) {
    e_i = FeatureError(obs, ref_);
    if (sc.edot == EdotEstimator::kModel) {
      edot = EstimateEdot(obs, ref_, xi_c);
    } else {
      edot = prev_e_i_ ? EstimateEdotBackward(*e_i, *prev_e_i_, sc.dt)
                       : VectorX(VectorX::Zero(e_i->size()));
    }
  }
  prev_e_i_ = e_i;

  std::optional<SwitchEvent> ev;
  Subsystem active = Subsystem::kDmp;
  switch (sc.mode) {
    case ControllerMode::kSwitched:
      ev = Decide(sw_, sc.switching, t, obs, e_i);
      active = sw_.active;
      break;
    case ControllerMode::kIbvsOnly:
      active = Subsystem::kIbvs;
      break;
    case ControllerMode::kDmpOnly:
    case ControllerMode::kNone:
      active = Subsystem::kDmp;
      break;
  }
  if (ev && ev->to == Subsystem::kDmp && sc.reset_canonical_on_activation) t0_ = t;

  SimRecord rec;
  rec.t = t;
  rec.active = active;
  rec.e_p = PoseError(pose_, sc.goal_pose);
  rec.xi = xi_;
  rec.visible = obs.visible;
  rec.z_p = CanonicalP(t);
  rec.z_o = CanonicalO(t);
  rec.forcing_norm = Forcing(rec.z_p, rec.z_o, model_).norm();
  StateX x;
  x.e_p = rec.e_p;
  x.xi = Twist::FromVector(xi_, Frame::kDesired);
  rec.V_d = LyapunovDmp(x, model_.gains, sc.epsilon2);
  if (obs.visible) {
    rec.e_i = *e_i;
    rec.V_v = LyapunovIbvs(*e_i, edot, ref_, obs.s, sc.ibvs.epsilon1);
  } else {
    rec.e_i = VectorX::Constant(2 * sc.marker.count(), kNaN);
    rec.V_v = kNaN;
  }
  rec.V_active = active == Subsystem::kIbvs ? rec.V_v : rec.V_d;
  rec.switch_event = ev;
  rec.n_sigma = sw_.n_sigma;
  rec.t_e = sw_.t_e;
  rec.t_c = sw_.t_c;
  rec.iota_hi = sw_.iota_is_hi(sc.switching);

  // Tick-start acceleration.
  Vector6 acc = Vector6::Zero();
  bool hold = sc.accel_hold == AccelHold::kZeroOrder ||
              sc.edot == EdotEstimator::kFiniteDifference;
  if (sc.mode == ControllerMode::kNone) {
    hold = true;
  } else if (active == Subsystem::kDmp) {
    acc = DmpAccel(x, rec.z_p, rec.z_o, model_);
  } else if (obs.visible) {
    const Vector6 acc_c = IbvsAccel(*e_i, edot, ref_, obs.s, sc.ibvs);
    acc = TwistToFrame(Twist::FromVector(acc_c, Frame::kCamera), c_to_d).vector();
  } else {
    hold = true;  // IBVS without features: coast
  }
  rec.acc = acc;

  auto deriv = [&](double ts, const PoseState& s) {
    const Pose p = ToPose(s);
    const FrameRotation d_to_c = CameraToDesired(p, sc.goal_pose).Inverse();
    const Twist body = TwistToFrame(Twist::FromVector(s.xi, Frame::kDesired), d_to_c);
    const Eigen::Quaterniond dq =
        p.rotation.eigen() *
        Eigen::Quaterniond(0.0, body.angular.x(), body.angular.y(), body.angular.z());
    PoseState d;
    d.q = 0.5 * Eigen::Vector4d(dq.w(), dq.x(), dq.y(), dq.z());
    d.t = p.rotation.Rotate(body.linear);
    d.xi = hold ? acc : ActiveAccel(active, ts, p, s.xi, acc);
    return d;
  };

  const double h = sc.dt;
  const UnitQuaternion& q = pose_.rotation;
  PoseState y{Eigen::Vector4d(q.w(), q.x(), q.y(), q.z()), pose_.translation, xi_};
  const PoseState k1 = deriv(t, y);
  const PoseState k2 = deriv(t + 0.5 * h, Axpy(y, 0.5 * h, k1));
  const PoseState k3 = deriv(t + 0.5 * h, Axpy(y, 0.5 * h, k2));
  const PoseState k4 = deriv(t + h, Axpy(y, h, k3));
  y.q += h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  y.t += h / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
  y.xi += h / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
  if (!y.q.allFinite() || !y.t.allFinite() || !y.xi.allFinite() || y.q.norm() == 0.0) {
    Fail(ErrorKind::kDiverged, "simulation state became non-finite");
  }
  y.q.normalize();
  drift_ = std::max(drift_, std::abs(y.q.norm() - 1.0));
  pose_ = ToPose(y);
  xi_ = y.xi;
  ++tick_;
  return rec;
}

std::vector<EnvelopeSegment> CheckEnvelopes(std::vector<SimRecord>& records,
                                            const Scenario& sc, const DmpModel& model) {
  std::vector<LyapunovReport> log;
  std::vector<size_t> index;
  std::vector<double> cuts;
  for (size_t i = 0; i < records.size(); ++i) {
    const SimRecord& r = records[i];
    if (r.switch_event) cuts.push_back(r.t);
    if (!std::isfinite(r.V_active)) {
      // IBVS coasting without features; starts a new segment afterwards.
      if (!cuts.empty() && cuts.back() == r.t) continue;
      cuts.push_back(r.t);
      continue;
    }
    log.push_back(LyapunovReport{r.t, r.active, r.V_active, 0.0, true});
    index.push_back(i);
  }
  std::sort(cuts.begin(), cuts.end());

  // DMP segments: V_dot <= -lambda ||x||^2 + 2 ||P B|| ||x|| ||f|| / tau^2.
  const DmpGains& g = model.gains;
  const Matrix12 P = DmpLyapunovMatrix(g, sc.epsilon2);
  Eigen::SelfAdjointEigenSolver<Matrix12> es(P, Eigen::EigenvaluesOnly);
  const double gd_lo = es.eigenvalues()(0);
  const double gd_hi = es.eigenvalues()(11);
  const double lambda_d = DmpGainCertificate(g, sc.epsilon2).lambda_d;
  const double beta_d = std::max(0.0, lambda_d) / (2.0 * gd_hi);
  const double c_f = std::sqrt(2.0) * std::max(1.0, sc.epsilon2 / (2.0 * g.tau * g.tau)) /
                     std::sqrt(gd_lo);
  const double beta_v = sc.switching.beta_lo;
  const ServoGeometry geom = sc.Geometry();
  const IbvsReference ref = IbvsReference::FromGoal(sc.marker, sc.goal_pose, sc.intrinsics);

  auto allowance = [&](std::span<const LyapunovReport> seg) {
    EnvelopeAllowance a;
    const double v0 = seg.front().V;
    if (seg.front().active == Subsystem::kDmp) {
      // Locate the records of this segment to integrate the forcing norm.
      const size_t first = static_cast<size_t>(&seg.front() - log.data());
      double integral = 0.0;
      for (size_t k = 0; k + 1 < seg.size(); ++k) {
        const SimRecord& r0 = records[index[first + k]];
        const SimRecord& r1 = records[index[first + k + 1]];
        const double s0 = r0.t - seg.front().t;
        const double s1 = r1.t - seg.front().t;
        integral += 0.5 * (s1 - s0) *
                    (std::exp(0.5 * beta_d * s0) * r0.forcing_norm +
                     std::exp(0.5 * beta_d * s1) * r1.forcing_norm);
      }
      const double w = std::sqrt(v0) + 0.5 * c_f * integral;
      a.offset = w * w - v0;
      a.floor = 1e-6 * v0 + 1e-12;
      a.rate = beta_d;
    } else {
      // Linear transient of the goal linearization, times the Gronwall
      // factor exp(2 sqrt(P) int rho) for the defect rho measured along the run.
      const size_t first = static_cast<size_t>(&seg.front() - log.data());
      const double peak_v = IbvsTransientFactor(sc.ibvs, beta_v);
      a.offset = std::isfinite(peak_v) ? (peak_v - 1.0) * v0
                                       : std::numeric_limits<double>::infinity();
      a.floor = 1e-6 * v0 + 1e-12;
      a.rate = beta_v;
      a.growth.resize(seg.size(), 1.0);
      double integral = 0.0, rho_prev = 0.0;
      for (size_t k = 0; k < seg.size() && std::isfinite(peak_v); ++k) {
        const SimRecord& rec = records[index[first + k]];
        const double rho = IbvsLinearizationDefect(
            geom, ref, sc.ibvs, PoseFromError(sc.goal_pose, rec.e_p),
            Twist::FromVector(rec.xi, Frame::kDesired), rec.acc);
        if (k > 0) integral += 0.5 * (rec.t - records[index[first + k - 1]].t) * (rho + rho_prev);
        rho_prev = rho;
        a.growth[k] = std::exp(2.0 * std::sqrt(peak_v) * integral);
      }
    }
    return a;
  };
  auto segs = EnvelopeCheck(log, beta_v, cuts, allowance);
  for (size_t k = 0; k < log.size(); ++k) {
    records[index[k]].envelope = log[k].envelope;
    records[index[k]].within_envelope = log[k].within_envelope;
  }
  return segs;
}

RunResult Run(const Scenario& scenario, const DmpModel& model) {
  RunResult out;
  RunSummary& sum = out.summary;
  sum.scenario = scenario.name;
  Simulator sim(scenario, model);
  try {
    while (!sim.done()) out.records.push_back(sim.Step());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDiverged) throw;
    sum.diverged = true;
    sum.error = e.what();
  }
  sum.ticks = static_cast<int>(out.records.size());
  sum.t_final = sim.time();
  const StateX x = sim.state();
  sum.final_e_p = x.e_p;
  sum.final_xi = x.xi.vector();
  sum.final_state_norm = x.vector().norm();
  const IbvsReference ref =
      IbvsReference::FromGoal(scenario.marker, scenario.goal_pose, scenario.intrinsics);
  const FeatureObservation obs = Project(scenario.marker, sim.pose(), scenario.intrinsics,
                                         scenario.Occluded(sim.time()));
  sum.final_visible = obs.visible;
  sum.final_feature_error = obs.visible ? FeatureError(obs, ref).norm() : kNaN;
  sum.switches = sim.switch_state().log;
  sum.quat_norm_drift = sim.quat_norm_drift();
  sum.tau_a = DwellTime(scenario.switching);
  std::vector<double> times;
  for (const SwitchEvent& e : sum.switches) times.push_back(e.t);
  sum.dwell = VerifyDwell(times, scenario.switching.n0, scenario.switching.nbar, sum.tau_a,
                          0.0, sim.time());
  sum.envelopes = CheckEnvelopes(out.records, scenario, model);
  sum.envelopes_pass = std::all_of(sum.envelopes.begin(), sum.envelopes.end(),
                                   [](const EnvelopeSegment& s) { return s.pass; });
  sum.converged = !sum.diverged &&
                  ((obs.visible && sum.final_feature_error < scenario.convergence_tolerance) ||
                   sum.final_state_norm < 1e-3);
  return out;
}

}  // namespace dmpvs
