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

#include "dmpvs/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dmpvs/errors.hpp"

namespace dmpvs {

Matrix12 DmpLyapunovMatrix(const DmpGains& g, double epsilon2) {
  Matrix12 P = Matrix12::Zero();
  P.topLeftCorner<6, 6>() = (0.5 * g.Gamma()).asDiagonal();
  P.topRightCorner<6, 6>() = 0.25 * epsilon2 * Matrix6::Identity();
  P.bottomLeftCorner<6, 6>() = 0.25 * epsilon2 * Matrix6::Identity();
  P.bottomRightCorner<6, 6>() = 0.5 * g.tau * g.tau * Matrix6::Identity();
  return P;
}

double LyapunovDmp(const StateX& x, const DmpGains& gains, double epsilon2) {
  const Vector12 v = x.vector();
  return v.dot(DmpLyapunovMatrix(gains, epsilon2) * v);
}

namespace {

MatrixX IbvsQ(const MatrixX& M, double epsilon1) {
  const Eigen::Index n = M.rows();
  MatrixX Q(2 * n, 2 * n);
  Q << 0.5 * M, 0.25 * epsilon1 * M, 0.25 * epsilon1 * M, 0.5 * M;
  return Q;
}

MatrixX MetricM(const VectorX& s, const IbvsReference& ref) {
  const MatrixX P = PseudoInverse(ApproxInteraction(s, ref));
  return P.transpose() * P;
}

}  // namespace

double LyapunovIbvs(const VectorX& e_i, const VectorX& edot_hat,
                    const IbvsReference& ref, const VectorX& s, double epsilon1) {
  const MatrixX P = PseudoInverse(ApproxInteraction(s, ref));
  const VectorX a = P * e_i;
  const VectorX b = P * edot_hat;
  return 0.5 * a.squaredNorm() + 0.5 * b.squaredNorm() + 0.5 * epsilon1 * a.dot(b);
}

double LyapunovIbvsAtState(const ServoGeometry& geom, const IbvsReference& ref,
                           const StateX& x, double epsilon1) {
  const Pose camera = PoseFromError(geom.goal_in_world, x.e_p);
  const FeatureObservation obs = Project(geom.marker, camera, geom.intrinsics, false);
  Require((obs.depths.array() > 0.0).all(), "state puts the marker behind the camera");
  const Twist xi_c =
      TwistToFrame(x.xi, CameraToDesired(camera, geom.goal_in_world).Inverse());
  const VectorX e_i = obs.s - ref.s_star;
  const VectorX edot = ApproxInteraction(obs.s, ref) * xi_c.vector();
  return LyapunovIbvs(e_i, edot, ref, obs.s, epsilon1);
}

MlfConstants ComputeMlfConstants(const ServoGeometry& geom,
                                 const IbvsReference& ref,
                                 const DmpGains& gains_d, double epsilon1,
                                 double epsilon2, double region_radius,
                                 int samples, std::uint64_t seed) {
  Require(region_radius > 0.0, "mlf constants need a positive region radius");
  MlfConstants c;
  Eigen::SelfAdjointEigenSolver<Matrix12> ed(DmpLyapunovMatrix(gains_d, epsilon2),
                                             Eigen::EigenvaluesOnly);
  c.gamma_d_lo = ed.eigenvalues()(0);
  c.gamma_d_hi = ed.eigenvalues()(11);

  const MatrixX J = StateJacobian(geom, ref);
  std::mt19937_64 rng(seed);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int i = 0; i < samples; ++i) {
    const VectorX xv = i == 0 ? VectorX::Zero(12) : SampleBall(rng, 12, region_radius);
    StateX x;
    x.e_p = xv.head<6>();
    x.xi = Twist::FromVector(xv.tail<6>(), Frame::kDesired);
    const FeatureObservation obs = Project(
        geom.marker, PoseFromError(geom.goal_in_world, x.e_p), geom.intrinsics, false);
    if ((obs.depths.array() <= 0.0).any()) continue;
    const MatrixX Pv = J.transpose() * IbvsQ(MetricM(obs.s, ref), epsilon1) * J;
    Eigen::SelfAdjointEigenSolver<MatrixX> ev(Pv, Eigen::EigenvaluesOnly);
    lo = std::min(lo, ev.eigenvalues()(0));
    hi = std::max(hi, ev.eigenvalues()(ev.eigenvalues().size() - 1));
    const double n2 = xv.squaredNorm();
    if (n2 > 0.0) {
      const double rq = LyapunovIbvsAtState(geom, ref, x, epsilon1) / n2;
      lo = std::min(lo, rq);
      hi = std::max(hi, rq);
    }
  }
  c.gamma_v_lo = lo;
  c.gamma_v_hi = hi;
  c.kappa_hi = std::max(c.gamma_v_hi, c.gamma_d_hi);
  c.kappa_lo = std::min(c.gamma_v_lo, c.gamma_d_lo);
  c.mu = c.kappa_hi / c.kappa_lo;
  return c;
}

double UltimateBound(const MlfConstants& c, int n0, double b, double eps) {
  Require(c.kappa_hi > 0.0 && c.kappa_lo > 0.0 && n0 > 0 && b > 0.0 && eps > 0.0,
          "ultimate bound inputs must be positive");
  const double log_ratio = (n0 + 1) * std::log(c.kappa_hi) -
                           (n0 + 2) * std::log(c.kappa_lo) + std::log(b / eps);
  return std::exp(0.5 * log_ratio);
}

double IbvsTransientFactor(const IbvsGains& g, double rate) {
  Eigen::Matrix2d A;
  A << 0.0, 1.0, -g.kp, -g.kv;
  Eigen::Matrix2d Q;
  Q << 0.5, 0.25 * g.epsilon1, 0.25 * g.epsilon1, 0.5;
  Eigen::EigenSolver<Eigen::Matrix2d> es(A, false);
  const double slowest = -es.eigenvalues().real().maxCoeff();
  if (!(slowest > 0.0) || rate >= 2.0 * slowest) {
    return std::numeric_limits<double>::infinity();
  }
  // The weighted norm decays like exp(-(2 slowest - rate) t); stop once it is
  // well below its starting value.
  const double horizon = 40.0 / (2.0 * slowest - rate);
  const int steps = 20000;
  double sup = 1.0;
  for (int k = 1; k <= steps; ++k) {
    const double t = horizon * k / steps;
    const Eigen::Matrix2d phi = (A * t).exp();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ge(
        phi.transpose() * Q * phi, Q, Eigen::EigenvaluesOnly);
    sup = std::max(sup, std::exp(rate * t) * ge.eigenvalues()(1));
  }
  return sup;
}

double IbvsLinearizationDefect(const ServoGeometry& geom, const IbvsReference& ref,
                               const IbvsGains& g, const Pose& camera, const Twist& xi,
                               const Vector6& acc) {
  Require(xi.frame == Frame::kDesired, "defect needs a desired-frame twist");
  const FrameRotation to_cam = CameraToDesired(camera, geom.goal_in_world).Inverse();
  const Vector6 b = TwistToFrame(xi, to_cam).vector();
  const Vector6 acc_c = TwistToFrame(Twist::FromVector(acc, Frame::kDesired), to_cam).vector();
  auto a_at = [&](const Pose& p) -> Vector6 {
    const FeatureObservation obs = Project(geom.marker, p, geom.intrinsics, false);
    Require((obs.depths.array() > 0.0).all(), "defect needs the marker in front of the camera");
    return PseudoInverse(ApproxInteraction(obs.s, ref)) * (obs.s - ref.s_star);
  };
  const Vector6 a = a_at(camera);
  // a_dot by central differences along the body twist (same kinematics as the simulator).
  const double h = 1e-6;
  auto moved = [&](double s) {
    return Pose{camera.rotation * QuatExp(s * b.tail<3>()),
                camera.translation + camera.rotation.Rotate(s * b.head<3>()), camera.from,
                camera.to};
  };
  const Vector6 a_dot = (a_at(moved(h)) - a_at(moved(-h))) / (2.0 * h);
  Vector6 b_dot = acc_c;
  b_dot.head<3>() -= b.tail<3>().cross(b.head<3>());
  const Vector6 r1 = a_dot - b;
  const Vector6 r2 = b_dot + g.kp * a + g.kv * b;
  auto qnorm = [&](const Vector6& u, const Vector6& v) {
    return std::sqrt(std::max(0.0, 0.5 * u.squaredNorm() + 0.5 * v.squaredNorm() +
                                       0.5 * g.epsilon1 * u.dot(v)));
  };
  const double nx = qnorm(a, b);
  return nx > 0.0 ? qnorm(r1, r2) / nx : 0.0;
}

namespace {

double FitDecayRate(std::span<const LyapunovReport> seg) {
  if (seg.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  size_t peak = 0;
  for (size_t i = 1; i < seg.size(); ++i) {
    if (seg[i].V > seg[peak].V) peak = i;
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (size_t i = peak; i < seg.size(); ++i) {
    if (!(seg[i].V > 1e-300) || !std::isfinite(seg[i].V)) continue;
    const double t = seg[i].t;
    const double y = std::log(seg[i].V);
    st += t; sy += y; stt += t * t; sty += t * y;
    ++n;
  }
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * stt - st * st;
  if (denom <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sty - st * sy) / denom;
}

}  // namespace

std::vector<EnvelopeSegment> EnvelopeCheck(std::span<LyapunovReport> log, double rate,
                                           std::span<const double> switch_times,
                                           const AllowanceFn& allowance) {
  for (size_t i = 1; i < log.size(); ++i) {
    Require(log[i].t >= log[i - 1].t, "envelope check needs a time-sorted log");
  }
  std::vector<EnvelopeSegment> out;
  size_t begin = 0;
  size_t next_switch = 0;
  while (begin < log.size()) {
    while (next_switch < switch_times.size() && switch_times[next_switch] <= log[begin].t) {
      ++next_switch;
    }
    size_t end = begin;
    const double stop = next_switch < switch_times.size()
                            ? switch_times[next_switch]
                            : std::numeric_limits<double>::infinity();
    while (end < log.size() && log[end].t < stop) ++end;

    std::span<LyapunovReport> seg = log.subspan(begin, end - begin);
    EnvelopeSegment r;
    r.t_start = seg.front().t;
    r.t_end = seg.back().t;
    r.samples = static_cast<int>(seg.size());
    r.active = seg.front().active;
    r.empirical_rate = FitDecayRate(seg);
    const EnvelopeAllowance a = allowance ? allowance(seg) : EnvelopeAllowance{};
    const double seg_rate = a.rate.value_or(rate);
    const double base = seg.front().V + a.offset;
    const double tol = 1e-9 * std::abs(base) + 1e-15;
    r.worst_slack = std::numeric_limits<double>::infinity();
    for (LyapunovReport& rep : seg) {
      const size_t i = static_cast<size_t>(&rep - seg.data());
    const double growth = a.growth.empty() ? 1.0 : a.growth.at(i);
    rep.envelope = base * std::exp(-seg_rate * (rep.t - r.t_start)) * growth + a.floor;
      rep.within_envelope = rep.V <= rep.envelope + tol;
      r.worst_slack = std::min(r.worst_slack, rep.envelope - rep.V);
      r.pass = r.pass && rep.within_envelope;
    }
    if (seg.size() < 3) r.inconclusive = true;
    out.push_back(r);
    begin = end;
  }
  return out;
}

}  // namespace dmpvs
