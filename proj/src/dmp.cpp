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

#include "dmpvs/dmp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmpvs/errors.hpp"

namespace dmpvs {

Vector6 DmpGains::Gamma() const {
  Vector6 g;
  g << Vector3::Constant(alpha_v * beta_v), Vector3::Constant(alpha_w * beta_w);
  return g;
}

Vector6 DmpGains::Lambda() const {
  Vector6 l;
  l << Vector3::Constant(alpha_v), Vector3::Constant(alpha_w);
  return l;
}

void DmpGains::Validate() const {
  if (!(alpha_v > 0 && beta_v > 0 && alpha_w > 0 && beta_w > 0 && tau > 0 &&
        alpha_zp > 0 && alpha_zo > 0)) {
    Fail(ErrorKind::kConfig, "dmp gains must all be > 0");
  }
}

VectorX BasisSet::Activations(double z) const {
  VectorX psi = (-(widths.array() * (z - centers.array()).square())).exp();
  const double sum = psi.sum();
  if (sum > 0.0) return psi / sum;
  // Far outside every kernel: the closest center takes all the mass.
  VectorX out = VectorX::Zero(count());
  Eigen::Index best;
  (centers.array() - z).abs().minCoeff(&best);
  out(best) = 1.0;
  return out;
}

double DmpModel::ThetaBar() const {
  auto spectral = [](const MatrixX& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixX> eig(m.transpose() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  };
  return std::max(spectral(theta_p), spectral(theta_o));
}

void Demonstration::Validate() const {
  if (samples.size() < 2) Fail(ErrorKind::kConfig, "demonstration needs at least 2 samples");
  for (size_t k = 1; k < samples.size(); ++k) {
    if (!(samples[k].t > samples[k - 1].t)) {
      Fail(ErrorKind::kConfig, "demonstration times must be strictly increasing (sample " +
                                   std::to_string(k) + ")");
    }
  }
  for (const DemoSample& s : samples) {
    if (!s.e_p.allFinite() || !s.xi.allFinite() || !s.xi_dot.allFinite()) {
      Fail(ErrorKind::kConfig, "demonstration contains non-finite values");
    }
  }
  if (samples.back().e_p.norm() > 1e-3) {
    Fail(ErrorKind::kConfig, "demonstration does not end at the goal (||e_p|| > 1e-3)");
  }
}

double Canonical(double t, double alpha_z, double tau, double t0) {
  return std::exp(-alpha_z * (t - t0) / tau);
}

BasisSet BuildBasis(int count, double alpha_z) {
  Require(count >= 2, "basis needs at least 2 functions");
  BasisSet b;
  b.centers.resize(count);
  b.widths.resize(count);
  for (int i = 0; i < count; ++i) {
    b.centers(i) = std::exp(-alpha_z * static_cast<double>(i) / (count - 1));
  }
  for (int i = 0; i + 1 < count; ++i) {
    const double d = b.centers(i + 1) - b.centers(i);
    b.widths(i) = 1.0 / (d * d);
  }
  b.widths(count - 1) = b.widths(count - 2);
  return b;
}

Vector6 Forcing(double z_p, double z_o, const DmpModel& model) {
  Vector6 f;
  f.head<3>() = model.theta_p.transpose() * (model.basis_p.Activations(z_p) * z_p);
  f.tail<3>() = model.theta_o.transpose() * (model.basis_o.Activations(z_o) * z_o);
  return f;
}

Vector6 DmpAccel(const StateX& x, double z_p, double z_o, const DmpModel& model) {
  const DmpGains& g = model.gains;
  const double tau2 = g.tau * g.tau;
  const Vector6 xi = x.xi.vector();
  const Vector6 f = Forcing(z_p, z_o, model);
  return (-(g.Gamma().cwiseProduct(x.e_p)) - g.tau * g.Lambda().cwiseProduct(xi) + f) /
         tau2;
}

namespace {

MatrixX Targets(const Demonstration& demo, const DmpGains& g) {
  const Vector6 gamma = g.Gamma();
  const Vector6 lambda = g.Lambda();
  MatrixX F(demo.samples.size(), 6);
  for (size_t k = 0; k < demo.samples.size(); ++k) {
    const DemoSample& s = demo.samples[k];
    F.row(k) = (g.tau * g.tau * s.xi_dot + gamma.cwiseProduct(s.e_p) +
                g.tau * lambda.cwiseProduct(s.xi)).transpose();
  }
  return F;
}

MatrixX Regressor(const Demonstration& demo, const BasisSet& basis,
                  double alpha_z, double tau) {
  const double t0 = demo.samples.front().t;
  MatrixX R(demo.samples.size(), basis.count());
  for (size_t k = 0; k < demo.samples.size(); ++k) {
    const double z = Canonical(demo.samples[k].t, alpha_z, tau, t0);
    R.row(k) = (basis.Activations(z) * z).transpose();
  }
  return R;
}

MatrixX SolveBlock(const MatrixX& R, const MatrixX& F, double ridge,
                   const char* name) {
  const Eigen::Index n = R.cols();
  MatrixX A = R;
  MatrixX B = F;
  if (ridge > 0.0) {
    A.conservativeResize(R.rows() + n, n);
    A.bottomRows(n) = std::sqrt(ridge) * MatrixX::Identity(n, n);
    B.conservativeResize(F.rows() + n, F.cols());
    B.bottomRows(n).setZero();
  }
  Eigen::ColPivHouseholderQR<MatrixX> qr(A);
  if (qr.rank() < n) {
    std::ostringstream msg;
    msg << name << " basis regressor is rank deficient (rank " << qr.rank()
        << " of " << n << "); reduce the basis count or add ridge";
    Fail(ErrorKind::kIllPosed, msg.str());
  }
  return qr.solve(B);
}

}  // namespace

double LearningObjective(const Demonstration& demo, const DmpModel& model) {
  const MatrixX F = Targets(demo, model.gains);
  const DmpGains& g = model.gains;
  const MatrixX Rp = Regressor(demo, model.basis_p, g.alpha_zp, g.tau);
  const MatrixX Ro = Regressor(demo, model.basis_o, g.alpha_zo, g.tau);
  return (F.leftCols(3) - Rp * model.theta_p).squaredNorm() +
         (F.rightCols(3) - Ro * model.theta_o).squaredNorm();
}

LearnResult LearnWeights(const Demonstration& demo, const DmpGains& gains,
                         const LearnOptions& options) {
  gains.Validate();
  demo.Validate();
  Require(options.ridge >= 0.0, "ridge must be non-negative");
  const size_t needed = static_cast<size_t>(std::max(options.n_p, options.n_o));
  if (demo.samples.size() < needed) {
    Fail(ErrorKind::kIllPosed, "demonstration has fewer samples (" +
                                   std::to_string(demo.samples.size()) +
                                   ") than basis functions (" + std::to_string(needed) + ")");
  }
  LearnResult out;
  DmpModel& m = out.model;
  m.gains = gains;
  m.basis_p = BuildBasis(options.n_p, gains.alpha_zp);
  m.basis_o = BuildBasis(options.n_o, gains.alpha_zo);
  const MatrixX F = Targets(demo, gains);
  const MatrixX Rp = Regressor(demo, m.basis_p, gains.alpha_zp, gains.tau);
  const MatrixX Ro = Regressor(demo, m.basis_o, gains.alpha_zo, gains.tau);
  m.theta_p = SolveBlock(Rp, F.leftCols(3), options.ridge, "position");
  m.theta_o = SolveBlock(Ro, F.rightCols(3), options.ridge, "orientation");
  if (!m.theta_p.allFinite() || !m.theta_o.allFinite()) {
    Fail(ErrorKind::kIllPosed, "learned weights are not finite");
  }
  out.residual = LearningObjective(demo, m);
  out.zero_objective = F.squaredNorm();
  return out;
}

MinJerkProfile MinJerk(double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  return MinJerkProfile{10.0 * u3 - 15.0 * u3 * u + 6.0 * u3 * u2,
                        30.0 * u2 - 60.0 * u3 + 30.0 * u2 * u2,
                        60.0 * u - 180.0 * u2 + 120.0 * u3};
}

Demonstration MinJerkDemo(const Pose& start_in_world, const Pose& goal_in_world,
                          double duration, double rate_hz) {
  Require(duration > 0.0, "min-jerk demo needs duration > 0");
  Require(rate_hz > 0.0, "min-jerk demo needs rate > 0");
  Vector6 e0 = PoseError(start_in_world, goal_in_world);
  const int n = std::max(1, static_cast<int>(std::lround(duration * rate_hz)));
  Demonstration demo;
  demo.samples.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = duration * static_cast<double>(k) / n;
    const MinJerkProfile p = MinJerk(t / duration);
    DemoSample s;
    s.t = t;
    s.e_p = (1.0 - p.s) * e0;
    s.xi = (-p.ds / duration) * e0;
    s.xi_dot = (-p.dds / (duration * duration)) * e0;
    demo.samples.push_back(s);
  }
  return demo;
}

std::string DmpCertificate::Describe() const {
  std::ostringstream out;
  out << "alpha_v=4beta_v:" << (alpha_v_ok ? "ok" : "FAIL")
      << " alpha_w=4beta_w:" << (alpha_w_ok ? "ok" : "FAIL")
      << " beta_v>3eps2/(8tau):" << (beta_v_ok ? "ok" : "FAIL")
      << " beta_w>3eps2/(8tau):" << (beta_w_ok ? "ok" : "FAIL");
  return out.str();
}

DmpCertificate DmpGainCertificate(const DmpGains& g, double epsilon2) {
  Require(epsilon2 > 0.0, "epsilon2 must be > 0");
  auto same = [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  DmpCertificate c;
  const double beta_min = 3.0 * epsilon2 / (8.0 * g.tau);
  c.alpha_v_ok = same(g.alpha_v, 4.0 * g.beta_v);
  c.alpha_w_ok = same(g.alpha_w, 4.0 * g.beta_w);
  c.beta_v_ok = g.beta_v > beta_min;
  c.beta_w_ok = g.beta_w > beta_min;
  const double tau2 = g.tau * g.tau;
  c.lambda_d = std::min({epsilon2 * g.beta_v * g.beta_v / tau2,
                         4.0 * g.tau * g.beta_v - 1.5 * epsilon2,
                         epsilon2 * g.beta_w * g.beta_w / tau2,
                         4.0 * g.tau * g.beta_w - 1.5 * epsilon2});
  return c;
}

namespace {

struct RelState {
  Eigen::Vector4d q;  // (w, x, y, z) of q_c^{c*}
  Vector3 t;
  Vector6 xi;
};

RelState Axpy(const RelState& y, double h, const RelState& k) {
  return RelState{y.q + h * k.q, y.t + h * k.t, y.xi + h * k.xi};
}

UnitQuaternion ToQuat(const Eigen::Vector4d& v) {
  return UnitQuaternion(v(0), v(1), v(2), v(3));
}

}  // namespace

std::vector<RolloutSample> Rollout(const DmpModel& model, const Vector6& e_p0,
                                   const Vector6& xi0, double duration, double dt) {
  Require(dt > 0.0 && duration >= 0.0, "rollout needs dt > 0 and duration >= 0");
  const DmpGains& g = model.gains;
  const UnitQuaternion q0 = QuatExp(e_p0.tail<3>());
  RelState y{Eigen::Vector4d(q0.w(), q0.x(), q0.y(), q0.z()), e_p0.head<3>(), xi0};

  auto state_x = [](const RelState& s) {
    StateX x;
    x.e_p << s.t, QuatLog(ToQuat(s.q));
    x.xi = Twist::FromVector(s.xi, Frame::kDesired);
    return x;
  };
  auto deriv = [&](double t, const RelState& s) {
    const UnitQuaternion q = ToQuat(s.q);
    const Vector3 w = s.xi.tail<3>();
    // q_dot = 0.5 * (0, w) (x) q, w expressed in the desired frame.
    const Eigen::Quaterniond dq =
        Eigen::Quaterniond(0.0, w.x(), w.y(), w.z()) * q.eigen();
    RelState d;
    d.q = 0.5 * Eigen::Vector4d(dq.w(), dq.x(), dq.y(), dq.z());
    d.t = s.xi.head<3>();
    d.xi = DmpAccel(state_x(s), Canonical(t, g.alpha_zp, g.tau),
                    Canonical(t, g.alpha_zo, g.tau), model);
    return d;
  };

  const int n = static_cast<int>(std::lround(duration / dt));
  std::vector<RolloutSample> out;
  out.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = k * dt;
    RolloutSample r;
    r.t = t;
    r.x = state_x(y);
    r.z_p = Canonical(t, g.alpha_zp, g.tau);
    r.z_o = Canonical(t, g.alpha_zo, g.tau);
    r.forcing_norm = Forcing(r.z_p, r.z_o, model).norm();
    out.push_back(r);
    if (k == n) break;
    const RelState k1 = deriv(t, y);
    const RelState k2 = deriv(t + 0.5 * dt, Axpy(y, 0.5 * dt, k1));
    const RelState k3 = deriv(t + 0.5 * dt, Axpy(y, 0.5 * dt, k2));
    const RelState k4 = deriv(t + dt, Axpy(y, dt, k3));
    y.q += dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    y.t += dt / 6.0 * (k1.t + 2.0 * k2.t + 2.0 * k3.t + k4.t);
    y.xi += dt / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi);
    y.q.normalize();
    if (!y.q.allFinite() || !y.t.allFinite() || !y.xi.allFinite()) {
      Fail(ErrorKind::kDiverged, "dmp rollout produced a non-finite state");
    }
  }
  return out;
}

}  // namespace dmpvs
