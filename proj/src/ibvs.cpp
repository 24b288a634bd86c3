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

#include "dmpvs/ibvs.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dmpvs/errors.hpp"

namespace dmpvs {

void IbvsGains::Validate() const {
  if (!(kp > 0.0 && kv > 0.0 && epsilon1 > 0.0)) {
    Fail(ErrorKind::kConfig, "ibvs gains: kp, kv, epsilon1 must be > 0");
  }
}

IbvsReference IbvsReference::FromGoal(const Marker& marker,
                                      const Pose& goal_in_world,
                                      const Intrinsics& intrinsics) {
  Pose camera = goal_in_world;
  camera.to = Frame::kCamera;
  const FeatureObservation obs = Project(marker, camera, intrinsics, false);
  if (!obs.visible) {
    Fail(ErrorKind::kConfig, "goal pose does not see every marker corner");
  }
  IbvsReference ref{obs.s, obs.depths};
  if (MinSingularValue(InteractionMatrix(ref.s_star, ref.z_star)) < kRankTolerance) {
    Fail(ErrorKind::kConfig, "goal interaction matrix is rank deficient");
  }
  return ref;
}

IbvsReference IbvsReference::WithScalarDepth(const VectorX& s_star, double depth) {
  Require(s_star.size() % 2 == 0, "s_star must have even length");
  return IbvsReference{s_star, VectorX::Constant(s_star.size() / 2, depth)};
}

Pose PoseFromError(const Pose& goal_in_world, const Vector6& e_p) {
  const Pose rel{QuatExp(e_p.tail<3>()), e_p.head<3>(), Frame::kDesired,
                 Frame::kCamera};
  return Compose(goal_in_world, rel);
}

double MinSingularValue(const MatrixX& L) {
  Eigen::JacobiSVD<MatrixX> svd(L);
  const auto& sv = svd.singularValues();
  return sv.size() == 0 ? 0.0 : sv(sv.size() - 1);
}

MatrixX PseudoInverse(const MatrixX& L) {
  Eigen::JacobiSVD<MatrixX> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX& sv = svd.singularValues();
  if (sv.size() < L.cols() || sv(sv.size() - 1) < kRankTolerance) {
    std::ostringstream msg;
    msg << "interaction matrix rank deficient (sigma_min = "
        << (sv.size() ? sv(sv.size() - 1) : 0.0) << ")";
    Fail(ErrorKind::kDegenerate, msg.str());
  }
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

MatrixX ApproxInteraction(const VectorX& s, const IbvsReference& ref) {
  return InteractionMatrix(s, ref.z_star);
}

VectorX FeatureError(const FeatureObservation& obs, const IbvsReference& ref) {
  Require(obs.visible, "feature error requested for an invisible observation");
  Require(obs.s.size() == ref.s_star.size(), "feature count mismatch");
  return obs.s - ref.s_star;
}

VectorX EstimateEdot(const FeatureObservation& obs, const IbvsReference& ref,
                     const Twist& xi_camera) {
  Require(obs.visible, "e_dot estimate requested for an invisible observation");
  Require(xi_camera.frame == Frame::kCamera, "e_dot estimate needs a camera-frame twist");
  return ApproxInteraction(obs.s, ref) * xi_camera.vector();
}

VectorX EstimateEdotBackward(const VectorX& e_now, const VectorX& e_prev, double dt) {
  Require(dt > 0.0, "backward difference needs dt > 0");
  return (e_now - e_prev) / dt;
}

Vector6 IbvsAccel(const VectorX& e_i, const VectorX& edot_hat,
                  const IbvsReference& ref, const VectorX& s,
                  const IbvsGains& gains) {
  const MatrixX pinv = PseudoInverse(ApproxInteraction(s, ref));
  return pinv * (-gains.kp * e_i - gains.kv * edot_hat);
}

GainCertificateResult GainCertificate(const IbvsGains& g, double k_lo,
                                      double k_hi, double l_bar) {
  Require(k_lo > 0.0 && k_hi >= k_lo && l_bar > 0.0,
          "gain certificate: need 0 < k_lo <= k_hi and l_bar > 0");
  GainCertificateResult out;
  out.k_star = -0.5 * l_bar - 0.5 * k_hi * (g.kp + 0.5 * g.epsilon1 * g.kv);
  out.matrix << 0.5 * g.epsilon1 * g.kp * k_lo, out.k_star,
                out.k_star, g.kv * k_lo - 0.5 * g.epsilon1 * l_bar;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(out.matrix, Eigen::EigenvaluesOnly);
  out.lambda_v = eig.eigenvalues()(0);
  return out;
}

namespace {

VectorX FeaturesAt(const ServoGeometry& geom, const Vector6& e_p) {
  return Project(geom.marker, PoseFromError(geom.goal_in_world, e_p),
                 geom.intrinsics, false).s;
}

}  // namespace

MatrixX StateJacobian(const ServoGeometry& geom, const IbvsReference& ref) {
  const int n = static_cast<int>(ref.s_star.size());
  MatrixX J = MatrixX::Zero(2 * n, 12);
  const double h = 1e-6;
  for (int k = 0; k < 6; ++k) {
    Vector6 d = Vector6::Zero();
    d(k) = h;
    J.block(0, k, n, 1) = (FeaturesAt(geom, d) - FeaturesAt(geom, -d)) / (2.0 * h);
  }
  // R = I at x = 0.
  J.block(n, 6, n, 6) = InteractionMatrix(ref.s_star, ref.z_star);
  return J;
}

RegionBounds EstimateRegionBounds(const ServoGeometry& geom,
                                  const IbvsReference& ref, double radius,
                                  int samples, std::uint64_t seed) {
  Require(samples >= 100, "region bounds need at least 100 samples");
  Require(radius >= 0.0, "region radius must be non-negative");
  std::mt19937_64 rng(seed);
  RegionBounds b;
  b.k_lo = std::numeric_limits<double>::infinity();
  b.k_hi = 0.0;
  for (int i = 0; i < samples; ++i) {
    // First sample is the goal itself.
    const Vector6 e_p = i == 0 ? Vector6::Zero() : SampleBall6(rng, radius);
    const FeatureObservation obs = Project(
        geom.marker, PoseFromError(geom.goal_in_world, e_p), geom.intrinsics, false);
    if ((obs.depths.array() <= 0.0).any()) continue;
    const MatrixX L = InteractionMatrix(obs.s, obs.depths);
    const MatrixX Lhat = ApproxInteraction(obs.s, ref);
    Eigen::JacobiSVD<MatrixX> svd(Lhat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.singularValues().minCoeff() < kRankTolerance) {
      b.k_lo = 0.0;
      continue;
    }
    const MatrixX P = svd.matrixV() *
                      svd.singularValues().cwiseInverse().asDiagonal() *
                      svd.matrixU().transpose();
    const MatrixX M = P.transpose() * P;
    const MatrixX A = M * L * P;
    // Quadratic form restricted to range(L_hat), the complement of Ker(L_hat^+).
    const MatrixX& U = svd.matrixU();
    const MatrixX B = U.transpose() * (0.5 * (A + A.transpose())) * U;
    Eigen::SelfAdjointEigenSolver<MatrixX> eb(B, Eigen::EigenvaluesOnly);
    b.k_lo = std::min(b.k_lo, eb.eigenvalues()(0));
    b.k_hi = std::max(b.k_hi, eb.eigenvalues()(eb.eigenvalues().size() - 1));
    Eigen::SelfAdjointEigenSolver<MatrixX> em(M, Eigen::EigenvaluesOnly);
    b.l_bar = std::max(b.l_bar, em.eigenvalues().cwiseAbs().maxCoeff());
    ++b.samples;
  }
  const MatrixX J = StateJacobian(geom, ref);
  Eigen::SelfAdjointEigenSolver<MatrixX> ej(J.transpose() * J, Eigen::EigenvaluesOnly);
  b.m_lo = ej.eigenvalues()(0);
  b.m_hi = ej.eigenvalues()(ej.eigenvalues().size() - 1);
  b.loop_gain_positive = b.samples > 0 && b.k_lo > 0.0;
  return b;
}

double EstimateChiBar(const ServoGeometry& geom, const IbvsReference& ref,
                      double radius, double twist_radius, int samples,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double sup = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector6 e_p = SampleBall6(rng, radius);
    const Vector6 xi = SampleBall6(rng, twist_radius);
    const FeatureObservation obs = Project(
        geom.marker, PoseFromError(geom.goal_in_world, e_p), geom.intrinsics, false);
    if ((obs.depths.array() <= 0.0).any()) continue;
    const VectorX chi = (InteractionMatrix(obs.s, obs.depths) -
                         ApproxInteraction(obs.s, ref)) * xi;
    sup = std::max(sup, chi.norm());
  }
  return sup;
}

}  // namespace dmpvs
