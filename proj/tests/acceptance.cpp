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

// Acceptance run: one PASS/FAIL line per primary criterion, nonzero exit if
// any fails. Informational lines are prefixed with "[INFO]".

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dmpvs/camera.hpp"
#include "dmpvs/dmp.hpp"
#include "dmpvs/ibvs.hpp"
#include "dmpvs/scenario.hpp"
#include "dmpvs/sim.hpp"
#include "dmpvs/switchctl.hpp"
#include "test_support.hpp"

namespace dmpvs {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void Criterion(const char* name, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++g_failures;
  std::printf("[%s] %s: %s (%.2f s of %.0f s budget%s)\n", pass ? "PASS" : "FAIL", name,
              o.detail.c_str(), secs, budget_s, in_time ? "" : ", OVER BUDGET");
  std::fflush(stdout);
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string RunCli(const std::string& args, int* status) {
  const std::string cmd = std::string(DMPVS_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    *status = -1;
    return {};
  }
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int rc = pclose(p);
  *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

Pose Displace(const Pose& cam, const Vector6& xi_c, double h) {
  return Pose{cam.rotation * QuatExp(h * xi_c.tail<3>()),
              cam.translation + cam.rotation.Rotate(h * xi_c.head<3>()), cam.from, cam.to};
}

Outcome InteractionMatrixOracle() {
  std::mt19937_64 rng(2024);
  const Marker marker = Marker::Square(0.1);
  const double h = 1e-5;
  double worst = 0.0;
  int used = 0;
  while (used < 100) {
    const Pose cam = testing::NearGoalPose(rng, 0.1, 0.6);
    const FeatureObservation obs = Project(marker, cam, Intrinsics{}, false);
    if (!obs.visible) continue;
    const Vector6 xi = testing::RandomVector6(rng, 0.5);
    const VectorX pred = InteractionMatrix(obs.s, obs.depths) * xi;
    const VectorX fd = (Project(marker, Displace(cam, xi, h), Intrinsics{}, false).s -
                        Project(marker, Displace(cam, xi, -h), Intrinsics{}, false).s) /
                       (2.0 * h);
    worst = std::max(worst, (fd - pred).cwiseAbs().maxCoeff());
    ++used;
  }
  return {worst < 1e-5, Fmt("100 poses, max |fd - L xi| = %.2e (< 1e-5)", worst)};
}

Scenario Exp1() { return LoadScenario(testing::SourcePath("scenarios/experiment1.json")); }

Outcome DmpReproduction() {
  const Scenario sc = Exp1();
  const Demonstration demo = MinJerkDemo(sc.initial_pose, sc.goal_pose, 25.0, 30.0);
  const DmpGains g;  // tau = 25
  const LearnResult a = LearnWeights(demo, g);
  const LearnResult b = LearnWeights(demo, g);
  const bool same = SerializeModel(a.model) == SerializeModel(b.model);
  const auto roll = Rollout(a.model, demo.samples.front().e_p, demo.samples.front().xi,
                            demo.duration(), 1.0 / 30.0);
  double sq = 0.0, path = 0.0;
  const size_t n = std::min(roll.size(), demo.samples.size());
  for (size_t k = 0; k < n; ++k) {
    sq += (roll[k].x.e_p.head<3>() - demo.samples[k].e_p.head<3>()).squaredNorm();
    if (k) path += (demo.samples[k].e_p.head<3>() - demo.samples[k - 1].e_p.head<3>()).norm();
  }
  const double rmse_pct = 100.0 * std::sqrt(sq / n) / path;
  const double final_err = roll.back().x.e_p.norm();
  return {rmse_pct < 2.0 && final_err < 1e-3 && same && n == demo.samples.size(),
          Fmt("rmse %.4f%% of path, final ||e_p|| %.2e, retrain byte-identical: %s", rmse_pct,
              final_err, same ? "yes" : "no")};
}

Outcome DmpGlobalConvergence() {
  const DmpGains g = testing::DeskGains();
  const Scenario sc = Exp1();
  const DmpModel m = LearnWeights(MinJerkDemo(sc.initial_pose, sc.goal_pose, 2.5, 60.0), g).model;
  std::mt19937_64 rng(99);
  double worst_final = 0.0, worst_ratio = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector6 e0 = SampleBall6(rng, 1.0);
    const Vector6 xi0 = SampleBall6(rng, 0.5);
    const auto r = Rollout(m, e0, xi0, 40.0, 1.0 / 30.0);
    worst_final = std::max(worst_final, r.back().x.vector().norm());
    for (const RolloutSample& s : r) {
      const double bound = m.ThetaBar() * kPsiBar * std::max(s.z_p, s.z_o);
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, s.forcing_norm / bound);
    }
  }
  return {worst_final < 1e-3 && worst_ratio <= 1.0 + 1e-12,
          Fmt("20 states, tau = 2.5 s, T = 40 s: max ||x(T)|| = %.2e; max ||f|| / bound = %.3f",
              worst_final, worst_ratio)};
}

Outcome IbvsLocalConvergence() {
  std::mt19937_64 rng(7);
  const double radius = 0.05;
  double worst = 0.0;
  int envelope_fail = 0, invisible = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Scenario sc = testing::BaseScenario(PoseFromError(testing::GoalPose(), SampleBall6(rng, radius)));
    sc.mode = ControllerMode::kIbvsOnly;
    sc.duration = 20.0;
    const RunResult r = Run(sc, testing::ZeroModel(DmpGains{}));
    if (!r.summary.final_visible) {
      ++invisible;
      continue;
    }
    worst = std::max(worst, r.summary.final_feature_error);
    if (!r.summary.envelopes_pass) ++envelope_fail;
  }
  return {worst < 5e-3 && envelope_fail == 0 && invisible == 0,
          Fmt("20 poses with ||e_p|| <= %.2f, kp = 5, kv = 10: max final ||e_i|| = %.2e; "
              "envelope failures %d; lost features %d",
              radius, worst, envelope_fail, invisible)};
}

Outcome GainCertificates() {
  const DmpGains g;
  const DmpCertificate c = DmpGainCertificate(g, 1.0);
  const bool identities = g.alpha_v == 4.0 * g.beta_v && g.alpha_w == 4.0 * g.beta_w;
  const Scenario sc = Exp1();
  const IbvsReference ref = IbvsReference::FromGoal(sc.marker, sc.goal_pose, sc.intrinsics);
  const RegionBounds b = EstimateRegionBounds(sc.Geometry(), ref, sc.region_radius, 2000, 1);
  const GainCertificateResult v = GainCertificate(sc.ibvs, b.k_lo, b.k_hi, b.l_bar);
  int status = 0;
  const std::string out = RunCli("check " + testing::SourcePath("scenarios/experiment1.json"),
                                 &status);
  const bool flagged = out.find("WARNING") != std::string::npos;
  const bool ibvs_ok = v.passes() || flagged;
  return {c.passes() && identities && std::abs(c.lambda_d - 0.0016) <= 1e-6 && ibvs_ok &&
              status == 0,
          Fmt("lambda_d = %.6f, alpha = 4 beta exact: %s; lambda_v = %.4f (%s)", c.lambda_d,
              identities ? "yes" : "no", v.lambda_v,
              v.passes() ? "certified" : flagged ? "not certified, flagged by check" : "NOT FLAGGED")};
}

Outcome Experiment1() {
  const Scenario sc = Exp1();
  const RunResult r = Run(sc, LoadScenarioModel(sc));
  const auto& s = r.summary;
  const bool start_hidden = !r.records.empty() && !r.records.front().visible;
  const bool one = s.switches.size() == 1 && s.switches[0].to == Subsystem::kIbvs;
  bool thresholds = false, decays = true;
  double t_switch = NAN, max_e = NAN;
  for (size_t k = 0; k < r.records.size(); ++k) {
    const SimRecord& rec = r.records[k];
    if (rec.switch_event && rec.switch_event->to == Subsystem::kIbvs) {
      t_switch = rec.t;
      max_e = rec.e_i.cwiseAbs().maxCoeff();
      thresholds = max_e <= 0.42;
    }
  }
  for (const EnvelopeSegment& seg : s.envelopes) {
    if (seg.active == Subsystem::kIbvs) decays = decays && seg.pass && !seg.inconclusive;
  }
  return {start_hidden && one && thresholds && decays && s.converged && !s.diverged,
          Fmt("start outside view: %s; switches %zu; switch at %.2f s with max |e_i| = %.3f; "
              "post-switch V_v envelope %s; converged %s",
              start_hidden ? "yes" : "no", s.switches.size(), t_switch, max_e,
              decays ? "holds" : "violated", s.converged ? "yes" : "no")};
}

Outcome Experiment2() {
  const Scenario sc = LoadScenario(testing::SourcePath("scenarios/experiment2.json"));
  const RunResult r = Run(sc, LoadScenarioModel(sc));
  const auto& sw = r.summary.switches;
  const double expect[] = {15.56, 16.44, 19.12, 21.48};
  bool schedule = sw.size() == 5;
  for (size_t i = 0; schedule && i < 4; ++i) schedule = std::abs(sw[i].t - expect[i]) < 1e-9;
  const double t_c = sw.size() >= 4 ? sw[3].t_c : NAN;
  const double reentry = sw.size() >= 5 ? sw[4].t : NAN;
  const bool tc_ok = std::abs(t_c - 35.54) < 1e-6;
  const bool timing = std::abs(reentry - 57.08) <= 0.067 + 1e-9;
  const bool dwell = r.summary.dwell.pass;

  const Scenario nc =
      LoadScenario(testing::SourcePath("scenarios/experiment2_flicker_nocomp.json"));
  const RunResult rn = Run(nc, LoadScenarioModel(nc));
  const bool nocomp_fails = !rn.summary.dwell.pass;
  return {schedule && tc_ok && timing && dwell && nocomp_fails,
          Fmt("switches at 15.56/16.44/19.12/21.48: %s; t_c = %.2f s; re-entry %.2f s vs 57.08 "
              "(|d| = %.3f <= 0.067); dwell margin %.3f; uncompensated flicker: %zu switches, "
              "dwell %s (margin %.2f)",
              schedule ? "yes" : "no", t_c, reentry, std::abs(reentry - 57.08),
              r.summary.dwell.margin, rn.summary.switches.size(),
              nocomp_fails ? "fails" : "passes", rn.summary.dwell.margin)};
}

void Experiment2At30Hz() {
  Scenario sc = LoadScenario(testing::SourcePath("scenarios/experiment2.json"));
  sc.dt = 1.0 / 30.0;
  const RunResult r = Run(sc, LoadScenarioModel(sc));
  std::ostringstream times;
  for (const SwitchEvent& e : r.summary.switches) times << ' ' << Fmt("%.3f", e.t);
  std::printf("[INFO] experiment 2 at 30 Hz: switches at%s; dwell %s\n", times.str().c_str(),
              r.summary.dwell.pass ? "passes" : "fails");
}

Outcome DwellFormula() {
  const double tau = DwellTimeFormula(10.67, 0.77, 0.0077);
  int status = 0;
  const std::string out = RunCli("check " + testing::SourcePath("scenarios/experiment2.json"),
                                 &status);
  const bool surfaced = out.find("13.82") != std::string::npos &&
                        out.find("3.105") != std::string::npos;
  return {std::abs(tau - 3.105) <= 1e-3 && surfaced,
          Fmt("ln(10.67)/(0.77 - 0.0077) = %.4f s; check output shows 3.105 vs 13.82: %s", tau,
              surfaced ? "yes" : "no")};
}

Outcome StepHalving() {
  const Scenario base = Exp1();
  const DmpModel m = LoadScenarioModel(base);
  auto at5 = [&](double dt) {
    Scenario sc = base;
    sc.dt = dt;
    Simulator sim(sc, m);
    const int n = static_cast<int>(std::lround(5.0 / dt));
    for (int k = 0; k < n; ++k) sim.Step();
    return sim.state().e_p;
  };
  const Vector6 a = at5(1.0 / 30.0), b = at5(1.0 / 60.0);
  const double worst = (a - b).cwiseAbs().maxCoeff();
  return {worst < 1e-4, Fmt("experiment 1, t = 5 s: max |e_p(dt) - e_p(dt/2)| = %.2e", worst)};
}

}  // namespace
}  // namespace dmpvs

int main() {
  using namespace dmpvs;
  Criterion("interaction matrix oracle", 1, InteractionMatrixOracle);
  Criterion("dmp reproduction", 5, DmpReproduction);
  Criterion("dmp global convergence", 30, DmpGlobalConvergence);
  Criterion("ibvs local convergence", 30, IbvsLocalConvergence);
  Criterion("gain certificates", 30, GainCertificates);
  Criterion("experiment 1 structure", 30, Experiment1);
  Criterion("experiment 2 timing", 60, Experiment2);
  Experiment2At30Hz();
  Criterion("dwell time formula", 30, DwellFormula);
  Criterion("integrator self-convergence", 30, StepHalving);
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
