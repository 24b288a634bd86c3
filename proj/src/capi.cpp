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

#include "dmpvs/dmpvs.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>

#include "dmpvs/errors.hpp"
#include "dmpvs/ibvs.hpp"
#include "dmpvs/lyapunov.hpp"
#include "dmpvs/report.hpp"
#include "dmpvs/scenario.hpp"
#include "dmpvs/sim.hpp"
#include "json.hpp"

struct dmpvs_scenario {
  dmpvs::Scenario scenario;
  std::string text;
  std::uint64_t hash = 0;
};

struct dmpvs_model {
  dmpvs::DmpModel model;
  std::optional<dmpvs_train_stats> stats;
  std::string path;
};

struct dmpvs_run {
  dmpvs::RunResult result;
  std::string csv;
  std::string summary;
  std::string scenario_text;
  std::string model_path;
  std::uint64_t hash = 0;
};

namespace {

using dmpvs::ErrorKind;

thread_local std::string g_last_error;

dmpvs_status StatusOf(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract: return DMPVS_ERR_CONTRACT;
    case ErrorKind::kDegenerate: return DMPVS_ERR_DEGENERATE;
    case ErrorKind::kIllPosed: return DMPVS_ERR_ILL_POSED;
    case ErrorKind::kConfig: return DMPVS_ERR_CONFIG;
    case ErrorKind::kIo: return DMPVS_ERR_IO;
    case ErrorKind::kDiverged: return DMPVS_ERR_DIVERGED;
  }
  return DMPVS_ERR_INTERNAL;
}

template <class F>
dmpvs_status Guard(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const dmpvs::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DMPVS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DMPVS_ERR_INTERNAL;
  }
}

dmpvs_status NullArg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return DMPVS_ERR_CONTRACT;
}

dmpvs::DmpGains ToGains(const dmpvs_dmp_gains* g) {
  dmpvs::DmpGains out;
  if (g) out = {g->alpha_v, g->beta_v, g->alpha_w, g->beta_w, g->tau, g->alpha_zp, g->alpha_zo};
  return out;
}

dmpvs::LearnOptions ToOptions(const dmpvs_learn_options* o) {
  dmpvs::LearnOptions out;
  if (o) out = {o->n_p, o->n_o, o->ridge};
  return out;
}

dmpvs::Pose ToPose(const dmpvs_pose& p, dmpvs::Frame to) {
  return dmpvs::Pose{dmpvs::RpyDegrees({p.rpy_deg[0], p.rpy_deg[1], p.rpy_deg[2]}),
                     {p.position[0], p.position[1], p.position[2]}, dmpvs::Frame::kWorld, to};
}

std::string Hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Fits the weights, then rolls the model out from the demo's first state to
// measure how well it reproduces the demonstration.
dmpvs_model* Train(const dmpvs::Demonstration& demo, const dmpvs::DmpGains& gains,
                   const dmpvs::LearnOptions& options) {
  demo.Validate();
  gains.Validate();
  dmpvs::LearnResult lr = dmpvs::LearnWeights(demo, gains, options);
  const auto& s = demo.samples;
  const double dt = s[1].t - s[0].t;
  const auto roll = dmpvs::Rollout(lr.model, s.front().e_p, s.front().xi,
                                   s.back().t - s.front().t, dt);
  dmpvs_train_stats st{};
  st.residual = lr.residual;
  double sq = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < s.size(); ++k) {
    const double tk = s[k].t - s.front().t;
    const size_t j = std::min(roll.size() - 1, static_cast<size_t>(std::lround(tk / dt)));
    sq += (roll[j].x.e_p.head<3>() - s[k].e_p.head<3>()).squaredNorm();
    ++n;
    if (k > 0) st.path_length += (s[k].e_p.head<3>() - s[k - 1].e_p.head<3>()).norm();
  }
  st.rmse = std::sqrt(sq / static_cast<double>(n));
  st.final_error = roll.back().x.e_p.norm();
  return new dmpvs_model{std::move(lr.model), st, {}};
}

nlohmann::json Finite(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

extern "C" {

const char* dmpvs_version(void) { return dmpvs::Version(); }

const char* dmpvs_last_error(void) { return g_last_error.c_str(); }

const char* dmpvs_status_name(dmpvs_status s) {
  switch (s) {
    case DMPVS_OK: return "ok";
    case DMPVS_ERR_CONFIG: return "config error";
    case DMPVS_ERR_CHECK: return "check failed";
    case DMPVS_ERR_DIVERGED: return "diverged";
    case DMPVS_ERR_CONTRACT: return "contract violation";
    case DMPVS_ERR_DEGENERATE: return "degenerate";
    case DMPVS_ERR_ILL_POSED: return "ill-posed";
    case DMPVS_ERR_IO: return "io error";
    case DMPVS_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void dmpvs_string_free(char* text) { delete[] text; }

dmpvs_status dmpvs_scenario_load(const char* path, dmpvs_scenario** out) {
  if (!path) return NullArg("path");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    const std::string text = dmpvs::ReadTextFile(path);
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    auto* h = new dmpvs_scenario{dmpvs::ParseScenario(text, dir.empty() ? "." : dir.string()),
                                 text, 0};
    h->hash = dmpvs::Fnv1a(dmpvs::CanonicalJson(text));
    *out = h;
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_scenario_parse(const char* json_text, const char* base_dir,
                                  dmpvs_scenario** out) {
  if (!json_text) return NullArg("json_text");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    auto* h = new dmpvs_scenario{dmpvs::ParseScenario(json_text, base_dir ? base_dir : "."),
                                 json_text, 0};
    h->hash = dmpvs::Fnv1a(dmpvs::CanonicalJson(json_text));
    *out = h;
    return DMPVS_OK;
  });
}

void dmpvs_scenario_free(dmpvs_scenario* s) { delete s; }

dmpvs_status dmpvs_scenario_config_hash(const dmpvs_scenario* s, char* buf, size_t size) {
  if (!s) return NullArg("scenario");
  if (!buf || size < 17) {
    g_last_error = "hash buffer must hold at least 17 bytes";
    return DMPVS_ERR_CONTRACT;
  }
  std::memcpy(buf, Hex(s->hash).c_str(), 17);
  return DMPVS_OK;
}

void dmpvs_dmp_gains_default(dmpvs_dmp_gains* g) {
  if (!g) return;
  const dmpvs::DmpGains d;
  *g = {d.alpha_v, d.beta_v, d.alpha_w, d.beta_w, d.tau, d.alpha_zp, d.alpha_zo};
}

void dmpvs_learn_options_default(dmpvs_learn_options* o) {
  if (!o) return;
  const dmpvs::LearnOptions d;
  *o = {d.n_p, d.n_o, d.ridge};
}

dmpvs_status dmpvs_model_train_min_jerk(const dmpvs_pose* start, const dmpvs_pose* goal,
                                        double duration, double rate_hz,
                                        const dmpvs_dmp_gains* gains,
                                        const dmpvs_learn_options* options, dmpvs_model** out) {
  if (!start || !goal) return NullArg("pose");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    if (!(duration > 0.0 && rate_hz > 0.0)) {
      dmpvs::Fail(ErrorKind::kConfig, "demonstration duration and rate must be positive");
    }
    const auto demo = dmpvs::MinJerkDemo(ToPose(*start, dmpvs::Frame::kCamera),
                                         ToPose(*goal, dmpvs::Frame::kDesired), duration,
                                         rate_hz);
    *out = Train(demo, ToGains(gains), ToOptions(options));
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_model_train_for_scenario(const dmpvs_scenario* s, double duration,
                                            double rate_hz, const dmpvs_dmp_gains* gains,
                                            const dmpvs_learn_options* options,
                                            dmpvs_model** out) {
  if (!s) return NullArg("scenario");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    if (!(duration > 0.0 && rate_hz > 0.0)) {
      dmpvs::Fail(ErrorKind::kConfig, "demonstration duration and rate must be positive");
    }
    const auto demo = dmpvs::MinJerkDemo(s->scenario.initial_pose, s->scenario.goal_pose,
                                         duration, rate_hz);
    *out = Train(demo, ToGains(gains), ToOptions(options));
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_model_train_csv(const char* csv_path, const dmpvs_dmp_gains* gains,
                                   const dmpvs_learn_options* options, dmpvs_model** out) {
  if (!csv_path) return NullArg("csv_path");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    *out = Train(dmpvs::LoadDemoCsv(csv_path), ToGains(gains), ToOptions(options));
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_model_train_stats(const dmpvs_model* m, dmpvs_train_stats* stats) {
  if (!m) return NullArg("model");
  if (!stats) return NullArg("stats");
  if (!m->stats) {
    g_last_error = "model was loaded, not trained";
    return DMPVS_ERR_CONTRACT;
  }
  *stats = *m->stats;
  return DMPVS_OK;
}

dmpvs_status dmpvs_model_save(const dmpvs_model* m, const char* path) {
  if (!m) return NullArg("model");
  if (!path) return NullArg("path");
  return Guard([&] {
    dmpvs::SaveModel(m->model, path);
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_model_load(const char* path, dmpvs_model** out) {
  if (!path) return NullArg("path");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    *out = new dmpvs_model{dmpvs::LoadModel(path), std::nullopt, path};
    return DMPVS_OK;
  });
}

void dmpvs_model_free(dmpvs_model* m) { delete m; }

dmpvs_status dmpvs_run_execute(const dmpvs_scenario* s, const dmpvs_model* m, dmpvs_run** out) {
  if (!s) return NullArg("scenario");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&] {
    const dmpvs::DmpModel model = m ? m->model : dmpvs::LoadScenarioModel(s->scenario);
    auto* h = new dmpvs_run;
    h->result = dmpvs::Run(s->scenario, model);
    h->csv = dmpvs::RunCsv(h->result.records, s->scenario.marker.count());
    h->summary = dmpvs::SummaryJson(h->result.summary);
    h->scenario_text = s->text;
    h->model_path = m ? m->path : s->scenario.dmp_model_path;
    h->hash = s->hash;
    *out = h;
    if (h->result.summary.diverged) {
      g_last_error = h->result.summary.error;
      return DMPVS_ERR_DIVERGED;
    }
    return DMPVS_OK;
  });
}

void dmpvs_run_free(dmpvs_run* r) { delete r; }

int dmpvs_run_ok(const dmpvs_run* r) { return r && r->result.summary.ok() ? 1 : 0; }

size_t dmpvs_run_switch_count(const dmpvs_run* r) {
  return r ? r->result.summary.switches.size() : 0;
}

size_t dmpvs_run_tick_count(const dmpvs_run* r) { return r ? r->result.records.size() : 0; }

const char* dmpvs_run_summary_json(const dmpvs_run* r) { return r ? r->summary.c_str() : ""; }

const char* dmpvs_run_csv(const dmpvs_run* r) { return r ? r->csv.c_str() : ""; }

dmpvs_status dmpvs_run_write(const dmpvs_run* r, const char* out_dir, const char* scenario_path) {
  if (!r) return NullArg("run");
  if (!out_dir) return NullArg("out_dir");
  return Guard([&] {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) dmpvs::Fail(ErrorKind::kIo, "cannot create output directory '" + dir.string() + "'");
    dmpvs::WriteTextFile((dir / "scenario.json").string(), r->scenario_text);
    dmpvs::WriteTextFile((dir / "run.csv").string(), r->csv);
    dmpvs::WriteTextFile((dir / "summary.json").string(), r->summary);
    dmpvs::RunManifest man{scenario_path ? scenario_path : "", r->model_path, dir.string(),
                           dmpvs::Version(), Hex(r->hash)};
    dmpvs::WriteTextFile((dir / "manifest.json").string(), dmpvs::ManifestJson(man));
    return DMPVS_OK;
  });
}

dmpvs_status dmpvs_check(const dmpvs_scenario* s, const dmpvs_model* m, char** report_json) {
  if (!s) return NullArg("scenario");
  if (!report_json) return NullArg("report_json");
  *report_json = nullptr;
  return Guard([&] {
    using nlohmann::json;
    const dmpvs::Scenario& sc = s->scenario;
    const dmpvs::DmpModel model = m ? m->model : dmpvs::LoadScenarioModel(sc);
    const dmpvs::ServoGeometry geom = sc.Geometry();
    const auto ref = dmpvs::IbvsReference::FromGoal(sc.marker, sc.goal_pose, sc.intrinsics);

    const auto bounds = dmpvs::EstimateRegionBounds(geom, ref, sc.region_radius, 2000, sc.seed);
    const auto cert_v = dmpvs::GainCertificate(sc.ibvs, bounds.k_lo, bounds.k_hi, bounds.l_bar);
    const auto cert_d = dmpvs::DmpGainCertificate(model.gains, sc.epsilon2);
    const auto mlf = dmpvs::ComputeMlfConstants(geom, ref, model.gains, sc.ibvs.epsilon1,
                                                sc.epsilon2, sc.region_radius, 2000, sc.seed);
    const dmpvs::SwitchConfig& sw = sc.switching;
    const double tau_cfg = dmpvs::DwellTimeFormula(sw.mu, sw.beta_lo, sw.eps);
    const double tau_est = dmpvs::DwellTimeFormula(mlf.mu, sw.beta_lo, sw.eps);
    const double tau_eff = dmpvs::DwellTime(sw);

    json ub = {{"value", nullptr}};
    if (cert_v.passes()) {
      // b = eta / beta_1 from the IBVS analysis, with the estimated chi_bar.
      const double chi = dmpvs::EstimateChiBar(geom, ref, sc.region_radius, 0.1, 2000, sc.seed);
      const double eps_bar = std::max(1.0, 0.5 * sc.ibvs.epsilon1);
      const double beta1 = cert_v.lambda_v * bounds.m_lo / 4.0;
      const double num = eps_bar * bounds.k_hi * sc.ibvs.kv * chi;
      const double eta = 2.0 * bounds.m_hi * num * num / (cert_v.lambda_v * bounds.m_lo);
      const double b = eta / beta1;
      ub = {{"value", b > 0.0 ? Finite(dmpvs::UltimateBound(mlf, sw.n0, b, sw.eps)) : json(0.0)},
            {"b", b}, {"beta_1", beta1}, {"eta", eta}, {"chi_bar", chi}};
    } else {
      ub["reason"] = "IBVS gain certificate fails (lambda_v <= 0), so b = eta/beta_1 is undefined";
    }

    char note[256];
    std::snprintf(note, sizeof note,
                  "ln(mu)/(beta_lo - eps) gives %.4f s for mu = %.4g; the experiment scenario "
                  "reuses the reference 13.82 s through tau_a_override",
                  tau_cfg, sw.mu);
    const bool ok = cert_d.passes() && std::isfinite(tau_eff);
    json j = {
        {"scenario", sc.name},
        {"ok", ok},
        {"ibvs",
         {{"kp", sc.ibvs.kp}, {"kv", sc.ibvs.kv}, {"epsilon1", sc.ibvs.epsilon1},
          {"region_radius", sc.region_radius},
          {"k_lo", bounds.k_lo}, {"k_hi", bounds.k_hi}, {"l_bar", bounds.l_bar},
          {"m_lo", bounds.m_lo}, {"m_hi", bounds.m_hi},
          {"loop_gain_positive", bounds.loop_gain_positive},
          {"k_star", cert_v.k_star},
          {"matrix", {{cert_v.matrix(0, 0), cert_v.matrix(0, 1)},
                      {cert_v.matrix(1, 0), cert_v.matrix(1, 1)}}},
          {"lambda_v", cert_v.lambda_v},
          {"certificate_passes", cert_v.passes()},
          {"flagged", !cert_v.passes()}}},
        {"dmp",
         {{"epsilon2", sc.epsilon2}, {"tau", model.gains.tau},
          {"alpha_v_eq_4beta_v", cert_d.alpha_v_ok}, {"alpha_w_eq_4beta_w", cert_d.alpha_w_ok},
          {"beta_v_ok", cert_d.beta_v_ok}, {"beta_w_ok", cert_d.beta_w_ok},
          {"lambda_d", cert_d.lambda_d}, {"certificate_passes", cert_d.passes()}}},
        {"mlf",
         {{"gamma_v_lo", mlf.gamma_v_lo}, {"gamma_v_hi", mlf.gamma_v_hi},
          {"gamma_d_lo", mlf.gamma_d_lo}, {"gamma_d_hi", mlf.gamma_d_hi},
          {"kappa_lo", mlf.kappa_lo}, {"kappa_hi", mlf.kappa_hi},
          {"mu_estimated", mlf.mu}, {"mu_configured", sw.mu}}},
        {"dwell",
         {{"beta_lo", sw.beta_lo}, {"eps", sw.eps}, {"N0", sw.n0}, {"Nbar", sw.nbar},
          {"tau_a_formula", tau_cfg}, {"tau_a_formula_estimated_mu", Finite(tau_est)},
          {"tau_a_override", sw.tau_a_override ? json(*sw.tau_a_override) : json(nullptr)},
          {"tau_a_effective", Finite(tau_eff)},
          {"note", note}}},
        {"ultimate_bound", ub},
    };
    const std::string text = j.dump(2) + "\n";
    *report_json = new char[text.size() + 1];
    std::memcpy(*report_json, text.c_str(), text.size() + 1);
    return ok ? DMPVS_OK : DMPVS_ERR_CHECK;
  });
}

}  // extern "C"
