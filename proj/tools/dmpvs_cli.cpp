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

// dmpvs command-line front end: train, run, check, sweep.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dmpvs/dmpvs.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheck = 3;
constexpr int kExitDiverged = 4;

int ExitFor(dmpvs_status s) {
  switch (s) {
    case DMPVS_OK: return kExitOk;
    case DMPVS_ERR_CHECK: return kExitCheck;
    case DMPVS_ERR_DIVERGED: return kExitDiverged;
    case DMPVS_ERR_CONFIG:
    case DMPVS_ERR_IO:
    case DMPVS_ERR_CONTRACT:
    case DMPVS_ERR_ILL_POSED:
    case DMPVS_ERR_DEGENERATE:
      return kExitConfig;
    default: return 1;
  }
}

int Report(dmpvs_status s, const char* what) {
  std::fprintf(stderr, "dmpvs: %s: %s: %s\n", what, dmpvs_status_name(s), dmpvs_last_error());
  return ExitFor(s);
}

struct ScenarioPtr {
  dmpvs_scenario* p = nullptr;
  ~ScenarioPtr() { dmpvs_scenario_free(p); }
};
struct ModelPtr {
  dmpvs_model* p = nullptr;
  ~ModelPtr() { dmpvs_model_free(p); }
};
struct RunPtr {
  dmpvs_run* p = nullptr;
  ~RunPtr() { dmpvs_run_free(p); }
};

bool ParsePose(const std::string& text, dmpvs_pose& pose) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      return false;
    }
  }
  if (v.size() != 6) return false;
  for (int i = 0; i < 3; ++i) {
    pose.position[i] = v[i];
    pose.rpy_deg[i] = v[3 + i];
  }
  return true;
}

// Output root: explicit flag, else $DMPVS_OUTPUT_DIR, else ./runs.
fs::path OutputRoot(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DMPVS_OUTPUT_DIR"); env && *env) return env;
  return "runs";
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string scenario, demo_csv, start, goal, out;
  double duration = 25.0, rate = 30.0;
  dmpvs_dmp_gains gains{};
  dmpvs_learn_options options{};
};

int CmdTrain(const TrainArgs& a) {
  ModelPtr model;
  dmpvs_status st;
  const int sources = !a.scenario.empty() + !a.demo_csv.empty() + !a.start.empty();
  if (sources != 1) {
    std::fprintf(stderr, "dmpvs: train: give exactly one of --scenario, --demo-csv or --start/--goal\n");
    return kExitConfig;
  }
  if (!a.demo_csv.empty()) {
    st = dmpvs_model_train_csv(a.demo_csv.c_str(), &a.gains, &a.options, &model.p);
  } else if (!a.scenario.empty()) {
    ScenarioPtr sc;
    st = dmpvs_scenario_load(a.scenario.c_str(), &sc.p);
    if (st != DMPVS_OK) return Report(st, "train");
    st = dmpvs_model_train_for_scenario(sc.p, a.duration, a.rate, &a.gains, &a.options, &model.p);
  } else {
    dmpvs_pose start{}, goal{};
    if (!ParsePose(a.start, start) || !ParsePose(a.goal, goal)) {
      std::fprintf(stderr, "dmpvs: train: poses are x,y,z,roll,pitch,yaw (meters, degrees)\n");
      return kExitConfig;
    }
    st = dmpvs_model_train_min_jerk(&start, &goal, a.duration, a.rate, &a.gains, &a.options,
                                    &model.p);
  }
  if (st != DMPVS_OK) return Report(st, "train");
  dmpvs_train_stats stats{};
  dmpvs_model_train_stats(model.p, &stats);
  st = dmpvs_model_save(model.p, a.out.c_str());
  if (st != DMPVS_OK) return Report(st, "train");
  const double rel = stats.path_length > 0.0 ? stats.rmse / stats.path_length : 0.0;
  std::printf("model: %s\n", a.out.c_str());
  std::printf("residual: %.6g\n", stats.residual);
  std::printf("reproduction_rmse: %.6g m (%.4f%% of path length %.6g m)\n", stats.rmse,
              100.0 * rel, stats.path_length);
  std::printf("final_pose_error: %.6g\n", stats.final_error);
  return kExitOk;
}

// ---- run ------------------------------------------------------------------

int CmdRun(const std::string& scenario_path, const std::string& model_path,
           const std::string& out_flag) {
  ScenarioPtr sc;
  dmpvs_status st = dmpvs_scenario_load(scenario_path.c_str(), &sc.p);
  if (st != DMPVS_OK) return Report(st, "run");
  ModelPtr model;
  if (!model_path.empty()) {
    st = dmpvs_model_load(model_path.c_str(), &model.p);
    if (st != DMPVS_OK) return Report(st, "run");
  }
  RunPtr run;
  const dmpvs_status run_st = dmpvs_run_execute(sc.p, model.p, &run.p);
  if (!run.p) return Report(run_st, "run");

  const json summary = json::parse(dmpvs_run_summary_json(run.p));
  fs::path out = OutputRoot(out_flag);
  if (out_flag.empty()) out /= summary.value("scenario", std::string("scenario"));
  st = dmpvs_run_write(run.p, out.string().c_str(), scenario_path.c_str());
  if (st != DMPVS_OK) return Report(st, "run");

  std::printf("output: %s\n", out.string().c_str());
  std::printf("switches: %zu\n", summary["switches"].size());
  for (const auto& e : summary["switches"]) {
    std::printf("  t=%.4f %s->%s N_sigma=%d t_e=%.4f t_c=%.4f\n", e["t"].get<double>(),
                e["from"].get<std::string>().c_str(), e["to"].get<std::string>().c_str(),
                e["N_sigma"].get<int>(), e["t_e"].get<double>(), e["t_c"].get<double>());
  }
  std::printf("converged: %s\n", summary["converged"].get<bool>() ? "yes" : "no");
  std::printf("dwell: %s (margin %s)\n", summary["dwell"]["pass"].get<bool>() ? "pass" : "fail",
              summary["dwell"]["margin"].dump().c_str());
  std::printf("envelopes: %s\n", summary["envelopes_pass"].get<bool>() ? "pass" : "fail");
  if (run_st == DMPVS_ERR_DIVERGED) return Report(run_st, "run");
  if (!dmpvs_run_ok(run.p)) {
    std::string failing;
    if (!summary["converged"].get<bool>()) failing += " convergence";
    if (!summary["dwell"]["pass"].get<bool>()) failing += " dwell";
    if (!summary["envelopes_pass"].get<bool>()) failing += " envelope";
    std::fprintf(stderr, "dmpvs: run: failing checks:%s\n", failing.c_str());
    return kExitCheck;
  }
  return kExitOk;
}

// ---- check ----------------------------------------------------------------

int CmdCheck(const std::string& scenario_path, const std::string& model_path, bool json_only) {
  ScenarioPtr sc;
  dmpvs_status st = dmpvs_scenario_load(scenario_path.c_str(), &sc.p);
  if (st != DMPVS_OK) return Report(st, "check");
  ModelPtr model;
  if (!model_path.empty()) {
    st = dmpvs_model_load(model_path.c_str(), &model.p);
    if (st != DMPVS_OK) return Report(st, "check");
  }
  char* text = nullptr;
  st = dmpvs_check(sc.p, model.p, &text);
  if (!text) return Report(st, "check");
  const std::unique_ptr<char[], void (*)(char*)> guard(text, dmpvs_string_free);
  if (json_only) {
    std::fputs(text, stdout);
  } else {
    const json r = json::parse(text);
    const auto& v = r["ibvs"];
    const auto& d = r["dmp"];
    const auto& m = r["mlf"];
    const auto& w = r["dwell"];
    std::printf("lambda_v: %.6g (k_lo=%.4g k_hi=%.4g l_bar=%.4g)%s\n",
                v["lambda_v"].get<double>(), v["k_lo"].get<double>(), v["k_hi"].get<double>(),
                v["l_bar"].get<double>(),
                v["certificate_passes"].get<bool>() ? "" : "  WARNING: IBVS certificate fails");
    std::printf("lambda_d: %.6g (alpha=4beta: %s/%s, beta bounds: %s/%s)\n",
                d["lambda_d"].get<double>(), d["alpha_v_eq_4beta_v"].get<bool>() ? "ok" : "FAIL",
                d["alpha_w_eq_4beta_w"].get<bool>() ? "ok" : "FAIL",
                d["beta_v_ok"].get<bool>() ? "ok" : "FAIL",
                d["beta_w_ok"].get<bool>() ? "ok" : "FAIL");
    std::printf("mu: configured %.6g, estimated %.6g\n", m["mu_configured"].get<double>(),
                m["mu_estimated"].get<double>());
    std::printf("tau_a: formula %.6g s, effective %s s\n", w["tau_a_formula"].get<double>(),
                w["tau_a_effective"].dump().c_str());
    std::printf("tau_a note: %s\n", w["note"].get<std::string>().c_str());
    std::printf("ultimate_bound: %s\n", r["ultimate_bound"]["value"].dump().c_str());
    if (r["ultimate_bound"].contains("reason")) {
      std::printf("  (%s)\n", r["ultimate_bound"]["reason"].get<std::string>().c_str());
    }
    std::printf("check: %s\n", r["ok"].get<bool>() ? "pass" : "FAIL");
  }
  return ExitFor(st);
}

// ---- sweep ----------------------------------------------------------------

// "a.b.c=1,2,3" -> path and values.
struct Axis {
  std::vector<std::string> path;
  std::vector<json> values;
};

bool ParseAxis(const std::string& text, Axis& axis) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  std::stringstream key(text.substr(0, eq));
  std::string part;
  while (std::getline(key, part, '.')) axis.path.push_back(part);
  std::stringstream vals(text.substr(eq + 1));
  while (std::getline(vals, part, ',')) {
    try {
      axis.values.push_back(json::parse(part));
    } catch (const json::exception&) {
      axis.values.push_back(part);  // bare string
    }
  }
  return !axis.values.empty();
}

int CmdSweep(const std::string& scenario_path, const std::vector<std::string>& sets,
             const std::string& out_flag, int jobs) {
  std::ifstream f(scenario_path);
  if (!f) {
    std::fprintf(stderr, "dmpvs: sweep: cannot open '%s'\n", scenario_path.c_str());
    return kExitConfig;
  }
  json base;
  try {
    base = json::parse(f);
  } catch (const json::exception& e) {
    std::fprintf(stderr, "dmpvs: sweep: %s\n", e.what());
    return kExitConfig;
  }
  std::vector<Axis> axes;
  for (const auto& s : sets) {
    Axis a;
    if (!ParseAxis(s, a)) {
      std::fprintf(stderr, "dmpvs: sweep: bad --set '%s' (want key.path=v1,v2)\n", s.c_str());
      return kExitConfig;
    }
    axes.push_back(a);
  }
  // Cartesian product.
  std::vector<json> variants{base};
  std::vector<std::string> labels{""};
  for (const Axis& a : axes) {
    std::vector<json> next;
    std::vector<std::string> next_labels;
    for (size_t i = 0; i < variants.size(); ++i) {
      for (const json& v : a.values) {
        json j = variants[i];
        json* node = &j;
        for (const auto& k : a.path) node = &(*node)[k];
        *node = v;
        next.push_back(j);
        std::string l = labels[i].empty() ? "" : labels[i] + "_";
        l += a.path.back() + "-" + (v.is_string() ? v.get<std::string>() : v.dump());
        next_labels.push_back(l);
      }
    }
    variants.swap(next);
    labels.swap(next_labels);
  }

  const fs::path root = OutputRoot(out_flag) / "sweep";
  const std::string base_dir = fs::path(scenario_path).parent_path().string();
  struct Row {
    std::string label;
    int exit = 0;
    std::string summary;
  };
  std::vector<Row> rows(variants.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < variants.size(); i = next++) {
      Row& row = rows[i];
      row.label = labels[i].empty() ? "base" : labels[i];
      dmpvs_scenario* sc = nullptr;
      const std::string text = variants[i].dump(2);
      if (dmpvs_scenario_parse(text.c_str(), base_dir.empty() ? "." : base_dir.c_str(), &sc) !=
          DMPVS_OK) {
        row.exit = kExitConfig;
        row.summary = dmpvs_last_error();
        continue;
      }
      dmpvs_run* run = nullptr;
      const dmpvs_status st = dmpvs_run_execute(sc, nullptr, &run);
      if (run) {
        dmpvs_run_write(run, (root / row.label).string().c_str(), scenario_path.c_str());
        row.summary = dmpvs_run_summary_json(run);
        row.exit = st == DMPVS_ERR_DIVERGED ? kExitDiverged
                                            : (dmpvs_run_ok(run) ? kExitOk : kExitCheck);
      } else {
        row.exit = ExitFor(st);
        row.summary = dmpvs_last_error();
      }
      dmpvs_run_free(run);
      dmpvs_scenario_free(sc);
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(variants.size())));
  std::vector<std::thread> pool;
  for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream table;
  table << "label,exit,switches,converged,dwell_pass,envelopes_pass,final_state_norm\n";
  int worst = kExitOk;
  for (const Row& r : rows) {
    table << r.label << ',' << r.exit;
    try {
      const json s = json::parse(r.summary);
      table << ',' << s["switches"].size() << ',' << s["converged"] << ','
            << s["dwell"]["pass"] << ',' << s["envelopes_pass"] << ','
            << s["final_state_norm"];
    } catch (const json::exception&) {
      table << ",,,,,";
    }
    table << '\n';
    worst = std::max(worst, r.exit);
  }
  fs::create_directories(root);
  std::ofstream(root / "sweep.csv") << table.str();
  std::fputs(table.str().c_str(), stdout);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched DMP / IBVS visual servoing simulator"};
  app.set_version_flag("--version", std::string(dmpvs_version()));
  app.require_subcommand(1);

  TrainArgs ta;
  dmpvs_dmp_gains_default(&ta.gains);
  dmpvs_learn_options_default(&ta.options);
  auto* train = app.add_subcommand("train", "Fit DMP weights to a demonstration");
  train->add_option("--scenario", ta.scenario, "Min-jerk demo between the scenario's poses");
  train->add_option("--demo-csv", ta.demo_csv, "Recorded demonstration CSV");
  train->add_option("--start", ta.start, "Start camera pose x,y,z,roll,pitch,yaw");
  auto* goal_opt = train->add_option("--goal", ta.goal, "Goal camera pose x,y,z,roll,pitch,yaw");
  train->get_option("--start")->needs(goal_opt);
  train->add_option("--duration", ta.duration, "Min-jerk demo duration [s]");
  train->add_option("--rate", ta.rate, "Demo sample rate [Hz]");
  train->add_option("--tau", ta.gains.tau, "Temporal scaling tau");
  train->add_option("--alpha-v", ta.gains.alpha_v);
  train->add_option("--beta-v", ta.gains.beta_v);
  train->add_option("--alpha-w", ta.gains.alpha_w);
  train->add_option("--beta-w", ta.gains.beta_w);
  train->add_option("--alpha-zp", ta.gains.alpha_zp);
  train->add_option("--alpha-zo", ta.gains.alpha_zo);
  train->add_option("--np", ta.options.n_p, "Position basis functions");
  train->add_option("--no", ta.options.n_o, "Orientation basis functions");
  train->add_option("--ridge", ta.options.ridge, "Ridge regularization weight");
  train->add_option("-o,--out", ta.out, "Model output path")->required();

  std::string run_scenario, run_model, run_out;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV + summary");
  run->add_option("scenario", run_scenario, "Scenario JSON")->required();
  run->add_option("--model", run_model, "Override the scenario's DMP model");
  run->add_option("-o,--out", run_out, "Output directory (default $DMPVS_OUTPUT_DIR/<name>)");

  std::string chk_scenario, chk_model;
  bool chk_json = false;
  auto* check = app.add_subcommand("check", "Gain certificates, Lyapunov constants, dwell time");
  check->add_option("scenario", chk_scenario, "Scenario JSON")->required();
  check->add_option("--model", chk_model, "Override the scenario's DMP model");
  check->add_flag("--json", chk_json, "Print the raw JSON report");

  std::string sw_scenario, sw_out;
  std::vector<std::string> sw_sets;
  int sw_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid in parallel");
  sweep->add_option("scenario", sw_scenario, "Base scenario JSON")->required();
  sweep->add_option("--set", sw_sets, "Grid axis key.path=v1,v2,... (repeatable)");
  sweep->add_option("-o,--out", sw_out, "Output root (default $DMPVS_OUTPUT_DIR)");
  sweep->add_option("-j,--jobs", sw_jobs, "Parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (*train) return CmdTrain(ta);
  if (*run) return CmdRun(run_scenario, run_model, run_out);
  if (*check) return CmdCheck(chk_scenario, chk_model, chk_json);
  if (*sweep) return CmdSweep(sw_scenario, sw_sets, sw_out, sw_jobs);
  return kExitConfig;
}
