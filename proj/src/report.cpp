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

#include "dmpvs/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace dmpvs {

namespace {

using nlohmann::json;

// Shortest round-trip representation; "nan" for the invisible sentinel.
void Put(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

json Num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json Vec(const VectorX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(Num(v(i)));
  return a;
}

}  // namespace

const char* Version() { return "0.1.0"; }

std::vector<std::string> CsvColumns(int features) {
  std::vector<std::string> c = {"t", "active"};
  for (const char* p : {"e_p_", "xi_", "acc_"}) {
    for (int i = 0; i < 6; ++i) c.push_back(p + std::to_string(i));
  }
  for (int i = 0; i < 2 * features; ++i) c.push_back("e_i_" + std::to_string(i));
  for (const char* n : {"visible", "V_active", "V_d", "V_v", "z_p", "z_o", "forcing_norm",
                        "switch_event", "N_sigma", "t_e", "t_c", "iota_active", "envelope",
                        "within_envelope"}) {
    c.push_back(n);
  }
  return c;
}

void WriteRunCsv(std::ostream& os, const std::vector<SimRecord>& records, int features) {
  std::string out = kCsvVersionLine;
  out += '\n';
  const auto cols = CsvColumns(features);
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const SimRecord& r : records) {
    Put(out, r.t);
    out += ',';
    out += ToString(r.active);
    for (const Vector6* v : {&r.e_p, &r.xi, &r.acc}) {
      for (int i = 0; i < 6; ++i) {
        out += ',';
        Put(out, (*v)(i));
      }
    }
    for (int i = 0; i < 2 * features; ++i) {
      out += ',';
      Put(out, i < r.e_i.size() ? r.e_i(i) : std::nan(""));
    }
    out += r.visible ? ",1," : ",0,";
    for (double v : {r.V_active, r.V_d, r.V_v, r.z_p, r.z_o, r.forcing_norm}) {
      Put(out, v);
      out += ',';
    }
    if (r.switch_event) {
      out += ToString(r.switch_event->from);
      out += '>';
      out += ToString(r.switch_event->to);
    }
    out += ',';
    out += std::to_string(r.n_sigma);
    out += ',';
    Put(out, r.t_e);
    out += ',';
    Put(out, r.t_c);
    out += r.iota_hi ? ",hi," : ",lo,";
    Put(out, r.envelope);
    out += r.within_envelope ? ",1\n" : ",0\n";
  }
  os << out;
}

std::string RunCsv(const std::vector<SimRecord>& records, int features) {
  std::ostringstream ss;
  WriteRunCsv(ss, records, features);
  return ss.str();
}

std::string SummaryJson(const RunSummary& s) {
  json sw = json::array();
  for (const SwitchEvent& e : s.switches) {
    sw.push_back({{"t", e.t}, {"from", ToString(e.from)}, {"to", ToString(e.to)},
                  {"N_sigma", e.n_sigma}, {"t_e", e.t_e}, {"t_c", e.t_c},
                  {"closes_cycle", e.compensation}});
  }
  json env = json::array();
  for (const EnvelopeSegment& g : s.envelopes) {
    env.push_back({{"t_start", g.t_start}, {"t_end", g.t_end}, {"samples", g.samples},
                   {"active", ToString(g.active)}, {"pass", g.pass},
                   {"inconclusive", g.inconclusive}, {"empirical_rate", Num(g.empirical_rate)},
                   {"worst_slack", Num(g.worst_slack)}});
  }
  json j = {
      {"scenario", s.scenario},
      {"ok", s.ok()},
      {"ticks", s.ticks},
      {"t_final", s.t_final},
      {"final_e_p", Vec(s.final_e_p)},
      {"final_xi", Vec(s.final_xi)},
      {"final_state_norm", Num(s.final_state_norm)},
      {"final_visible", s.final_visible},
      {"final_feature_error", Num(s.final_feature_error)},
      {"converged", s.converged},
      {"diverged", s.diverged},
      {"error", s.error},
      {"switch_count", s.switches.size()},
      {"switches", sw},
      {"tau_a", s.tau_a},
      {"dwell", {{"pass", s.dwell.pass}, {"margin", Num(s.dwell.margin)},
                 {"intervals", s.dwell.intervals}, {"worst_start", s.dwell.worst_start},
                 {"worst_end", s.dwell.worst_end}}},
      {"envelopes_pass", s.envelopes_pass},
      {"envelopes", env},
      {"quat_norm_drift", s.quat_norm_drift},
  };
  return j.dump(2) + "\n";
}

std::string ManifestJson(const RunManifest& m) {
  json j = {{"scenario_path", m.scenario_path}, {"model_path", m.model_path},
            {"output_dir", m.output_dir}, {"tool_version", m.tool_version},
            {"config_hash", m.config_hash}};
  return j.dump(2) + "\n";
}

}  // namespace dmpvs
