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

#include "dmpvs/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dmpvs/errors.hpp"
#include "json.hpp"

namespace dmpvs {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kDeg = 3.14159265358979323846 / 180.0;

void Keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Fail(ErrorKind::kConfig, where + ": unknown key '" + key + "'");
  }
}

double Num(const json& j, const std::string& where) {
  if (!j.is_number()) Fail(ErrorKind::kConfig, where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) Fail(ErrorKind::kConfig, where + ": must be finite");
  return v;
}

template <class T>
void Opt(const json& j, const char* key, const std::string& where, T& out);

template <>
void Opt(const json& j, const char* key, const std::string& where, double& out) {
  if (j.contains(key)) out = Num(j.at(key), where + "." + key);
}

template <>
void Opt(const json& j, const char* key, const std::string& where, bool& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_boolean()) Fail(ErrorKind::kConfig, where + "." + key + ": expected a boolean");
  out = j.at(key).get<bool>();
}

template <>
void Opt(const json& j, const char* key, const std::string& where, int& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) {
    Fail(ErrorKind::kConfig, where + "." + key + ": expected an integer");
  }
  out = j.at(key).get<int>();
}

template <>
void Opt(const json& j, const char* key, const std::string& where, std::string& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) Fail(ErrorKind::kConfig, where + "." + key + ": expected a string");
  out = j.at(key).get<std::string>();
}

Vector3 Vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) Fail(ErrorKind::kConfig, where + ": expected 3 numbers");
  return Vector3(Num(j[0], where), Num(j[1], where), Num(j[2], where));
}

Pose ParsePose(const json& j, const std::string& where, Frame to) {
  Keys(j, where, {"position", "rpy_deg"});
  if (!j.contains("position") || !j.contains("rpy_deg")) {
    Fail(ErrorKind::kConfig, where + ": needs position and rpy_deg");
  }
  return Pose{RpyDegrees(Vec3(j.at("rpy_deg"), where + ".rpy_deg")),
              Vec3(j.at("position"), where + ".position"), Frame::kWorld, to};
}

VectorX Threshold(const json& j, const std::string& where, int size) {
  if (j.is_number()) return VectorX::Constant(size, Num(j, where));
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    Fail(ErrorKind::kConfig, where + ": expected a number or " + std::to_string(size) + " numbers");
  }
  VectorX v(size);
  for (int i = 0; i < size; ++i) v(i) = Num(j[i], where);
  return v;
}

json ParseJson(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

UnitQuaternion RpyDegrees(const Vector3& rpy) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(rpy.z() * kDeg, Vector3::UnitZ()) *
                               Eigen::AngleAxisd(rpy.y() * kDeg, Vector3::UnitY()) *
                               Eigen::AngleAxisd(rpy.x() * kDeg, Vector3::UnitX());
  return UnitQuaternion(q);
}

namespace {

Scenario ParseScenarioImpl(const std::string& text, const std::string& base_dir) {
  const json j = ParseJson(text);
  Keys(j, "scenario", {"schema", "name", "camera", "marker", "initial_pose", "goal_pose",
                       "initial_twist", "timing", "occlusions", "controller", "ibvs", "dmp",
                       "switching", "integration", "checks", "seed"});
  if (!j.contains("schema") || j.at("schema") != kScenarioSchema) {
    Fail(ErrorKind::kConfig, std::string("scenario: schema must be '") + kScenarioSchema + "'");
  }
  Scenario sc;
  Opt(j, "name", "scenario", sc.name);

  if (j.contains("camera")) {
    const json& c = j.at("camera");
    Keys(c, "camera", {"fx", "fy", "cx", "cy", "width", "height"});
    Opt(c, "fx", "camera", sc.intrinsics.fx);
    Opt(c, "fy", "camera", sc.intrinsics.fy);
    Opt(c, "cx", "camera", sc.intrinsics.cx);
    Opt(c, "cy", "camera", sc.intrinsics.cy);
    Opt(c, "width", "camera", sc.intrinsics.width);
    Opt(c, "height", "camera", sc.intrinsics.height);
  }
  if (j.contains("marker")) {
    const json& m = j.at("marker");
    Keys(m, "marker", {"square_size", "corners"});
    if (m.contains("square_size") && m.contains("corners")) {
      Fail(ErrorKind::kConfig, "marker: give either square_size or corners");
    }
    if (m.contains("corners")) {
      const json& cs = m.at("corners");
      if (!cs.is_array()) Fail(ErrorKind::kConfig, "marker.corners: expected an array");
      sc.marker.corners.clear();
      for (const json& p : cs) sc.marker.corners.push_back(Vec3(p, "marker.corners"));
    } else {
      double size = 0.1;
      Opt(m, "square_size", "marker", size);
      if (!(size > 0.0)) Fail(ErrorKind::kConfig, "marker.square_size must be positive");
      sc.marker = Marker::Square(size);
    }
  }
  if (!j.contains("initial_pose")) Fail(ErrorKind::kConfig, "scenario: initial_pose is required");
  sc.initial_pose = ParsePose(j.at("initial_pose"), "initial_pose", Frame::kCamera);
  if (j.contains("goal_pose")) {
    sc.goal_pose = ParsePose(j.at("goal_pose"), "goal_pose", Frame::kDesired);
  } else {
    sc.goal_pose = Pose{RpyDegrees(Vector3(180.0, 0.0, 0.0)), Vector3(0.0, 0.0, 0.4),
                        Frame::kWorld, Frame::kDesired};
  }
  if (j.contains("initial_twist")) {
    const json& tw = j.at("initial_twist");
    Keys(tw, "initial_twist", {"linear", "angular_deg_s"});
    if (tw.contains("linear")) sc.initial_twist.linear = Vec3(tw.at("linear"), "initial_twist.linear");
    if (tw.contains("angular_deg_s")) {
      sc.initial_twist.angular = kDeg * Vec3(tw.at("angular_deg_s"), "initial_twist.angular_deg_s");
    }
  }
  if (!j.contains("timing")) Fail(ErrorKind::kConfig, "scenario: timing is required");
  {
    const json& t = j.at("timing");
    Keys(t, "timing", {"rate_hz", "dt", "duration"});
    if (t.contains("rate_hz") && t.contains("dt")) {
      Fail(ErrorKind::kConfig, "timing: give either rate_hz or dt");
    }
    if (t.contains("rate_hz")) {
      const double hz = Num(t.at("rate_hz"), "timing.rate_hz");
      if (!(hz > 0.0)) Fail(ErrorKind::kConfig, "timing.rate_hz must be positive");
      sc.dt = 1.0 / hz;
    }
    Opt(t, "dt", "timing", sc.dt);
    if (!t.contains("duration")) Fail(ErrorKind::kConfig, "timing.duration is required");
    sc.duration = Num(t.at("duration"), "timing.duration");
  }
  if (j.contains("occlusions")) {
    const json& os = j.at("occlusions");
    if (!os.is_array()) Fail(ErrorKind::kConfig, "occlusions: expected an array of [start, end]");
    for (const json& o : os) {
      if (!o.is_array() || o.size() != 2) {
        Fail(ErrorKind::kConfig, "occlusions: each entry must be [start, end]");
      }
      sc.occlusions.push_back({Num(o[0], "occlusions"), Num(o[1], "occlusions")});
    }
  }
  if (j.contains("controller")) {
    std::string mode;
    Opt(j, "controller", "scenario", mode);
    if (mode == "switched") sc.mode = ControllerMode::kSwitched;
    else if (mode == "dmp_only") sc.mode = ControllerMode::kDmpOnly;
    else if (mode == "ibvs_only") sc.mode = ControllerMode::kIbvsOnly;
    else if (mode == "none") sc.mode = ControllerMode::kNone;
    else Fail(ErrorKind::kConfig, "controller: expected switched, dmp_only, ibvs_only or none");
  }
  if (j.contains("ibvs")) {
    const json& b = j.at("ibvs");
    Keys(b, "ibvs", {"kp", "kv", "epsilon1", "edot_estimator"});
    Opt(b, "kp", "ibvs", sc.ibvs.kp);
    Opt(b, "kv", "ibvs", sc.ibvs.kv);
    Opt(b, "epsilon1", "ibvs", sc.ibvs.epsilon1);
    std::string est = "model";
    Opt(b, "edot_estimator", "ibvs", est);
    if (est == "model") sc.edot = EdotEstimator::kModel;
    else if (est == "finite_difference") sc.edot = EdotEstimator::kFiniteDifference;
    else Fail(ErrorKind::kConfig, "ibvs.edot_estimator: expected model or finite_difference");
  }
  if (j.contains("dmp")) {
    const json& d = j.at("dmp");
    Keys(d, "dmp", {"model", "epsilon2", "reset_canonical_on_activation"});
    Opt(d, "model", "dmp", sc.dmp_model_path);
    Opt(d, "epsilon2", "dmp", sc.epsilon2);
    Opt(d, "reset_canonical_on_activation", "dmp", sc.reset_canonical_on_activation);
    if (!sc.dmp_model_path.empty() && fs::path(sc.dmp_model_path).is_relative()) {
      sc.dmp_model_path = (fs::path(base_dir) / sc.dmp_model_path).lexically_normal().string();
    }
  }
  const int n2 = 2 * sc.marker.count();
  sc.switching = SwitchConfig::Uniform(sc.marker.count(), 0.42, 0.85);
  if (j.contains("switching")) {
    const json& s = j.at("switching");
    Keys(s, "switching", {"iota_lo", "iota_hi", "mu", "beta_lo", "eps", "N0", "Nbar",
                          "tau_a_override", "compensation"});
    if (s.contains("iota_lo")) sc.switching.iota_lo = Threshold(s.at("iota_lo"), "switching.iota_lo", n2);
    if (s.contains("iota_hi")) sc.switching.iota_hi = Threshold(s.at("iota_hi"), "switching.iota_hi", n2);
    Opt(s, "mu", "switching", sc.switching.mu);
    Opt(s, "beta_lo", "switching", sc.switching.beta_lo);
    Opt(s, "eps", "switching", sc.switching.eps);
    Opt(s, "N0", "switching", sc.switching.n0);
    Opt(s, "Nbar", "switching", sc.switching.nbar);
    Opt(s, "compensation", "switching", sc.switching.compensation);
    if (s.contains("tau_a_override") && !s.at("tau_a_override").is_null()) {
      sc.switching.tau_a_override = Num(s.at("tau_a_override"), "switching.tau_a_override");
    }
  }
  if (j.contains("integration")) {
    const json& in = j.at("integration");
    Keys(in, "integration", {"accel_hold"});
    std::string hold = "continuous";
    Opt(in, "accel_hold", "integration", hold);
    if (hold == "continuous") sc.accel_hold = AccelHold::kContinuous;
    else if (hold == "zero_order") sc.accel_hold = AccelHold::kZeroOrder;
    else Fail(ErrorKind::kConfig, "integration.accel_hold: expected continuous or zero_order");
  }
  if (j.contains("checks")) {
    const json& c = j.at("checks");
    Keys(c, "checks", {"convergence_tolerance", "region_radius"});
    Opt(c, "convergence_tolerance", "checks", sc.convergence_tolerance);
    Opt(c, "region_radius", "checks", sc.region_radius);
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) Fail(ErrorKind::kConfig, "seed: expected a non-negative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  sc.Validate();
  return sc;
}

}  // namespace

Scenario ParseScenario(const std::string& text, const std::string& base_dir) {
  try {
    return ParseScenarioImpl(text, base_dir);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("scenario: ") + e.what());
  }
}

Scenario LoadScenario(const std::string& path) {
  const std::string text = ReadTextFile(path);
  return ParseScenario(text, fs::path(path).parent_path().string().empty()
                                 ? "."
                                 : fs::path(path).parent_path().string());
}

std::string CanonicalJson(const std::string& text) { return ParseJson(text).dump(); }

std::uint64_t Fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

DmpModel LoadScenarioModel(const Scenario& sc) {
  if (!sc.dmp_model_path.empty()) return LoadModel(sc.dmp_model_path);
  DmpModel m;
  m.basis_p = BuildBasis(2, m.gains.alpha_zp);
  m.basis_o = BuildBasis(2, m.gains.alpha_zo);
  m.theta_p = MatrixX::Zero(2, 3);
  m.theta_o = MatrixX::Zero(2, 3);
  return m;
}

namespace {

json MatrixJson(const MatrixX& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(r);
  }
  return rows;
}

MatrixX JsonMatrix(const json& j, int cols, const std::string& where) {
  if (!j.is_array()) Fail(ErrorKind::kConfig, where + ": expected rows");
  MatrixX m(static_cast<Eigen::Index>(j.size()), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) {
      Fail(ErrorKind::kConfig, where + ": each row needs " + std::to_string(cols) + " numbers");
    }
    for (int k = 0; k < cols; ++k) m(i, k) = Num(j[i][k], where);
  }
  return m;
}

json BasisJson(const BasisSet& b) {
  return json{{"centers", MatrixJson(b.centers)}, {"widths", MatrixJson(b.widths)}};
}

BasisSet JsonBasis(const json& j, const std::string& where) {
  Keys(j, where, {"centers", "widths"});
  BasisSet b;
  b.centers = JsonMatrix(j.at("centers"), 1, where + ".centers");
  b.widths = JsonMatrix(j.at("widths"), 1, where + ".widths");
  if (b.centers.size() != b.widths.size() || b.centers.size() < 2) {
    Fail(ErrorKind::kConfig, where + ": centers and widths must match, at least 2");
  }
  return b;
}

}  // namespace

std::string SerializeModel(const DmpModel& m) {
  const DmpGains& g = m.gains;
  json j = {{"schema", kModelSchema},
            {"gains", {{"alpha_v", g.alpha_v}, {"beta_v", g.beta_v}, {"alpha_w", g.alpha_w},
                       {"beta_w", g.beta_w}, {"tau", g.tau}, {"alpha_zp", g.alpha_zp},
                       {"alpha_zo", g.alpha_zo}}},
            {"basis_p", BasisJson(m.basis_p)},
            {"basis_o", BasisJson(m.basis_o)},
            {"theta_p", MatrixJson(m.theta_p)},
            {"theta_o", MatrixJson(m.theta_o)}};
  return j.dump(1) + "\n";
}

namespace {

DmpModel ParseModelImpl(const std::string& text) {
  const json j = ParseJson(text);
  Keys(j, "model", {"schema", "gains", "basis_p", "basis_o", "theta_p", "theta_o"});
  if (!j.contains("schema") || j.at("schema") != kModelSchema) {
    Fail(ErrorKind::kConfig, std::string("model: schema must be '") + kModelSchema + "'");
  }
  for (const char* k : {"gains", "basis_p", "basis_o", "theta_p", "theta_o"}) {
    if (!j.contains(k)) Fail(ErrorKind::kConfig, std::string("model: missing ") + k);
  }
  DmpModel m;
  const json& g = j.at("gains");
  Keys(g, "model.gains", {"alpha_v", "beta_v", "alpha_w", "beta_w", "tau", "alpha_zp", "alpha_zo"});
  Opt(g, "alpha_v", "model.gains", m.gains.alpha_v);
  Opt(g, "beta_v", "model.gains", m.gains.beta_v);
  Opt(g, "alpha_w", "model.gains", m.gains.alpha_w);
  Opt(g, "beta_w", "model.gains", m.gains.beta_w);
  Opt(g, "tau", "model.gains", m.gains.tau);
  Opt(g, "alpha_zp", "model.gains", m.gains.alpha_zp);
  Opt(g, "alpha_zo", "model.gains", m.gains.alpha_zo);
  try {
    m.gains.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, std::string("model.gains: ") + e.what());
  }
  m.basis_p = JsonBasis(j.at("basis_p"), "model.basis_p");
  m.basis_o = JsonBasis(j.at("basis_o"), "model.basis_o");
  m.theta_p = JsonMatrix(j.at("theta_p"), 3, "model.theta_p");
  m.theta_o = JsonMatrix(j.at("theta_o"), 3, "model.theta_o");
  if (m.theta_p.rows() != m.basis_p.count() || m.theta_o.rows() != m.basis_o.count()) {
    Fail(ErrorKind::kConfig, "model: weight rows must match basis counts");
  }
  return m;
}

}  // namespace

DmpModel ParseModel(const std::string& text) {
  try {
    return ParseModelImpl(text);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("model: ") + e.what());
  }
}

void SaveModel(const DmpModel& m, const std::string& path) { WriteTextFile(path, SerializeModel(m)); }

DmpModel LoadModel(const std::string& path) { return ParseModel(ReadTextFile(path)); }

Demonstration ParseDemoCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  Demonstration demo;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      if (header.size() != 19 || header[0] != "t") {
        Fail(ErrorKind::kConfig, "demo csv: header must be t,e_p_0..5,xi_0..5,xi_dot_0..5");
      }
      continue;
    }
    if (cells.size() != 19) {
      Fail(ErrorKind::kConfig, "demo csv line " + std::to_string(lineno) + ": expected 19 values");
    }
    double v[19];
    for (int k = 0; k < 19; ++k) {
      try {
        size_t used = 0;
        v[k] = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument(cells[k]);
      } catch (const std::exception&) {
        Fail(ErrorKind::kConfig, "demo csv line " + std::to_string(lineno) + ": bad number");
      }
    }
    DemoSample s;
    s.t = v[0];
    for (int k = 0; k < 6; ++k) {
      s.e_p(k) = v[1 + k];
      s.xi(k) = v[7 + k];
      s.xi_dot(k) = v[13 + k];
    }
    demo.samples.push_back(s);
  }
  demo.Validate();
  return demo;
}

Demonstration LoadDemoCsv(const std::string& path) { return ParseDemoCsv(ReadTextFile(path)); }

std::string ReadTextFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) Fail(ErrorKind::kConfig, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  // Write to a sibling and rename so a failure never leaves a partial file.
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) Fail(ErrorKind::kIo, "cannot write '" + path + "'");
    f << text;
    if (!f) Fail(ErrorKind::kIo, "write failed for '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot move output into '" + path + "'");
}

}  // namespace dmpvs
