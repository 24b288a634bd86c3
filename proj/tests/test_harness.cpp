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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "dmpvs/errors.hpp"
#include "dmpvs/report.hpp"
#include "dmpvs/scenario.hpp"
#include "test_support.hpp"

namespace dmpvs {
namespace {

namespace fs = std::filesystem;

const char* kMinimal = R"({"schema": "dmpvs.scenario/1", "name": "mini",
  "initial_pose": {"position": [0.1, 0.0, 0.5], "rpy_deg": [180, 0, 10]},
  "timing": {"rate_hz": 50, "duration": 2}})";

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kContract;
}

TEST(RpyDegrees, ComposesZyx) {
  const UnitQuaternion q = RpyDegrees(Vector3(180.0, 0.0, 0.0));
  EXPECT_LT((q.matrix() - Eigen::Matrix3d(Eigen::AngleAxisd(testing::kPi, Vector3::UnitX())))
                .norm(),
            1e-12);
  const Matrix3 expect = (Eigen::AngleAxisd(0.3, Vector3::UnitZ()) *
                          Eigen::AngleAxisd(0.2, Vector3::UnitY()) *
                          Eigen::AngleAxisd(0.1, Vector3::UnitX()))
                             .toRotationMatrix();
  const double d = 180.0 / testing::kPi;
  EXPECT_LT((RpyDegrees(Vector3(0.1 * d, 0.2 * d, 0.3 * d)).matrix() - expect).norm(), 1e-12);
}

TEST(ParseScenario, MinimalDefaults) {
  const Scenario sc = ParseScenario(kMinimal);
  EXPECT_EQ(sc.name, "mini");
  EXPECT_DOUBLE_EQ(sc.dt, 0.02);
  EXPECT_EQ(sc.Ticks(), 100);
  EXPECT_EQ(sc.mode, ControllerMode::kSwitched);
  EXPECT_LT((sc.goal_pose.translation - Vector3(0, 0, 0.4)).norm(), 1e-15);
  EXPECT_EQ(sc.marker.count(), 4);
  EXPECT_TRUE(sc.dmp_model_path.empty());
}

TEST(ParseScenario, ExperimentFilesLoad) {
  for (const char* name : {"experiment1", "experiment2"}) {
    const Scenario sc = LoadScenario(testing::SourcePath(std::string("scenarios/") + name + ".json"));
    EXPECT_EQ(sc.name, name);
    EXPECT_TRUE(fs::exists(sc.dmp_model_path)) << sc.dmp_model_path;
  }
  const Scenario e2 = LoadScenario(testing::SourcePath("scenarios/experiment2.json"));
  ASSERT_EQ(e2.occlusions.size(), 3u);
  EXPECT_DOUBLE_EQ(e2.occlusions[1].start, 16.44);
  ASSERT_TRUE(e2.switching.tau_a_override.has_value());
  EXPECT_DOUBLE_EQ(*e2.switching.tau_a_override, 13.82);
}

TEST(ParseScenario, RejectsUnknownKeys) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "timming": {})");
  EXPECT_EQ(KindOf([&] { ParseScenario(text); }), ErrorKind::kConfig);
}

TEST(ParseScenario, RejectsWrongSchemaAndBadJson) {
  EXPECT_EQ(KindOf([] { ParseScenario(R"({"schema": "other/1"})"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { ParseScenario("{not json"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { LoadScenario("/nonexistent/scenario.json"); }), ErrorKind::kConfig);
}

TEST(ParseScenario, RejectsInvalidValues) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "switching": {"iota_lo": 0.9, "iota_hi": 0.5})");
  EXPECT_EQ(KindOf([&] { ParseScenario(text); }), ErrorKind::kConfig);
}

TEST(ConfigHash, IgnoresFormatting) {
  const std::string a = R"({"b": 1, "a": [1, 2]})";
  const std::string b = "{\n  \"a\": [1,2],\n  \"b\": 1\n}";
  EXPECT_EQ(CanonicalJson(a), CanonicalJson(b));
  EXPECT_EQ(Fnv1a(CanonicalJson(a)), Fnv1a(CanonicalJson(b)));
  EXPECT_NE(Fnv1a(CanonicalJson(a)), Fnv1a(CanonicalJson(R"({"b": 2, "a": [1, 2]})")));
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ull);
}

TEST(Model, RoundTripIsExact) {
  std::mt19937_64 rng(21);
  const DmpModel m = testing::RandomModel(rng, testing::DeskGains(), 3.0, 7);
  const std::string text = SerializeModel(m);
  const DmpModel back = ParseModel(text);
  EXPECT_EQ(back.theta_p, m.theta_p);
  EXPECT_EQ(back.theta_o, m.theta_o);
  EXPECT_EQ(back.basis_p.centers, m.basis_p.centers);
  EXPECT_EQ(back.basis_o.widths, m.basis_o.widths);
  EXPECT_DOUBLE_EQ(back.gains.tau, 2.5);
  EXPECT_EQ(SerializeModel(back), text);
}

TEST(Model, FileRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "dmpvs_test_harness";
  fs::create_directories(dir);
  const DmpModel m = testing::ZeroModel(DmpGains{}, 4);
  SaveModel(m, (dir / "m.json").string());
  EXPECT_EQ(LoadModel((dir / "m.json").string()).theta_p.rows(), 4);
  EXPECT_EQ(KindOf([] { ParseModel(R"({"schema": "dmpvs.dmp_model/1"})"); }), ErrorKind::kConfig);
  fs::remove_all(dir);
}

TEST(Model, ScenarioWithoutModelGetsZeroWeights) {
  const DmpModel m = LoadScenarioModel(ParseScenario(kMinimal));
  EXPECT_DOUBLE_EQ(m.ThetaBar(), 0.0);
}

TEST(DemoCsv, ParsesAndValidates) {
  std::ostringstream os;
  os << "# demo\nt";
  for (const char* b : {"e_p_", "xi_", "xi_dot_"})
    for (int i = 0; i < 6; ++i) os << ',' << b << i;
  os << '\n';
  for (int k = 0; k < 3; ++k) {
    os << 0.5 * k;
    for (int i = 0; i < 18; ++i) os << ',' << (i < 6 ? 0.1 * (2 - k) * (i == 0) : 0.0);
    os << '\n';
  }
  const Demonstration d = ParseDemoCsv(os.str());
  ASSERT_EQ(d.samples.size(), 3u);
  EXPECT_DOUBLE_EQ(d.samples[0].e_p(0), 0.2);
  EXPECT_DOUBLE_EQ(d.duration(), 1.0);
  EXPECT_EQ(KindOf([] { ParseDemoCsv("t,a\n1,2\n"); }), ErrorKind::kConfig);
}

TEST(RunCsv, ColumnsAndRows) {
  const auto cols = CsvColumns(4);
  EXPECT_EQ(cols.front(), "t");
  EXPECT_EQ(cols[1], "active");
  EXPECT_EQ(std::count(cols.begin(), cols.end(), "e_i_7"), 1);
  EXPECT_EQ(cols.back(), "within_envelope");

  Scenario sc = ParseScenario(kMinimal);
  sc.duration = 0.1;
  const RunResult r = dmpvs::Run(sc, LoadScenarioModel(sc));
  const std::string csv = RunCsv(r.records, 4);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvVersionLine);
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, static_cast<long>(cols.size()));
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, static_cast<long>(cols.size()));
  }
  EXPECT_EQ(rows, static_cast<int>(r.records.size()));
}

TEST(Summary, JsonHasKeyFields) {
  Scenario sc = ParseScenario(kMinimal);
  sc.duration = 0.1;
  const RunResult r = dmpvs::Run(sc, LoadScenarioModel(sc));
  const std::string j = SummaryJson(r.summary);
  for (const char* key : {"\"converged\"", "\"switches\"", "\"dwell\"", "\"envelopes\""}) {
    EXPECT_NE(j.find(key), std::string::npos) << key;
  }
}

TEST(WriteTextFile, AtomicReplace) {
  const fs::path dir = fs::temp_directory_path() / "dmpvs_test_write";
  fs::remove_all(dir);
  const std::string p = (dir / "sub" / "f.txt").string();
  WriteTextFile(p, "one");
  WriteTextFile(p, "two");
  EXPECT_EQ(ReadTextFile(p), "two");
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dmpvs
