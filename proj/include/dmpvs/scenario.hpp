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

// Scenario files (JSON) and DMP model / demonstration files.

#ifndef DMPVS_SCENARIO_HPP_
#define DMPVS_SCENARIO_HPP_

#include <cstdint>
#include <string>

#include "dmpvs/dmp.hpp"
#include "dmpvs/sim.hpp"

namespace dmpvs {

inline constexpr const char* kScenarioSchema = "dmpvs.scenario/1";
inline constexpr const char* kModelSchema = "dmpvs.dmp_model/1";

// Rotation Rz(yaw) Ry(pitch) Rx(roll), angles in degrees.
UnitQuaternion RpyDegrees(const Vector3& rpy_deg);

// `base_dir` resolves a relative model path. Throws kConfig on any schema
// violation, including unknown keys.
Scenario ParseScenario(const std::string& json_text, const std::string& base_dir = ".");
Scenario LoadScenario(const std::string& path);

// Canonical re-serialization and its 64-bit FNV-1a hash.
std::string CanonicalJson(const std::string& json_text);
std::uint64_t Fnv1a(const std::string& bytes);

// Model referenced by the scenario; a zero-forcing model with default gains
// when none is referenced.
DmpModel LoadScenarioModel(const Scenario& scenario);

std::string SerializeModel(const DmpModel& model);
DmpModel ParseModel(const std::string& json_text);
void SaveModel(const DmpModel& model, const std::string& path);
DmpModel LoadModel(const std::string& path);

// CSV with header t,e_p_0..5,xi_0..5,xi_dot_0..5.
Demonstration ParseDemoCsv(const std::string& text);
Demonstration LoadDemoCsv(const std::string& path);

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace dmpvs

#endif  // DMPVS_SCENARIO_HPP_
