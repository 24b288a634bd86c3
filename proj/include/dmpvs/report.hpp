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

// Run CSV and summary serialization.

#ifndef DMPVS_REPORT_HPP_
#define DMPVS_REPORT_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "dmpvs/sim.hpp"

namespace dmpvs {

inline constexpr const char* kCsvVersionLine = "# dmpvs run csv v1";

std::vector<std::string> CsvColumns(int features);
void WriteRunCsv(std::ostream& os, const std::vector<SimRecord>& records, int features);
std::string RunCsv(const std::vector<SimRecord>& records, int features);

std::string SummaryJson(const RunSummary& summary);

struct RunManifest {
  std::string scenario_path;
  std::string model_path;
  std::string output_dir;
  std::string tool_version;
  std::string config_hash;  // hex
};

std::string ManifestJson(const RunManifest& manifest);

const char* Version();

}  // namespace dmpvs

#endif  // DMPVS_REPORT_HPP_
