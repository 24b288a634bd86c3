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

#ifndef DMPVS_SUBSYSTEM_HPP_
#define DMPVS_SUBSYSTEM_HPP_

namespace dmpvs {

enum class Subsystem { kIbvs, kDmp };

// "v" / "d", matching the switching-signal labels.
inline const char* ToString(Subsystem s) { return s == Subsystem::kIbvs ? "v" : "d"; }

}  // namespace dmpvs

#endif  // DMPVS_SUBSYSTEM_HPP_
