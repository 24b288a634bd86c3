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

#ifndef DMPVS_ERRORS_HPP_
#define DMPVS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dmpvs {

enum class ErrorKind {
  kContract,     // precondition / frame mismatch
  kDegenerate,   // rank-deficient interaction matrix
  kIllPosed,     // rank-deficient learning regressor
  kConfig,       // scenario / model / CLI input
  kIo,
  kDiverged,     // non-finite simulation state
};

const char* ToString(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool cond, const std::string& what) {
  if (!cond) Fail(ErrorKind::kContract, what);
}

}  // namespace dmpvs

#endif  // DMPVS_ERRORS_HPP_
