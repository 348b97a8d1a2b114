// Copyright 2026 The GRAIL Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grail {

// Stable numeric values; mirrored by grail_status in include/grail/grail.h.
enum class ErrorCode : int {
  kSplitTooSmall = 10,
  kInvalidFlip = 11,
  kInvalidGraph = 12,
  kShapeMismatch = 20,
  kNonScalarLoss = 21,
  kAsymmetricAdjacency = 22,
  kNonFinite = 23,
  kDegenerateAugmentation = 30,
  kCentralityDiverged = 31,
  kNeedNegatives = 40,
  kTrainingDiverged = 41,
  kEmptySelection = 50,
  kBudgetInfeasible = 60,
  kUndefinedDrop = 70,
  kNoRecords = 71,
  kIncompleteCoverage = 72,
  kParseError = 80,
  kValidationError = 81,
  kConfigError = 82,
  kIoError = 83,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code name prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace grail
