// Copyright 2026 The Clipgrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLIPGRAIN_ERRORS_H_
#define CLIPGRAIN_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace clipgrain {

enum class ErrorCode {
  kInvalidInput,
  kDimensionMismatch,
  kOracleFailure,
  kConfig,
  kContract,
  kUndefinedMetric,
  kTrainingAborted,
  kParse,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// The single exception type thrown by the library. Callers that need to
// branch on the failure class inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clipgrain

#endif  // CLIPGRAIN_ERRORS_H_
