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

#include "clipgrain/errors.h"

namespace clipgrain {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid input";
    case ErrorCode::kDimensionMismatch:
      return "dimension mismatch";
    case ErrorCode::kOracleFailure:
      return "oracle failure";
    case ErrorCode::kConfig:
      return "config error";
    case ErrorCode::kContract:
      return "contract violation";
    case ErrorCode::kUndefinedMetric:
      return "undefined metric";
    case ErrorCode::kTrainingAborted:
      return "training aborted";
    case ErrorCode::kParse:
      return "parse error";
    case ErrorCode::kIo:
      return "io error";
  }
  return "unknown";
}

}  // namespace clipgrain
