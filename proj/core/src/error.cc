// Copyright 2026 The gridclear Authors
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

#include "gridclear/error.h"

namespace gridclear {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kValidation:
      return "validation";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kNonConvergence:
      return "non-convergence";
    case ErrorKind::kSingular:
      return "singular";
    case ErrorKind::kDimension:
      return "dimension";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace gridclear
