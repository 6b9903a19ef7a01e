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

#ifndef GRIDCLEAR_ERROR_H_
#define GRIDCLEAR_ERROR_H_

#include <stdexcept>
#include <string>

namespace gridclear {

// Broad failure classes. The command-line front end maps each class onto a
// distinct process exit code.
enum class ErrorKind {
  kParse,           // malformed case document or request body
  kValidation,      // well-formed input that breaks a model invariant
  kInfeasible,      // an optimization has no feasible point
  kNonConvergence,  // an iterative solver ran out of iterations
  kSingular,        // a factorization met a zero or missing pivot
  kDimension,       // vector/matrix sizes disagree
  kIo,              // filesystem or socket failure
};

const char* ErrorKindName(ErrorKind kind);

// All library failures are thrown as this type. `rule()` is a short stable
// identifier (for example "pmin-gt-pmax" or "bid-monotone") that clients can
// match on without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string rule, const std::string& message)
      : std::runtime_error(message), kind_(kind), rule_(std::move(rule)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& rule() const { return rule_; }

 private:
  ErrorKind kind_;
  std::string rule_;
};

}  // namespace gridclear

#endif  // GRIDCLEAR_ERROR_H_
