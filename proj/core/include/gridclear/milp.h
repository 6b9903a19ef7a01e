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

// Linear and mixed-binary programs: a model builder, a bounded revised
// primal simplex with row duals, and best-bound branch and bound.

#ifndef GRIDCLEAR_MILP_H_
#define GRIDCLEAR_MILP_H_

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridclear::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Sense { kMinimize, kMaximize };

struct Term {
  int variable = 0;
  double coefficient = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  bool is_binary = false;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // one entry per variable, sorted by index
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

class LinearModel {
 public:
  // Names must be unique; an empty name is replaced by "x<index>".
  // Throws Error(kValidation, "duplicate-variable") otherwise.
  int AddVariable(std::string name, double lower, double upper);
  int AddBinary(std::string name);
  // Terms on the same variable are summed; zero coefficients are dropped.
  int AddConstraint(std::string name, std::vector<Term> terms,
                    Relation relation, double rhs);

  void SetSense(Sense sense) { sense_ = sense; }
  void SetObjectiveCoefficient(int variable, double coefficient);
  void AddObjectiveCoefficient(int variable, double coefficient);
  void SetBounds(int variable, double lower, double upper);
  void SetRhs(int constraint, double rhs);

  Sense sense() const { return sense_; }
  int variable_count() const { return static_cast<int>(variables_.size()); }
  int constraint_count() const { return static_cast<int>(constraints_.size()); }
  int binary_count() const;
  const Variable& variable(int j) const { return variables_[j]; }
  const Constraint& constraint(int i) const { return constraints_[i]; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }

  // Index by name, or -1.
  int FindVariable(const std::string& name) const;
  int FindConstraint(const std::string& name) const;

  // Objective of a point, and the largest bound or row violation.
  double Evaluate(const std::vector<double>& x) const;
  double MaxViolation(const std::vector<double>& x) const;

  // Throws Error(kValidation) naming the rule: "binary-bounds",
  // "bounds-order", "nonfinite-rhs", "nonfinite-coefficient".
  void Validate() const;

 private:
  Sense sense_ = Sense::kMinimize;
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_;
  std::unordered_map<std::string, int> variable_index_;
  std::unordered_map<std::string, int> constraint_index_;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kTimeLimit,       // best incumbent (if any) and bound returned
  kIterationLimit,
};

const char* SolveStatusName(SolveStatus status);

struct LpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  bool has_solution = false;
  std::vector<double> primal;
  // duals[i] is the change of the objective per unit increase of rhs i, in
  // the model's own sense. For a MILP they come from the LP with the
  // binaries fixed at the incumbent.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective_value = 0.0;
  double best_bound = 0.0;  // equals objective_value for a plain LP
  long iterations = 0;
  int nodes = 0;  // branch nodes solved below the root relaxation
  double gap = 0.0;  // relative, MILP only
};

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  long max_iterations = 5'000'000;
  int refactor_interval = 50;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 1000;
  double time_limit_seconds = 0.0;  // 0 means none
};

// relax = true treats binaries as continuous in [0, 1]. With relax = false
// a model with unfixed binaries is rejected (Error kValidation,
// "binary-in-lp"); use SolveMilp for those.
LpSolution SolveLp(const LinearModel& model, bool relax = true,
                   const LpOptions& options = {});

struct MilpOptions {
  double gap = 1e-6;  // relative, (incumbent - bound) / max(1, |incumbent|)
  double time_limit_seconds = 60.0;
  double integrality_tolerance = 1e-6;
  bool diving = true;
  long node_limit = 10'000'000;
  LpOptions lp;
};

LpSolution SolveMilp(const LinearModel& model, const MilpOptions& options = {});

// CPLEX LP text format, for cross-checking with external solvers.
std::string ToLpFormat(const LinearModel& model);

}  // namespace gridclear::milp

#endif  // GRIDCLEAR_MILP_H_
