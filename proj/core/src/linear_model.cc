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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "gridclear/error.h"
#include "gridclear/milp.h"

namespace gridclear::milp {

const char* SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

int LinearModel::AddVariable(std::string name, double lower, double upper) {
  const int j = variable_count();
  if (name.empty()) name = "x" + std::to_string(j);
  if (!variable_index_.emplace(name, j).second) {
    throw Error(ErrorKind::kValidation, "duplicate-variable",
                "variable name '" + name + "' already used");
  }
  variables_.push_back({std::move(name), lower, upper, false});
  objective_.push_back(0.0);
  return j;
}

int LinearModel::AddBinary(std::string name) {
  const int j = AddVariable(std::move(name), 0.0, 1.0);
  variables_[j].is_binary = true;
  return j;
}

int LinearModel::AddConstraint(std::string name, std::vector<Term> terms,
                               Relation relation, double rhs) {
  const int i = constraint_count();
  if (name.empty()) name = "c" + std::to_string(i);
  for (const Term& t : terms) {
    if (t.variable < 0 || t.variable >= variable_count()) {
      throw Error(ErrorKind::kValidation, "unknown-variable",
                  "constraint '" + name + "' references variable " +
                      std::to_string(t.variable));
    }
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return a.variable < b.variable;
  });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().variable == t.variable) {
      merged.back().coefficient += t.coefficient;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coefficient == 0.0; });
  if (!constraint_index_.emplace(name, i).second) {
    throw Error(ErrorKind::kValidation, "duplicate-constraint",
                "constraint name '" + name + "' already used");
  }
  constraints_.push_back({std::move(name), std::move(merged), relation, rhs});
  return i;
}

void LinearModel::SetObjectiveCoefficient(int variable, double coefficient) {
  objective_.at(variable) = coefficient;
}

void LinearModel::AddObjectiveCoefficient(int variable, double coefficient) {
  objective_.at(variable) += coefficient;
}

void LinearModel::SetBounds(int variable, double lower, double upper) {
  variables_.at(variable).lower = lower;
  variables_.at(variable).upper = upper;
}

void LinearModel::SetRhs(int constraint, double rhs) {
  constraints_.at(constraint).rhs = rhs;
}

int LinearModel::binary_count() const {
  return static_cast<int>(std::count_if(
      variables_.begin(), variables_.end(),
      [](const Variable& v) { return v.is_binary; }));
}

int LinearModel::FindVariable(const std::string& name) const {
  auto it = variable_index_.find(name);
  return it == variable_index_.end() ? -1 : it->second;
}

int LinearModel::FindConstraint(const std::string& name) const {
  auto it = constraint_index_.find(name);
  return it == constraint_index_.end() ? -1 : it->second;
}

double LinearModel::Evaluate(const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < variable_count(); ++j) v += objective_[j] * x[j];
  return v;
}

double LinearModel::MaxViolation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < variable_count(); ++j) {
    worst = std::max(worst, variables_[j].lower - x[j]);
    worst = std::max(worst, x[j] - variables_[j].upper);
  }
  for (const Constraint& c : constraints_) {
    double a = 0.0;
    for (const Term& t : c.terms) a += t.coefficient * x[t.variable];
    if (c.relation != Relation::kGreaterEqual) {
      worst = std::max(worst, a - c.rhs);
    }
    if (c.relation != Relation::kLessEqual) {
      worst = std::max(worst, c.rhs - a);
    }
  }
  return worst;
}

void LinearModel::Validate() const {
  for (const Variable& v : variables_) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw Error(ErrorKind::kValidation, "bounds-order",
                  "variable '" + v.name + "' has lower > upper");
    }
    if (v.is_binary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw Error(ErrorKind::kValidation, "binary-bounds",
                  "binary '" + v.name + "' bounds exceed [0, 1]");
    }
  }
  for (double c : objective_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorKind::kValidation, "nonfinite-coefficient",
                  "objective coefficient is not finite");
    }
  }
  for (const Constraint& c : constraints_) {
    if (!std::isfinite(c.rhs)) {
      throw Error(ErrorKind::kValidation, "nonfinite-rhs",
                  "constraint '" + c.name + "' has a non-finite rhs");
    }
    for (const Term& t : c.terms) {
      if (!std::isfinite(t.coefficient)) {
        throw Error(ErrorKind::kValidation, "nonfinite-coefficient",
                    "constraint '" + c.name + "' has a non-finite term");
      }
    }
  }
}

namespace {

std::string LpName(const std::string& name) {
  std::string out = name;
  for (char& ch : out) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) &&
        std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(ch) ==
            std::string_view::npos) {
      ch = '_';
    }
  }
  if (!out.empty() && (std::isdigit(static_cast<unsigned char>(out[0])) ||
                       out[0] == '.')) {
    out.insert(out.begin(), '_');
  }
  return out;
}

std::string Number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void AppendTerms(std::string& out, const std::vector<Term>& terms,
                 const std::vector<Variable>& vars) {
  if (terms.empty()) {
    out += " 0 " + LpName(vars.empty() ? "x0" : vars[0].name);
    return;
  }
  int on_line = 0;
  for (const Term& t : terms) {
    out += t.coefficient < 0 ? " - " : " + ";
    out += Number(std::abs(t.coefficient)) + " " + LpName(vars[t.variable].name);
    if (++on_line == 8) {
      out += "\n  ";
      on_line = 0;
    }
  }
}

}  // namespace

std::string ToLpFormat(const LinearModel& model) {
  const auto& vars = model.variables();
  std::string out = model.sense() == Sense::kMinimize ? "Minimize\n"
                                                      : "Maximize\n";
  std::vector<Term> obj;
  for (int j = 0; j < model.variable_count(); ++j) {
    if (model.objective()[j] != 0.0) obj.push_back({j, model.objective()[j]});
  }
  out += " obj:";
  AppendTerms(out, obj, vars);
  out += "\nSubject To\n";
  for (const Constraint& c : model.constraints()) {
    out += " " + LpName(c.name) + ":";
    AppendTerms(out, c.terms, vars);
    switch (c.relation) {
      case Relation::kLessEqual: out += " <= "; break;
      case Relation::kEqual: out += " = "; break;
      case Relation::kGreaterEqual: out += " >= "; break;
    }
    out += Number(c.rhs) + "\n";
  }
  out += "Bounds\n";
  for (const Variable& v : vars) {
    const std::string n = LpName(v.name);
    if (v.is_binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out += " " + n + " free\n";
    } else if (v.lower == v.upper) {
      out += " " + n + " = " + Number(v.lower) + "\n";
    } else {
      out += " " + (std::isinf(v.lower) ? std::string("-inf") : Number(v.lower)) +
             " <= " + n + " <= " +
             (std::isinf(v.upper) ? std::string("+inf") : Number(v.upper)) +
             "\n";
    }
  }
  bool any_binary = false;
  for (const Variable& v : vars) {
    if (!v.is_binary) continue;
    if (!any_binary) out += "Binaries\n";
    any_binary = true;
    out += " " + LpName(v.name) + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace gridclear::milp
