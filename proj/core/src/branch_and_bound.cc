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
#include <cmath>
#include <memory>
#include <queue>
#include <utility>
#include <vector>

#include "gridclear/error.h"
#include "gridclear/milp.h"
#include "simplex.h"

namespace gridclear::milp {
namespace {

using internal::Clock;
using internal::SimplexEngine;

Clock::time_point Deadline(double seconds) {
  if (seconds <= 0.0) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

void Fill(LpSolution& out, const SimplexEngine& engine) {
  out.primal = engine.Primal();
  out.duals = engine.Duals();
  out.reduced_costs = engine.ReducedCosts();
  out.objective_value = engine.Objective();
  out.has_solution = true;
}

struct Node {
  long id = 0;
  double bound = 0.0;  // parent LP value, minimization sense
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const SimplexEngine::Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const LinearModel& model, const MilpOptions& options)
      : model_(model),
        options_(options),
        engine_(model),
        sign_(model.sense() == Sense::kMaximize ? -1.0 : 1.0),
        deadline_(Deadline(options.time_limit_seconds)) {
    for (int j = 0; j < model.variable_count(); ++j) {
      if (model.variable(j).is_binary) binaries_.push_back(j);
    }
  }

  LpSolution Run();

 private:
  // Solves the LP under the current bounds, optionally from a saved basis.
  // Sets `value_` in minimization sense when optimal.
  SolveStatus SolveNode(const SimplexEngine::Basis* basis);
  void ApplyFixes(const std::vector<std::pair<int, double>>& fixes);
  // Most fractional binary or -1 if all are integral.
  int Branching() const;
  void TryIncumbent();
  void Dive(const std::vector<std::pair<int, double>>& base);
  double Cutoff() const;
  bool TimeUp() const { return Clock::now() > deadline_; }
  int BranchNodes() const { return static_cast<int>(std::max(0L, nodes_ - 1)); }

  const LinearModel& model_;
  const MilpOptions& options_;
  SimplexEngine engine_;
  double sign_;
  Clock::time_point deadline_;
  std::vector<int> binaries_;
  double value_ = 0.0;

  bool have_incumbent_ = false;
  double incumbent_value_ = kInfinity;  // minimization sense
  std::vector<double> incumbent_;
  SimplexEngine::Basis incumbent_basis_;
  long nodes_ = 0;
  long total_iterations_ = 0;
};

SolveStatus BranchAndBound::SolveNode(const SimplexEngine::Basis* basis) {
  if (basis != nullptr) engine_.SetBasis(*basis);
  const long before = engine_.iterations();
  const SolveStatus status = engine_.Solve(options_.lp, deadline_);
  total_iterations_ += engine_.iterations() - before;
  if (status == SolveStatus::kOptimal) value_ = sign_ * engine_.Objective();
  return status;
}

void BranchAndBound::ApplyFixes(
    const std::vector<std::pair<int, double>>& fixes) {
  for (int j : binaries_) {
    engine_.SetBounds(j, model_.variable(j).lower, model_.variable(j).upper);
  }
  for (const auto& [j, v] : fixes) engine_.SetBounds(j, v, v);
}

int BranchAndBound::Branching() const {
  const std::vector<double> x = engine_.Primal();
  int best = -1;
  double best_frac = options_.integrality_tolerance;
  for (int j : binaries_) {
    const double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
    if (f > best_frac) {
      best_frac = f;
      best = j;
    }
  }
  return best;
}

double BranchAndBound::Cutoff() const {
  if (!have_incumbent_) return kInfinity;
  const double scale = std::max(1.0, std::abs(incumbent_value_));
  return incumbent_value_ - std::max(1e-9, options_.gap) * scale;
}

void BranchAndBound::TryIncumbent() {
  if (have_incumbent_ && value_ >= incumbent_value_) return;
  std::vector<double> x = engine_.Primal();
  for (int j : binaries_) x[j] = std::round(x[j]);
  have_incumbent_ = true;
  incumbent_value_ = value_;
  incumbent_ = std::move(x);
  incumbent_basis_ = engine_.basis();
}

void BranchAndBound::Dive(const std::vector<std::pair<int, double>>& base) {
  // Each step fixes every binary that is already integral together with the
  // fractional one closest to integrality; on failure the fractional one is
  // tried at its other value, then only the single fix is kept.
  std::vector<std::pair<int, double>> fixes = base;
  for (size_t step = 0; step <= binaries_.size(); ++step) {
    if (TimeUp()) break;
    const std::vector<double> x = engine_.Primal();
    int pick = -1;
    double pick_dist = kInfinity;
    std::vector<std::pair<int, double>> settled;
    for (int j : binaries_) {
      if (engine_.lower(j) == engine_.upper(j)) continue;
      const double dist = std::abs(x[j] - std::round(x[j]));
      if (dist <= options_.integrality_tolerance) {
        settled.emplace_back(j, std::round(x[j]));
        continue;
      }
      if (dist < pick_dist) {
        pick_dist = dist;
        pick = j;
      }
    }
    if (pick < 0) {
      TryIncumbent();
      break;
    }
    const SimplexEngine::Basis saved = engine_.basis();
    const double first = std::round(x[pick]);
    struct Attempt {
      double value;
      bool with_settled;
    };
    bool ok = false;
    for (const Attempt a : {Attempt{first, true}, Attempt{1.0 - first, true},
                            Attempt{first, false}}) {
      if (!a.with_settled && settled.empty()) break;
      const size_t mark = fixes.size();
      if (a.with_settled) fixes.insert(fixes.end(), settled.begin(), settled.end());
      fixes.emplace_back(pick, a.value);
      ApplyFixes(fixes);
      if (SolveNode(&saved) == SolveStatus::kOptimal && value_ < Cutoff()) {
        ok = true;
        break;
      }
      fixes.resize(mark);
    }
    if (!ok) break;
  }
  ApplyFixes(base);
}

LpSolution BranchAndBound::Run() {
  LpSolution out;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push({next_id++, -kInfinity, {}, nullptr});
  double global_bound = -kInfinity;
  bool timed_out = false;
  bool root = true;

  while (!open.empty()) {
    Node node = open.top();
    if (have_incumbent_) {
      global_bound = std::min(node.bound, incumbent_value_);
      const double scale = std::max(1.0, std::abs(incumbent_value_));
      if ((incumbent_value_ - global_bound) / scale <= options_.gap ||
          node.bound >= Cutoff()) {
        break;
      }
    }
    if (TimeUp() || nodes_ >= options_.node_limit) {
      timed_out = true;
      break;
    }
    open.pop();
    ++nodes_;
    ApplyFixes(node.fixes);
    const SolveStatus status = SolveNode(node.basis.get());
    if (status == SolveStatus::kTimeLimit) {
      open.push(node);
      timed_out = true;
      break;
    }
    if (status == SolveStatus::kUnbounded) {
      if (root) {
        out.status = SolveStatus::kUnbounded;
        out.nodes = BranchNodes();
        out.iterations = total_iterations_;
        return out;
      }
      continue;
    }
    if (status != SolveStatus::kOptimal) {
      if (status == SolveStatus::kIterationLimit) {
        throw Error(ErrorKind::kNonConvergence, "lp-iteration-limit",
                    "node LP hit the iteration limit");
      }
      root = false;
      continue;
    }
    if (value_ >= Cutoff()) {
      root = false;
      continue;
    }
    const int branch = Branching();
    if (branch < 0) {
      TryIncumbent();
      root = false;
      continue;
    }
    auto basis = std::make_shared<const SimplexEngine::Basis>(engine_.basis());
    const double node_value = value_;
    if (root && options_.diving) {
      Dive(node.fixes);
      engine_.SetBasis(*basis);
    }
    root = false;
    const double x = engine_.Primal()[branch];
    const double near = x >= 0.5 ? 1.0 : 0.0;
    for (double v : {near, 1.0 - near}) {
      Node child{next_id++, node_value, node.fixes, basis};
      child.fixes.emplace_back(branch, v);
      open.push(std::move(child));
    }
  }

  out.nodes = BranchNodes();
  if (!have_incumbent_) {
    out.iterations = total_iterations_;
    out.status = timed_out ? SolveStatus::kTimeLimit : SolveStatus::kInfeasible;
    out.best_bound = sign_ * (open.empty() ? kInfinity : open.top().bound);
    return out;
  }
  global_bound = open.empty() ? incumbent_value_
                              : std::min(open.top().bound, incumbent_value_);

  // Prices and a clean continuous part from the LP with binaries fixed.
  std::vector<std::pair<int, double>> fixed;
  for (int j : binaries_) fixed.emplace_back(j, incumbent_[j]);
  ApplyFixes(fixed);
  if (SolveNode(&incumbent_basis_) == SolveStatus::kOptimal &&
      value_ <= incumbent_value_ + 1e-9 * std::max(1.0, std::abs(value_))) {
    Fill(out, engine_);
    for (int j : binaries_) out.primal[j] = incumbent_[j];
    incumbent_value_ = std::min(incumbent_value_, value_);
  } else {
    out.primal = incumbent_;
    out.objective_value = model_.Evaluate(incumbent_);
    out.has_solution = true;
  }
  out.objective_value = sign_ * incumbent_value_;
  global_bound = std::min(global_bound, incumbent_value_);
  out.best_bound = sign_ * global_bound;
  out.gap = (incumbent_value_ - global_bound) /
            std::max(1.0, std::abs(incumbent_value_));
  out.iterations = total_iterations_;
  out.status = timed_out && out.gap > options_.gap ? SolveStatus::kTimeLimit
                                                   : SolveStatus::kOptimal;
  return out;
}

}  // namespace

LpSolution SolveLp(const LinearModel& model, bool relax,
                   const LpOptions& options) {
  model.Validate();
  if (!relax) {
    for (const Variable& v : model.variables()) {
      if (v.is_binary && v.lower != v.upper) {
        throw Error(ErrorKind::kValidation, "binary-in-lp",
                    "binary '" + v.name + "' is not fixed; use SolveMilp");
      }
    }
  }
  SimplexEngine engine(model);
  LpSolution out;
  out.status = engine.Solve(options, Deadline(options.time_limit_seconds));
  out.iterations = engine.iterations();
  if (out.status == SolveStatus::kOptimal) {
    Fill(out, engine);
    out.best_bound = out.objective_value;
  }
  return out;
}

LpSolution SolveMilp(const LinearModel& model, const MilpOptions& options) {
  model.Validate();
  BranchAndBound bb(model, options);
  return bb.Run();
}

}  // namespace gridclear::milp
