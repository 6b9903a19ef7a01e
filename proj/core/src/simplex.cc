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

#include "simplex.h"

#include <algorithm>
#include <cmath>

namespace gridclear::milp::internal {
namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kDropTolerance = 1e-14;

}  // namespace

SimplexEngine::SimplexEngine(const LinearModel& model)
    : n_(model.variable_count()), m_(model.constraint_count()) {
  sense_ = model.sense() == Sense::kMaximize ? -1.0 : 1.0;
  const int total = n_ + m_;
  std::vector<int> count(n_, 0);
  for (const Constraint& c : model.constraints()) {
    for (const Term& t : c.terms) ++count[t.variable];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j];
  row_index_.resize(col_start_[n_]);
  value_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    for (const Term& t : model.constraint(i).terms) {
      row_index_[fill[t.variable]] = i;
      value_[fill[t.variable]++] = t.coefficient;
    }
  }
  cost_.assign(total, 0.0);
  lo_.resize(total);
  hi_.resize(total);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = sense_ * model.objective()[j];
    lo_[j] = model.variable(j).lower;
    hi_[j] = model.variable(j).upper;
  }
  for (int i = 0; i < m_; ++i) {
    const Constraint& c = model.constraint(i);
    lo_[n_ + i] = c.relation == Relation::kLessEqual ? -kInfinity : c.rhs;
    hi_[n_ + i] = c.relation == Relation::kGreaterEqual ? kInfinity : c.rhs;
  }
  x_.assign(total, 0.0);
  status_.assign(total, kAtLower);
  head_.resize(m_);
  pos_.assign(total, -1);
  SlackBasis();
}

void SimplexEngine::PlaceNonbasic(int j) {
  std::int8_t s = status_[j];
  if (s == kAtLower && std::isinf(lo_[j])) s = kAtUpper;
  if (s == kAtUpper && std::isinf(hi_[j])) s = kAtLower;
  if (s == kAtLower && std::isinf(lo_[j])) s = kAtZero;
  if (s == kAtZero && !std::isinf(lo_[j])) s = kAtLower;
  if (s == kAtZero && !std::isinf(hi_[j])) s = kAtUpper;
  status_[j] = s;
  x_[j] = s == kAtLower ? lo_[j] : s == kAtUpper ? hi_[j] : 0.0;
}

void SimplexEngine::SlackBasis() {
  for (int j = 0; j < n_; ++j) {
    pos_[j] = -1;
    if (status_[j] == kBasic) status_[j] = kAtLower;
    PlaceNonbasic(j);
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    status_[n_ + i] = kBasic;
  }
}

void SimplexEngine::SetBounds(int j, double lower, double upper) {
  lo_[j] = lower;
  hi_[j] = upper;
  if (status_[j] != kBasic) PlaceNonbasic(j);
}

void SimplexEngine::SetBasis(const Basis& basis) {
  head_ = basis.head;
  status_ = basis.status;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int k = 0; k < m_; ++k) pos_[head_[k]] = k;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] != kBasic) PlaceNonbasic(j);
  }
}

void SimplexEngine::LoadColumn(int j, Eigen::VectorXd& v) const {
  v.setZero(m_);
  if (j >= n_) {
    v[j - n_] = -1.0;
    return;
  }
  for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
    v[row_index_[p]] = value_[p];
  }
}

double SimplexEngine::ColumnDot(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
    s += value_[p] * y[row_index_[p]];
  }
  return s;
}

bool SimplexEngine::Refactor() {
  etas_.clear();
  if (m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (j >= n_) {
      t.emplace_back(j - n_, k, -1.0);
    } else {
      for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
        t.emplace_back(row_index_[p], k, value_[p]);
      }
    }
  }
  Eigen::SparseMatrix<double> b(m_, m_);
  b.setFromTriplets(t.begin(), t.end());
  b.makeCompressed();
  lu_.analyzePattern(b);
  lu_.factorize(b);
  if (lu_.info() != Eigen::Success) return false;

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == kBasic || x_[j] == 0.0) continue;
    for (int p = col_start_[j]; p < col_start_[j + 1]; ++p) {
      rhs[row_index_[p]] -= value_[p] * x_[j];
    }
  }
  for (int i = 0; i < m_; ++i) {
    if (status_[n_ + i] != kBasic) rhs[i] += x_[n_ + i];
  }
  Eigen::VectorXd xb = lu_.solve(rhs);
  for (int k = 0; k < m_; ++k) x_[head_[k]] = xb[k];
  return true;
}

void SimplexEngine::Ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  v = lu_.solve(v).eval();
  for (const Eta& e : etas_) {
    const double xr = v[e.row] / e.pivot;
    if (xr != 0.0) {
      for (size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * xr;
    }
    v[e.row] = xr;
  }
}

void SimplexEngine::Btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (size_t k = 0; k < it->index.size(); ++k) {
      s -= it->value[k] * v[it->index[k]];
    }
    v[it->row] = s / it->pivot;
  }
  v = lu_.transpose().solve(v).eval();
}

double SimplexEngine::Infeasibility(int j) const {
  if (x_[j] < lo_[j] - feasibility_tol_) return lo_[j] - x_[j];
  if (x_[j] > hi_[j] + feasibility_tol_) return x_[j] - hi_[j];
  return 0.0;
}

void SimplexEngine::ComputeDuals(bool phase_one) {
  Eigen::VectorXd c(m_);
  for (int k = 0; k < m_; ++k) {
    const int j = head_[k];
    if (!phase_one) {
      c[k] = cost_[j];
    } else if (x_[j] < lo_[j] - feasibility_tol_) {
      c[k] = -1.0;
    } else if (x_[j] > hi_[j] + feasibility_tol_) {
      c[k] = 1.0;
    } else {
      c[k] = 0.0;
    }
  }
  Btran(c);
  y_ = std::move(c);
}

SolveStatus SimplexEngine::Solve(const LpOptions& options,
                                 Clock::time_point deadline) {
  feasibility_tol_ = options.feasibility_tolerance;
  const double opt_tol = options.optimality_tolerance;
  const int total = n_ + m_;
  d_.assign(total, 0.0);
  for (int j = 0; j < total; ++j) {
    if (status_[j] != kBasic) PlaceNonbasic(j);
  }
  if (!Refactor()) {
    SlackBasis();
    Refactor();
  }

  int degenerate_run = 0;
  bool bland = false;
  bool fresh = true;  // factors rebuilt with no updates since
  std::vector<char> rejected(total, 0);
  bool any_rejected = false;
  Eigen::VectorXd alpha(m_);

  for (;;) {
    if (options.max_iterations > 0 && iterations_ >= options.max_iterations) {
      return SolveStatus::kIterationLimit;
    }
    if ((iterations_ & 63) == 0 && deadline != Clock::time_point::max() &&
        Clock::now() > deadline) {
      return SolveStatus::kTimeLimit;
    }
    if (static_cast<int>(etas_.size()) >= options.refactor_interval) {
      if (!Refactor()) {
        SlackBasis();
        Refactor();
      }
      fresh = true;
    }

    bool phase_one = false;
    for (int k = 0; k < m_ && !phase_one; ++k) {
      phase_one = Infeasibility(head_[k]) > 0.0;
    }
    ComputeDuals(phase_one);

    // Pricing.
    int entering = -1;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      const std::int8_t s = status_[j];
      if (s == kBasic || lo_[j] == hi_[j] || rejected[j]) continue;
      const double c = phase_one ? 0.0 : cost_[j];
      const double d = c - ColumnDot(j, y_);
      d_[j] = d;
      bool eligible = false;
      if (s == kAtLower) eligible = d < -opt_tol;
      else if (s == kAtUpper) eligible = d > opt_tol;
      else eligible = std::abs(d) > opt_tol;
      if (!eligible) continue;
      if (bland) {
        entering = j;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        entering = j;
      }
    }

    if (entering < 0) {
      if (any_rejected) {
        std::fill(rejected.begin(), rejected.end(), 0);
        any_rejected = false;
        if (!fresh) {
          if (!Refactor()) {
            SlackBasis();
            Refactor();
          }
          fresh = true;
          continue;
        }
      }
      if (!fresh) {
        if (!Refactor()) {
          SlackBasis();
          Refactor();
        }
        fresh = true;
        continue;
      }
      if (phase_one) return SolveStatus::kInfeasible;
      ComputeDuals(false);
      for (int j = 0; j < total; ++j) {
        d_[j] = status_[j] == kBasic ? 0.0
                                     : (j < n_ ? cost_[j] : 0.0) -
                                           ColumnDot(j, y_);
      }
      return SolveStatus::kOptimal;
    }

    const double dir = d_[entering] < 0.0 ? 1.0 : -1.0;
    LoadColumn(entering, alpha);
    Ftran(alpha);

    // Ratio test (Harris two-pass, or textbook under Bland's rule).
    const double tol = feasibility_tol_;
    double theta_max = kInfinity;
    const double flip = hi_[entering] - lo_[entering];
    for (int k = 0; k < m_; ++k) {
      const double a = alpha[k];
      if (std::abs(a) < kPivotTolerance) continue;
      const int b = head_[k];
      const double rate = -dir * a;
      double bound;
      if (rate > 0.0) {
        if (x_[b] < lo_[b] - tol) bound = lo_[b];
        else if (x_[b] > hi_[b] + tol || std::isinf(hi_[b])) continue;
        else bound = hi_[b];
        theta_max = std::min(theta_max,
                             (bound - x_[b] + (bland ? 0.0 : tol)) / rate);
      } else {
        if (x_[b] > hi_[b] + tol) bound = hi_[b];
        else if (x_[b] < lo_[b] - tol || std::isinf(lo_[b])) continue;
        else bound = lo_[b];
        theta_max = std::min(theta_max,
                             (bound - x_[b] - (bland ? 0.0 : tol)) / rate);
      }
    }

    int leave = -1;
    double theta = 0.0;
    double leave_bound = 0.0;
    if (!std::isinf(theta_max)) {
      double best_pivot = 0.0;
      int best_index = total;
      for (int k = 0; k < m_; ++k) {
        const double a = alpha[k];
        if (std::abs(a) < kPivotTolerance) continue;
        const int b = head_[k];
        const double rate = -dir * a;
        double bound;
        if (rate > 0.0) {
          if (x_[b] < lo_[b] - tol) bound = lo_[b];
          else if (x_[b] > hi_[b] + tol || std::isinf(hi_[b])) continue;
          else bound = hi_[b];
        } else {
          if (x_[b] > hi_[b] + tol) bound = hi_[b];
          else if (x_[b] < lo_[b] - tol || std::isinf(lo_[b])) continue;
          else bound = lo_[b];
        }
        const double ratio = (bound - x_[b]) / rate;
        if (ratio > theta_max) continue;
        const bool better = bland ? b < best_index
                                  : std::abs(a) > best_pivot;
        if (better) {
          best_pivot = std::abs(a);
          best_index = b;
          leave = k;
          leave_bound = bound;
          theta = std::max(0.0, ratio);
        }
      }
    }

    const bool do_flip = !std::isinf(flip) && (leave < 0 || flip <= theta);
    if (!do_flip && leave < 0) {
      if (std::isinf(theta_max)) {
        if (!phase_one) {
          // Confirm on fresh factors before declaring unboundedness.
          if (!fresh) {
            if (!Refactor()) {
              SlackBasis();
              Refactor();
            }
            fresh = true;
            continue;
          }
          return SolveStatus::kUnbounded;
        }
      }
      rejected[entering] = 1;
      any_rejected = true;
      continue;
    }

    ++iterations_;
    if (do_flip) theta = flip;
    const double step = dir * theta;
    x_[entering] += step;
    for (int k = 0; k < m_; ++k) {
      if (alpha[k] != 0.0) x_[head_[k]] -= step * alpha[k];
    }

    if (do_flip) {
      status_[entering] = dir > 0 ? kAtUpper : kAtLower;
      x_[entering] = dir > 0 ? hi_[entering] : lo_[entering];
    } else {
      const int b = head_[leave];
      x_[b] = leave_bound;
      status_[b] = leave_bound == lo_[b] ? kAtLower : kAtUpper;
      pos_[b] = -1;
      head_[leave] = entering;
      pos_[entering] = leave;
      status_[entering] = kBasic;
      Eta e;
      e.row = leave;
      e.pivot = alpha[leave];
      for (int k = 0; k < m_; ++k) {
        if (k != leave && std::abs(alpha[k]) > kDropTolerance) {
          e.index.push_back(k);
          e.value.push_back(alpha[k]);
        }
      }
      etas_.push_back(std::move(e));
      fresh = false;
    }
    if (any_rejected) {
      std::fill(rejected.begin(), rejected.end(), 0);
      any_rejected = false;
    }

    if (theta <= 1e-12) {
      if (++degenerate_run >= options.bland_after) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

std::vector<double> SimplexEngine::Primal() const {
  return std::vector<double>(x_.begin(), x_.begin() + n_);
}

std::vector<double> SimplexEngine::Duals() const {
  std::vector<double> y(m_);
  for (int i = 0; i < m_; ++i) y[i] = sense_ * y_[i];
  return y;
}

std::vector<double> SimplexEngine::ReducedCosts() const {
  std::vector<double> d(n_);
  for (int j = 0; j < n_; ++j) d[j] = sense_ * d_[j];
  return d;
}

double SimplexEngine::Objective() const {
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return sense_ * v;
}

}  // namespace gridclear::milp::internal
