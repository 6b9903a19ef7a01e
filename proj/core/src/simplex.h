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

// Bounded revised primal simplex on the logical form
//
//   A x - r = 0,  l <= x <= u,  rl <= r <= ru,
//
// where r holds one logical (row activity) variable per constraint. The
// basis is factored with Eigen's SparseLU and updated in product form; an
// all-logical basis is the cold start. Phase 1 minimizes the sum of bound
// violations of the basic variables.

#ifndef GRIDCLEAR_SRC_SIMPLEX_H_
#define GRIDCLEAR_SRC_SIMPLEX_H_

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <chrono>
#include <cstdint>
#include <vector>

#include "gridclear/milp.h"

namespace gridclear::milp::internal {

using Clock = std::chrono::steady_clock;

class SimplexEngine {
 public:
  enum Status : std::int8_t { kBasic, kAtLower, kAtUpper, kAtZero };

  struct Basis {
    std::vector<int> head;
    std::vector<std::int8_t> status;
  };

  explicit SimplexEngine(const LinearModel& model);

  int structural_count() const { return n_; }
  int row_count() const { return m_; }

  // Bounds of structural variable j.
  void SetBounds(int j, double lower, double upper);
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  SolveStatus Solve(const LpOptions& options, Clock::time_point deadline);

  Basis basis() const { return {head_, status_}; }
  // Installs a basis saved from a model with the same shape.
  void SetBasis(const Basis& basis);

  std::vector<double> Primal() const;
  // Row duals and structural reduced costs in the model's own sense.
  std::vector<double> Duals() const;
  std::vector<double> ReducedCosts() const;
  double Objective() const;
  long iterations() const { return iterations_; }

 private:
  struct Eta {
    int row;
    double pivot;
    std::vector<int> index;  // off-pivot nonzeros
    std::vector<double> value;
  };

  void PlaceNonbasic(int j);
  void SlackBasis();
  // Factors the current basis and recomputes basic values. Returns false if
  // the basis is singular.
  bool Refactor();
  void Ftran(Eigen::VectorXd& v) const;
  void Btran(Eigen::VectorXd& v) const;
  void LoadColumn(int j, Eigen::VectorXd& v) const;
  double ColumnDot(int j, const Eigen::VectorXd& y) const;
  double Infeasibility(int j) const;
  void ComputeDuals(bool phase_one);

  int n_ = 0;
  int m_ = 0;
  double sense_ = 1.0;  // -1 for maximization
  std::vector<int> col_start_;
  std::vector<int> row_index_;
  std::vector<double> value_;
  std::vector<double> cost_;
  std::vector<double> lo_, hi_, x_;
  std::vector<std::int8_t> status_;
  std::vector<int> head_;
  std::vector<int> pos_;

  // transpose() is non-const in Eigen.
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  std::vector<Eta> etas_;
  Eigen::VectorXd y_;
  std::vector<double> d_;
  double feasibility_tol_ = 1e-9;
  long iterations_ = 0;
};

}  // namespace gridclear::milp::internal

#endif  // GRIDCLEAR_SRC_SIMPLEX_H_
