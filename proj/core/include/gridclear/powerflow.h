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

// Fast decoupled AC power flow (XB variant).
//
// B' is built from series reactances only (resistance, charging and shunts
// dropped) over the non-slack buses; B'' is the negated imaginary part of
// the full bus admittance matrix restricted to PQ buses. Both are factored
// once per network and reused for every sweep and every injection pattern.

#ifndef GRIDCLEAR_POWERFLOW_H_
#define GRIDCLEAR_POWERFLOW_H_

#include <optional>
#include <span>
#include <vector>

#include "gridclear/market_data.h"
#include "gridclear/sparse.h"

namespace gridclear {

struct DecoupledMatrices {
  sparse::SparseMatrix b_prime;         // angle sweep, (n_bus - 1) square
  sparse::SparseMatrix b_double_prime;  // magnitude sweep, n_pq square
  std::vector<int> angle_buses;         // bus index of each B' row
  std::vector<int> magnitude_buses;     // bus index of each B'' row
};

// Throws Error(kValidation, "branch-zero-x") for a zero-reactance branch.
DecoupledMatrices BuildDecoupledMatrices(const NetworkCase& c);

// Scheduled net injections (generation minus load), pu per bus.
struct BusInjections {
  std::vector<double> p;
  std::vector<double> q;
};

// Static snapshot: generator p_set minus bus loads.
BusInjections StaticInjections(const NetworkCase& c);
// One hour of the time tree with the given per-generator active output.
BusInjections HourInjections(const NetworkCase& c, int hour,
                             std::span<const double> dispatch);

struct BranchFlows {
  std::vector<double> p_from, q_from;  // sending end (from bus), pu
  std::vector<double> p_to, q_to;      // receiving end (to bus), pu
  double total_loss = 0.0;             // sum of p_from + p_to
};

// Pi-model branch flows for the given voltages. Out-of-service branches
// carry zero flow.
BranchFlows ComputeBranchFlows(const NetworkCase& c, std::span<const double> vm,
                               std::span<const double> va);

struct PowerFlowOptions {
  double tolerance = 1e-6;  // max |dP|, |dQ| in pu
  int max_iterations = 50;
  // Warm start; flat start (setpoints, zero angles) when absent.
  std::optional<std::vector<double>> initial_vm;
  std::optional<std::vector<double>> initial_va;
  sparse::ExecutionOptions exec;
};

struct PowerFlowSolution {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
  std::vector<double> p_injection;  // computed net injection per bus
  std::vector<double> q_injection;
  BranchFlows flows;
  double total_loss = 0.0;
  double max_mismatch = 0.0;
  int iterations = 0;
  bool converged = false;

  const std::vector<double>& branch_flow_p() const { return flows.p_from; }
  const std::vector<double>& branch_flow_q() const { return flows.q_from; }
};

// Holds the admittance data and cached LU factors of B' and B'' for one
// network. Immutable after construction and safe to share across threads.
class FastDecoupledSolver {
 public:
  // Throws Error(kSingular) if B' or B'' cannot be factored.
  explicit FastDecoupledSolver(const NetworkCase& c);

  // Iterates alternating P-theta and Q-V half sweeps until the mismatch test
  // passes. `iterations` is the index of the first sweep at which it passed.
  // Non-convergence is reported through `converged`, not an exception.
  PowerFlowSolution Solve(const BusInjections& injections,
                          const PowerFlowOptions& options = {}) const;

  const DecoupledMatrices& matrices() const { return matrices_; }
  const sparse::LUFactors& b_prime_factors() const { return b_prime_lu_; }
  const NetworkCase& network() const { return case_; }

 private:
  // Computed active and reactive injections for the given voltages.
  void Injections(std::span<const double> vm, std::span<const double> va,
                  std::vector<double>& p, std::vector<double>& q) const;

  NetworkCase case_;
  DecoupledMatrices matrices_;
  sparse::SparseMatrix g_bus_;  // Re(Ybus)
  sparse::SparseMatrix b_bus_;  // Im(Ybus)
  sparse::LUFactors b_prime_lu_;
  sparse::LUFactors b_double_prime_lu_;
  std::vector<int> angle_row_;      // bus -> B' row or -1
  std::vector<int> magnitude_row_;  // bus -> B'' row or -1
};

// One-shot convenience over the static snapshot of the case.
PowerFlowSolution SolveFastDecoupled(const NetworkCase& c,
                                     const PowerFlowOptions& options = {});

}  // namespace gridclear

#endif  // GRIDCLEAR_POWERFLOW_H_
