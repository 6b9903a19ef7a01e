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

// Reference implementations used only by tests. They share no code with the
// library beyond the data model: dense linear algebra via Eigen, a polar
// Newton-Raphson power flow with its own admittance matrix, brute-force
// symbolic elimination, and enumeration oracles for the MILP and the unit
// commitment.

#ifndef GRIDCLEAR_TESTS_ORACLES_ORACLES_H_
#define GRIDCLEAR_TESTS_ORACLES_ORACLES_H_

#include <Eigen/Dense>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gridclear/market_data.h"
#include "gridclear/milp.h"
#include "gridclear/powerflow.h"
#include "gridclear/sparse.h"

namespace gridclear::oracle {

Eigen::MatrixXd ToDense(const sparse::SparseMatrix& m);

// Loads a case from the repository data directory.
NetworkCase LoadData(const std::string& relative);
NetworkCase LoadMatpower(const std::string& relative);

// max |(L U)_{ij} - A_{perm[i], perm[j]}| over all entries.
double ReconstructionError(const sparse::LUFactors& f,
                           const sparse::SparseMatrix& a);

// True when no two pivots of a level depend on each other through L or U.
bool LevelsIndependent(const sparse::LUFactors& f);

// Fill edges of symmetric elimination in the given order, computed on a
// dense boolean adjacency matrix. Edges are (min, max) in original indices.
std::set<std::pair<int, int>> BruteForceFill(const sparse::SparseMatrix& m,
                                             std::span<const int> order);

struct NewtonResult {
  std::vector<double> vm;
  std::vector<double> va;
  int iterations = 0;
  bool converged = false;
  double mismatch = 0.0;
};

// Polar Newton-Raphson with a finite-difference Jacobian on a dense complex
// admittance matrix built from the branch data (pi model, from-side tap).
NewtonResult NewtonRaphson(const NetworkCase& c, const BusInjections& inj,
                           double tolerance = 1e-11, int max_iterations = 40);

// Active flows of a DC solve with a dense reduced susceptance matrix;
// imbalance is taken at `slack`.
std::vector<double> DenseDcFlows(const NetworkCase& c, int slack,
                                 std::span<const double> injection);

struct EnumerationResult {
  bool feasible = false;
  double objective = 0.0;
};

// Best objective over every 0/1 assignment of the binaries, each completed
// by an LP over the continuous variables.
EnumerationResult EnumerateMilp(const milp::LinearModel& model);

// Bounded random MILP with a known feasible point; mixes all relations.
milp::LinearModel RandomMilp(std::mt19937& rng, int binaries, int continuous,
                             int rows);
// Bounded random LP with a strictly interior feasible point.
milp::LinearModel RandomLp(std::mt19937& rng, int variables, int rows);

// Unit-commitment optimum by enumerating every on/off pattern, checking the
// start/stop rules on run lengths and solving each hour's dispatch and
// reserve LP separately. Ignores the network (cases without rated lines).
struct CommitmentOptimum {
  bool feasible = false;
  double objective = 0.0;
  std::vector<std::vector<int>> on;  // [g][t]
  long patterns = 0;
};
CommitmentOptimum BruteForceCommitment(const NetworkCase& c);

// Small single-bus market: `gens` units with `blocks` bid blocks each over
// `hours` hours, random prices, quantities, costs and demands.
NetworkCase RandomSmallMarket(std::mt19937& rng, int gens, int hours,
                              int blocks);

// Two buses joined by one line: slack bus 1 and bus 2, which withdraws
// `load_pu` and is held at 1.0 pu.
NetworkCase TwoBusCase(double r, double x, double load_pu);
// Three buses in a triangle with equal reactances; bus 3 is the slack.
NetworkCase TriangleCase(double x);

}  // namespace gridclear::oracle

#endif  // GRIDCLEAR_TESTS_ORACLES_ORACLES_H_
