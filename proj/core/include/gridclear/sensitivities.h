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

// Generation shift factors (DC PTDF) and AC delivery factors.

#ifndef GRIDCLEAR_SENSITIVITIES_H_
#define GRIDCLEAR_SENSITIVITIES_H_

#include <span>
#include <vector>

#include "gridclear/market_data.h"
#include "gridclear/powerflow.h"

namespace gridclear {

struct ShiftFactorTable {
  int slack_bus = 0;  // dense bus index
  // gsf[l][i]: change of the active flow on branch l (from -> to) per pu
  // injected at bus i and withdrawn at the slack.
  std::vector<std::vector<double>> gsf;

  double at(int branch, int bus) const { return gsf[branch][bus]; }
  // Flows for an injection vector; any imbalance is taken at the slack.
  std::vector<double> Flows(std::span<const double> injection) const;
};

// Throws Error(kValidation, "disconnected") if the in-service branches do
// not span every bus and Error(kValidation, "branch-zero-x") for x = 0.
ShiftFactorTable GenerationShiftFactors(const NetworkCase& c, int slack_bus,
                                        const sparse::ExecutionOptions& exec = {});

// Direct DC solve (reduced B theta = p) returning branch flows; the
// reference used by tests of the shift factors.
std::vector<double> DcFlows(const NetworkCase& c, int slack_bus,
                            std::span<const double> injection);

struct DeliveryFactorTable {
  int slack_bus = 0;
  std::vector<double> df;                 // 1 - loss_sensitivity
  std::vector<double> loss_sensitivity;  // dP_loss / dP_i, withdrawn at slack
};

struct DeliveryFactorOptions {
  double delta = 1e-4;        // pu injection step
  double tolerance = 1e-11;   // power flow tolerance of the perturbed solves
  int max_iterations = 100;
  int threads = 1;
};

// Central finite differences of AC losses around `base`, which must be a
// converged solution of `injections` on the solver's network. The power flow
// slack absorbs each perturbation; sensitivities relative to another pricing
// reference r follow as LS_i - LS_r. A network without resistance or shunt
// conductance gets DF = 1 exactly, with no perturbed solves. Throws Error(kNonConvergence) naming the
// bus when a perturbed solve fails.
DeliveryFactorTable DeliveryFactors(const FastDecoupledSolver& solver,
                                    const BusInjections& injections,
                                    const PowerFlowSolution& base,
                                    int slack_bus,
                                    const DeliveryFactorOptions& options = {});

}  // namespace gridclear

#endif  // GRIDCLEAR_SENSITIVITIES_H_
