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

// Day-ahead clearing: unit commitment with reserves and linearized line
// limits, iterated against AC power flow, followed by an hourly dispatch
// whose duals give locational prices split into energy, congestion and
// loss components.
//
// Units: block dispatch and line flows are per-unit on the case base;
// reserves in the schedule are MW; prices are currency/MWh; objective values
// are currency.

#ifndef GRIDCLEAR_MARKET_CLEARING_H_
#define GRIDCLEAR_MARKET_CLEARING_H_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "gridclear/market_data.h"
#include "gridclear/milp.h"
#include "gridclear/powerflow.h"
#include "gridclear/sensitivities.h"

namespace gridclear {

struct CommitmentSchedule {
  // [g][t]
  std::vector<std::vector<int>> on;
  std::vector<std::vector<int>> start;
  std::vector<std::vector<int>> stop;
  // [g][t][j], pu
  std::vector<std::vector<std::vector<double>>> block_dispatch;
  // [g][t], MW
  std::vector<std::vector<ReserveSet>> reserves;
  double objective_value = 0.0;

  int generator_count() const { return static_cast<int>(on.size()); }
  int horizon() const { return on.empty() ? 0 : static_cast<int>(on[0].size()); }
  double dispatch(int g, int t) const;
  // Per-generator output at hour t, pu.
  std::vector<double> HourDispatch(int t) const;
};

// Operating point of the previous outer iteration used to linearize the
// line limits: per-hour generator output and branch flows, pu.
struct FlowBasePoint {
  std::vector<std::vector<double>> dispatch;    // [t][g]
  std::vector<std::vector<double>> line_flows;  // [t][l]
};

// DC estimate used before any AC solution exists: generators at zero and the
// loads withdrawn against the slack.
FlowBasePoint DcBasePoint(const NetworkCase& c, const ShiftFactorTable& gsf);

struct LineRow {
  int hour = 0;
  int branch = 0;
  int upper_row = -1;  // flow <= rating
  int lower_row = -1;  // -flow <= rating
};

struct ScucModel {
  milp::LinearModel model;
  // Variable indices.
  std::vector<std::vector<int>> on, start, stop;     // [g][t]
  std::vector<std::vector<std::vector<int>>> block;  // [g][t][j]
  std::vector<std::vector<std::array<int, 4>>> reserve;  // [g][t], r sp n1 n3
  std::vector<int> balance_rows;  // [t]
  std::vector<LineRow> line_rows;
  int screened_lines = 0;  // line/hour pairs dropped as unable to bind
};

// Assembles the commitment MILP. `base` supplies the previous iterate for
// the line-limit linearization; rows that cannot bind for any dispatch are
// left out. Throws Error(kInfeasible, "reserve-requirement") when an hour's
// requirement exceeds the summed capability of all units.
ScucModel BuildScuc(const NetworkCase& c, const ShiftFactorTable& gsf,
                    const FlowBasePoint& base);

// Throws Error(kInfeasible, "scuc-infeasible") when the MILP has no
// solution and Error(kNonConvergence, "scuc-time-limit") when the time limit
// expires without an incumbent.
CommitmentSchedule SolveScuc(const ScucModel& scuc, const NetworkCase& c,
                             const milp::MilpOptions& options,
                             milp::LpSolution* raw = nullptr);

struct ClearingOptions {
  int slack_bus = -1;  // dense index; -1 uses the case slack
  double eps_pf = 1e-6;
  int pf_max_iterations = 50;
  double eps_flow = 1e-3;
  int max_outer = 10;
  // Tolerance, pu, on the rating when deciding whether a line is violated.
  double violation_tolerance = 1e-6;
  milp::MilpOptions milp;
  DeliveryFactorOptions delivery;
  enum class LossPricing { kSystemEnergy, kOwnBusFuel };
  LossPricing loss_pricing = LossPricing::kSystemEnergy;
  int threads = 1;  // hour-level parallelism of the dispatch stage
};

struct ScucResult {
  CommitmentSchedule schedule;
  std::vector<PowerFlowSolution> hour_flows;  // AC solution per hour
  int pf_iterations = 0;  // outer iterations performed
  bool converged = false;
  double max_flow_change = 0.0;  // pu, last outer iteration
  int max_violation_hour = -1;
  double milp_gap = 0.0;
  int milp_nodes = 0;
  int model_rows = 0;
  int model_columns = 0;
};

// Outer loop: solve the MILP, run AC power flow for every hour, relinearize
// the line limits around the new flows and repeat until flows settle or no
// line is violated. Throws Error(kNonConvergence, "powerflow-divergence")
// naming hour and iterate when an AC solve fails.
ScucResult SolveScucWithNetwork(const NetworkCase& c,
                                const ClearingOptions& options = {});

// Everything the hourly dispatch needs besides the case: shift factors,
// delivery factors and the AC operating point it is linearized around.
struct ScedTables {
  const ShiftFactorTable* gsf = nullptr;
  DeliveryFactorTable df;
  std::vector<double> base_injection;  // AC net injection per bus, pu
  std::vector<double> base_flows;      // AC sending-end flow per branch, pu
  double base_loss = 0.0;
};

ScedTables MakeScedTables(const FastDecoupledSolver& solver,
                          const ShiftFactorTable& gsf, const NetworkCase& c,
                          int hour, std::span<const double> dispatch,
                          const PowerFlowSolution& ac,
                          const DeliveryFactorOptions& options = {});

struct ScedModel {
  milp::LinearModel model;
  int hour = 0;
  std::vector<std::vector<int>> block;  // [g][j], empty for off units
  int balance_row = -1;
  std::vector<LineRow> line_rows;  // one per in-service rated branch
  std::vector<double> load;        // pu per bus, including any extra load
  double loss_offset = 0.0;        // pu, fixed loss term of the balance
};

// Throws Error(kInfeasible, "sced-no-units") when nothing is committed and
// Error(kInfeasible, "sced-pmin") when a committed unit cannot reach its
// minimum output with its blocks.
ScedModel BuildSced(const NetworkCase& c, int hour,
                    const CommitmentSchedule& schedule,
                    const ScedTables& tables,
                    std::span<const double> extra_load = {});

struct LmpComponents {
  double total = 0.0;
  double fuel = 0.0;
  double congestion = 0.0;
  double loss = 0.0;
};

struct HourlyClearing {
  int hour = 0;
  std::vector<int> committed;
  std::vector<double> dispatch;    // pu per generator
  std::vector<double> line_flows;  // pu per branch
  double energy_price = 0.0;
  std::vector<double> congestion_duals;  // currency/MWh per branch
  std::vector<LmpComponents> lmp;        // per bus
  double lmp_average = 0.0;
  double cost = 0.0;  // dispatch objective, currency
  double loss = 0.0;  // AC losses at the base point, pu
  std::vector<double> delivery_factors;
};

// Solves the dispatch model and decomposes prices at every bus. Throws
// Error(kInfeasible, "sced-infeasible") naming the hour.
HourlyClearing ClearHour(
    const NetworkCase& c, const ScedModel& sced, const ScedTables& tables,
    ClearingOptions::LossPricing pricing =
        ClearingOptions::LossPricing::kSystemEnergy);

struct ClearingResult {
  CommitmentSchedule schedule;
  std::vector<HourlyClearing> hours;
  int pf_iterations = 0;
  bool converged = false;
  double max_flow_change = 0.0;
  int slack_bus = 0;
  double milp_gap = 0.0;
  int milp_nodes = 0;
  std::vector<double> lmp_ave;
};

// Commitment, AC iteration and hourly pricing in one call.
ClearingResult ClearMarket(const NetworkCase& c,
                           const ClearingOptions& options = {});

// Prices a fixed schedule (for example one stored with the case).
std::vector<HourlyClearing> DispatchSchedule(const NetworkCase& c,
                                             const CommitmentSchedule& schedule,
                                             const ClearingOptions& options,
                                             int* slack_used = nullptr);

// Schedule implied by the outcomes stored in the time tree, or every unit
// with an offer committed when an hour has none.
CommitmentSchedule ScheduleFromCase(const NetworkCase& c);

// Copies commitment, dispatch and prices into the case's hour outcomes.
NetworkCase AttachResults(const NetworkCase& c, const ClearingResult& result);

}  // namespace gridclear

#endif  // GRIDCLEAR_MARKET_CLEARING_H_
