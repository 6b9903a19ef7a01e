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

// Network and market data model: buses and branches form the static graph,
// the time tree hangs one node per hour off it carrying demand, reserve
// requirements, bids and (after a clearing run) results.
//
// Units. After parsing, every power quantity on buses, branches and
// generators is per-unit on `base_mva`, angles are radians, and system demand
// is per-unit. Bid quantities, reserve capacities and reserve requirements
// stay in MW, prices in currency/MWh. Case documents carry MW, MVA and
// degrees; see docs/case_format.md.

#ifndef GRIDCLEAR_MARKET_DATA_H_
#define GRIDCLEAR_MARKET_DATA_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridclear {

enum class BusKind { kSlack, kPv, kPq };

const char* BusKindName(BusKind kind);

struct Bus {
  int id = 0;  // label from the source document
  BusKind kind = BusKind::kPq;
  double voltage_magnitude = 1.0;  // pu; setpoint for slack and PV buses
  double voltage_angle = 0.0;      // rad
  double load_p = 0.0;             // pu
  double load_q = 0.0;             // pu
  double shunt_g = 0.0;            // pu at 1.0 pu voltage
  double shunt_b = 0.0;            // pu at 1.0 pu voltage
  double base_kv = 0.0;

  bool operator==(const Bus&) const = default;
};

// Endpoints are dense bus indices (positions in NetworkCase::buses).
struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charging = 0.0;  // total line charging susceptance, pu
  double rating = 0.0;      // pu MVA, 0 means unlimited
  double tap = 1.0;         // off-nominal turns ratio at the from end
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

// One value per reserve product, ordered from highest to lowest quality:
// regulation, spinning, 10-minute non-spinning, 30-minute operating.
struct ReserveSet {
  double r = 0.0;
  double sp = 0.0;
  double n1 = 0.0;
  double n3 = 0.0;

  bool operator==(const ReserveSet&) const = default;
};

struct Generator {
  int id = 0;   // label from the source document
  int bus = 0;  // dense bus index
  double p_min = 0.0;  // pu
  double p_max = 0.0;  // pu
  double p_set = 0.0;  // pu, scheduled output used by stand-alone power flow
  double startup_cost = 0.0;
  double shutdown_cost = 0.0;
  int min_up = 1;      // hours
  int min_down = 1;    // hours
  int max_starts = 4;  // per horizon
  bool initial_on = true;
  ReserveSet reserve_caps;    // MW
  ReserveSet reserve_prices;  // currency/MW

  bool operator==(const Generator&) const = default;
};

// One step of a monotone offer curve. The block index is the position in
// the generator-hour bid vector.
struct BidBlock {
  double price = 0.0;     // currency/MWh
  double quantity = 0.0;  // MW

  bool operator==(const BidBlock&) const = default;
};

// Results attached to an hour node after clearing.
struct HourOutcome {
  std::vector<int> committed;   // per generator, 0/1
  std::vector<double> dispatch;  // per generator, pu
  std::vector<double> lmp;       // per bus, total LMP
  double lmp_average = 0.0;

  bool operator==(const HourOutcome&) const = default;
};

struct HourNode {
  double demand = 0.0;  // pu system total
  ReserveSet reserve_requirement;  // MW
  // bids[g] is generator g's offer for this hour; empty means no offer.
  std::vector<std::vector<BidBlock>> bids;
  std::optional<HourOutcome> outcome;

  bool operator==(const HourNode&) const = default;
};

struct TimeTree {
  std::vector<HourNode> hours;

  int horizon() const { return static_cast<int>(hours.size()); }
  bool operator==(const TimeTree&) const = default;
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  // Share of the hourly system demand withdrawn at each bus; sums to one.
  std::vector<double> demand_weights;
  TimeTree time_tree;

  int bus_count() const { return static_cast<int>(buses.size()); }
  int branch_count() const { return static_cast<int>(branches.size()); }
  int generator_count() const { return static_cast<int>(generators.size()); }
  int horizon() const { return time_tree.horizon(); }

  // Index of the first slack bus, or -1.
  int slack_index() const;
  // Dense index for a bus/generator label, or -1.
  int bus_index(int id) const;
  int generator_index(int id) const;

  bool operator==(const NetworkCase&) const = default;
};

struct ParseOptions {
  // Used when an hour omits `reserve_req`: each requirement is this fraction
  // of the hour's demand.
  ReserveSet default_reserve_fractions{0.02, 0.03, 0.02, 0.03};
};

// Reads the JSON case document. Throws Error(kParse) on syntax errors (with
// byte offset) and on unresolved references, duplicate ids or a missing
// slack bus. Other invariant breaches are left for Validate().
NetworkCase ParseCase(std::string_view text, const ParseOptions& options = {});

// Reads and parses a case file; missing or unreadable files throw kIo.
NetworkCase LoadCaseFile(const std::string& path,
                         const ParseOptions& options = {});

// Writes the JSON case document that ParseCase() reads.
std::string SerializeCase(const NetworkCase& c);

// Field-wise comparison with relative tolerance on floating values; used
// for unit-conversion round trips where bitwise equality cannot hold.
bool ApproxEqual(const NetworkCase& a, const NetworkCase& b,
                 double rel_tol = 1e-12);

struct Violation {
  std::string entity;  // e.g. "bus 4", "generator 3 hour 11"
  std::string rule;    // e.g. "slack-count"
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Every invariant breach in the case, empty when the case is valid.
std::vector<Violation> Validate(const NetworkCase& c);

// Bid-set rules shared by the case validator, UpdateBids() and the service
// API. Returns the first broken rule name ("bid-quantity", "bid-monotone",
// "bid-price"), or an empty optional.
std::optional<std::string> CheckBidBlocks(std::span<const BidBlock> blocks);

// Returns a copy of `c` where generator `generator_id` offers `blocks` in
// hour `hour` (0-based). Throws Error(kValidation) naming the rule when the
// blocks, hour or generator are invalid.
NetworkCase UpdateBids(const NetworkCase& c, int hour, int generator_id,
                       std::vector<BidBlock> blocks);

// Per-bus withdrawals for an hour: the demand split by the case weights.
// Reactive withdrawals scale the static reactive load by the same ratio as
// the system demand.
std::vector<double> HourLoadsP(const NetworkCase& c, int hour);
std::vector<double> HourLoadsQ(const NetworkCase& c, int hour);

struct MatpowerImportOptions {
  std::string name;
  int hours = 24;
  // Multiplier on the static system load per hour; empty means a standard
  // daily shape. Size must equal `hours` when given.
  std::vector<double> load_profile;
  ReserveSet reserve_fractions{0.02, 0.03, 0.02, 0.03};
  // Each unit offers this many equal blocks priced at the marginal cost of
  // its polynomial cost curve at the block midpoint.
  int bid_blocks = 3;
  int min_up = 2;
  int min_down = 2;
  int max_starts = 4;
  // Reserve capability as a fraction of Pmax per product.
  ReserveSet reserve_cap_fractions{0.05, 0.10, 0.10, 0.15};
  ReserveSet reserve_prices{3.0, 2.0, 1.0, 0.5};
};

// Converts a MATPOWER version-2 case file (bus, gen, branch and optionally
// gencost matrices) into a NetworkCase with a synthetic time tree. Phase
// shifts are dropped.
NetworkCase ImportMatpower(std::string_view text,
                           const MatpowerImportOptions& options = {});

// Default 24-hour load shape (fractions of the static load).
std::vector<double> StandardDailyProfile();

}  // namespace gridclear

#endif  // GRIDCLEAR_MARKET_DATA_H_
