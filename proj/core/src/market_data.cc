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

#include "gridclear/market_data.h"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "gridclear/error.h"

namespace gridclear {

const char* BusKindName(BusKind kind) {
  switch (kind) {
    case BusKind::kSlack:
      return "slack";
    case BusKind::kPv:
      return "pv";
    case BusKind::kPq:
      return "pq";
  }
  return "pq";
}

int NetworkCase::slack_index() const {
  for (int i = 0; i < bus_count(); ++i) {
    if (buses[i].kind == BusKind::kSlack) return i;
  }
  return -1;
}

int NetworkCase::bus_index(int id) const {
  for (int i = 0; i < bus_count(); ++i) {
    if (buses[i].id == id) return i;
  }
  return -1;
}

int NetworkCase::generator_index(int id) const {
  for (int g = 0; g < generator_count(); ++g) {
    if (generators[g].id == id) return g;
  }
  return -1;
}

std::optional<std::string> CheckBidBlocks(std::span<const BidBlock> blocks) {
  for (size_t j = 0; j < blocks.size(); ++j) {
    if (!std::isfinite(blocks[j].price)) return "bid-price";
    if (!(blocks[j].quantity > 0.0) || !std::isfinite(blocks[j].quantity)) {
      return "bid-quantity";
    }
    if (j > 0 && blocks[j].price < blocks[j - 1].price) return "bid-monotone";
  }
  return std::nullopt;
}

namespace {

std::string BusName(const NetworkCase& c, int index) {
  return "bus " + std::to_string(c.buses[index].id);
}

std::string GenName(const Generator& g) {
  return "generator " + std::to_string(g.id);
}

// Union-find over in-service branches.
bool IsConnected(const NetworkCase& c) {
  const int n = c.bus_count();
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  int components = n;
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    if (br.from_bus < 0 || br.from_bus >= n || br.to_bus < 0 ||
        br.to_bus >= n) {
      continue;
    }
    int a = find(br.from_bus);
    int b = find(br.to_bus);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

}  // namespace

std::vector<Violation> Validate(const NetworkCase& c) {
  std::vector<Violation> out;
  auto add = [&](std::string entity, std::string rule, std::string detail) {
    out.push_back({std::move(entity), std::move(rule), std::move(detail)});
  };

  if (!(c.base_mva > 0.0)) add("case", "base-mva", "base_mva must be > 0");

  int slacks = 0;
  std::set<int> bus_ids;
  for (int i = 0; i < c.bus_count(); ++i) {
    const Bus& b = c.buses[i];
    if (b.kind == BusKind::kSlack) ++slacks;
    if (!bus_ids.insert(b.id).second) {
      add(BusName(c, i), "duplicate-bus-id", "bus id appears twice");
    }
    if (!(b.voltage_magnitude > 0.0)) {
      add(BusName(c, i), "vm-positive", "voltage magnitude must be > 0");
    }
  }
  if (slacks != 1) {
    add("case", "slack-count",
        "expected exactly one slack bus, found " + std::to_string(slacks));
  }

  const int n = c.bus_count();
  for (int k = 0; k < c.branch_count(); ++k) {
    const Branch& br = c.branches[k];
    const std::string name = "branch " + std::to_string(k + 1);
    if (br.from_bus < 0 || br.from_bus >= n || br.to_bus < 0 ||
        br.to_bus >= n) {
      add(name, "branch-unknown-bus", "endpoint outside the bus list");
      continue;
    }
    if (br.from_bus == br.to_bus) {
      add(name, "branch-self-loop", "from and to bus coincide");
    }
    if (br.x == 0.0) add(name, "branch-zero-x", "reactance must be nonzero");
    if (br.rating < 0.0) {
      add(name, "branch-rating-negative", "rating must be >= 0");
    }
    if (!(br.tap > 0.0)) add(name, "branch-tap", "tap ratio must be positive");
  }
  if (!IsConnected(c)) {
    add("case", "disconnected", "in-service branches do not span all buses");
  }

  std::set<int> gen_ids;
  for (const Generator& g : c.generators) {
    const std::string name = GenName(g);
    if (!gen_ids.insert(g.id).second) {
      add(name, "duplicate-generator-id", "generator id appears twice");
    }
    if (g.bus < 0 || g.bus >= n) {
      add(name, "generator-bus", "generator bus does not exist");
    }
    if (g.p_min < 0.0) add(name, "pmin-negative", "p_min must be >= 0");
    if (g.p_min > g.p_max) add(name, "pmin-gt-pmax", "p_min exceeds p_max");
    if (g.min_up < 1) add(name, "min-up", "min_up must be >= 1");
    if (g.min_down < 1) add(name, "min-down", "min_down must be >= 1");
    if (g.max_starts < 0) add(name, "max-starts", "max_starts must be >= 0");
    const ReserveSet& rc = g.reserve_caps;
    if (rc.r < 0.0 || rc.sp < 0.0 || rc.n1 < 0.0 || rc.n3 < 0.0) {
      add(name, "reserve-cap-negative", "reserve capacities must be >= 0");
    }
  }

  if (n > 0) {
    if (static_cast<int>(c.demand_weights.size()) != n) {
      add("case", "demand-weights", "one demand weight per bus required");
    } else {
      double sum = 0.0;
      bool negative = false;
      for (double w : c.demand_weights) {
        sum += w;
        negative = negative || w < 0.0;
      }
      if (negative || std::abs(sum - 1.0) > 1e-9) {
        add("case", "demand-weights", "weights must be >= 0 and sum to 1");
      }
    }
  }

  if (c.horizon() < 1) add("time tree", "horizon-empty", "need >= 1 hour");
  for (int t = 0; t < c.horizon(); ++t) {
    const HourNode& h = c.time_tree.hours[t];
    const std::string hour = "hour " + std::to_string(t + 1);
    if (!(h.demand >= 0.0)) add(hour, "demand-negative", "demand must be >= 0");
    const ReserveSet& rr = h.reserve_requirement;
    if (rr.r < 0.0 || rr.sp < 0.0 || rr.n1 < 0.0 || rr.n3 < 0.0) {
      add(hour, "reserve-req-negative", "requirements must be >= 0");
    }
    if (static_cast<int>(h.bids.size()) != c.generator_count()) {
      add(hour, "hour-bid-count", "one bid set per generator required");
      continue;
    }
    for (int g = 0; g < c.generator_count(); ++g) {
      if (auto rule = CheckBidBlocks(h.bids[g])) {
        add(GenName(c.generators[g]) + " " + hour, *rule,
            "bid blocks break rule " + *rule);
      }
    }
  }
  return out;
}

NetworkCase UpdateBids(const NetworkCase& c, int hour, int generator_id,
                       std::vector<BidBlock> blocks) {
  if (hour < 0 || hour >= c.horizon()) {
    throw Error(ErrorKind::kValidation, "hour-range",
                "hour index " + std::to_string(hour) + " outside horizon");
  }
  const int g = c.generator_index(generator_id);
  if (g < 0) {
    throw Error(ErrorKind::kValidation, "unknown-generator",
                "no generator with id " + std::to_string(generator_id));
  }
  if (auto rule = CheckBidBlocks(blocks)) {
    throw Error(ErrorKind::kValidation, *rule,
                "bid blocks for generator " + std::to_string(generator_id) +
                    " break rule " + *rule);
  }
  NetworkCase next = c;
  next.time_tree.hours[hour].bids[g] = std::move(blocks);
  return next;
}

std::vector<double> HourLoadsP(const NetworkCase& c, int hour) {
  const double demand = c.time_tree.hours.at(hour).demand;
  std::vector<double> loads(c.bus_count(), 0.0);
  for (int i = 0; i < c.bus_count(); ++i) {
    loads[i] = demand * c.demand_weights[i];
  }
  return loads;
}

std::vector<double> HourLoadsQ(const NetworkCase& c, int hour) {
  const double demand = c.time_tree.hours.at(hour).demand;
  double static_p = 0.0;
  for (const Bus& b : c.buses) static_p += b.load_p;
  std::vector<double> loads(c.bus_count(), 0.0);
  if (static_p <= 0.0) return loads;
  const double ratio = demand / static_p;
  for (int i = 0; i < c.bus_count(); ++i) loads[i] = c.buses[i].load_q * ratio;
  return loads;
}

namespace {

bool Close(double a, double b, double rel_tol) {
  if (a == b) return true;
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

bool Close(const ReserveSet& a, const ReserveSet& b, double tol) {
  return Close(a.r, b.r, tol) && Close(a.sp, b.sp, tol) &&
         Close(a.n1, b.n1, tol) && Close(a.n3, b.n3, tol);
}

bool Close(const std::vector<double>& a, const std::vector<double>& b,
           double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!Close(a[i], b[i], tol)) return false;
  }
  return true;
}

}  // namespace

bool ApproxEqual(const NetworkCase& a, const NetworkCase& b, double rel_tol) {
  if (a.name != b.name || !Close(a.base_mva, b.base_mva, rel_tol)) return false;
  if (a.buses.size() != b.buses.size() ||
      a.branches.size() != b.branches.size() ||
      a.generators.size() != b.generators.size() ||
      a.horizon() != b.horizon()) {
    return false;
  }
  for (size_t i = 0; i < a.buses.size(); ++i) {
    const Bus& x = a.buses[i];
    const Bus& y = b.buses[i];
    if (x.id != y.id || x.kind != y.kind ||
        !Close(x.voltage_magnitude, y.voltage_magnitude, rel_tol) ||
        !Close(x.voltage_angle, y.voltage_angle, rel_tol) ||
        !Close(x.load_p, y.load_p, rel_tol) ||
        !Close(x.load_q, y.load_q, rel_tol) ||
        !Close(x.shunt_g, y.shunt_g, rel_tol) ||
        !Close(x.shunt_b, y.shunt_b, rel_tol) ||
        !Close(x.base_kv, y.base_kv, rel_tol)) {
      return false;
    }
  }
  for (size_t k = 0; k < a.branches.size(); ++k) {
    const Branch& x = a.branches[k];
    const Branch& y = b.branches[k];
    if (x.from_bus != y.from_bus || x.to_bus != y.to_bus ||
        x.in_service != y.in_service || !Close(x.r, y.r, rel_tol) ||
        !Close(x.x, y.x, rel_tol) ||
        !Close(x.b_charging, y.b_charging, rel_tol) ||
        !Close(x.rating, y.rating, rel_tol) || !Close(x.tap, y.tap, rel_tol)) {
      return false;
    }
  }
  for (size_t g = 0; g < a.generators.size(); ++g) {
    const Generator& x = a.generators[g];
    const Generator& y = b.generators[g];
    if (x.id != y.id || x.bus != y.bus || x.min_up != y.min_up ||
        x.min_down != y.min_down || x.max_starts != y.max_starts ||
        x.initial_on != y.initial_on || !Close(x.p_min, y.p_min, rel_tol) ||
        !Close(x.p_max, y.p_max, rel_tol) ||
        !Close(x.p_set, y.p_set, rel_tol) ||
        !Close(x.startup_cost, y.startup_cost, rel_tol) ||
        !Close(x.shutdown_cost, y.shutdown_cost, rel_tol) ||
        !Close(x.reserve_caps, y.reserve_caps, rel_tol) ||
        !Close(x.reserve_prices, y.reserve_prices, rel_tol)) {
      return false;
    }
  }
  if (!Close(a.demand_weights, b.demand_weights, rel_tol)) return false;
  for (int t = 0; t < a.horizon(); ++t) {
    const HourNode& x = a.time_tree.hours[t];
    const HourNode& y = b.time_tree.hours[t];
    if (!Close(x.demand, y.demand, rel_tol) ||
        !Close(x.reserve_requirement, y.reserve_requirement, rel_tol) ||
        x.bids.size() != y.bids.size() ||
        x.outcome.has_value() != y.outcome.has_value()) {
      return false;
    }
    for (size_t g = 0; g < x.bids.size(); ++g) {
      if (x.bids[g].size() != y.bids[g].size()) return false;
      for (size_t j = 0; j < x.bids[g].size(); ++j) {
        if (!Close(x.bids[g][j].price, y.bids[g][j].price, rel_tol) ||
            !Close(x.bids[g][j].quantity, y.bids[g][j].quantity, rel_tol)) {
          return false;
        }
      }
    }
    if (x.outcome) {
      const HourOutcome& p = *x.outcome;
      const HourOutcome& q = *y.outcome;
      if (p.committed != q.committed || !Close(p.dispatch, q.dispatch, rel_tol) ||
          !Close(p.lmp, q.lmp, rel_tol) ||
          !Close(p.lmp_average, q.lmp_average, rel_tol)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace gridclear
