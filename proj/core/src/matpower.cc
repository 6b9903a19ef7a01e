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
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "gridclear/error.h"
#include "gridclear/market_data.h"

namespace gridclear {
namespace {

using Matrix = std::vector<std::vector<double>>;

// Column positions in MATPOWER version-2 matrices.
namespace bus_col {
constexpr int kId = 0, kType = 1, kPd = 2, kQd = 3, kGs = 4, kBs = 5, kVm = 7,
              kVa = 8, kBaseKv = 9;
}
namespace gen_col {
constexpr int kBus = 0, kPg = 1, kVg = 5, kStatus = 7, kPmax = 8, kPmin = 9;
}
namespace branch_col {
constexpr int kFrom = 0, kTo = 1, kR = 2, kX = 3, kB = 4, kRateA = 5,
              kTap = 8, kStatus = 10;
}

std::string StripComments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char ch : text) {
    if (ch == '\n') in_comment = false;
    if (ch == '%') in_comment = true;
    if (!in_comment) out.push_back(ch);
  }
  return out;
}

// Finds `mpc.<name> = [ ... ];` and returns its rows.
std::optional<Matrix> ReadMatrix(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    size_t after = pos + key.size();
    size_t eq = text.find_first_not_of(" \t", after);
    if (eq != std::string::npos && text[eq] == '=') break;
    pos = after;
  }
  if (pos == std::string::npos) return std::nullopt;
  const size_t open = text.find('[', pos);
  const size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos) {
    throw Error(ErrorKind::kParse, "matpower-syntax",
                "unterminated matrix mpc." + name);
  }
  Matrix rows;
  std::string body = text.substr(open + 1, close - open - 1);
  std::replace(body.begin(), body.end(), '\n', ';');
  std::stringstream rows_in(body);
  std::string row;
  while (std::getline(rows_in, row, ';')) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::stringstream cells(row);
    std::vector<double> values;
    std::string cell;
    while (cells >> cell) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kParse, "matpower-syntax",
                    "bad number '" + cell + "' in mpc." + name);
      }
    }
    if (!values.empty()) rows.push_back(std::move(values));
  }
  return rows;
}

double ReadScalar(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  size_t pos = text.find(key);
  if (pos == std::string::npos) {
    throw Error(ErrorKind::kParse, "missing-field", "missing mpc." + name);
  }
  size_t eq = text.find('=', pos);
  size_t semi = text.find(';', eq);
  try {
    return std::stod(text.substr(eq + 1, semi - eq - 1));
  } catch (const std::exception&) {
    throw Error(ErrorKind::kParse, "matpower-syntax", "bad mpc." + name);
  }
}

void RequireColumns(const Matrix& m, size_t cols, const std::string& name) {
  for (const auto& row : m) {
    if (row.size() < cols) {
      throw Error(ErrorKind::kParse, "matpower-syntax",
                  "mpc." + name + " row has fewer than " +
                      std::to_string(cols) + " columns");
    }
  }
}

// Marginal cost of a MATPOWER gencost row at output p (MW).
double MarginalCost(const std::vector<double>& row, double p) {
  const int model = static_cast<int>(row[0]);
  const int n = static_cast<int>(row[3]);
  if (model == 2) {
    // Polynomial c_{n-1} p^{n-1} + ... + c_0.
    double slope = 0.0;
    for (int k = 0; k < n - 1; ++k) {
      const int power = n - 1 - k;
      slope += power * row[4 + k] * std::pow(p, power - 1);
    }
    return slope;
  }
  // Piecewise linear: points (x1, y1) ... (xn, yn).
  for (int k = 0; k + 1 < n; ++k) {
    const double x0 = row[4 + 2 * k];
    const double y0 = row[5 + 2 * k];
    const double x1 = row[6 + 2 * k];
    const double y1 = row[7 + 2 * k];
    if (p <= x1 || k + 2 == n) return x1 > x0 ? (y1 - y0) / (x1 - x0) : 0.0;
  }
  return 0.0;
}

}  // namespace

std::vector<double> StandardDailyProfile() {
  // Two-shoulder weekday shape: overnight trough, morning ramp, evening peak.
  return {0.70, 0.66, 0.64, 0.63, 0.64, 0.68, 0.75, 0.83, 0.89, 0.93, 0.95, 0.96,
          0.95, 0.94, 0.93, 0.93, 0.95, 0.99, 1.00, 0.98, 0.94, 0.88, 0.80, 0.74};
}

NetworkCase ImportMatpower(std::string_view text,
                           const MatpowerImportOptions& options) {
  const std::string body = StripComments(text);
  const double base = ReadScalar(body, "baseMVA");
  auto bus = ReadMatrix(body, "bus");
  auto gen = ReadMatrix(body, "gen");
  auto branch = ReadMatrix(body, "branch");
  if (!bus || !gen || !branch) {
    throw Error(ErrorKind::kParse, "missing-field",
                "MATPOWER case needs mpc.bus, mpc.gen and mpc.branch");
  }
  RequireColumns(*bus, 13, "bus");
  RequireColumns(*gen, 10, "gen");
  RequireColumns(*branch, 11, "branch");
  auto gencost = ReadMatrix(body, "gencost");
  if (options.hours < 1) {
    throw Error(ErrorKind::kValidation, "horizon-empty", "hours must be >= 1");
  }
  std::vector<double> profile = options.load_profile;
  if (profile.empty()) {
    profile = StandardDailyProfile();
    profile.resize(options.hours, profile.empty() ? 1.0 : profile.back());
    if (options.hours > 24) {
      for (int t = 24; t < options.hours; ++t) profile[t] = profile[t % 24];
    }
  }
  if (static_cast<int>(profile.size()) != options.hours) {
    throw Error(ErrorKind::kValidation, "load-profile",
                "load profile length differs from hour count");
  }

  NetworkCase c;
  c.name = options.name;
  c.base_mva = base;
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  for (const auto& row : *bus) {
    Bus b;
    b.id = static_cast<int>(row[bus_col::kId]);
    const int type = static_cast<int>(row[bus_col::kType]);
    b.kind = type == 3 ? BusKind::kSlack
             : type == 2 ? BusKind::kPv
                         : BusKind::kPq;
    b.load_p = row[bus_col::kPd] / base;
    b.load_q = row[bus_col::kQd] / base;
    b.shunt_g = row[bus_col::kGs] / base;
    b.shunt_b = row[bus_col::kBs] / base;
    b.voltage_magnitude = row[bus_col::kVm];
    b.voltage_angle = row[bus_col::kVa] * kDegToRad;
    b.base_kv = row[bus_col::kBaseKv];
    if (c.bus_index(b.id) >= 0) {
      throw Error(ErrorKind::kParse, "duplicate-id",
                  "duplicate bus id " + std::to_string(b.id));
    }
    c.buses.push_back(b);
  }
  if (c.slack_index() < 0) {
    throw Error(ErrorKind::kParse, "no-slack", "case has no slack bus");
  }
  auto bus_ref = [&](double id) {
    const int index = c.bus_index(static_cast<int>(id));
    if (index < 0) {
      throw Error(ErrorKind::kParse, "unknown-bus",
                  "reference to unknown bus " +
                      std::to_string(static_cast<int>(id)));
    }
    return index;
  };

  for (const auto& row : *branch) {
    Branch br;
    br.from_bus = bus_ref(row[branch_col::kFrom]);
    br.to_bus = bus_ref(row[branch_col::kTo]);
    br.r = row[branch_col::kR];
    br.x = row[branch_col::kX];
    br.b_charging = row[branch_col::kB];
    br.rating = row[branch_col::kRateA] / base;
    br.tap = row[branch_col::kTap] == 0.0 ? 1.0 : row[branch_col::kTap];
    br.in_service = row[branch_col::kStatus] != 0.0;
    c.branches.push_back(br);
  }

  // gencost rows follow gen rows one-to-one; in-service units only.
  std::vector<int> cost_row;
  for (size_t k = 0; k < gen->size(); ++k) {
    const auto& row = (*gen)[k];
    if (row[gen_col::kStatus] <= 0.0) continue;
    Generator g;
    g.id = static_cast<int>(c.generators.size()) + 1;
    g.bus = bus_ref(row[gen_col::kBus]);
    g.p_set = row[gen_col::kPg] / base;
    g.p_max = row[gen_col::kPmax] / base;
    g.p_min = std::max(0.0, row[gen_col::kPmin]) / base;
    g.min_up = options.min_up;
    g.min_down = options.min_down;
    g.max_starts = options.max_starts;
    g.initial_on = true;
    const double pmax_mw = row[gen_col::kPmax];
    const ReserveSet& f = options.reserve_cap_fractions;
    g.reserve_caps = {f.r * pmax_mw, f.sp * pmax_mw, f.n1 * pmax_mw,
                      f.n3 * pmax_mw};
    g.reserve_prices = options.reserve_prices;
    // Generator voltage setpoint overrides the bus table for regulated buses.
    Bus& b = c.buses[g.bus];
    if (b.kind != BusKind::kPq) b.voltage_magnitude = row[gen_col::kVg];
    if (gencost && k < gencost->size() && (*gencost)[k].size() >= 4) {
      g.startup_cost = (*gencost)[k][1];
      g.shutdown_cost = (*gencost)[k][2];
    }
    c.generators.push_back(g);
    cost_row.push_back(static_cast<int>(k));
  }

  double static_p = 0.0;
  for (const Bus& b : c.buses) static_p += b.load_p;
  c.demand_weights.assign(c.bus_count(), 0.0);
  for (int i = 0; i < c.bus_count(); ++i) {
    c.demand_weights[i] = static_p > 0.0 ? c.buses[i].load_p / static_p
                                         : 1.0 / c.bus_count();
  }

  // Offer curves are the same every hour.
  std::vector<std::vector<BidBlock>> bids(c.generator_count());
  for (int g = 0; g < c.generator_count(); ++g) {
    const double pmax_mw = c.generators[g].p_max * base;
    if (pmax_mw <= 0.0 || options.bid_blocks < 1) continue;
    const double width = pmax_mw / options.bid_blocks;
    for (int j = 0; j < options.bid_blocks; ++j) {
      double price = 0.0;
      if (gencost && cost_row[g] < static_cast<int>(gencost->size())) {
        price = MarginalCost((*gencost)[cost_row[g]], (j + 0.5) * width);
      }
      // Round to cents so the documents stay readable.
      price = std::round(price * 100.0) / 100.0;
      if (j > 0) price = std::max(price, bids[g][j - 1].price);
      bids[g].push_back(BidBlock{price, width});
    }
  }

  for (int t = 0; t < options.hours; ++t) {
    HourNode node;
    node.demand = static_p * profile[t];
    const double mw = node.demand * base;
    const ReserveSet& f = options.reserve_fractions;
    node.reserve_requirement = {f.r * mw, f.sp * mw, f.n1 * mw, f.n3 * mw};
    node.bids = bids;
    c.time_tree.hours.push_back(std::move(node));
  }
  return c;
}

}  // namespace gridclear
