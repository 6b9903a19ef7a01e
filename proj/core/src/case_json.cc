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

// JSON case document reader/writer. Schema: docs/case_format.md.

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "gridclear/error.h"
#include "gridclear/market_data.h"
#include "json.hpp"

namespace gridclear {
namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void Fail(const std::string& rule, const std::string& message) {
  throw Error(ErrorKind::kParse, rule, message);
}

const json& Require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    Fail("missing-field", where + ": missing field '" + key + "'");
  }
  return *it;
}

double Number(const json& v, const std::string& where) {
  if (!v.is_number()) Fail("bad-value", where + ": expected a number");
  return v.get<double>();
}

double NumberOr(const json& obj, const char* key, double fallback,
                const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return Number(*it, where + "." + key);
}

int IntOr(const json& obj, const char* key, int fallback,
          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) {
    Fail("bad-value", where + "." + key + ": expected an integer");
  }
  return it->get<int>();
}

bool BoolOr(const json& obj, const char* key, bool fallback,
            const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) Fail("bad-value", where + "." + key + ": expected bool");
  return it->get<bool>();
}

ReserveSet ReadReserve(const json& v, const std::string& where) {
  if (!v.is_object()) Fail("bad-value", where + ": expected an object");
  return ReserveSet{NumberOr(v, "r", 0.0, where), NumberOr(v, "sp", 0.0, where),
                    NumberOr(v, "n1", 0.0, where),
                    NumberOr(v, "n3", 0.0, where)};
}

json WriteReserve(const ReserveSet& r) {
  return json{{"r", r.r}, {"sp", r.sp}, {"n1", r.n1}, {"n3", r.n3}};
}

BusKind ReadKind(const json& v, const std::string& where) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "slack" || s == "ref") return BusKind::kSlack;
    if (s == "pv") return BusKind::kPv;
    if (s == "pq") return BusKind::kPq;
  } else if (v.is_number_integer()) {
    switch (v.get<int>()) {
      case 3:
        return BusKind::kSlack;
      case 2:
        return BusKind::kPv;
      case 1:
        return BusKind::kPq;
    }
  }
  Fail("bad-value", where + ".type: expected slack, pv or pq");
}

int ReadId(const json& v, const std::string& where) {
  if (!v.is_number_integer()) Fail("bad-value", where + ": expected integer id");
  return v.get<int>();
}

}  // namespace

NetworkCase ParseCase(std::string_view text, const ParseOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, "json-syntax",
                "JSON syntax error at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  }
  if (!doc.is_object()) Fail("bad-value", "case document must be an object");

  NetworkCase c;
  c.name = doc.value("name", std::string());
  c.base_mva = Number(Require(doc, "base_mva", "case"), "base_mva");
  if (!(c.base_mva > 0.0)) Fail("bad-value", "base_mva must be > 0");
  const double base = c.base_mva;

  const json& buses = Require(doc, "buses", "case");
  if (!buses.is_array()) Fail("bad-value", "buses must be an array");
  std::set<int> bus_ids;
  for (size_t i = 0; i < buses.size(); ++i) {
    const json& b = buses[i];
    const std::string where = "buses[" + std::to_string(i) + "]";
    Bus bus;
    bus.id = ReadId(Require(b, "id", where), where + ".id");
    if (!bus_ids.insert(bus.id).second) {
      Fail("duplicate-id", "duplicate bus id " + std::to_string(bus.id));
    }
    bus.kind = ReadKind(Require(b, "type", where), where);
    bus.voltage_magnitude = NumberOr(b, "vm", 1.0, where);
    bus.voltage_angle = NumberOr(b, "va", 0.0, where) * kDegToRad;
    bus.load_p = NumberOr(b, "pd", 0.0, where) / base;
    bus.load_q = NumberOr(b, "qd", 0.0, where) / base;
    bus.shunt_g = NumberOr(b, "gs", 0.0, where) / base;
    bus.shunt_b = NumberOr(b, "bs", 0.0, where) / base;
    bus.base_kv = NumberOr(b, "base_kv", 0.0, where);
    c.buses.push_back(bus);
  }
  if (c.slack_index() < 0) Fail("no-slack", "case has no slack bus");

  auto bus_ref = [&](const json& v, const std::string& where) {
    const int id = ReadId(v, where);
    const int index = c.bus_index(id);
    if (index < 0) {
      Fail("unknown-bus", where + " references unknown bus " + std::to_string(id));
    }
    return index;
  };

  if (auto it = doc.find("branches"); it != doc.end()) {
    if (!it->is_array()) Fail("bad-value", "branches must be an array");
    for (size_t k = 0; k < it->size(); ++k) {
      const json& br = (*it)[k];
      const std::string where = "branches[" + std::to_string(k) + "]";
      Branch branch;
      branch.from_bus = bus_ref(Require(br, "from", where), where + ".from");
      branch.to_bus = bus_ref(Require(br, "to", where), where + ".to");
      branch.r = NumberOr(br, "r", 0.0, where);
      branch.x = Number(Require(br, "x", where), where + ".x");
      branch.b_charging = NumberOr(br, "b", 0.0, where);
      branch.rating = NumberOr(br, "rating", 0.0, where) / base;
      branch.tap = NumberOr(br, "tap", 1.0, where);
      branch.in_service = BoolOr(br, "in_service", true, where);
      c.branches.push_back(branch);
    }
  }

  std::set<int> gen_ids;
  if (auto it = doc.find("generators"); it != doc.end()) {
    if (!it->is_array()) Fail("bad-value", "generators must be an array");
    for (size_t g = 0; g < it->size(); ++g) {
      const json& gj = (*it)[g];
      const std::string where = "generators[" + std::to_string(g) + "]";
      Generator gen;
      gen.id = ReadId(Require(gj, "id", where), where + ".id");
      if (!gen_ids.insert(gen.id).second) {
        Fail("duplicate-id", "duplicate generator id " + std::to_string(gen.id));
      }
      gen.bus = bus_ref(Require(gj, "bus", where), where + ".bus");
      gen.p_min = NumberOr(gj, "p_min", 0.0, where) / base;
      gen.p_max = Number(Require(gj, "p_max", where), where + ".p_max") / base;
      gen.p_set = NumberOr(gj, "p_set", 0.0, where) / base;
      gen.startup_cost = NumberOr(gj, "startup_cost", 0.0, where);
      gen.shutdown_cost = NumberOr(gj, "shutdown_cost", 0.0, where);
      gen.min_up = IntOr(gj, "min_up", 1, where);
      gen.min_down = IntOr(gj, "min_down", 1, where);
      gen.max_starts = IntOr(gj, "max_starts", 4, where);
      gen.initial_on = BoolOr(gj, "initial_on", true, where);
      if (auto r = gj.find("reserve_caps"); r != gj.end()) {
        gen.reserve_caps = ReadReserve(*r, where + ".reserve_caps");
      }
      if (auto r = gj.find("reserve_prices"); r != gj.end()) {
        gen.reserve_prices = ReadReserve(*r, where + ".reserve_prices");
      }
      c.generators.push_back(gen);
    }
  }

  const int n = c.bus_count();
  c.demand_weights.assign(n, 0.0);
  if (auto it = doc.find("demand_weights"); it != doc.end()) {
    if (!it->is_object()) Fail("bad-value", "demand_weights must be an object");
    for (const auto& [key, value] : it->items()) {
      int id = 0;
      try {
        id = std::stoi(key);
      } catch (const std::exception&) {
        Fail("bad-value", "demand_weights key '" + key + "' is not a bus id");
      }
      const int index = c.bus_index(id);
      if (index < 0) {
        Fail("unknown-bus", "demand_weights references unknown bus " + key);
      }
      c.demand_weights[index] = Number(value, "demand_weights." + key);
    }
  } else {
    double total = 0.0;
    for (const Bus& b : c.buses) total += b.load_p;
    for (int i = 0; i < n; ++i) {
      c.demand_weights[i] = total > 0.0 ? c.buses[i].load_p / total : 1.0 / n;
    }
  }

  const json& hours = Require(doc, "hours", "case");
  if (!hours.is_array()) Fail("bad-value", "hours must be an array");
  for (size_t t = 0; t < hours.size(); ++t) {
    const json& h = hours[t];
    const std::string where = "hours[" + std::to_string(t) + "]";
    HourNode node;
    node.demand = Number(Require(h, "demand", where), where + ".demand") / base;
    if (auto r = h.find("reserve_req"); r != h.end()) {
      node.reserve_requirement = ReadReserve(*r, where + ".reserve_req");
    } else {
      const double mw = node.demand * base;
      const ReserveSet& f = options.default_reserve_fractions;
      node.reserve_requirement = {f.r * mw, f.sp * mw, f.n1 * mw, f.n3 * mw};
    }
    node.bids.assign(c.generator_count(), {});
    if (auto b = h.find("bids"); b != h.end()) {
      if (!b->is_object()) Fail("bad-value", where + ".bids must be an object");
      for (const auto& [key, value] : b->items()) {
        int id = 0;
        try {
          id = std::stoi(key);
        } catch (const std::exception&) {
          Fail("bad-value", where + ".bids key '" + key + "' is not an id");
        }
        const int g = c.generator_index(id);
        if (g < 0) {
          Fail("unknown-generator",
               where + ".bids references unknown generator " + key);
        }
        if (!value.is_array()) {
          Fail("bad-value", where + ".bids." + key + " must be an array");
        }
        for (const json& pair : value) {
          if (!pair.is_array() || pair.size() != 2) {
            Fail("bad-value", where + ".bids." + key + ": expected [price, mw]");
          }
          node.bids[g].push_back(
              BidBlock{Number(pair[0], where + ".bids." + key),
                       Number(pair[1], where + ".bids." + key)});
        }
      }
    }
    if (auto o = h.find("outcome"); o != h.end()) {
      HourOutcome out;
      out.committed = o->value("committed", std::vector<int>());
      out.dispatch = o->value("dispatch_mw", std::vector<double>());
      for (double& p : out.dispatch) p /= base;
      out.lmp = o->value("lmp", std::vector<double>());
      out.lmp_average = o->value("lmp_average", 0.0);
      node.outcome = std::move(out);
    }
    c.time_tree.hours.push_back(std::move(node));
  }
  return c;
}

NetworkCase LoadCaseFile(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "file-open", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "file-read", "cannot read " + path);
  return ParseCase(buffer.str(), options);
}

std::string SerializeCase(const NetworkCase& c) {
  const double base = c.base_mva;
  json doc;
  doc["name"] = c.name;
  doc["base_mva"] = base;

  json buses = json::array();
  for (const Bus& b : c.buses) {
    buses.push_back({{"id", b.id},
                     {"type", BusKindName(b.kind)},
                     {"vm", b.voltage_magnitude},
                     {"va", b.voltage_angle / kDegToRad},
                     {"pd", b.load_p * base},
                     {"qd", b.load_q * base},
                     {"gs", b.shunt_g * base},
                     {"bs", b.shunt_b * base},
                     {"base_kv", b.base_kv}});
  }
  doc["buses"] = std::move(buses);

  json branches = json::array();
  for (const Branch& br : c.branches) {
    branches.push_back({{"from", c.buses[br.from_bus].id},
                        {"to", c.buses[br.to_bus].id},
                        {"r", br.r},
                        {"x", br.x},
                        {"b", br.b_charging},
                        {"rating", br.rating * base},
                        {"tap", br.tap},
                        {"in_service", br.in_service}});
  }
  doc["branches"] = std::move(branches);

  json gens = json::array();
  for (const Generator& g : c.generators) {
    gens.push_back({{"id", g.id},
                    {"bus", c.buses[g.bus].id},
                    {"p_min", g.p_min * base},
                    {"p_max", g.p_max * base},
                    {"p_set", g.p_set * base},
                    {"startup_cost", g.startup_cost},
                    {"shutdown_cost", g.shutdown_cost},
                    {"min_up", g.min_up},
                    {"min_down", g.min_down},
                    {"max_starts", g.max_starts},
                    {"initial_on", g.initial_on},
                    {"reserve_caps", WriteReserve(g.reserve_caps)},
                    {"reserve_prices", WriteReserve(g.reserve_prices)}});
  }
  doc["generators"] = std::move(gens);

  json weights = json::object();
  for (int i = 0; i < c.bus_count(); ++i) {
    weights[std::to_string(c.buses[i].id)] = c.demand_weights[i];
  }
  doc["demand_weights"] = std::move(weights);

  json hours = json::array();
  for (const HourNode& h : c.time_tree.hours) {
    json bids = json::object();
    for (int g = 0; g < static_cast<int>(h.bids.size()); ++g) {
      json blocks = json::array();
      for (const BidBlock& b : h.bids[g]) {
        blocks.push_back({b.price, b.quantity});
      }
      bids[std::to_string(c.generators[g].id)] = std::move(blocks);
    }
    json node = {{"demand", h.demand * base},
                 {"reserve_req", WriteReserve(h.reserve_requirement)},
                 {"bids", std::move(bids)}};
    if (h.outcome) {
      std::vector<double> mw = h.outcome->dispatch;
      for (double& p : mw) p *= base;
      node["outcome"] = {{"committed", h.outcome->committed},
                         {"dispatch_mw", mw},
                         {"lmp", h.outcome->lmp},
                         {"lmp_average", h.outcome->lmp_average}};
    }
    hours.push_back(std::move(node));
  }
  doc["hours"] = std::move(hours);
  return doc.dump(2);
}

}  // namespace gridclear
