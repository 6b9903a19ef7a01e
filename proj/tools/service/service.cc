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

#include "service.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "gridclear/market_clearing.h"
#include "gridclear/powerflow.h"

namespace gridclear::service {
namespace {

using nlohmann::json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

ClearingOptions MakeOptions(const NetworkCase& c, const ScenarioConfig& config) {
  ClearingOptions o;
  if (config.slack_bus) {
    o.slack_bus = c.bus_index(*config.slack_bus);
    if (o.slack_bus < 0) {
      throw Error(ErrorKind::kValidation, "slack-range",
                  "slack bus " + std::to_string(*config.slack_bus) +
                      " is not in the case");
    }
  }
  o.eps_pf = config.eps_pf;
  o.eps_flow = config.eps_flow;
  o.milp.gap = config.milp_gap;
  o.threads = config.threads;
  return o;
}

json BusIds(const NetworkCase& c) {
  json ids = json::array();
  for (const Bus& b : c.buses) ids.push_back(b.id);
  return ids;
}

json HourJson(const NetworkCase& c, const HourlyClearing& h) {
  const double mva = c.base_mva;
  json lmp = json::array();
  for (int i = 0; i < c.bus_count(); ++i) {
    const LmpComponents& p = h.lmp[i];
    lmp.push_back({{"bus", c.buses[i].id},
                   {"total", p.total},
                   {"fuel", p.fuel},
                   {"congestion", p.congestion},
                   {"loss", p.loss}});
  }
  json dispatch = json::array();
  for (double p : h.dispatch) dispatch.push_back(p);
  json flows = json::array();
  json duals = json::array();
  for (int l = 0; l < c.branch_count(); ++l) {
    flows.push_back(h.line_flows[l] * mva);
    duals.push_back(h.congestion_duals[l]);
  }
  return {{"hour", h.hour + 1},
          {"committed", h.committed},
          {"dispatch", dispatch},
          {"energy_price", h.energy_price},
          {"lmp", lmp},
          {"lmp_average", h.lmp_average},
          {"line_flows_mw", flows},
          {"congestion_duals", duals},
          {"delivery_factors", h.delivery_factors},
          {"cost", h.cost},
          {"loss_mw", h.loss * mva}};
}

json ScheduleJson(const NetworkCase& c, const CommitmentSchedule& s) {
  json hours = json::array();
  for (int t = 0; t < s.horizon(); ++t) {
    json on = json::array(), dispatch = json::array(), reserves = json::array();
    for (int g = 0; g < s.generator_count(); ++g) {
      on.push_back(s.on[g][t]);
      dispatch.push_back(s.dispatch(g, t));
      const ReserveSet& r = s.reserves[g][t];
      reserves.push_back({{"r", r.r}, {"sp", r.sp}, {"n1", r.n1}, {"n3", r.n3}});
    }
    hours.push_back({{"hour", t + 1},
                     {"committed", on},
                     {"dispatch", dispatch},
                     {"reserves_mw", reserves}});
  }
  json ids = json::array();
  for (const Generator& g : c.generators) ids.push_back(g.id);
  return {{"generators", ids},
          {"objective_value", s.objective_value},
          {"hours", hours}};
}

json PowerFlowJson(const NetworkCase& c, const ScenarioConfig& config) {
  PowerFlowOptions o;
  o.tolerance = config.eps_pf;
  const PowerFlowSolution s = SolveFastDecoupled(c, o);
  if (!s.converged) {
    throw Error(ErrorKind::kNonConvergence, "powerflow-divergence",
                "power flow did not converge (mismatch " +
                    std::to_string(s.max_mismatch) + " pu after " +
                    std::to_string(s.iterations) + " iterations)");
  }
  const double mva = c.base_mva;
  json buses = json::array();
  for (int i = 0; i < c.bus_count(); ++i) {
    buses.push_back({{"bus", c.buses[i].id},
                     {"vm", s.v_mag[i]},
                     {"va_deg", s.v_ang[i] * kRadToDeg},
                     {"p_mw", s.p_injection[i] * mva},
                     {"q_mvar", s.q_injection[i] * mva}});
  }
  json branches = json::array();
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    branches.push_back({{"from", c.buses[br.from_bus].id},
                        {"to", c.buses[br.to_bus].id},
                        {"p_from_mw", s.flows.p_from[l] * mva},
                        {"q_from_mvar", s.flows.q_from[l] * mva},
                        {"p_to_mw", s.flows.p_to[l] * mva},
                        {"q_to_mvar", s.flows.q_to[l] * mva}});
  }
  return {{"mode", RunModeName(RunMode::kPowerFlow)},
          {"converged", s.converged},
          {"iterations", s.iterations},
          {"max_mismatch", s.max_mismatch},
          {"total_loss_mw", s.total_loss * mva},
          {"buses", buses},
          {"branches", branches}};
}

json PricedJson(const NetworkCase& c, RunMode mode,
                const CommitmentSchedule& schedule,
                const std::vector<HourlyClearing>& hours, int slack) {
  json out = {{"mode", RunModeName(mode)},
              {"slack_bus", c.buses[slack].id},
              {"buses", BusIds(c)},
              {"schedule", ScheduleJson(c, schedule)}};
  json h = json::array();
  json ave = json::array();
  for (const HourlyClearing& x : hours) {
    h.push_back(HourJson(c, x));
    ave.push_back(x.lmp_average);
  }
  out["hours"] = h;
  out["lmp_ave"] = ave;
  return out;
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json ConfigJson(const ScenarioConfig& c) {
  return {{"case_path", c.case_path},
          {"mode", RunModeName(c.mode)},
          {"slack_bus", c.slack_bus ? json(*c.slack_bus) : json(nullptr)},
          {"eps_pf", c.eps_pf},
          {"eps_flow", c.eps_flow},
          {"milp_gap", c.milp_gap},
          {"output_dir", c.output_dir}};
}

ScenarioConfig ConfigFromJson(const json& j) {
  ScenarioConfig c;
  c.case_path = j.at("case_path").get<std::string>();
  c.mode = ParseRunMode(j.at("mode").get<std::string>());
  if (!j.at("slack_bus").is_null()) c.slack_bus = j.at("slack_bus").get<int>();
  c.eps_pf = j.at("eps_pf").get<double>();
  c.eps_flow = j.at("eps_flow").get<double>();
  c.milp_gap = j.at("milp_gap").get<double>();
  c.output_dir = j.at("output_dir").get<std::string>();
  return c;
}

}  // namespace

const char* RunModeName(RunMode mode) {
  switch (mode) {
    case RunMode::kPowerFlow: return "powerflow";
    case RunMode::kScuc: return "scuc";
    case RunMode::kSced: return "sced";
    case RunMode::kFullClear: return "full-clear";
  }
  return "unknown";
}

RunMode ParseRunMode(std::string_view name) {
  for (RunMode m : {RunMode::kPowerFlow, RunMode::kScuc, RunMode::kSced,
                    RunMode::kFullClear}) {
    if (name == RunModeName(m)) return m;
  }
  throw Error(ErrorKind::kParse, "bad-mode",
              "unknown mode '" + std::string(name) +
                  "' (expected powerflow, scuc, sced or full-clear)");
}

void CheckConfig(const ScenarioConfig& config) {
  if (!(config.eps_pf > 0.0) || !(config.eps_flow > 0.0) ||
      !(config.milp_gap > 0.0)) {
    throw Error(ErrorKind::kValidation, "tolerance",
                "tolerances must be positive");
  }
}

std::string ContentHash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string CaseHash(const NetworkCase& c) {
  return ContentHash(SerializeCase(c));
}

std::string NewRunId() {
  static std::atomic<unsigned> counter{0};
  static const std::uint64_t seed = std::random_device{}();
  const auto now = std::chrono::system_clock::now().time_since_epoch().count();
  const std::string key = std::to_string(seed) + ":" + std::to_string(now) +
                          ":" + std::to_string(counter++);
  return ContentHash(key);
}

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json RunCase(const NetworkCase& c, const ScenarioConfig& config) {
  CheckConfig(config);
  const ClearingOptions options = MakeOptions(c, config);
  switch (config.mode) {
    case RunMode::kPowerFlow:
      return PowerFlowJson(c, config);
    case RunMode::kScuc: {
      const ScucResult r = SolveScucWithNetwork(c, options);
      json out = {{"mode", RunModeName(config.mode)},
                  {"buses", BusIds(c)},
                  {"schedule", ScheduleJson(c, r.schedule)},
                  {"outer_iterations", r.pf_iterations},
                  {"converged", r.converged},
                  {"max_flow_change", r.max_flow_change},
                  {"milp_gap", r.milp_gap},
                  {"milp_nodes", r.milp_nodes},
                  {"model_rows", r.model_rows},
                  {"model_columns", r.model_columns}};
      return out;
    }
    case RunMode::kSced: {
      const CommitmentSchedule s = ScheduleFromCase(c);
      int slack = 0;
      const std::vector<HourlyClearing> hours =
          DispatchSchedule(c, s, options, &slack);
      json out = PricedJson(c, config.mode, s, hours, slack);
      out["converged"] = true;
      return out;
    }
    case RunMode::kFullClear: {
      const ClearingResult r = ClearMarket(c, options);
      json out = PricedJson(c, config.mode, r.schedule, r.hours, r.slack_bus);
      out["outer_iterations"] = r.pf_iterations;
      out["converged"] = r.converged;
      out["max_flow_change"] = r.max_flow_change;
      out["milp_gap"] = r.milp_gap;
      out["milp_nodes"] = r.milp_nodes;
      return out;
    }
  }
  return json::object();
}

RunRecord RunScenario(const NetworkCase& c, const ScenarioConfig& config) {
  RunRecord record;
  record.run_id = NewRunId();
  record.config = config;
  record.case_hash = CaseHash(c);
  record.created_at = UtcTimestamp();
  const auto start = std::chrono::steady_clock::now();
  record.result = RunCase(c, config);
  record.wall_time_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  if (!config.output_dir.empty()) WriteOutputs(record, config.output_dir);
  return record;
}

RunRecord RunScenario(const ScenarioConfig& config) {
  CheckConfig(config);
  const NetworkCase c = LoadCaseFile(config.case_path);
  return RunScenario(c, config);
}

json RecordToJson(const RunRecord& r) {
  return {{"run_id", r.run_id},
          {"config", ConfigJson(r.config)},
          {"case_hash", r.case_hash},
          {"result", r.result},
          {"wall_time_ms", r.wall_time_ms},
          {"created_at", r.created_at}};
}

RunRecord RecordFromJson(const json& doc) {
  RunRecord r;
  try {
    r.run_id = doc.at("run_id").get<std::string>();
    r.config = ConfigFromJson(doc.at("config"));
    r.case_hash = doc.at("case_hash").get<std::string>();
    r.result = doc.at("result");
    r.wall_time_ms = doc.at("wall_time_ms").get<double>();
    r.created_at = doc.at("created_at").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, "bad-record", e.what());
  }
  return r;
}

std::string SerializeRecord(const RunRecord& record) {
  return RecordToJson(record).dump(2) + "\n";
}

std::string LmpCsv(const json& result) {
  std::ostringstream out;
  out << "hour";
  for (const json& id : result.at("buses")) out << ",bus_" << id.get<int>();
  out << "\n";
  for (const json& h : result.at("hours")) {
    out << h.at("hour").get<int>();
    for (const json& p : h.at("lmp")) {
      out << "," << FormatNumber(p.at("total").get<double>());
    }
    out << "\n";
  }
  return out.str();
}

std::string CommitmentCsv(const json& result) {
  const json& schedule = result.at("schedule");
  const json& ids = schedule.at("generators");
  const bool priced = result.contains("lmp_ave");
  std::ostringstream out;
  out << "Hour";
  for (const json& id : ids) out << ",I_g" << id.get<int>();
  for (const json& id : ids) out << ",P_g" << id.get<int>();
  out << ",LMP_ave\n";
  const json& hours = schedule.at("hours");
  for (size_t t = 0; t < hours.size(); ++t) {
    const json& h = hours[t];
    out << h.at("hour").get<int>();
    for (const json& v : h.at("committed")) out << "," << v.get<int>();
    // Priced runs report the dispatch that set the prices.
    const json& p = priced ? result.at("hours")[t].at("dispatch")
                           : h.at("dispatch");
    for (const json& v : p) out << "," << FormatNumber(v.get<double>());
    out << ",";
    if (priced) out << FormatNumber(result.at("lmp_ave")[t].get<double>());
    out << "\n";
  }
  return out.str();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "file-read", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (out) out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::kIo, "file-write", "cannot write " + path);
}

void WriteOutputs(const RunRecord& record, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "runs", ec);
  if (ec) {
    throw Error(ErrorKind::kIo, "output-dir",
                "cannot create " + dir + ": " + ec.message());
  }
  const std::string text = SerializeRecord(record);
  WriteFile((fs::path(dir) / "results.json").string(), text);
  WriteFile((fs::path(dir) / "runs" / (record.run_id + ".json")).string(),
            text);
  const json& result = record.result;
  if (result.contains("hours")) {
    WriteFile((fs::path(dir) / "lmp.csv").string(), LmpCsv(result));
  }
  if (result.contains("schedule")) {
    WriteFile((fs::path(dir) / "commitment.csv").string(),
              CommitmentCsv(result));
  }
}

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation: return 2;
    case ErrorKind::kInfeasible: return 3;
    case ErrorKind::kNonConvergence:
    case ErrorKind::kSingular: return 4;
    case ErrorKind::kIo: return 5;
    case ErrorKind::kDimension: return 1;
  }
  return 1;
}

}  // namespace gridclear::service
