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

// Scenario runner shared by the `run` command and the HTTP service: executes
// one pipeline on a case, turns the outcome into a JSON record and persists
// it together with CSV views.

#ifndef GRIDCLEAR_TOOLS_SERVICE_SERVICE_H_
#define GRIDCLEAR_TOOLS_SERVICE_SERVICE_H_

#include <optional>
#include <string>
#include <string_view>

#include "gridclear/error.h"
#include "gridclear/market_data.h"
#include "json.hpp"

namespace gridclear::service {

enum class RunMode { kPowerFlow, kScuc, kSced, kFullClear };

const char* RunModeName(RunMode mode);
// Throws Error(kParse, "bad-mode").
RunMode ParseRunMode(std::string_view name);

struct ScenarioConfig {
  std::string case_path;  // informational when the case is passed in memory
  RunMode mode = RunMode::kFullClear;
  std::optional<int> slack_bus;  // bus id
  double eps_pf = 1e-6;
  double eps_flow = 1e-3;
  double milp_gap = 1e-6;
  std::string output_dir;
  int threads = 1;
};

// Throws Error(kValidation, "tolerance") for non-positive tolerances.
void CheckConfig(const ScenarioConfig& config);

struct RunRecord {
  std::string run_id;
  ScenarioConfig config;
  std::string case_hash;
  nlohmann::json result;
  double wall_time_ms = 0.0;
  std::string created_at;
};

// 64-bit FNV-1a over the bytes, as 16 lowercase hex digits.
std::string ContentHash(std::string_view bytes);
// Hash of the canonical serialization, so equal cases hash equally whatever
// their file formatting.
std::string CaseHash(const NetworkCase& c);

std::string NewRunId();
std::string UtcTimestamp();

// Runs the configured pipeline and returns the result payload. The payload
// depends only on the case and the solver settings.
nlohmann::json RunCase(const NetworkCase& c, const ScenarioConfig& config);

// Loads config.case_path, runs it and, when output_dir is set, writes the
// outputs. Library errors propagate unchanged.
RunRecord RunScenario(const ScenarioConfig& config);
RunRecord RunScenario(const NetworkCase& c, const ScenarioConfig& config);

nlohmann::json RecordToJson(const RunRecord& record);
RunRecord RecordFromJson(const nlohmann::json& doc);
// Canonical text of a record; the stored file and the HTTP body are both
// this string.
std::string SerializeRecord(const RunRecord& record);

// Writes results.json, runs/<id>.json and the CSV views into `dir`.
// Throws Error(kIo) naming the path on failure.
void WriteOutputs(const RunRecord& record, const std::string& dir);

// Hour x bus matrix of total LMP; header "hour,<bus id>...".
std::string LmpCsv(const nlohmann::json& result);
// One row per hour: Hour, I_g..., P_g... (pu), LMP_ave.
std::string CommitmentCsv(const nlohmann::json& result);

// Process exit code for a library error: parse and validation 2,
// infeasible 3, non-convergence and singular 4, I/O 5, anything else 1.
int ExitCode(ErrorKind kind);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view text);

}  // namespace gridclear::service

#endif  // GRIDCLEAR_TOOLS_SERVICE_SERVICE_H_
