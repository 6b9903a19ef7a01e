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

// gridclear command-line tool.
//
//   gridclear run --case <path> --mode <m> [--slack <bus>] [--eps-pf x]
//                 [--eps-flow x] [--gap x] --out <dir>
//   gridclear serve --case <path> --port <p> [--host h] [--data <dir>]
//   gridclear convert --matpower <file.m> --out <case.json> [--hours n]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gridclear/error.h"
#include "gridclear/market_data.h"
#include "service/server.h"
#include "service/service.h"

namespace {

using gridclear::Error;
namespace svc = gridclear::service;

int Fail(const Error& e) {
  std::cerr << "gridclear: " << gridclear::ErrorKindName(e.kind()) << " ["
            << e.rule() << "]: " << e.what() << "\n";
  return svc::ExitCode(e.kind());
}

int Run(const svc::ScenarioConfig& config) {
  const svc::RunRecord record = svc::RunScenario(config);
  const auto& result = record.result;
  std::printf("run %s  mode %s  case %s  %.1f ms\n", record.run_id.c_str(),
              svc::RunModeName(config.mode), record.case_hash.c_str(),
              record.wall_time_ms);
  if (result.contains("lmp_ave")) {
    std::printf("hour  LMP_ave\n");
    for (size_t t = 0; t < result["lmp_ave"].size(); ++t) {
      std::printf("%4zu  %8.3f\n", t + 1, result["lmp_ave"][t].get<double>());
    }
  }
  std::printf("outputs written to %s\n", config.output_dir.c_str());
  if (result.contains("converged") && !result["converged"].get<bool>()) {
    std::cerr << "gridclear: commitment/power-flow iteration did not settle "
                 "within the outer-iteration limit\n";
    return svc::ExitCode(gridclear::ErrorKind::kNonConvergence);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead market clearing engine"};
  app.require_subcommand(1);

  svc::ScenarioConfig config;
  std::string mode = "full-clear";
  std::optional<int> slack;
  auto* run = app.add_subcommand("run", "Run one scenario and write results");
  run->add_option("--case", config.case_path, "Case JSON file")->required();
  run->add_option("--mode", mode, "powerflow, scuc, sced or full-clear")
      ->required();
  run->add_option("--slack", slack, "Bus id used as pricing reference");
  run->add_option("--eps-pf", config.eps_pf, "Power-flow mismatch tolerance, pu")
      ->capture_default_str();
  run->add_option("--eps-flow", config.eps_flow,
                  "Outer-loop flow change tolerance, pu")
      ->capture_default_str();
  run->add_option("--gap", config.milp_gap, "Relative MILP gap")
      ->capture_default_str();
  run->add_option("--threads", config.threads, "Worker threads for hourly stages")
      ->capture_default_str();
  run->add_option("--out", config.output_dir, "Output directory")->required();

  std::string serve_case;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "gridclear-data";
  auto* serve = app.add_subcommand("serve", "Serve the trainee HTTP API");
  serve->add_option("--case", serve_case, "Case JSON file")->required();
  serve->add_option("--port", port, "TCP port")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--data", data_dir, "Directory for run records")
      ->capture_default_str();

  std::string matpower;
  std::string convert_out;
  gridclear::MatpowerImportOptions import;
  auto* convert =
      app.add_subcommand("convert", "Convert a MATPOWER case to case JSON");
  convert->add_option("--matpower", matpower, "MATPOWER .m file")->required();
  convert->add_option("--out", convert_out, "Output JSON path")->required();
  convert->add_option("--hours", import.hours, "Horizon length")
      ->capture_default_str();
  convert->add_option("--name", import.name, "Case name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      config.mode = svc::ParseRunMode(mode);
      config.slack_bus = slack;
      return Run(config);
    }
    if (*serve) {
      const gridclear::NetworkCase c = gridclear::LoadCaseFile(serve_case);
      if (const auto v = gridclear::Validate(c); !v.empty()) {
        throw Error(gridclear::ErrorKind::kValidation, v.front().rule,
                    v.front().entity + ": " + v.front().detail);
      }
      svc::MarketService service(c, serve_case, data_dir);
      std::printf("serving %s on http://%s:%d\n", serve_case.c_str(),
                  host.c_str(), port);
      std::fflush(stdout);
      svc::Serve(service, host, port);
      return 0;
    }
    if (*convert) {
      const gridclear::NetworkCase c =
          gridclear::ImportMatpower(svc::ReadFile(matpower), import);
      svc::WriteFile(convert_out, gridclear::SerializeCase(c));
      std::printf("wrote %s (%d buses, %d branches, %d generators, %d hours)\n",
                  convert_out.c_str(), c.bus_count(), c.branch_count(),
                  c.generator_count(), c.horizon());
      return 0;
    }
  } catch (const Error& e) {
    return Fail(e);
  }
  return 0;
}
