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

#include "gridclear/sensitivities.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "gridclear/error.h"
#include "parallel.h"

namespace gridclear {
namespace {

struct ReducedDc {
  std::vector<int> row;  // bus -> reduced row or -1 at slack
  sparse::LUFactors lu;
};

bool Connected(const NetworkCase& c) {
  const int n = c.bus_count();
  if (n == 0) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n;
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    const int a = find(br.from_bus);
    const int b = find(br.to_bus);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

ReducedDc FactorReducedDc(const NetworkCase& c, int slack) {
  const int n = c.bus_count();
  if (slack < 0 || slack >= n) {
    throw Error(ErrorKind::kValidation, "slack-range",
                "slack bus index " + std::to_string(slack) + " out of range");
  }
  if (!Connected(c)) {
    throw Error(ErrorKind::kValidation, "disconnected",
                "in-service branches do not span all buses");
  }
  ReducedDc dc;
  dc.row.assign(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (i != slack) dc.row[i] = m++;
  }
  std::vector<sparse::Triplet> t;
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    if (!br.in_service) continue;
    if (br.x == 0.0) {
      throw Error(ErrorKind::kValidation, "branch-zero-x",
                  "branch " + std::to_string(l + 1) + " has zero reactance");
    }
    const double b = 1.0 / br.x;
    const int f = dc.row[br.from_bus];
    const int to = dc.row[br.to_bus];
    if (f >= 0) t.push_back({f, f, b});
    if (to >= 0) t.push_back({to, to, b});
    if (f >= 0 && to >= 0) {
      t.push_back({f, to, -b});
      t.push_back({to, f, -b});
    }
  }
  if (m > 0) {
    const auto bmat = sparse::SparseMatrix::FromTriplets(m, m, std::move(t));
    dc.lu = sparse::NumericFactorize(bmat, sparse::SymbolicFactorize(bmat));
  }
  return dc;
}

std::vector<double> AnglesFor(const ReducedDc& dc, std::span<const double> p,
                              int n) {
  std::vector<double> rhs(dc.lu.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    if (dc.row[i] >= 0) rhs[dc.row[i]] = p[i];
  }
  std::vector<double> theta(n, 0.0);
  if (rhs.empty()) return theta;
  const std::vector<double> x = sparse::Solve(dc.lu, rhs);
  for (int i = 0; i < n; ++i) {
    if (dc.row[i] >= 0) theta[i] = x[dc.row[i]];
  }
  return theta;
}

}  // namespace

std::vector<double> ShiftFactorTable::Flows(
    std::span<const double> injection) const {
  std::vector<double> flows(gsf.size(), 0.0);
  for (size_t l = 0; l < gsf.size(); ++l) {
    double f = 0.0;
    for (size_t i = 0; i < injection.size(); ++i) f += gsf[l][i] * injection[i];
    flows[l] = f;
  }
  return flows;
}

ShiftFactorTable GenerationShiftFactors(const NetworkCase& c, int slack_bus,
                                        const sparse::ExecutionOptions& exec) {
  const ReducedDc dc = FactorReducedDc(c, slack_bus);
  const int n = c.bus_count();
  const int nl = c.branch_count();
  ShiftFactorTable table;
  table.slack_bus = slack_bus;
  table.gsf.assign(nl, std::vector<double>(n, 0.0));
  internal::ParallelFor(0, n, exec.threads, [&](int, int i) {
    if (i == slack_bus) return;
    std::vector<double> unit(n, 0.0);
    unit[i] = 1.0;
    const std::vector<double> theta = AnglesFor(dc, unit, n);
    for (int l = 0; l < nl; ++l) {
      const Branch& br = c.branches[l];
      if (!br.in_service) continue;
      table.gsf[l][i] = (theta[br.from_bus] - theta[br.to_bus]) / br.x;
    }
  });
  return table;
}

std::vector<double> DcFlows(const NetworkCase& c, int slack_bus,
                            std::span<const double> injection) {
  const ReducedDc dc = FactorReducedDc(c, slack_bus);
  const std::vector<double> theta = AnglesFor(dc, injection, c.bus_count());
  std::vector<double> flows(c.branch_count(), 0.0);
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    if (br.in_service) {
      flows[l] = (theta[br.from_bus] - theta[br.to_bus]) / br.x;
    }
  }
  return flows;
}

DeliveryFactorTable DeliveryFactors(const FastDecoupledSolver& solver,
                                    const BusInjections& injections,
                                    const PowerFlowSolution& base,
                                    int slack_bus,
                                    const DeliveryFactorOptions& options) {
  const NetworkCase& c = solver.network();
  const int n = c.bus_count();
  if (slack_bus < 0 || slack_bus >= n) {
    throw Error(ErrorKind::kValidation, "slack-range",
                "slack bus index " + std::to_string(slack_bus) +
                    " out of range");
  }
  DeliveryFactorTable table;
  table.slack_bus = slack_bus;
  table.loss_sensitivity.assign(n, 0.0);
  table.df.assign(n, 1.0);
  // Without series resistance or shunt conductance the losses are zero for
  // every injection pattern; differencing would only return round-off.
  const bool lossless =
      std::all_of(c.branches.begin(), c.branches.end(),
                  [](const Branch& br) { return !br.in_service || br.r == 0.0; }) &&
      std::all_of(c.buses.begin(), c.buses.end(),
                  [](const Bus& b) { return b.shunt_g == 0.0; });
  if (lossless) return table;

  const int pf_slack = c.slack_index();
  PowerFlowOptions pf;
  pf.tolerance = options.tolerance;
  pf.max_iterations = options.max_iterations;
  pf.initial_vm = base.v_mag;
  pf.initial_va = base.v_ang;

  // Sensitivity with the power flow slack absorbing the perturbation.
  std::vector<double> raw(n, 0.0);
  internal::ParallelFor(0, n, options.threads, [&](int, int i) {
    if (i == pf_slack) return;
    double loss[2];
    for (int s = 0; s < 2; ++s) {
      BusInjections perturbed = injections;
      perturbed.p[i] += s == 0 ? options.delta : -options.delta;
      const PowerFlowSolution sol = solver.Solve(perturbed, pf);
      if (!sol.converged) {
        throw Error(ErrorKind::kNonConvergence, "df-perturbation",
                    "perturbed power flow at bus " +
                        std::to_string(c.buses[i].id) + " did not converge");
      }
      loss[s] = sol.total_loss;
    }
    raw[i] = (loss[0] - loss[1]) / (2.0 * options.delta);
  });

  for (int i = 0; i < n; ++i) {
    if (i == slack_bus) continue;
    table.loss_sensitivity[i] = raw[i] - raw[slack_bus];
    table.df[i] = 1.0 - table.loss_sensitivity[i];
  }
  return table;
}

}  // namespace gridclear
