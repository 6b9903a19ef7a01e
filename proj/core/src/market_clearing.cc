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

#include "gridclear/market_clearing.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridclear/error.h"
#include "parallel.h"

namespace gridclear {
namespace {

using milp::Relation;
using milp::Term;

std::string Tag(const NetworkCase& c, int g, int t) {
  return "_g" + std::to_string(c.generators[g].id) + "_t" +
         std::to_string(t + 1);
}

double OfferedCapacity(const NetworkCase& c, int g, int t) {
  double q = 0.0;
  for (const BidBlock& b : c.time_tree.hours[t].bids[g]) q += b.quantity;
  return std::min(q / c.base_mva, c.generators[g].p_max);
}

void CheckReserveCapability(const NetworkCase& c) {
  ReserveSet cap;
  for (const Generator& g : c.generators) {
    cap.r += g.reserve_caps.r;
    cap.sp += g.reserve_caps.sp;
    cap.n1 += g.reserve_caps.n1;
    cap.n3 += g.reserve_caps.n3;
  }
  const double tol = 1e-9;
  for (int t = 0; t < c.horizon(); ++t) {
    const ReserveSet& req = c.time_tree.hours[t].reserve_requirement;
    struct Check {
      const char* product;
      double need;
      double have;
    };
    const Check checks[] = {
        {"regulation", req.r, cap.r},
        {"spinning", req.sp, cap.sp},
        {"spinning + 10-min", req.sp + req.n1, cap.sp + cap.n1},
        {"spinning + 10-min + 30-min", req.sp + req.n1 + req.n3,
         cap.sp + cap.n1 + cap.n3},
    };
    for (const Check& k : checks) {
      if (k.need > k.have + tol) {
        throw Error(ErrorKind::kInfeasible, "reserve-requirement",
                    "hour " + std::to_string(t + 1) + ": " + k.product +
                        " requirement " + std::to_string(k.need) +
                        " MW exceeds total capability " +
                        std::to_string(k.have) + " MW");
      }
    }
  }
}

int SlackFor(const NetworkCase& c, int requested) {
  const int slack = requested >= 0 ? requested : c.slack_index();
  if (slack < 0 || slack >= c.bus_count()) {
    throw Error(ErrorKind::kValidation, "slack-range",
                "no usable slack bus for pricing");
  }
  return slack;
}

void RequireValid(const NetworkCase& c) {
  const std::vector<Violation> v = Validate(c);
  if (!v.empty()) {
    throw Error(ErrorKind::kValidation, v.front().rule,
                v.front().entity + ": " + v.front().detail);
  }
}

PowerFlowSolution HourPowerFlow(const FastDecoupledSolver& solver,
                                const NetworkCase& c, int t,
                                std::span<const double> dispatch,
                                const ClearingOptions& options,
                                int outer_iteration) {
  PowerFlowOptions pf;
  pf.tolerance = options.eps_pf;
  pf.max_iterations = options.pf_max_iterations;
  PowerFlowSolution sol = solver.Solve(HourInjections(c, t, dispatch), pf);
  if (!sol.converged) {
    std::string where = "hour " + std::to_string(t + 1);
    if (outer_iteration > 0) {
      where += ", outer iteration " + std::to_string(outer_iteration);
    }
    throw Error(ErrorKind::kNonConvergence, "powerflow-divergence",
                where + ": AC power flow did not converge (mismatch " +
                    std::to_string(sol.max_mismatch) + " pu)");
  }
  return sol;
}

std::vector<HourlyClearing> PriceHours(
    const NetworkCase& c, const CommitmentSchedule& schedule,
    const std::vector<PowerFlowSolution>& flows, const ShiftFactorTable& gsf,
    const FastDecoupledSolver& solver, const ClearingOptions& options) {
  std::vector<HourlyClearing> hours(c.horizon());
  internal::ParallelFor(0, c.horizon(), options.threads, [&](int, int t) {
    const std::vector<double> dispatch = schedule.HourDispatch(t);
    const ScedTables tables = MakeScedTables(solver, gsf, c, t, dispatch,
                                             flows[t], options.delivery);
    const ScedModel sced = BuildSced(c, t, schedule, tables);
    hours[t] = ClearHour(c, sced, tables, options.loss_pricing);
  });
  return hours;
}

}  // namespace

double CommitmentSchedule::dispatch(int g, int t) const {
  double p = 0.0;
  for (double v : block_dispatch[g][t]) p += v;
  return p;
}

std::vector<double> CommitmentSchedule::HourDispatch(int t) const {
  std::vector<double> out(generator_count());
  for (int g = 0; g < generator_count(); ++g) out[g] = dispatch(g, t);
  return out;
}

FlowBasePoint DcBasePoint(const NetworkCase& c, const ShiftFactorTable& gsf) {
  FlowBasePoint base;
  for (int t = 0; t < c.horizon(); ++t) {
    base.dispatch.emplace_back(c.generator_count(), 0.0);
    std::vector<double> inj = HourLoadsP(c, t);
    for (double& v : inj) v = -v;
    base.line_flows.push_back(gsf.Flows(inj));
  }
  return base;
}

ScucModel BuildScuc(const NetworkCase& c, const ShiftFactorTable& gsf,
                    const FlowBasePoint& base) {
  CheckReserveCapability(c);
  const int ng = c.generator_count();
  const int nt = c.horizon();
  const double mva = c.base_mva;
  ScucModel s;
  milp::LinearModel& m = s.model;
  s.on.assign(ng, std::vector<int>(nt));
  s.start.assign(ng, std::vector<int>(nt));
  s.stop.assign(ng, std::vector<int>(nt));
  s.block.assign(ng, std::vector<std::vector<int>>(nt));
  s.reserve.assign(ng, std::vector<std::array<int, 4>>(nt));

  for (int g = 0; g < ng; ++g) {
    const Generator& gen = c.generators[g];
    for (int t = 0; t < nt; ++t) {
      const std::string tag = Tag(c, g, t);
      s.on[g][t] = m.AddBinary("on" + tag);
      s.start[g][t] = m.AddBinary("su" + tag);
      s.stop[g][t] = m.AddBinary("sd" + tag);
      m.SetObjectiveCoefficient(s.start[g][t], gen.startup_cost);
      m.SetObjectiveCoefficient(s.stop[g][t], gen.shutdown_cost);

      const auto& bids = c.time_tree.hours[t].bids[g];
      for (size_t j = 0; j < bids.size(); ++j) {
        const double ub = bids[j].quantity / mva;
        const int p = m.AddVariable("p" + tag + "_b" + std::to_string(j + 1),
                                    0.0, ub);
        m.SetObjectiveCoefficient(p, bids[j].price * mva);
        s.block[g][t].push_back(p);
        m.AddConstraint("blk" + tag + "_b" + std::to_string(j + 1),
                        {{p, 1.0}, {s.on[g][t], -ub}}, Relation::kLessEqual,
                        0.0);
      }

      const double caps[4] = {gen.reserve_caps.r, gen.reserve_caps.sp,
                              gen.reserve_caps.n1, gen.reserve_caps.n3};
      const double prices[4] = {gen.reserve_prices.r, gen.reserve_prices.sp,
                                gen.reserve_prices.n1, gen.reserve_prices.n3};
      const char* names[4] = {"rr", "rsp", "rn1", "rn3"};
      for (int k = 0; k < 4; ++k) {
        const double cap = caps[k] / mva;
        const int r = m.AddVariable(names[k] + tag, 0.0, cap);
        m.SetObjectiveCoefficient(r, prices[k] * mva);
        s.reserve[g][t][k] = r;
        if (k < 2) {
          m.AddConstraint(std::string(names[k]) + "cap" + tag,
                          {{r, 1.0}, {s.on[g][t], -cap}}, Relation::kLessEqual,
                          0.0);
        }
      }

      if (gen.p_min > 0.0) {
        std::vector<Term> output = {{s.on[g][t], -gen.p_min}};
        for (int p : s.block[g][t]) output.push_back({p, 1.0});
        m.AddConstraint("pmin" + tag, std::move(output),
                        Relation::kGreaterEqual, 0.0);
      }
      std::vector<Term> total;
      for (int k = 0; k < 4; ++k) total.push_back({s.reserve[g][t][k], 1.0});
      for (int p : s.block[g][t]) total.push_back({p, 1.0});
      m.AddConstraint("pmax" + tag, std::move(total), Relation::kLessEqual,
                      gen.p_max);
    }

    for (int t = 0; t < nt; ++t) {
      const std::string tag = Tag(c, g, t);
      std::vector<Term> logic = {{s.on[g][t], 1.0},
                                 {s.start[g][t], -1.0},
                                 {s.stop[g][t], 1.0}};
      double rhs = 0.0;
      if (t == 0) {
        rhs = gen.initial_on ? 1.0 : 0.0;
      } else {
        logic.push_back({s.on[g][t - 1], -1.0});
      }
      m.AddConstraint("state" + tag, std::move(logic), Relation::kEqual, rhs);
      m.AddConstraint("susd" + tag, {{s.start[g][t], 1.0}, {s.stop[g][t], 1.0}},
                      Relation::kLessEqual, 1.0);

      // Minimum up/down over a window of K hours starting at t.
      const int k_up = std::min(nt - t, gen.min_up);
      if (k_up >= 2) {
        std::vector<Term> terms = {{s.start[g][t], static_cast<double>(k_up)}};
        for (int u = t; u < t + k_up; ++u) terms.push_back({s.on[g][u], -1.0});
        m.AddConstraint("minup" + tag, std::move(terms), Relation::kLessEqual,
                        0.0);
      }
      const int k_dn = std::min(nt - t, gen.min_down);
      if (k_dn >= 2) {
        std::vector<Term> terms = {{s.stop[g][t], static_cast<double>(k_dn)}};
        for (int u = t; u < t + k_dn; ++u) terms.push_back({s.on[g][u], 1.0});
        m.AddConstraint("mindn" + tag, std::move(terms), Relation::kLessEqual,
                        static_cast<double>(k_dn));
      }
    }
    std::vector<Term> starts;
    for (int t = 0; t < nt; ++t) starts.push_back({s.start[g][t], 1.0});
    m.AddConstraint("nstart_g" + std::to_string(gen.id), std::move(starts),
                    Relation::kLessEqual, gen.max_starts);
  }

  for (int t = 0; t < nt; ++t) {
    const HourNode& hour = c.time_tree.hours[t];
    const std::string ht = "_t" + std::to_string(t + 1);
    std::vector<Term> supply;
    for (int g = 0; g < ng; ++g) {
      for (int p : s.block[g][t]) supply.push_back({p, 1.0});
    }
    s.balance_rows.push_back(m.AddConstraint("balance" + ht, std::move(supply),
                                             Relation::kEqual, hour.demand));

    const ReserveSet& req = hour.reserve_requirement;
    auto reserve_row = [&](const std::string& name, std::initializer_list<int> ks,
                           double need) {
      std::vector<Term> terms;
      for (int g = 0; g < ng; ++g) {
        for (int k : ks) terms.push_back({s.reserve[g][t][k], 1.0});
      }
      m.AddConstraint(name + ht, std::move(terms), Relation::kGreaterEqual,
                      need / mva);
    };
    reserve_row("req_r", {0}, req.r);
    reserve_row("req_sp", {1}, req.sp);
    reserve_row("req_n1", {1, 2}, req.sp + req.n1);
    reserve_row("req_n3", {1, 2, 3}, req.sp + req.n1 + req.n3);
  }

  // Linearized line limits around the previous iterate, both directions.
  for (int t = 0; t < nt; ++t) {
    for (int l = 0; l < c.branch_count(); ++l) {
      const Branch& br = c.branches[l];
      if (!br.in_service || br.rating <= 0.0) continue;
      const double f_prev = base.line_flows[t][l];
      double shift_prev = 0.0;
      double reach_up = 0.0;
      double reach_down = 0.0;
      std::vector<Term> terms;
      for (int g = 0; g < ng; ++g) {
        const double k = gsf.at(l, c.generators[g].bus);
        const double p_prev = base.dispatch[t][g];
        shift_prev += k * p_prev;
        const double lo = k * (0.0 - p_prev);
        const double hi = k * (OfferedCapacity(c, g, t) - p_prev);
        reach_up += std::max(lo, hi);
        reach_down += std::min(lo, hi);
        if (k == 0.0) continue;
        for (int p : s.block[g][t]) terms.push_back({p, k});
      }
      const bool need_up = f_prev + reach_up > br.rating;
      const bool need_down = f_prev + reach_down < -br.rating;
      if (!need_up && !need_down) {
        ++s.screened_lines;
        continue;
      }
      LineRow row{t, l, -1, -1};
      const std::string name =
          "line_l" + std::to_string(l + 1) + "_t" + std::to_string(t + 1);
      if (need_up) {
        row.upper_row = m.AddConstraint(name + "_up", terms,
                                        Relation::kLessEqual,
                                        br.rating - f_prev + shift_prev);
      }
      if (need_down) {
        row.lower_row = m.AddConstraint(name + "_dn", terms,
                                        Relation::kGreaterEqual,
                                        -br.rating - f_prev + shift_prev);
      }
      s.line_rows.push_back(row);
    }
  }
  return s;
}

CommitmentSchedule SolveScuc(const ScucModel& scuc, const NetworkCase& c,
                             const milp::MilpOptions& options,
                             milp::LpSolution* raw) {
  milp::LpSolution sol = milp::SolveMilp(scuc.model, options);
  if (!sol.has_solution) {
    if (sol.status == milp::SolveStatus::kTimeLimit) {
      throw Error(ErrorKind::kNonConvergence, "scuc-time-limit",
                  "unit commitment found no schedule within the time limit");
    }
    throw Error(ErrorKind::kInfeasible, "scuc-infeasible",
                std::string("unit commitment is ") +
                    milp::SolveStatusName(sol.status));
  }
  const int ng = c.generator_count();
  const int nt = c.horizon();
  CommitmentSchedule out;
  out.on.assign(ng, std::vector<int>(nt));
  out.start.assign(ng, std::vector<int>(nt));
  out.stop.assign(ng, std::vector<int>(nt));
  out.block_dispatch.assign(ng, std::vector<std::vector<double>>(nt));
  out.reserves.assign(ng, std::vector<ReserveSet>(nt));
  for (int g = 0; g < ng; ++g) {
    for (int t = 0; t < nt; ++t) {
      out.on[g][t] = static_cast<int>(std::lround(sol.primal[scuc.on[g][t]]));
      out.start[g][t] =
          static_cast<int>(std::lround(sol.primal[scuc.start[g][t]]));
      out.stop[g][t] =
          static_cast<int>(std::lround(sol.primal[scuc.stop[g][t]]));
      for (int p : scuc.block[g][t]) {
        out.block_dispatch[g][t].push_back(std::max(0.0, sol.primal[p]));
      }
      const auto& r = scuc.reserve[g][t];
      out.reserves[g][t] = {sol.primal[r[0]] * c.base_mva,
                            sol.primal[r[1]] * c.base_mva,
                            sol.primal[r[2]] * c.base_mva,
                            sol.primal[r[3]] * c.base_mva};
    }
  }
  out.objective_value = sol.objective_value;
  if (raw != nullptr) *raw = std::move(sol);
  return out;
}

ScucResult SolveScucWithNetwork(const NetworkCase& c,
                                const ClearingOptions& options) {
  RequireValid(c);
  const int slack = SlackFor(c, options.slack_bus);
  const ShiftFactorTable gsf = GenerationShiftFactors(c, slack);
  const FastDecoupledSolver solver(c);
  FlowBasePoint base = DcBasePoint(c, gsf);
  ScucResult result;
  const int nt = c.horizon();
  for (int k = 1; k <= std::max(1, options.max_outer); ++k) {
    const ScucModel scuc = BuildScuc(c, gsf, base);
    milp::LpSolution raw;
    result.schedule = SolveScuc(scuc, c, options.milp, &raw);
    result.milp_gap = raw.gap;
    result.milp_nodes = raw.nodes;
    result.model_rows = scuc.model.constraint_count();
    result.model_columns = scuc.model.variable_count();
    result.pf_iterations = k;

    FlowBasePoint next;
    result.hour_flows.assign(nt, {});
    internal::ParallelFor(0, nt, options.threads, [&](int, int t) {
      result.hour_flows[t] = HourPowerFlow(
          solver, c, t, result.schedule.HourDispatch(t), options, k);
    });
    double change = 0.0;
    bool violated = false;
    result.max_violation_hour = -1;
    for (int t = 0; t < nt; ++t) {
      next.dispatch.push_back(result.schedule.HourDispatch(t));
      next.line_flows.push_back(result.hour_flows[t].flows.p_from);
      for (int l = 0; l < c.branch_count(); ++l) {
        const Branch& br = c.branches[l];
        const double f = next.line_flows[t][l];
        change = std::max(change, std::abs(f - base.line_flows[t][l]));
        if (br.in_service && br.rating > 0.0 &&
            std::abs(f) > br.rating + options.violation_tolerance) {
          violated = true;
          if (result.max_violation_hour < 0) result.max_violation_hour = t;
        }
      }
    }
    result.max_flow_change = change;
    if (change <= options.eps_flow || !violated) {
      result.converged = true;
      break;
    }
    base = std::move(next);
  }
  return result;
}

ScedTables MakeScedTables(const FastDecoupledSolver& solver,
                          const ShiftFactorTable& gsf, const NetworkCase& c,
                          int hour, std::span<const double> dispatch,
                          const PowerFlowSolution& ac,
                          const DeliveryFactorOptions& options) {
  ScedTables tables;
  tables.gsf = &gsf;
  tables.df = DeliveryFactors(solver, HourInjections(c, hour, dispatch), ac,
                              gsf.slack_bus, options);
  tables.base_injection = ac.p_injection;
  tables.base_flows = ac.flows.p_from;
  tables.base_loss = ac.total_loss;
  return tables;
}

ScedModel BuildSced(const NetworkCase& c, int hour,
                    const CommitmentSchedule& schedule,
                    const ScedTables& tables,
                    std::span<const double> extra_load) {
  const int ng = c.generator_count();
  const int nb = c.bus_count();
  const double mva = c.base_mva;
  const ShiftFactorTable& gsf = *tables.gsf;
  const auto& bids = c.time_tree.hours[hour].bids;
  ScedModel s;
  s.hour = hour;
  s.load = HourLoadsP(c, hour);
  for (size_t i = 0; i < extra_load.size() && i < s.load.size(); ++i) {
    s.load[i] += extra_load[i];
  }
  milp::LinearModel& m = s.model;
  s.block.assign(ng, {});
  const std::string ht = "_t" + std::to_string(hour + 1);
  bool any = false;
  for (int g = 0; g < ng; ++g) {
    if (!schedule.on[g][hour]) continue;
    any = true;
    const Generator& gen = c.generators[g];
    const std::string tag = Tag(c, g, hour);
    double offered = 0.0;
    std::vector<Term> total;
    for (size_t j = 0; j < bids[g].size(); ++j) {
      const int p = m.AddVariable("p" + tag + "_b" + std::to_string(j + 1), 0.0,
                                  bids[g][j].quantity / mva);
      m.SetObjectiveCoefficient(p, bids[g][j].price * mva);
      s.block[g].push_back(p);
      total.push_back({p, 1.0});
      offered += bids[g][j].quantity / mva;
    }
    if (gen.p_min > 0.0) {
      if (offered + 1e-12 < gen.p_min) {
        throw Error(ErrorKind::kInfeasible, "sced-pmin",
                    "hour " + std::to_string(hour + 1) + ": generator " +
                        std::to_string(gen.id) +
                        " offers less than its minimum output");
      }
      m.AddConstraint("pmin" + tag, total, Relation::kGreaterEqual, gen.p_min);
    }
    if (gen.p_max < offered) {
      m.AddConstraint("pmax" + tag, total, Relation::kLessEqual, gen.p_max);
    }
  }
  if (!any) {
    throw Error(ErrorKind::kInfeasible, "sced-no-units",
                "hour " + std::to_string(hour + 1) + ": no committed units");
  }

  // Delivery-factor balance linearized at the AC point:
  //   sum DF_i inj_i = L0 - sum LS_i inj0_i.
  const DeliveryFactorTable& df = tables.df;
  s.loss_offset = tables.base_loss;
  for (int i = 0; i < nb; ++i) {
    s.loss_offset -= df.loss_sensitivity[i] * tables.base_injection[i];
  }
  std::vector<Term> balance;
  double delivered_load = 0.0;
  for (int i = 0; i < nb; ++i) delivered_load += df.df[i] * s.load[i];
  for (int g = 0; g < ng; ++g) {
    for (int p : s.block[g]) {
      balance.push_back({p, df.df[c.generators[g].bus]});
    }
  }
  s.balance_row = m.AddConstraint("balance" + ht, std::move(balance),
                                  Relation::kEqual,
                                  s.loss_offset + delivered_load);

  // F_l = F0_l + sum_i GSF_li (inj_i - inj0_i).
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    if (!br.in_service || br.rating <= 0.0) continue;
    double anchor = tables.base_flows[l];
    for (int i = 0; i < nb; ++i) {
      anchor -= gsf.at(l, i) * (tables.base_injection[i] + s.load[i]);
    }
    std::vector<Term> terms;
    for (int g = 0; g < ng; ++g) {
      const double k = gsf.at(l, c.generators[g].bus);
      if (k == 0.0) continue;
      for (int p : s.block[g]) terms.push_back({p, k});
    }
    const std::string name = "line_l" + std::to_string(l + 1) + ht;
    LineRow row{hour, l, -1, -1};
    row.upper_row = m.AddConstraint(name + "_up", terms, Relation::kLessEqual,
                                    br.rating - anchor);
    row.lower_row = m.AddConstraint(name + "_dn", std::move(terms),
                                    Relation::kGreaterEqual,
                                    -br.rating - anchor);
    s.line_rows.push_back(row);
  }
  return s;
}

HourlyClearing ClearHour(const NetworkCase& c, const ScedModel& sced,
                         const ScedTables& tables,
                         ClearingOptions::LossPricing pricing) {
  const milp::LpSolution sol = milp::SolveLp(sced.model);
  if (sol.status != milp::SolveStatus::kOptimal) {
    throw Error(ErrorKind::kInfeasible, "sced-infeasible",
                "hour " + std::to_string(sced.hour + 1) + ": dispatch is " +
                    milp::SolveStatusName(sol.status));
  }
  const int ng = c.generator_count();
  const int nb = c.bus_count();
  const int nl = c.branch_count();
  const double mva = c.base_mva;
  const ShiftFactorTable& gsf = *tables.gsf;
  HourlyClearing h;
  h.hour = sced.hour;
  h.cost = sol.objective_value;
  h.loss = tables.base_loss;
  h.delivery_factors = tables.df.df;
  h.committed.assign(ng, 0);
  h.dispatch.assign(ng, 0.0);
  std::vector<double> marginal_bid(nb, -1.0);
  for (int g = 0; g < ng; ++g) {
    h.committed[g] = sced.block[g].empty() ? 0 : 1;
    const auto& bids = c.time_tree.hours[sced.hour].bids[g];
    for (size_t j = 0; j < sced.block[g].size(); ++j) {
      const double p = sol.primal[sced.block[g][j]];
      h.dispatch[g] += p;
      if (p > 1e-9) {
        double& mb = marginal_bid[c.generators[g].bus];
        mb = std::max(mb, bids[j].price);
      }
    }
  }
  h.energy_price = sol.duals[sced.balance_row] / mva;
  h.congestion_duals.assign(nl, 0.0);
  for (const LineRow& row : sced.line_rows) {
    h.congestion_duals[row.branch] =
        (sol.duals[row.upper_row] + sol.duals[row.lower_row]) / mva;
  }

  h.line_flows.assign(nl, 0.0);
  std::vector<double> inj(nb, 0.0);
  for (int i = 0; i < nb; ++i) inj[i] = -sced.load[i];
  for (int g = 0; g < ng; ++g) inj[c.generators[g].bus] += h.dispatch[g];
  for (int l = 0; l < nl; ++l) {
    if (!c.branches[l].in_service) continue;
    double f = tables.base_flows[l];
    for (int i = 0; i < nb; ++i) {
      f += gsf.at(l, i) * (inj[i] - tables.base_injection[i]);
    }
    h.line_flows[l] = f;
  }

  h.lmp.resize(nb);
  double sum = 0.0;
  for (int i = 0; i < nb; ++i) {
    LmpComponents& p = h.lmp[i];
    p.fuel = h.energy_price;
    double congestion = 0.0;
    for (int l = 0; l < nl; ++l) {
      if (h.congestion_duals[l] != 0.0) {
        congestion += gsf.at(l, i) * h.congestion_duals[l];
      }
    }
    p.congestion = congestion;
    const double fuel_cost =
        pricing == ClearingOptions::LossPricing::kOwnBusFuel &&
                marginal_bid[i] >= 0.0
            ? marginal_bid[i]
            : h.energy_price;
    p.loss = fuel_cost * (tables.df.df[i] - 1.0);
    p.total = p.fuel + p.congestion + p.loss;
    sum += p.total;
  }
  h.lmp_average = nb > 0 ? sum / nb : 0.0;
  return h;
}

std::vector<HourlyClearing> DispatchSchedule(const NetworkCase& c,
                                             const CommitmentSchedule& schedule,
                                             const ClearingOptions& options,
                                             int* slack_used) {
  RequireValid(c);
  const int slack = SlackFor(c, options.slack_bus);
  if (slack_used != nullptr) *slack_used = slack;
  const ShiftFactorTable gsf = GenerationShiftFactors(c, slack);
  const FastDecoupledSolver solver(c);
  std::vector<PowerFlowSolution> flows(c.horizon());
  internal::ParallelFor(0, c.horizon(), options.threads, [&](int, int t) {
    flows[t] = HourPowerFlow(solver, c, t, schedule.HourDispatch(t), options, 0);
  });
  return PriceHours(c, schedule, flows, gsf, solver, options);
}

ClearingResult ClearMarket(const NetworkCase& c,
                           const ClearingOptions& options) {
  ScucResult scuc = SolveScucWithNetwork(c, options);
  const int slack = SlackFor(c, options.slack_bus);
  const ShiftFactorTable gsf = GenerationShiftFactors(c, slack);
  const FastDecoupledSolver solver(c);
  ClearingResult out;
  out.hours =
      PriceHours(c, scuc.schedule, scuc.hour_flows, gsf, solver, options);
  out.schedule = std::move(scuc.schedule);
  out.pf_iterations = scuc.pf_iterations;
  out.converged = scuc.converged;
  out.max_flow_change = scuc.max_flow_change;
  out.slack_bus = slack;
  out.milp_gap = scuc.milp_gap;
  out.milp_nodes = scuc.milp_nodes;
  for (const HourlyClearing& h : out.hours) out.lmp_ave.push_back(h.lmp_average);
  return out;
}

CommitmentSchedule ScheduleFromCase(const NetworkCase& c) {
  const int ng = c.generator_count();
  const int nt = c.horizon();
  CommitmentSchedule s;
  s.on.assign(ng, std::vector<int>(nt, 0));
  s.start.assign(ng, std::vector<int>(nt, 0));
  s.stop.assign(ng, std::vector<int>(nt, 0));
  s.block_dispatch.assign(ng, std::vector<std::vector<double>>(nt));
  s.reserves.assign(ng, std::vector<ReserveSet>(nt));
  for (int t = 0; t < nt; ++t) {
    const HourNode& hour = c.time_tree.hours[t];
    for (int g = 0; g < ng; ++g) {
      const auto& bids = hour.bids[g];
      double remaining = 0.0;
      if (hour.outcome && static_cast<int>(hour.outcome->committed.size()) == ng) {
        s.on[g][t] = hour.outcome->committed[g];
        if (static_cast<int>(hour.outcome->dispatch.size()) == ng) {
          remaining = hour.outcome->dispatch[g];
        }
      } else {
        s.on[g][t] = bids.empty() ? 0 : 1;
      }
      for (const BidBlock& b : bids) {
        const double take = std::clamp(remaining, 0.0, b.quantity / c.base_mva);
        s.block_dispatch[g][t].push_back(take);
        remaining -= take;
      }
      const int prev = t == 0 ? (c.generators[g].initial_on ? 1 : 0)
                              : s.on[g][t - 1];
      s.start[g][t] = s.on[g][t] > prev ? 1 : 0;
      s.stop[g][t] = s.on[g][t] < prev ? 1 : 0;
    }
  }
  return s;
}

NetworkCase AttachResults(const NetworkCase& c, const ClearingResult& result) {
  NetworkCase out = c;
  for (size_t t = 0; t < result.hours.size() && t < out.time_tree.hours.size();
       ++t) {
    const HourlyClearing& h = result.hours[t];
    HourOutcome o;
    o.committed.resize(c.generator_count());
    for (int g = 0; g < c.generator_count(); ++g) {
      o.committed[g] = result.schedule.on[g][t];
    }
    o.dispatch = h.dispatch;
    for (const LmpComponents& p : h.lmp) o.lmp.push_back(p.total);
    o.lmp_average = h.lmp_average;
    out.time_tree.hours[t].outcome = std::move(o);
  }
  return out;
}

}  // namespace gridclear
