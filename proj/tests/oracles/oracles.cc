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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridclear::oracle {
namespace {

using cd = std::complex<double>;

std::string ReadText(const std::string& relative) {
  const std::string path = std::string(GRIDCLEAR_TEST_DATA_DIR) + "/" + relative;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::MatrixXcd AdmittanceMatrix(const NetworkCase& c) {
  const int n = c.bus_count();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    const cd ys = 1.0 / cd(br.r, br.x);
    const cd half(0.0, br.b_charging / 2.0);
    const double t = br.tap;
    const int f = br.from_bus, k = br.to_bus;
    y(f, f) += (ys + half) / (t * t);
    y(k, k) += ys + half;
    y(f, k) -= ys / t;
    y(k, f) -= ys / t;
  }
  for (int i = 0; i < n; ++i) {
    y(i, i) += cd(c.buses[i].shunt_g, c.buses[i].shunt_b);
  }
  return y;
}

}  // namespace

Eigen::MatrixXd ToDense(const sparse::SparseMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      d(i, m.col_idx()[p]) += m.values()[p];
    }
  }
  return d;
}

NetworkCase LoadData(const std::string& relative) {
  return ParseCase(ReadText(relative));
}

NetworkCase LoadMatpower(const std::string& relative) {
  return ImportMatpower(ReadText(relative));
}

double ReconstructionError(const sparse::LUFactors& f,
                           const sparse::SparseMatrix& a) {
  const Eigen::MatrixXd lu = ToDense(f.lower) * ToDense(f.upper);
  const Eigen::MatrixXd dense = ToDense(a);
  const int n = f.size();
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      err = std::max(err, std::abs(lu(i, j) - dense(f.perm[i], f.perm[j])));
    }
  }
  return err;
}

bool LevelsIndependent(const sparse::LUFactors& f) {
  const int n = f.size();
  const auto assign = [n](const std::vector<std::vector<int>>& levels,
                          std::vector<int>& level) {
    level.assign(n, -1);
    for (size_t k = 0; k < levels.size(); ++k) {
      for (int p : levels[k]) {
        if (p < 0 || p >= n || level[p] != -1) return false;
        level[p] = static_cast<int>(k);
      }
    }
    return std::count(level.begin(), level.end(), -1) == 0;
  };
  // Every off-diagonal entry (i, j) of a factor is a read of pivot j while
  // solving for pivot i, so j must sit in a strictly earlier level.
  const auto ordered = [n](const sparse::SparseMatrix& m,
                           const std::vector<int>& level) {
    for (int i = 0; i < n; ++i) {
      for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
        const int j = m.col_idx()[p];
        if (j != i && level[j] >= level[i]) return false;
      }
    }
    return true;
  };
  std::vector<int> fwd, bwd;
  return assign(f.levels, fwd) && assign(f.backward_levels, bwd) &&
         ordered(f.lower, fwd) && ordered(f.upper, bwd);
}

std::set<std::pair<int, int>> BruteForceFill(const sparse::SparseMatrix& m,
                                             std::span<const int> order) {
  const int n = m.rows();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      const int j = m.col_idx()[p];
      adj[i][j] = adj[j][i] = 1;
    }
  }
  std::vector<char> gone(n, 0);
  std::set<std::pair<int, int>> fill;
  for (int v : order) {
    std::vector<int> nbr;
    for (int u = 0; u < n; ++u) {
      if (u != v && !gone[u] && adj[v][u]) nbr.push_back(u);
    }
    for (size_t a = 0; a < nbr.size(); ++a) {
      for (size_t b = a + 1; b < nbr.size(); ++b) {
        const int x = nbr[a], y = nbr[b];
        if (!adj[x][y]) {
          adj[x][y] = adj[y][x] = 1;
          fill.insert({std::min(x, y), std::max(x, y)});
        }
      }
    }
    gone[v] = 1;
  }
  return fill;
}

NewtonResult NewtonRaphson(const NetworkCase& c, const BusInjections& inj,
                           double tolerance, int max_iterations) {
  const int n = c.bus_count();
  const Eigen::MatrixXcd y = AdmittanceMatrix(c);
  std::vector<int> theta_idx, v_idx;
  for (int i = 0; i < n; ++i) {
    if (c.buses[i].kind != BusKind::kSlack) theta_idx.push_back(i);
    if (c.buses[i].kind == BusKind::kPq) v_idx.push_back(i);
  }
  NewtonResult r;
  r.vm.resize(n);
  r.va.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    r.vm[i] = c.buses[i].kind == BusKind::kPq ? 1.0 : c.buses[i].voltage_magnitude;
    if (c.buses[i].kind == BusKind::kSlack) r.va[i] = c.buses[i].voltage_angle;
  }
  const int nt = static_cast<int>(theta_idx.size());
  const int m = nt + static_cast<int>(v_idx.size());

  auto mismatch = [&](const std::vector<double>& vm,
                      const std::vector<double>& va) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::polar(vm[i], va[i]);
    const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
    Eigen::VectorXd f(m);
    for (int k = 0; k < nt; ++k) f[k] = s[theta_idx[k]].real() - inj.p[theta_idx[k]];
    for (size_t k = 0; k < v_idx.size(); ++k) {
      f[nt + k] = s[v_idx[k]].imag() - inj.q[v_idx[k]];
    }
    return f;
  };
  auto apply = [&](std::vector<double>& vm, std::vector<double>& va, int k,
                   double d) {
    if (k < nt) va[theta_idx[k]] += d;
    else vm[v_idx[k - nt]] += d;
  };

  for (int it = 0; it <= max_iterations; ++it) {
    const Eigen::VectorXd f = mismatch(r.vm, r.va);
    r.mismatch = m == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    r.iterations = it;
    if (r.mismatch <= tolerance) {
      r.converged = true;
      break;
    }
    if (it == max_iterations) break;
    Eigen::MatrixXd jac(m, m);
    const double h = 1e-7;
    for (int k = 0; k < m; ++k) {
      std::vector<double> vp = r.vm, ap = r.va, vn = r.vm, an = r.va;
      apply(vp, ap, k, h);
      apply(vn, an, k, -h);
      jac.col(k) = (mismatch(vp, ap) - mismatch(vn, an)) / (2.0 * h);
    }
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    for (int k = 0; k < m; ++k) apply(r.vm, r.va, k, dx[k]);
  }
  return r;
}

std::vector<double> DenseDcFlows(const NetworkCase& c, int slack,
                                 std::span<const double> injection) {
  const int n = c.bus_count();
  std::vector<int> row(n, -1);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (i != slack) row[i] = k++;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    const double s = 1.0 / br.x;
    const int f = row[br.from_bus], t = row[br.to_bus];
    if (f >= 0) b(f, f) += s;
    if (t >= 0) b(t, t) += s;
    if (f >= 0 && t >= 0) {
      b(f, t) -= s;
      b(t, f) -= s;
    }
  }
  Eigen::VectorXd p(k);
  for (int i = 0; i < n; ++i) {
    if (row[i] >= 0) p[row[i]] = injection[i];
  }
  const Eigen::VectorXd theta_r = b.fullPivLu().solve(p);
  std::vector<double> theta(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (row[i] >= 0) theta[i] = theta_r[row[i]];
  }
  std::vector<double> flows;
  for (const Branch& br : c.branches) {
    flows.push_back(br.in_service
                        ? (theta[br.from_bus] - theta[br.to_bus]) / br.x
                        : 0.0);
  }
  return flows;
}

EnumerationResult EnumerateMilp(const milp::LinearModel& model) {
  std::vector<int> bins;
  for (int j = 0; j < model.variable_count(); ++j) {
    if (model.variable(j).is_binary) bins.push_back(j);
  }
  EnumerationResult best;
  const double sign = model.sense() == milp::Sense::kMaximize ? -1.0 : 1.0;
  for (long mask = 0; mask < (1L << bins.size()); ++mask) {
    milp::LinearModel fixed = model;
    for (size_t b = 0; b < bins.size(); ++b) {
      const double v = (mask >> b) & 1 ? 1.0 : 0.0;
      fixed.SetBounds(bins[b], v, v);
    }
    const milp::LpSolution s = milp::SolveLp(fixed, false);
    if (s.status != milp::SolveStatus::kOptimal) continue;
    if (!best.feasible || sign * s.objective_value < sign * best.objective) {
      best.feasible = true;
      best.objective = s.objective_value;
    }
  }
  return best;
}

milp::LinearModel RandomMilp(std::mt19937& rng, int binaries, int continuous,
                             int rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rel(0, 5);
  milp::LinearModel m;
  std::vector<double> x0;
  for (int j = 0; j < binaries; ++j) {
    const int v = m.AddBinary("b" + std::to_string(j));
    m.SetObjectiveCoefficient(v, coef(rng));
    x0.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
  }
  for (int j = 0; j < continuous; ++j) {
    const double ub = 1.0 + 9.0 * unit(rng);
    const int v = m.AddVariable("c" + std::to_string(j), 0.0, ub);
    m.SetObjectiveCoefficient(v, coef(rng));
    x0.push_back(ub * unit(rng));
  }
  const int n = binaries + continuous;
  for (int i = 0; i < rows; ++i) {
    std::vector<milp::Term> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.6) {
        const double a = std::round(coef(rng) * 4.0) / 4.0;
        terms.push_back({j, a});
        act += a * x0[j];
      }
    }
    const int r = rel(rng);
    if (r == 0) {
      m.AddConstraint("r" + std::to_string(i), terms, milp::Relation::kEqual,
                      act);
    } else if (r <= 2) {
      m.AddConstraint("r" + std::to_string(i), terms,
                      milp::Relation::kGreaterEqual, act - 2.0 * unit(rng));
    } else {
      m.AddConstraint("r" + std::to_string(i), terms,
                      milp::Relation::kLessEqual, act + 2.0 * unit(rng));
    }
  }
  if (unit(rng) < 0.3) m.SetSense(milp::Sense::kMaximize);
  return m;
}

milp::LinearModel RandomLp(std::mt19937& rng, int variables, int rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  milp::LinearModel m;
  std::vector<double> x0;
  for (int j = 0; j < variables; ++j) {
    const double ub = 2.0 + 8.0 * unit(rng);
    const int v = m.AddVariable("x" + std::to_string(j), 0.0, ub);
    m.SetObjectiveCoefficient(v, coef(rng));
    x0.push_back(ub * (0.2 + 0.6 * unit(rng)));
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<milp::Term> terms;
    double act = 0.0;
    for (int j = 0; j < variables; ++j) {
      if (unit(rng) < 0.5) {
        const double a = coef(rng);
        terms.push_back({j, a});
        act += a * x0[j];
      }
    }
    if (unit(rng) < 0.5) {
      m.AddConstraint("r" + std::to_string(i), terms,
                      milp::Relation::kLessEqual, act + 0.5 + unit(rng));
    } else {
      m.AddConstraint("r" + std::to_string(i), terms,
                      milp::Relation::kGreaterEqual, act - 0.5 - unit(rng));
    }
  }
  return m;
}

namespace {

// Start/stop rules on run lengths: a run that begins inside the horizon must
// last the minimum time or reach the end; starts are capped.
bool PatternAllowed(const Generator& g, const std::vector<int>& on) {
  const int nt = static_cast<int>(on.size());
  int starts = 0;
  int prev = g.initial_on ? 1 : 0;
  for (int t = 0; t < nt; ++t) {
    if (on[t] != prev) {
      int len = 0;
      while (t + len < nt && on[t + len] == on[t]) ++len;
      const int need = on[t] ? g.min_up : g.min_down;
      if (len < need && t + len < nt) return false;
      if (on[t]) ++starts;
    }
    prev = on[t];
  }
  return starts <= g.max_starts;
}

// Dispatch and reserve cost of one hour with the commitment fixed, or
// +inf when infeasible.
double HourCost(const NetworkCase& c, int t, const std::vector<int>& on) {
  const double mva = c.base_mva;
  const HourNode& h = c.time_tree.hours[t];
  milp::LinearModel m;
  std::vector<milp::Term> supply;
  std::vector<std::vector<int>> res(c.generator_count());
  for (int g = 0; g < c.generator_count(); ++g) {
    const Generator& gen = c.generators[g];
    std::vector<milp::Term> output, total;
    for (size_t j = 0; j < h.bids[g].size(); ++j) {
      const double ub = on[g] ? h.bids[g][j].quantity / mva : 0.0;
      const int p = m.AddVariable("", 0.0, ub);
      m.SetObjectiveCoefficient(p, h.bids[g][j].price * mva);
      supply.push_back({p, 1.0});
      output.push_back({p, 1.0});
      total.push_back({p, 1.0});
    }
    const double caps[4] = {gen.reserve_caps.r * (on[g] ? 1.0 : 0.0),
                            gen.reserve_caps.sp * (on[g] ? 1.0 : 0.0),
                            gen.reserve_caps.n1, gen.reserve_caps.n3};
    const double prices[4] = {gen.reserve_prices.r, gen.reserve_prices.sp,
                              gen.reserve_prices.n1, gen.reserve_prices.n3};
    for (int k = 0; k < 4; ++k) {
      const int r = m.AddVariable("", 0.0, caps[k] / mva);
      m.SetObjectiveCoefficient(r, prices[k] * mva);
      res[g].push_back(r);
      total.push_back({r, 1.0});
    }
    m.AddConstraint("", total, milp::Relation::kLessEqual, gen.p_max);
    if (on[g] && gen.p_min > 0.0) {
      m.AddConstraint("", output, milp::Relation::kGreaterEqual, gen.p_min);
    }
  }
  m.AddConstraint("", supply, milp::Relation::kEqual, h.demand);
  const ReserveSet& q = h.reserve_requirement;
  const std::vector<std::pair<std::vector<int>, double>> req = {
      {{0}, q.r}, {{1}, q.sp}, {{1, 2}, q.sp + q.n1},
      {{1, 2, 3}, q.sp + q.n1 + q.n3}};
  for (const auto& [ks, need] : req) {
    std::vector<milp::Term> terms;
    for (int g = 0; g < c.generator_count(); ++g) {
      for (int k : ks) terms.push_back({res[g][k], 1.0});
    }
    m.AddConstraint("", terms, milp::Relation::kGreaterEqual, need / mva);
  }
  const milp::LpSolution s = milp::SolveLp(m);
  if (s.status != milp::SolveStatus::kOptimal) {
    return std::numeric_limits<double>::infinity();
  }
  return s.objective_value;
}

}  // namespace

CommitmentOptimum BruteForceCommitment(const NetworkCase& c) {
  const int ng = c.generator_count();
  const int nt = c.horizon();
  const int bits = ng * nt;
  CommitmentOptimum best;
  for (long mask = 0; mask < (1L << bits); ++mask) {
    std::vector<std::vector<int>> on(ng, std::vector<int>(nt));
    for (int g = 0; g < ng; ++g) {
      for (int t = 0; t < nt; ++t) on[g][t] = (mask >> (g * nt + t)) & 1;
    }
    bool ok = true;
    for (int g = 0; g < ng && ok; ++g) ok = PatternAllowed(c.generators[g], on[g]);
    if (!ok) continue;
    ++best.patterns;
    double cost = 0.0;
    for (int g = 0; g < ng; ++g) {
      int prev = c.generators[g].initial_on ? 1 : 0;
      for (int t = 0; t < nt; ++t) {
        if (on[g][t] > prev) cost += c.generators[g].startup_cost;
        if (on[g][t] < prev) cost += c.generators[g].shutdown_cost;
        prev = on[g][t];
      }
    }
    for (int t = 0; t < nt && std::isfinite(cost); ++t) {
      std::vector<int> hour_on(ng);
      for (int g = 0; g < ng; ++g) hour_on[g] = on[g][t];
      cost += HourCost(c, t, hour_on);
    }
    if (!std::isfinite(cost)) continue;
    if (!best.feasible || cost < best.objective) {
      best.feasible = true;
      best.objective = cost;
      best.on = on;
    }
  }
  return best;
}

NetworkCase RandomSmallMarket(std::mt19937& rng, int gens, int hours,
                              int blocks) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NetworkCase c;
  c.name = "random-market";
  c.base_mva = 100.0;
  Bus b;
  b.id = 1;
  b.kind = BusKind::kSlack;
  c.buses.push_back(b);
  c.demand_weights = {1.0};
  double capacity = 0.0;
  std::vector<std::vector<BidBlock>> offers(gens);
  for (int g = 0; g < gens; ++g) {
    Generator gen;
    gen.id = g + 1;
    gen.bus = 0;
    double price = 10.0 + 30.0 * unit(rng);
    double q_total = 0.0;
    for (int j = 0; j < blocks; ++j) {
      const double q = std::round(20.0 + 60.0 * unit(rng));
      offers[g].push_back({std::round(price * 10.0) / 10.0, q});
      price += 1.0 + 10.0 * unit(rng);
      q_total += q;
    }
    gen.p_max = q_total / c.base_mva;
    gen.p_min = unit(rng) < 0.5 ? std::round(10.0 * unit(rng)) / c.base_mva : 0.0;
    gen.startup_cost = std::round(500.0 * unit(rng));
    gen.shutdown_cost = std::round(100.0 * unit(rng));
    gen.min_up = 1 + static_cast<int>(3.0 * unit(rng));
    gen.min_down = 1 + static_cast<int>(3.0 * unit(rng));
    gen.max_starts = 1 + static_cast<int>(2.0 * unit(rng));
    gen.initial_on = unit(rng) < 0.5;
    gen.reserve_caps = {5.0, 5.0, 5.0, 5.0};
    gen.reserve_prices = {std::round(40.0 * unit(rng)) / 10.0, 1.5, 1.0, 0.5};
    capacity += q_total;
    c.generators.push_back(gen);
  }
  for (int t = 0; t < hours; ++t) {
    HourNode h;
    const double mw = std::round(capacity * (0.2 + 0.6 * unit(rng)));
    h.demand = mw / c.base_mva;
    h.reserve_requirement = {0.01 * mw, 0.02 * mw, 0.01 * mw, 0.01 * mw};
    h.bids = offers;
    c.time_tree.hours.push_back(h);
  }
  return c;
}

NetworkCase TwoBusCase(double r, double x, double load_pu) {
  NetworkCase c;
  c.name = "two-bus";
  c.base_mva = 100.0;
  Bus slack;
  slack.id = 1;
  slack.kind = BusKind::kSlack;
  Bus load;
  load.id = 2;
  load.kind = BusKind::kPv;
  load.load_p = load_pu;
  c.buses = {slack, load};
  Branch br;
  br.from_bus = 0;
  br.to_bus = 1;
  br.r = r;
  br.x = x;
  c.branches = {br};
  Generator g;
  g.id = 1;
  g.bus = 0;
  g.p_max = 2.0;
  g.p_set = load_pu;
  c.generators = {g};
  c.demand_weights = {0.0, 1.0};
  HourNode h;
  h.demand = load_pu;
  h.bids = {{{20.0, 200.0}}};
  c.time_tree.hours = {h};
  return c;
}

NetworkCase TriangleCase(double x) {
  NetworkCase c;
  c.name = "triangle";
  c.base_mva = 100.0;
  for (int i = 1; i <= 3; ++i) {
    Bus b;
    b.id = i;
    b.kind = i == 3 ? BusKind::kSlack : BusKind::kPq;
    c.buses.push_back(b);
  }
  for (auto [f, t] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    Branch br;
    br.from_bus = f;
    br.to_bus = t;
    br.x = x;
    c.branches.push_back(br);
  }
  return c;
}

}  // namespace gridclear::oracle
