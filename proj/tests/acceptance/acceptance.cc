// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gridclear/error.h"
#include "gridclear/market_clearing.h"
#include "gridclear/milp.h"
#include "gridclear/powerflow.h"
#include "gridclear/sensitivities.h"
#include "gridclear/sparse.h"
#include "oracles.h"

namespace gridclear {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void Note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

NetworkCase Lossless(NetworkCase c) {
  for (Branch& br : c.branches) br.r = 0.0;
  for (Bus& b : c.buses) b.shunt_g = 0.0;
  return c;
}

NetworkCase Unlimited(NetworkCase c) {
  for (Branch& br : c.branches) br.rating = 0.0;
  return c;
}

Outcome PowerFlow() {
  Outcome o;
  for (auto [name, sweeps] : {std::pair{"ieee14.json", 10}, std::pair{"ieee118.json", 20}}) {
    const NetworkCase c = oracle::LoadData(name);
    const auto t0 = Clock::now();
    const PowerFlowSolution s = SolveFastDecoupled(c);
    const double secs = Seconds(t0);
    const oracle::NewtonResult nr = oracle::NewtonRaphson(c, StaticInjections(c));
    const double dv = MaxAbsDiff(s.v_mag, nr.vm);
    const double da = MaxAbsDiff(s.v_ang, nr.va);
    const std::string tag = std::to_string(c.bus_count()) + "-bus";
    o.Require(s.converged && s.max_mismatch <= 1e-6, tag + " mismatch");
    o.Require(s.iterations <= sweeps, tag + " sweeps");
    o.Require(nr.converged && dv <= 1e-5 && da <= 1e-4, tag + " vs Newton");
    o.Require(secs < 1.0, tag + " time");
    o.Note(tag + ": " + std::to_string(s.iterations) + " sweeps, |dV| " +
           Fmt("%.1e", dv) + ", |dθ| " + Fmt("%.1e", da) + ", " +
           Fmt("%.1f ms", secs * 1e3));
  }
  return o;
}

Outcome SparseLu() {
  Outcome o;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* name : {"ieee14.json", "ieee118.json"}) {
    const NetworkCase c = oracle::LoadData(name);
    const FastDecoupledSolver solver(c);
    const sparse::SparseMatrix& a = solver.matrices().b_prime;
    const sparse::LUFactors& f = solver.b_prime_factors();
    const double rec = oracle::ReconstructionError(f, a) / a.max_abs();
    const int n = a.rows();
    const Eigen::PartialPivLU<Eigen::MatrixXd> dense(oracle::ToDense(a));
    double solve_err = 0.0;
    for (int k = 0; k < 10; ++k) {
      std::vector<double> b(n);
      for (double& x : b) x = u(rng);
      const auto x = sparse::Solve(f, b);
      const Eigen::VectorXd ref = dense.solve(Eigen::Map<Eigen::VectorXd>(b.data(), n));
      for (int i = 0; i < n; ++i) solve_err = std::max(solve_err, std::abs(x[i] - ref[i]));
    }
    const bool levels = oracle::LevelsIndependent(f);
    const std::string tag = std::to_string(c.bus_count()) + "-bus B'";
    o.Require(rec <= 1e-9, tag + " reconstruction");
    o.Require(solve_err <= 1e-8, tag + " solves");
    o.Require(levels, tag + " levels");
    o.Note(tag + ": |LU-PA|/|A| " + Fmt("%.1e", rec) + ", solve " +
           Fmt("%.1e", solve_err) + ", " + std::to_string(f.levels.size()) + " levels");
  }
  return o;
}

Outcome Sensitivities() {
  Outcome o;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (const char* name : {"ieee14.json", "ieee118.json"}) {
    const NetworkCase c = oracle::LoadData(name);
    const ShiftFactorTable t = GenerationShiftFactors(c, c.slack_index());
    for (int k = 0; k < 5; ++k) {
      std::vector<double> p(c.bus_count());
      for (double& x : p) x = u(rng);
      worst = std::max(worst, MaxAbsDiff(t.Flows(p),
                                         oracle::DenseDcFlows(c, c.slack_index(), p)));
    }
  }
  o.Require(worst <= 1e-9, "DC reconstruction");
  o.Note("GSF vs dense DC " + Fmt("%.1e", worst));

  const ShiftFactorTable tri = GenerationShiftFactors(oracle::TriangleCase(0.1), 2);
  const bool thirds = std::abs(tri.at(0, 0) - 1.0 / 3) < 1e-12 &&
                      std::abs(tri.at(1, 0) - 2.0 / 3) < 1e-12 &&
                      std::abs(tri.at(2, 0) - 1.0 / 3) < 1e-12;
  o.Require(thirds, "triangle");
  o.Note("triangle (" + Fmt("%.6f", tri.at(0, 0)) + ", " + Fmt("%.6f", tri.at(1, 0)) +
         ", " + Fmt("%.6f", tri.at(2, 0)) + ")");

  NetworkCase c = Lossless(oracle::LoadData("ieee14_market.json"));
  const ClearingResult r = ClearMarket(c);
  bool unit_df = true, zero_loss = true;
  for (const HourlyClearing& h : r.hours) {
    for (double df : h.delivery_factors) unit_df &= df == 1.0;
    for (const LmpComponents& p : h.lmp) zero_loss &= p.loss == 0.0;
  }
  o.Require(unit_df && zero_loss, "lossless DF/loss component");
  o.Note("lossless fixture: DF≡1 " + std::string(unit_df ? "yes" : "no") +
         ", loss component 0 " + (zero_loss ? "yes" : "no"));
  return o;
}

Outcome Milp() {
  Outcome o;
  std::mt19937 rng(2024);
  int agree = 0, feasible = 0;
  for (int k = 0; k < 50; ++k) {
    const int bins = 1 + k % 8;
    const milp::LinearModel m = oracle::RandomMilp(rng, bins, k % 4, 2 + k % 5);
    const oracle::EnumerationResult ref = oracle::EnumerateMilp(m);
    const milp::LpSolution s = milp::SolveMilp(m);
    bool ok;
    if (!ref.feasible) {
      ok = s.status == milp::SolveStatus::kInfeasible;
    } else {
      ++feasible;
      ok = s.status == milp::SolveStatus::kOptimal &&
           std::abs(s.objective_value - ref.objective) <=
               1e-7 * std::max(1.0, std::abs(ref.objective));
    }
    agree += ok;
  }
  o.Require(agree == 50, "B&B vs enumeration");
  o.Note("B&B = enumeration on " + std::to_string(agree) + "/50 (" +
         std::to_string(feasible) + " feasible)");

  const double eps = 1e-5;
  int checked = 0, within = 0, skipped = 0;
  double worst = 0.0;
  while (checked < 100 && skipped < 500) {
    const int n = 2 + static_cast<int>(rng() % 19);
    milp::LinearModel m = oracle::RandomLp(rng, n, std::max(1, n / 2 + 1));
    const milp::LpSolution s = milp::SolveLp(m);
    const int row = static_cast<int>(rng() % m.constraint_count());
    const double rhs = m.constraint(row).rhs;
    milp::LinearModel up = m, down = m;
    up.SetRhs(row, rhs + eps);
    down.SetRhs(row, rhs - eps);
    const milp::LpSolution su = milp::SolveLp(up), sd = milp::SolveLp(down);
    if (s.status != milp::SolveStatus::kOptimal ||
        su.status != milp::SolveStatus::kOptimal ||
        sd.status != milp::SolveStatus::kOptimal) {
      ++skipped;
      continue;
    }
    const double right = (su.objective_value - s.objective_value) / eps;
    const double left = (s.objective_value - sd.objective_value) / eps;
    if (std::abs(right - left) > 0.01 * std::max(1.0, std::abs(right))) {
      ++skipped;  // degenerate vertex: one-sided slopes differ
      continue;
    }
    ++checked;
    const double err = std::abs(right - s.duals[row]);
    const double tol = 0.05 * std::abs(s.duals[row]) + 1e-4;
    worst = std::max(worst, err / std::max(std::abs(s.duals[row]), 1e-4));
    within += err <= tol;
  }
  o.Require(checked == 100 && within == checked, "LP dual perturbation");
  o.Note("LP duals within 5% on " + std::to_string(within) + "/" +
         std::to_string(checked) + " (" + std::to_string(skipped) +
         " degenerate skipped, worst rel " + Fmt("%.1e", worst) + ")");
  return o;
}

Outcome SmallScuc() {
  Outcome o;
  std::mt19937 rng(55);
  int instances = 0, equal = 0;
  double slowest = 0.0;
  for (int k = 0; k < 30; ++k) {
    const int gens = 1 + k % 2;
    const int hours = 1 + k % 3;
    const int blocks = 1 + (k / 3) % 2;
    const NetworkCase c = oracle::RandomSmallMarket(rng, gens, hours, blocks);
    const oracle::CommitmentOptimum ref = oracle::BruteForceCommitment(c);
    const auto t0 = Clock::now();
    bool ok;
    try {
      const ScucResult r = SolveScucWithNetwork(c);
      ok = ref.feasible && std::abs(r.schedule.objective_value - ref.objective) <=
                               1e-7 * std::max(1.0, std::abs(ref.objective));
    } catch (const Error& e) {
      ok = !ref.feasible && e.kind() == ErrorKind::kInfeasible;
    }
    slowest = std::max(slowest, Seconds(t0));
    ++instances;
    equal += ok;
  }
  o.Require(equal == instances, "SCUC vs brute force");
  o.Require(slowest < 5.0, "SCUC time");
  o.Note("engine = brute force on " + std::to_string(equal) + "/" +
         std::to_string(instances) + ", slowest " + Fmt("%.1f ms", slowest * 1e3));
  return o;
}

Outcome TablePattern(const NetworkCase& c, const ClearingResult& r, double secs) {
  Outcome o;
  const int g3 = c.generator_index(3);
  std::string hours_on;
  for (int t = 0; t < c.horizon(); ++t) {
    if (r.schedule.on[g3][t]) hours_on += (hours_on.empty() ? "" : ",") + std::to_string(t + 1);
  }
  o.Require(hours_on == "11", "gen 3 commitment");
  double other = -1e300;
  for (int t = 0; t < c.horizon(); ++t) {
    if (t != 10) other = std::max(other, r.lmp_ave[t]);
  }
  o.Require(r.lmp_ave[10] > other, "peak LMP_ave");
  const HourlyClearing& peak = r.hours[10];
  int line23 = -1;
  for (int l = 0; l < c.branch_count(); ++l) {
    const Branch& br = c.branches[l];
    if (c.buses[br.from_bus].id == 2 && c.buses[br.to_bus].id == 3) line23 = l;
  }
  const bool binds = line23 >= 0 &&
                     std::abs(peak.line_flows[line23]) >= c.branches[line23].rating - 1e-6;
  const double lmp2 = peak.lmp[c.bus_index(2)].total;
  const double lmp3 = peak.lmp[c.bus_index(3)].total;
  o.Require(binds && lmp3 > lmp2, "bus 3 above bus 2 at binding line");
  o.Require(secs < 60.0, "runtime");
  o.Note("gen 3 on at hour(s) " + hours_on + "; LMP_ave peak " + Fmt("%.3f", r.lmp_ave[10]) +
         " vs " + Fmt("%.3f", other) + "; line 2-3 " +
         Fmt("%.2f MW", peak.line_flows[line23] * c.base_mva) + ", LMP2 " +
         Fmt("%.2f", lmp2) + " < LMP3 " + Fmt("%.2f", lmp3) + "; " +
         Fmt("%.2f s", secs));
  return o;
}

// Re-solves each hour's dispatch with extra load at one bus and compares the
// cost change with the reported nodal price.
void PerturbationCheck(const NetworkCase& c, const ClearingResult& r, int& checked,
                       int& within, int& skipped, double& worst) {
  const ShiftFactorTable gsf = GenerationShiftFactors(c, r.slack_bus);
  const FastDecoupledSolver solver(c);
  const double eps = 1e-3;
  for (int t = 0; t < c.horizon(); ++t) {
    const std::vector<double> dispatch = r.schedule.HourDispatch(t);
    const PowerFlowSolution ac = solver.Solve(HourInjections(c, t, dispatch));
    const ScedTables tables = MakeScedTables(solver, gsf, c, t, dispatch, ac);
    auto cost = [&](int bus, double extra) {
      std::vector<double> load(c.bus_count(), 0.0);
      if (bus >= 0) load[bus] = extra;
      const ScedModel m = BuildSced(c, t, r.schedule, tables, load);
      const milp::LpSolution s = milp::SolveLp(m.model);
      return s.status == milp::SolveStatus::kOptimal ? s.objective_value : NAN;
    };
    const double base = cost(-1, 0.0);
    for (int i = 0; i < c.bus_count(); ++i) {
      const double up = (cost(i, eps) - base) / (eps * c.base_mva);
      const double down = (base - cost(i, -eps)) / (eps * c.base_mva);
      if (!std::isfinite(up) || !std::isfinite(down) ||
          std::abs(up - down) > 0.01 * std::max(1.0, std::abs(up))) {
        ++skipped;
        continue;
      }
      const double lmp = r.hours[t].lmp[i].total;
      const double rel = std::abs(up - lmp) / std::max(std::abs(lmp), 1e-9);
      worst = std::max(worst, rel);
      ++checked;
      within += rel <= 0.05;
    }
  }
}

Outcome LmpIdentities(const NetworkCase& c, const ClearingResult& r) {
  Outcome o;
  bool exact = true;
  for (const HourlyClearing& h : r.hours) {
    for (const LmpComponents& p : h.lmp) exact &= p.fuel + p.congestion + p.loss == p.total;
  }
  o.Require(exact, "component sum");
  o.Note("fuel+cong+loss == total bitwise on all " + std::to_string(r.hours.size()) + " hours");

  const NetworkCase flat = Lossless(Unlimited(c));
  const ClearingResult u = ClearMarket(flat);
  int uniform = 0;
  for (const HourlyClearing& h : u.hours) {
    bool same = true;
    for (const LmpComponents& p : h.lmp) same &= p.total == h.lmp[0].total;
    uniform += same;
  }
  o.Require(uniform == flat.horizon(), "uniform price");
  o.Note("lossless uncongested: " + std::to_string(uniform) + "/" +
         std::to_string(flat.horizon()) + " hours uniform");

  int checked = 0, within = 0, skipped = 0;
  double worst = 0.0;
  PerturbationCheck(c, r, checked, within, skipped, worst);
  o.Require(checked > 0 && within == checked, "load perturbation");
  o.Note("ε-load check within 5% on " + std::to_string(within) + "/" +
         std::to_string(checked) + " bus-hours (" + std::to_string(skipped) +
         " degenerate skipped, worst rel " + Fmt("%.1e", worst) + ")");
  return o;
}

double MedianPfSeconds(const NetworkCase& c, int reps) {
  std::vector<double> t;
  for (int k = 0; k < reps; ++k) {
    const auto t0 = Clock::now();
    const PowerFlowSolution s = SolveFastDecoupled(c);
    t.push_back(Seconds(t0));
    if (!s.converged) return NAN;
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

Outcome Scaling() {
  Outcome o;
  const NetworkCase big = oracle::LoadData("ieee118.json");
  const auto t0 = Clock::now();
  const ClearingResult r = ClearMarket(big);
  const double secs = Seconds(t0);
  o.Require(secs < 60.0, "118-bus full clear time");
  o.Note("118-bus full clear " + Fmt("%.1f s", secs) + " (" +
         std::to_string(r.pf_iterations) + " outer iterations, gap " +
         Fmt("%.1e", r.milp_gap) + ")");

  const NetworkCase small = oracle::LoadData("ieee14.json");
  const double t14 = MedianPfSeconds(small, 51);
  const double t118 = MedianPfSeconds(big, 51);
  const double exponent = std::log(t118 / t14) / std::log(118.0 / 14.0);
  o.Require(std::isfinite(exponent) && exponent < 2.0, "power-flow growth");
  o.Note("power flow " + Fmt("%.3f ms", t14 * 1e3) + " -> " + Fmt("%.3f ms", t118 * 1e3) +
         ", growth exponent " + Fmt("%.2f", exponent));
  return o;
}

int Report(int id, const char* title, const std::function<Outcome()>& run) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

}  // namespace
}  // namespace gridclear

int main() {
  using namespace gridclear;
  int failed = 0;
  failed += Report(1, "power flow", PowerFlow);
  failed += Report(2, "sparse LU", SparseLu);
  failed += Report(3, "shift and delivery factors", Sensitivities);
  failed += Report(4, "MILP", Milp);
  failed += Report(5, "small SCUC", SmallScuc);

  NetworkCase fixture;
  ClearingResult result;
  double secs = 0.0;
  std::string load_error;
  try {
    fixture = oracle::LoadData("ieee14_market.json");
    const auto t0 = Clock::now();
    result = ClearMarket(fixture);
    secs = Seconds(t0);
  } catch (const std::exception& e) {
    load_error = e.what();
  }
  auto with_fixture = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!load_error.empty()) throw std::runtime_error(load_error);
      return fn();
    };
  };
  failed += Report(6, "peak-hour pattern", with_fixture([&] {
                     return TablePattern(fixture, result, secs);
                   }));
  failed += Report(7, "LMP identities", with_fixture([&] {
                     return LmpIdentities(fixture, result);
                   }));
  failed += Report(8, "scaling", Scaling);
  std::printf("%d of 8 criteria failed\n", failed);
  return failed;
}
