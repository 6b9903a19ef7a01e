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

#include "gridclear/powerflow.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <tuple>

#include "gridclear/error.h"

namespace gridclear {
namespace {

using Complex = std::complex<double>;

// Pi-model admittances of one branch with the tap on the from side.
struct BranchAdmittance {
  Complex ff, ft, tf, tt;
};

BranchAdmittance Admittance(const Branch& br) {
  const Complex y = 1.0 / Complex(br.r, br.x);
  const Complex half_charging(0.0, br.b_charging / 2.0);
  const double t = br.tap;
  return {(y + half_charging) / (t * t), -y / t, -y / t, y + half_charging};
}

void CheckReactances(const NetworkCase& c) {
  for (int l = 0; l < c.branch_count(); ++l) {
    if (c.branches[l].in_service && c.branches[l].x == 0.0) {
      throw Error(ErrorKind::kValidation, "branch-zero-x",
                  "branch " + std::to_string(l + 1) + " has zero reactance");
    }
  }
}

// Restricts a square bus-indexed matrix to the given rows/columns.
sparse::SparseMatrix Restrict(const std::vector<sparse::Triplet>& full,
                              const std::vector<int>& local, int n) {
  std::vector<sparse::Triplet> t;
  for (const sparse::Triplet& e : full) {
    const int i = local[e.row];
    const int j = local[e.col];
    if (i >= 0 && j >= 0) t.push_back({i, j, e.value});
  }
  return sparse::SparseMatrix::FromTriplets(n, n, std::move(t));
}

}  // namespace

DecoupledMatrices BuildDecoupledMatrices(const NetworkCase& c) {
  CheckReactances(c);
  const int n = c.bus_count();
  DecoupledMatrices m;
  std::vector<int> angle_row(n, -1);
  std::vector<int> magnitude_row(n, -1);
  for (int i = 0; i < n; ++i) {
    if (c.buses[i].kind != BusKind::kSlack) {
      angle_row[i] = static_cast<int>(m.angle_buses.size());
      m.angle_buses.push_back(i);
    }
    if (c.buses[i].kind == BusKind::kPq) {
      magnitude_row[i] = static_cast<int>(m.magnitude_buses.size());
      m.magnitude_buses.push_back(i);
    }
  }

  std::vector<sparse::Triplet> bp;
  std::vector<sparse::Triplet> bpp;
  for (int i = 0; i < n; ++i) bpp.push_back({i, i, -c.buses[i].shunt_b});
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    const int f = br.from_bus;
    const int t = br.to_bus;
    const double b = 1.0 / br.x;
    bp.push_back({f, f, b});
    bp.push_back({t, t, b});
    bp.push_back({f, t, -b});
    bp.push_back({t, f, -b});
    const BranchAdmittance y = Admittance(br);
    bpp.push_back({f, f, -y.ff.imag()});
    bpp.push_back({t, t, -y.tt.imag()});
    bpp.push_back({f, t, -y.ft.imag()});
    bpp.push_back({t, f, -y.tf.imag()});
  }
  m.b_prime =
      Restrict(bp, angle_row, static_cast<int>(m.angle_buses.size()));
  m.b_double_prime =
      Restrict(bpp, magnitude_row, static_cast<int>(m.magnitude_buses.size()));
  return m;
}

BusInjections StaticInjections(const NetworkCase& c) {
  BusInjections inj;
  inj.p.assign(c.bus_count(), 0.0);
  inj.q.assign(c.bus_count(), 0.0);
  for (int i = 0; i < c.bus_count(); ++i) {
    inj.p[i] = -c.buses[i].load_p;
    inj.q[i] = -c.buses[i].load_q;
  }
  for (const Generator& g : c.generators) inj.p[g.bus] += g.p_set;
  return inj;
}

BusInjections HourInjections(const NetworkCase& c, int hour,
                             std::span<const double> dispatch) {
  if (static_cast<int>(dispatch.size()) != c.generator_count()) {
    throw Error(ErrorKind::kDimension, "dispatch-size",
                "dispatch vector length differs from generator count");
  }
  BusInjections inj;
  inj.p = HourLoadsP(c, hour);
  inj.q = HourLoadsQ(c, hour);
  for (double& v : inj.p) v = -v;
  for (double& v : inj.q) v = -v;
  for (int g = 0; g < c.generator_count(); ++g) {
    inj.p[c.generators[g].bus] += dispatch[g];
  }
  return inj;
}

BranchFlows ComputeBranchFlows(const NetworkCase& c, std::span<const double> vm,
                               std::span<const double> va) {
  const int nl = c.branch_count();
  BranchFlows out;
  out.p_from.assign(nl, 0.0);
  out.q_from.assign(nl, 0.0);
  out.p_to.assign(nl, 0.0);
  out.q_to.assign(nl, 0.0);
  for (int l = 0; l < nl; ++l) {
    const Branch& br = c.branches[l];
    if (!br.in_service) continue;
    const BranchAdmittance y = Admittance(br);
    const Complex vf = std::polar(vm[br.from_bus], va[br.from_bus]);
    const Complex vt = std::polar(vm[br.to_bus], va[br.to_bus]);
    const Complex sf = vf * std::conj(y.ff * vf + y.ft * vt);
    const Complex st = vt * std::conj(y.tf * vf + y.tt * vt);
    out.p_from[l] = sf.real();
    out.q_from[l] = sf.imag();
    out.p_to[l] = st.real();
    out.q_to[l] = st.imag();
    out.total_loss += sf.real() + st.real();
  }
  return out;
}

FastDecoupledSolver::FastDecoupledSolver(const NetworkCase& c)
    : case_(c), matrices_(BuildDecoupledMatrices(c)) {
  const int n = c.bus_count();
  std::vector<sparse::Triplet> g;
  std::vector<sparse::Triplet> b;
  for (int i = 0; i < n; ++i) {
    g.push_back({i, i, c.buses[i].shunt_g});
    b.push_back({i, i, c.buses[i].shunt_b});
  }
  for (const Branch& br : c.branches) {
    if (!br.in_service) continue;
    const BranchAdmittance y = Admittance(br);
    const int f = br.from_bus;
    const int t = br.to_bus;
    for (auto [i, j, v] : {std::tuple{f, f, y.ff}, std::tuple{f, t, y.ft},
                           std::tuple{t, f, y.tf}, std::tuple{t, t, y.tt}}) {
      g.push_back({i, j, v.real()});
      b.push_back({i, j, v.imag()});
    }
  }
  g_bus_ = sparse::SparseMatrix::FromTriplets(n, n, std::move(g));
  b_bus_ = sparse::SparseMatrix::FromTriplets(n, n, std::move(b));

  angle_row_.assign(n, -1);
  magnitude_row_.assign(n, -1);
  for (size_t k = 0; k < matrices_.angle_buses.size(); ++k) {
    angle_row_[matrices_.angle_buses[k]] = static_cast<int>(k);
  }
  for (size_t k = 0; k < matrices_.magnitude_buses.size(); ++k) {
    magnitude_row_[matrices_.magnitude_buses[k]] = static_cast<int>(k);
  }
  if (matrices_.b_prime.rows() > 0) {
    b_prime_lu_ = sparse::NumericFactorize(
        matrices_.b_prime, sparse::SymbolicFactorize(matrices_.b_prime));
  }
  if (matrices_.b_double_prime.rows() > 0) {
    b_double_prime_lu_ = sparse::NumericFactorize(
        matrices_.b_double_prime,
        sparse::SymbolicFactorize(matrices_.b_double_prime));
  }
}

void FastDecoupledSolver::Injections(std::span<const double> vm,
                                     std::span<const double> va,
                                     std::vector<double>& p,
                                     std::vector<double>& q) const {
  const int n = case_.bus_count();
  p.assign(n, 0.0);
  q.assign(n, 0.0);
  const auto& ptr = g_bus_.row_ptr();
  const auto& col = g_bus_.col_idx();
  const auto& gv = g_bus_.values();
  const auto& bv = b_bus_.values();
  for (int i = 0; i < n; ++i) {
    double sp = 0.0;
    double sq = 0.0;
    for (int k = ptr[i]; k < ptr[i + 1]; ++k) {
      const int j = col[k];
      const double d = va[i] - va[j];
      const double cs = std::cos(d);
      const double sn = std::sin(d);
      sp += vm[j] * (gv[k] * cs + bv[k] * sn);
      sq += vm[j] * (gv[k] * sn - bv[k] * cs);
    }
    p[i] = vm[i] * sp;
    q[i] = vm[i] * sq;
  }
}

PowerFlowSolution FastDecoupledSolver::Solve(
    const BusInjections& injections, const PowerFlowOptions& options) const {
  const int n = case_.bus_count();
  if (static_cast<int>(injections.p.size()) != n ||
      static_cast<int>(injections.q.size()) != n) {
    throw Error(ErrorKind::kDimension, "injection-size",
                "injection vectors must have one entry per bus");
  }
  std::vector<double> vm(n);
  std::vector<double> va(n, 0.0);
  for (int i = 0; i < n; ++i) vm[i] = case_.buses[i].voltage_magnitude;
  if (options.initial_vm) {
    for (int i = 0; i < n; ++i) {
      if (case_.buses[i].kind == BusKind::kPq) vm[i] = (*options.initial_vm)[i];
    }
  }
  if (options.initial_va) va = *options.initial_va;
  const int slack = case_.slack_index();
  if (slack >= 0) va[slack] = case_.buses[slack].voltage_angle;

  const int na = static_cast<int>(matrices_.angle_buses.size());
  const int nm = static_cast<int>(matrices_.magnitude_buses.size());
  std::vector<double> p, q;
  std::vector<double> rhs_p(na), rhs_q(nm);

  // Fills the P right-hand side and returns max |dP|.
  auto p_mismatch = [&] {
    double worst = 0.0;
    for (int k = 0; k < na; ++k) {
      const int i = matrices_.angle_buses[k];
      const double d = injections.p[i] - p[i];
      worst = std::max(worst, std::abs(d));
      rhs_p[k] = d / vm[i];
    }
    return worst;
  };
  auto q_mismatch = [&] {
    double worst = 0.0;
    for (int k = 0; k < nm; ++k) {
      const int i = matrices_.magnitude_buses[k];
      const double d = injections.q[i] - q[i];
      worst = std::max(worst, std::abs(d));
      rhs_q[k] = d / vm[i];
    }
    return worst;
  };

  PowerFlowSolution sol;
  for (int iter = 0;; ++iter) {
    Injections(vm, va, p, q);
    const double mismatch = std::max(p_mismatch(), q_mismatch());
    sol.max_mismatch = mismatch;
    sol.iterations = iter;
    if (!std::isfinite(mismatch)) break;
    if (mismatch <= options.tolerance) {
      sol.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;
    if (na > 0) {
      const std::vector<double> dth =
          sparse::Solve(b_prime_lu_, rhs_p, options.exec);
      for (int k = 0; k < na; ++k) va[matrices_.angle_buses[k]] += dth[k];
    }
    if (nm > 0) {
      Injections(vm, va, p, q);
      q_mismatch();
      const std::vector<double> dv =
          sparse::Solve(b_double_prime_lu_, rhs_q, options.exec);
      for (int k = 0; k < nm; ++k) vm[matrices_.magnitude_buses[k]] += dv[k];
    }
  }

  Injections(vm, va, p, q);
  sol.v_mag = std::move(vm);
  sol.v_ang = std::move(va);
  sol.p_injection = std::move(p);
  sol.q_injection = std::move(q);
  sol.flows = ComputeBranchFlows(case_, sol.v_mag, sol.v_ang);
  sol.total_loss = sol.flows.total_loss;
  return sol;
}

PowerFlowSolution SolveFastDecoupled(const NetworkCase& c,
                                     const PowerFlowOptions& options) {
  return FastDecoupledSolver(c).Solve(StaticInjections(c), options);
}

}  // namespace gridclear
