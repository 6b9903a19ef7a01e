#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "gridclear/error.h"
#include "gridclear/powerflow.h"
#include "gridclear/sparse.h"
#include "oracles.h"

namespace gridclear::sparse {
namespace {

using oracle::BruteForceFill;
using oracle::LevelsIndependent;
using oracle::ReconstructionError;
using oracle::ToDense;

std::vector<int> Natural(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::set<std::pair<int, int>> FillSet(const SymbolicFactor& s) {
  return {s.fill_edges.begin(), s.fill_edges.end()};
}

SparseMatrix Tridiagonal(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 4.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix::FromTriplets(n, n, t);
}

// Leaves 0..3 joined to hub 4.
SparseMatrix Arrow() {
  std::vector<Triplet> t;
  for (int i = 0; i < 5; ++i) t.push_back({i, i, 10.0});
  for (int i = 0; i < 4; ++i) {
    t.push_back({i, 4, 1.0});
    t.push_back({4, i, 1.0});
  }
  return SparseMatrix::FromTriplets(5, 5, t);
}

SparseMatrix RandomDominant(std::mt19937& rng, int n, double density) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> p(0.0, 1.0);
  std::vector<Triplet> t;
  std::vector<double> row_sum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (p(rng) < density) {
        const double v = u(rng);
        t.push_back({i, j, v});
        t.push_back({j, i, v});
        row_sum[i] += std::abs(v);
        row_sum[j] += std::abs(v);
      }
    }
  }
  for (int i = 0; i < n; ++i) t.push_back({i, i, row_sum[i] + 0.5 + p(rng)});
  return SparseMatrix::FromTriplets(n, n, t);
}

TEST(SparseMatrix, FromTripletsSumsDuplicates) {
  const SparseMatrix m =
      SparseMatrix::FromTriplets(2, 2, {{1, 0, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}});
  EXPECT_TRUE(m.Valid());
  EXPECT_EQ(m.nonzeros(), 2);
  EXPECT_EQ(m.at(1, 0), 4.0);
  EXPECT_EQ(m.at(0, 0), 0.0);
  EXPECT_EQ(m.Transpose().at(0, 1), 4.0);
}

TEST(SparseMatrix, MatrixMarketRoundTrip) {
  std::mt19937 rng(3);
  const SparseMatrix m = RandomDominant(rng, 12, 0.3);
  EXPECT_EQ(ReadMatrixMarket(WriteMatrixMarket(m)), m);
}

TEST(Symbolic, TridiagonalNoFillFourLevels) {
  const SymbolicFactor s = SymbolicFactorize(Tridiagonal(4), Natural(4));
  EXPECT_TRUE(s.fill_edges.empty());
  EXPECT_EQ(s.levels.size(), 4u);
}

TEST(Symbolic, ArrowFillDependsOnOrder) {
  const SparseMatrix a = Arrow();
  const SymbolicFactor natural = SymbolicFactorize(a, Natural(5));
  EXPECT_TRUE(natural.fill_edges.empty());
  const std::vector<int> reversed = {4, 3, 2, 1, 0};
  const SymbolicFactor rev = SymbolicFactorize(a, reversed);
  EXPECT_EQ(rev.fill_edges.size(), 6u);
  const auto expect = BruteForceFill(a, reversed);
  EXPECT_EQ(FillSet(rev), expect);
}

TEST(Symbolic, MinimumDegreeAvoidsArrowFill) {
  const SymbolicFactor s = SymbolicFactorize(Arrow());
  EXPECT_TRUE(s.fill_edges.empty());
  EXPECT_EQ(s.perm.back(), 4);
}

TEST(Symbolic, DiagonalSingleLevel) {
  std::vector<Triplet> t;
  for (int i = 0; i < 6; ++i) t.push_back({i, i, 1.0 + i});
  const SymbolicFactor s =
      SymbolicFactorize(SparseMatrix::FromTriplets(6, 6, t));
  EXPECT_EQ(s.levels.size(), 1u);
  EXPECT_EQ(s.levels[0].size(), 6u);
}

TEST(Symbolic, FillMatchesBruteForce) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const SparseMatrix a = RandomDominant(rng, 5 + trial, 0.15);
    const SymbolicFactor s = SymbolicFactorize(a);
    const auto expect = BruteForceFill(a, s.perm);
    EXPECT_EQ(FillSet(s), expect);
  }
}

TEST(Symbolic, EmptyRowIsSingular) {
  const SparseMatrix a = SparseMatrix::FromTriplets(2, 2, {{0, 0, 1.0}});
  try {
    SymbolicFactorize(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingular);
  }
  EXPECT_THROW(SymbolicFactorize(SparseMatrix::FromTriplets(2, 3, {})), Error);
}

TEST(Numeric, TwoByTwo) {
  const SparseMatrix a = SparseMatrix::FromTriplets(
      2, 2, {{0, 0, 4}, {0, 1, 3}, {1, 0, 6}, {1, 1, 3}});
  const LUFactors f = NumericFactorize(a, SymbolicFactorize(a, Natural(2)));
  EXPECT_DOUBLE_EQ(f.lower.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.lower.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(f.lower.at(1, 0), 1.5);
  EXPECT_DOUBLE_EQ(f.lower.at(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(f.upper.at(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(f.upper.at(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(f.upper.at(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(f.upper.at(1, 1), -1.5);
  const std::vector<double> b = {7, 9};
  const auto x = Solve(f, b);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Numeric, Identity) {
  const SparseMatrix id = SparseMatrix::Identity(5);
  const LUFactors f = NumericFactorize(id, SymbolicFactorize(id));
  EXPECT_EQ(ToDense(f.lower), Eigen::MatrixXd::Identity(5, 5));
  EXPECT_EQ(ToDense(f.upper), Eigen::MatrixXd::Identity(5, 5));
  const std::vector<double> b = {1, 2, 3, 4, 5};
  EXPECT_EQ(Solve(f, b), b);
}

TEST(Numeric, ZeroPivotIsSingular) {
  const SparseMatrix a = SparseMatrix::FromTriplets(
      2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}});
  try {
    NumericFactorize(a, SymbolicFactorize(a, Natural(2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSingular);
  }
}

TEST(Numeric, RandomReconstructionAndSolve) {
  std::mt19937 rng(2026);
  std::uniform_int_distribution<int> size(2, 50);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    const SparseMatrix a = RandomDominant(rng, n, 0.1 + 0.2 * (trial % 3));
    const LUFactors f = NumericFactorize(a, SymbolicFactorize(a));
    EXPECT_LE(ReconstructionError(f, a), 1e-9 * a.max_abs()) << trial;
    EXPECT_TRUE(LevelsIndependent(f)) << trial;
    std::vector<double> b(n);
    for (double& x : b) x = u(rng);
    const auto x = Solve(f, b);
    const Eigen::VectorXd ref =
        ToDense(a).partialPivLu().solve(Eigen::Map<Eigen::VectorXd>(b.data(), n));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-8);
  }
}

TEST(Numeric, Deterministic) {
  std::mt19937 rng(5);
  const SparseMatrix a = RandomDominant(rng, 200, 0.02);
  const SymbolicFactor s = SymbolicFactorize(a);
  const LUFactors serial = NumericFactorize(a, s);
  ExecutionOptions par;
  par.threads = 4;
  par.min_parallel_width = 1;
  for (int rep = 0; rep < 3; ++rep) {
    const LUFactors f = NumericFactorize(a, s, par);
    EXPECT_EQ(f.lower, serial.lower);
    EXPECT_EQ(f.upper, serial.upper);
    const std::vector<double> b(200, 1.0);
    EXPECT_EQ(Solve(f, b, par), Solve(serial, b));
  }
  EXPECT_EQ(SymbolicFactorize(a).perm, s.perm);
}

TEST(Numeric, SolveLengthMismatch) {
  const SparseMatrix id = SparseMatrix::Identity(3);
  const LUFactors f = NumericFactorize(id, SymbolicFactorize(id));
  const std::vector<double> b = {1, 2};
  EXPECT_THROW(Solve(f, b), Error);
}

TEST(Numeric, SusceptanceMatrices) {
  for (const char* name : {"ieee14.json", "ieee118.json"}) {
    const NetworkCase c = oracle::LoadData(name);
    const FastDecoupledSolver solver(c);
    const SparseMatrix& b = solver.matrices().b_prime;
    const LUFactors& f = solver.b_prime_factors();
    EXPECT_LE(ReconstructionError(f, b), 1e-9 * b.max_abs()) << name;
    EXPECT_TRUE(LevelsIndependent(f)) << name;
  }
}

}  // namespace
}  // namespace gridclear::sparse
