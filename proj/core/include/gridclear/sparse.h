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

// CSR sparse matrices and a leveled LU factorization with a fixed pivot
// sequence.
//
// The factorization is split the usual way: SymbolicFactorize() chooses an
// ordering, computes the filled pattern of L and U, the fill edges (graph
// edges that elimination inserts) and the elimination levels; the result
// depends only on the sparsity pattern and can be cached and reused by
// NumericFactorize() for every matrix with that pattern.
//
// Pivots are taken on the diagonal of the symmetrically permuted matrix
// P*A*P^T without numerical pivoting, which suits the diagonally dominant
// susceptance matrices of power flow. Rows whose pivots share a level do not
// depend on each other, so a level may be processed in any order or in
// parallel; results are bitwise identical either way.

#ifndef GRIDCLEAR_SPARSE_H_
#define GRIDCLEAR_SPARSE_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridclear::sparse {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols, std::vector<int> row_ptr,
               std::vector<int> col_idx, std::vector<double> values);

  // Sorts entries and sums duplicates. Explicit zeros are kept so callers
  // can fix a pattern independent of values.
  static SparseMatrix FromTriplets(int rows, int cols,
                                   std::vector<Triplet> triplets);
  static SparseMatrix Identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nonzeros() const { return static_cast<int>(values_.size()); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  // Stored value at (i, j), or 0 when the position is not stored.
  double at(int i, int j) const;
  bool contains(int i, int j) const;
  double max_abs() const;

  std::vector<double> Multiply(std::span<const double> x) const;
  SparseMatrix Transpose() const;

  // True iff row_ptr is nondecreasing with n_rows+1 entries, columns are in
  // range and strictly increasing per row, and the value count matches.
  bool Valid() const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

enum class Ordering { kNatural, kMinimumDegree };

// Pattern-only result of symbolic analysis.
struct SymbolicFactor {
  int n = 0;
  // perm[k] is the original index eliminated at step k.
  std::vector<int> perm;
  std::vector<int> inverse_perm;
  // Filled patterns in permuted coordinates, row-compressed. `lower` holds
  // the strictly lower part, `upper` the diagonal and above.
  std::vector<int> lower_ptr, lower_idx;
  std::vector<int> upper_ptr, upper_idx;
  // Edges (i, j), i < j, in original indices, absent from the symmetrized
  // input pattern but created by elimination.
  std::vector<std::pair<int, int>> fill_edges;
  // Forward elimination levels over pivot positions: every pivot in level k
  // depends only on pivots in levels < k.
  std::vector<std::vector<int>> levels;
  // Levels of the upper-triangular (backward) solve.
  std::vector<std::vector<int>> backward_levels;
};

struct LUFactors {
  SparseMatrix lower;  // unit diagonal stored explicitly
  SparseMatrix upper;
  std::vector<int> perm;
  std::vector<int> inverse_perm;
  std::vector<std::pair<int, int>> fill_edges;
  std::vector<std::vector<int>> levels;
  std::vector<std::vector<int>> backward_levels;

  int size() const { return lower.rows(); }
};

struct ExecutionOptions {
  // Worker threads for level-parallel loops; 1 runs serially.
  int threads = 1;
  // Levels narrower than this are processed serially.
  int min_parallel_width = 64;
};

// Minimum-degree ordering on the symmetrized pattern; ties go to the lowest
// index so the ordering is deterministic.
std::vector<int> MinimumDegreeOrdering(const SparseMatrix& m);

// Throws Error(kDimension) for non-square input and Error(kSingular) with
// the offending index when a row or column is empty.
SymbolicFactor SymbolicFactorize(const SparseMatrix& m,
                                 Ordering ordering = Ordering::kMinimumDegree);
SymbolicFactor SymbolicFactorize(const SparseMatrix& m,
                                 std::span<const int> perm);

// Computes L and U on the cached pattern. Throws Error(kSingular) naming the
// pivot when |U(k,k)| < kPivotThreshold.
inline constexpr double kPivotThreshold = 1e-12;
LUFactors NumericFactorize(const SparseMatrix& m, const SymbolicFactor& pattern,
                           const ExecutionOptions& exec = {});

// Solves m x = rhs with the factors of m. Throws Error(kDimension) on a
// length mismatch.
std::vector<double> Solve(const LUFactors& f, std::span<const double> rhs,
                          const ExecutionOptions& exec = {});

// Matrix Market coordinate format ("real general" or "real symmetric").
SparseMatrix ReadMatrixMarket(std::string_view text);
std::string WriteMatrixMarket(const SparseMatrix& m);

}  // namespace gridclear::sparse

#endif  // GRIDCLEAR_SPARSE_H_
