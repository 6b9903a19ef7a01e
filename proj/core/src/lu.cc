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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "gridclear/error.h"
#include "gridclear/sparse.h"
#include "parallel.h"

namespace gridclear::sparse {
namespace {

// Adjacency of the symmetrized off-diagonal pattern.
std::vector<std::vector<int>> SymmetricAdjacency(const SparseMatrix& m) {
  const int n = m.rows();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      const int j = m.col_idx()[p];
      if (i == j) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

void CheckSquareAndStructure(const SparseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::kDimension, "not-square",
                "LU factorization needs a square matrix, got " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const int n = m.rows();
  std::vector<char> col_used(n, 0);
  for (int i = 0; i < n; ++i) {
    if (m.row_ptr()[i] == m.row_ptr()[i + 1]) {
      throw Error(ErrorKind::kSingular, "structural-singular",
                  "row " + std::to_string(i) + " is empty (pivot " +
                      std::to_string(i) + ")");
    }
    for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      col_used[m.col_idx()[p]] = 1;
    }
  }
  for (int j = 0; j < n; ++j) {
    if (!col_used[j]) {
      throw Error(ErrorKind::kSingular, "structural-singular",
                  "column " + std::to_string(j) + " is empty (pivot " +
                      std::to_string(j) + ")");
    }
  }
}

// Level k = 1 + max level of the rows it depends on; `deps(i)` yields the
// dependency indices of row i.
template <typename Deps>
std::vector<std::vector<int>> LevelSchedule(int n, bool ascending, Deps deps) {
  std::vector<int> level(n, 0);
  int depth = 0;
  for (int s = 0; s < n; ++s) {
    const int i = ascending ? s : n - 1 - s;
    int lv = 0;
    for (int d : deps(i)) lv = std::max(lv, level[d] + 1);
    level[i] = lv;
    depth = std::max(depth, lv + 1);
  }
  std::vector<std::vector<int>> levels(depth);
  for (int i = 0; i < n; ++i) levels[level[i]].push_back(i);
  return levels;
}

}  // namespace

std::vector<int> MinimumDegreeOrdering(const SparseMatrix& m) {
  const int n = m.rows();
  std::vector<std::set<int>> graph(n);
  {
    auto adj = SymmetricAdjacency(m);
    for (int i = 0; i < n; ++i) graph[i].insert(adj[i].begin(), adj[i].end());
  }
  // (degree, index) ordered so the front is the next pivot.
  std::set<std::pair<int, int>> queue;
  for (int i = 0; i < n; ++i) queue.insert({static_cast<int>(graph[i].size()), i});
  std::vector<int> order;
  order.reserve(n);
  while (!queue.empty()) {
    const int v = queue.begin()->second;
    queue.erase(queue.begin());
    order.push_back(v);
    std::vector<int> nbrs(graph[v].begin(), graph[v].end());
    for (int u : nbrs) {
      queue.erase({static_cast<int>(graph[u].size()), u});
      graph[u].erase(v);
    }
    // Eliminating v turns its neighborhood into a clique.
    for (size_t a = 0; a < nbrs.size(); ++a) {
      for (size_t b = a + 1; b < nbrs.size(); ++b) {
        graph[nbrs[a]].insert(nbrs[b]);
        graph[nbrs[b]].insert(nbrs[a]);
      }
    }
    for (int u : nbrs) queue.insert({static_cast<int>(graph[u].size()), u});
    graph[v].clear();
  }
  return order;
}

SymbolicFactor SymbolicFactorize(const SparseMatrix& m, Ordering ordering) {
  CheckSquareAndStructure(m);
  std::vector<int> perm;
  if (ordering == Ordering::kMinimumDegree) {
    perm = MinimumDegreeOrdering(m);
  } else {
    perm.resize(m.rows());
    std::iota(perm.begin(), perm.end(), 0);
  }
  return SymbolicFactorize(m, perm);
}

SymbolicFactor SymbolicFactorize(const SparseMatrix& m,
                                 std::span<const int> perm) {
  CheckSquareAndStructure(m);
  const int n = m.rows();
  if (static_cast<int>(perm.size()) != n) {
    throw Error(ErrorKind::kDimension, "perm-size",
                "permutation length differs from matrix order");
  }
  SymbolicFactor s;
  s.n = n;
  s.perm.assign(perm.begin(), perm.end());
  s.inverse_perm.assign(n, -1);
  for (int k = 0; k < n; ++k) {
    if (perm[k] < 0 || perm[k] >= n || s.inverse_perm[perm[k]] != -1) {
      throw Error(ErrorKind::kDimension, "perm-invalid",
                  "ordering is not a permutation");
    }
    s.inverse_perm[perm[k]] = k;
  }

  // Higher-numbered neighbors of each pivot in permuted coordinates. After
  // processing pivot k its set is the column pattern of L below k; merging
  // it into the parent (smallest member) produces the fill.
  const auto adj = SymmetricAdjacency(m);
  std::vector<std::vector<int>> upper(n);
  for (int i = 0; i < n; ++i) {
    const int pi = s.inverse_perm[i];
    for (int j : adj[i]) {
      const int pj = s.inverse_perm[j];
      if (pj > pi) upper[pi].push_back(pj);
    }
  }
  for (auto& u : upper) std::sort(u.begin(), u.end());
  for (int k = 0; k < n; ++k) {
    auto& cols = upper[k];
    if (cols.empty()) continue;
    const int parent = cols.front();
    std::vector<int> merged;
    merged.reserve(cols.size() + upper[parent].size());
    std::set_union(cols.begin() + 1, cols.end(), upper[parent].begin(),
                   upper[parent].end(), std::back_inserter(merged));
    for (int j : merged) {
      if (!std::binary_search(upper[parent].begin(), upper[parent].end(), j)) {
        int a = s.perm[parent];
        int b = s.perm[j];
        s.fill_edges.push_back({std::min(a, b), std::max(a, b)});
      }
    }
    upper[parent] = std::move(merged);
  }
  std::sort(s.fill_edges.begin(), s.fill_edges.end());

  // U rows: diagonal plus the higher neighbors. L rows: transpose.
  s.upper_ptr.assign(n + 1, 0);
  for (int k = 0; k < n; ++k) {
    s.upper_ptr[k + 1] = s.upper_ptr[k] + 1 + static_cast<int>(upper[k].size());
  }
  s.upper_idx.reserve(s.upper_ptr[n]);
  std::vector<int> lower_count(n, 0);
  for (int k = 0; k < n; ++k) {
    s.upper_idx.push_back(k);
    for (int j : upper[k]) {
      s.upper_idx.push_back(j);
      ++lower_count[j];
    }
  }
  s.lower_ptr.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) s.lower_ptr[i + 1] = s.lower_ptr[i] + lower_count[i];
  s.lower_idx.assign(s.lower_ptr[n], 0);
  std::vector<int> fill_pos(s.lower_ptr.begin(), s.lower_ptr.end() - 1);
  for (int k = 0; k < n; ++k) {
    for (int j : upper[k]) s.lower_idx[fill_pos[j]++] = k;  // ascending k
  }

  s.levels = LevelSchedule(n, true, [&](int i) {
    return std::span<const int>(s.lower_idx.data() + s.lower_ptr[i],
                                s.lower_ptr[i + 1] - s.lower_ptr[i]);
  });
  s.backward_levels = LevelSchedule(n, false, [&](int i) {
    // Skip the diagonal at the front of each U row.
    return std::span<const int>(s.upper_idx.data() + s.upper_ptr[i] + 1,
                                s.upper_ptr[i + 1] - s.upper_ptr[i] - 1);
  });
  return s;
}

LUFactors NumericFactorize(const SparseMatrix& m, const SymbolicFactor& s,
                           const ExecutionOptions& exec) {
  if (m.rows() != s.n || m.cols() != s.n) {
    throw Error(ErrorKind::kDimension, "pattern-size",
                "matrix order differs from the symbolic factor");
  }
  const int n = s.n;
  std::vector<double> lower_val(s.lower_idx.size(), 0.0);
  std::vector<double> upper_val(s.upper_idx.size(), 0.0);

  const int workers = std::max(1, exec.threads);
  std::vector<std::vector<double>> scratch(workers, std::vector<double>(n, 0.0));

  // Up-looking Doolittle: row i of P*A*P^T is scattered into a dense work
  // row, reduced by the U rows of its L-pattern, then gathered back.
  auto factor_row = [&](int worker, int i) {
    std::vector<double>& w = scratch[worker];
    const int orig = s.perm[i];
    for (int p = m.row_ptr()[orig]; p < m.row_ptr()[orig + 1]; ++p) {
      w[s.inverse_perm[m.col_idx()[p]]] = m.values()[p];
    }
    for (int p = s.lower_ptr[i]; p < s.lower_ptr[i + 1]; ++p) {
      const int k = s.lower_idx[p];
      const double factor = w[k] / upper_val[s.upper_ptr[k]];
      w[k] = factor;
      if (factor == 0.0) continue;
      for (int q = s.upper_ptr[k] + 1; q < s.upper_ptr[k + 1]; ++q) {
        w[s.upper_idx[q]] -= factor * upper_val[q];
      }
    }
    for (int p = s.lower_ptr[i]; p < s.lower_ptr[i + 1]; ++p) {
      lower_val[p] = w[s.lower_idx[p]];
      w[s.lower_idx[p]] = 0.0;
    }
    for (int q = s.upper_ptr[i]; q < s.upper_ptr[i + 1]; ++q) {
      upper_val[q] = w[s.upper_idx[q]];
      w[s.upper_idx[q]] = 0.0;
    }
    const double pivot = upper_val[s.upper_ptr[i]];
    if (!(std::abs(pivot) >= kPivotThreshold)) {
      throw Error(ErrorKind::kSingular, "numeric-singular",
                  "pivot " + std::to_string(i) + " (original index " +
                      std::to_string(orig) + ") below threshold");
    }
  };

  for (const auto& level : s.levels) {
    const int width = static_cast<int>(level.size());
    const int threads = width >= exec.min_parallel_width ? workers : 1;
    internal::ParallelFor(0, width, threads,
                          [&](int worker, int k) { factor_row(worker, level[k]); });
  }

  // Lower factor with its unit diagonal appended to each row.
  std::vector<int> l_ptr(n + 1, 0);
  std::vector<int> l_idx;
  std::vector<double> l_val;
  l_idx.reserve(lower_val.size() + n);
  l_val.reserve(lower_val.size() + n);
  for (int i = 0; i < n; ++i) {
    for (int p = s.lower_ptr[i]; p < s.lower_ptr[i + 1]; ++p) {
      l_idx.push_back(s.lower_idx[p]);
      l_val.push_back(lower_val[p]);
    }
    l_idx.push_back(i);
    l_val.push_back(1.0);
    l_ptr[i + 1] = static_cast<int>(l_idx.size());
  }

  LUFactors f;
  f.lower = SparseMatrix(n, n, std::move(l_ptr), std::move(l_idx), std::move(l_val));
  f.upper = SparseMatrix(n, n, s.upper_ptr, s.upper_idx, std::move(upper_val));
  f.perm = s.perm;
  f.inverse_perm = s.inverse_perm;
  f.fill_edges = s.fill_edges;
  f.levels = s.levels;
  f.backward_levels = s.backward_levels;
  return f;
}

std::vector<double> Solve(const LUFactors& f, std::span<const double> rhs,
                          const ExecutionOptions& exec) {
  const int n = f.size();
  if (static_cast<int>(rhs.size()) != n) {
    throw Error(ErrorKind::kDimension, "dimension",
                "right-hand side has length " + std::to_string(rhs.size()) +
                    ", expected " + std::to_string(n));
  }
  std::vector<double> y(n);
  for (int k = 0; k < n; ++k) y[k] = rhs[f.perm[k]];

  const auto& lp = f.lower.row_ptr();
  const auto& li = f.lower.col_idx();
  const auto& lv = f.lower.values();
  for (const auto& level : f.levels) {
    const int width = static_cast<int>(level.size());
    const int threads = width >= exec.min_parallel_width ? exec.threads : 1;
    internal::ParallelFor(0, width, threads, [&](int, int k) {
      const int i = level[k];
      double sum = y[i];
      for (int p = lp[i]; p < lp[i + 1] - 1; ++p) sum -= lv[p] * y[li[p]];
      y[i] = sum;
    });
  }

  const auto& up = f.upper.row_ptr();
  const auto& ui = f.upper.col_idx();
  const auto& uv = f.upper.values();
  for (const auto& level : f.backward_levels) {
    const int width = static_cast<int>(level.size());
    const int threads = width >= exec.min_parallel_width ? exec.threads : 1;
    internal::ParallelFor(0, width, threads, [&](int, int k) {
      const int i = level[k];
      double sum = y[i];
      for (int p = up[i] + 1; p < up[i + 1]; ++p) sum -= uv[p] * y[ui[p]];
      y[i] = sum / uv[up[i]];
    });
  }

  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[f.perm[k]] = y[k];
  return x;
}

}  // namespace gridclear::sparse
