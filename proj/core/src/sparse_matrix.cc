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
#include <cstdio>
#include <sstream>
#include <string>

#include "gridclear/error.h"
#include "gridclear/sparse.h"

namespace gridclear::sparse {

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<int> row_ptr,
                           std::vector<int> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (!Valid()) {
    throw Error(ErrorKind::kDimension, "csr-invalid",
                "CSR arrays violate the storage invariants");
  }
}

SparseMatrix SparseMatrix::FromTriplets(int rows, int cols,
                                        std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error(ErrorKind::kDimension, "triplet-range",
                  "triplet (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ") outside matrix");
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<int> row_ptr(rows + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  int prev_row = -1;
  int prev_col = -1;
  for (const Triplet& t : triplets) {
    if (t.row == prev_row && t.col == prev_col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
    prev_row = t.row;
    prev_col = t.col;
  }
  for (int i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx),
                      std::move(values));
}

SparseMatrix SparseMatrix::Identity(int n) {
  std::vector<int> row_ptr(n + 1);
  std::vector<int> col_idx(n);
  for (int i = 0; i <= n; ++i) row_ptr[i] = i;
  for (int i = 0; i < n; ++i) col_idx[i] = i;
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                      std::vector<double>(n, 1.0));
}

double SparseMatrix::at(int i, int j) const {
  auto first = col_idx_.begin() + row_ptr_[i];
  auto last = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[it - col_idx_.begin()];
}

bool SparseMatrix::contains(int i, int j) const {
  auto first = col_idx_.begin() + row_ptr_[i];
  auto last = col_idx_.begin() + row_ptr_[i + 1];
  return std::binary_search(first, last, j);
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> SparseMatrix::Multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_) {
    throw Error(ErrorKind::kDimension, "dimension",
                "vector length differs from column count");
  }
  std::vector<double> y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      sum += values_[p] * x[col_idx_[p]];
    }
    y[i] = sum;
  }
  return y;
}

SparseMatrix SparseMatrix::Transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      t.push_back({col_idx_[p], i, values_[p]});
    }
  }
  return FromTriplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::Valid() const {
  if (rows_ < 0 || cols_ < 0) return false;
  if (static_cast<int>(row_ptr_.size()) != rows_ + 1 || row_ptr_[0] != 0) {
    return false;
  }
  for (int i = 0; i < rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) return false;
  }
  if (static_cast<size_t>(row_ptr_[rows_]) != col_idx_.size() ||
      col_idx_.size() != values_.size()) {
    return false;
  }
  for (int i = 0; i < rows_; ++i) {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_idx_[p] < 0 || col_idx_[p] >= cols_) return false;
      if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]) return false;
    }
  }
  return true;
}

SparseMatrix ReadMatrixMarket(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
    throw Error(ErrorKind::kParse, "mm-header", "missing %%MatrixMarket banner");
  }
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  if (lower.find("coordinate") == std::string::npos ||
      (lower.find("real") == std::string::npos &&
       lower.find("integer") == std::string::npos)) {
    throw Error(ErrorKind::kParse, "mm-header",
                "only real/integer coordinate matrices are supported");
  }
  const bool symmetric = lower.find("symmetric") != std::string::npos;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  int rows = 0, cols = 0, entries = 0;
  if (std::sscanf(line.c_str(), "%d %d %d", &rows, &cols, &entries) != 3) {
    throw Error(ErrorKind::kParse, "mm-size", "bad size line: " + line);
  }
  std::vector<Triplet> t;
  t.reserve(symmetric ? 2 * entries : entries);
  for (int k = 0; k < entries; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) {
      throw Error(ErrorKind::kParse, "mm-entry",
                  "expected " + std::to_string(entries) + " entries");
    }
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
  }
  return SparseMatrix::FromTriplets(rows, cols, std::move(t));
}

std::string WriteMatrixMarket(const SparseMatrix& m) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
         std::to_string(m.nonzeros()) + "\n";
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1,
                    m.col_idx()[p] + 1, m.values()[p]);
      out += buf;
    }
  }
  return out;
}

}  // namespace gridclear::sparse
