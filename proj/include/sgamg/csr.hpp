#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgamg {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using DenseVector = Vector<double>;

/// Thrown when operand shapes do not compose.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
struct Triplet {
  Index row;
  Index col;
  Scalar value;
};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row. Values are not
/// required to be nonzero; `prune` produces the canonical form without
/// explicitly stored zeros, and every arithmetic routine in this header
/// returns canonical results.
template <typename Scalar>
class SparseRowMatrix {
 public:
  using value_type = Scalar;

  SparseRowMatrix() : rowptr_(1, 0) {}

  SparseRowMatrix(Index nrows, Index ncols)
      : nrows_(nrows), ncols_(ncols), rowptr_(static_cast<size_t>(nrows) + 1, 0) {
    if (nrows < 0 || ncols < 0) throw DimensionError("negative matrix dimension");
  }

  /// Adopts raw CSR arrays after validating the structural invariants.
  SparseRowMatrix(Index nrows, Index ncols, std::vector<Index> rowptr,
                  std::vector<Index> colind, std::vector<Scalar> values)
      : nrows_(nrows),
        ncols_(ncols),
        rowptr_(std::move(rowptr)),
        colind_(std::move(colind)),
        values_(std::move(values)) {
    validate();
  }

  /// Assembles from unordered coordinates; duplicates are summed and exact
  /// zeros in the result are dropped.
  static SparseRowMatrix from_triplets(Index nrows, Index ncols,
                                       std::span<const Triplet<Scalar>> entries) {
    if (nrows < 0 || ncols < 0) throw DimensionError("negative matrix dimension");
    std::vector<Index> count(static_cast<size_t>(nrows) + 1, 0);
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
        throw DimensionError("triplet index out of range");
      ++count[t.row + 1];
    }
    for (Index i = 0; i < nrows; ++i) count[i + 1] += count[i];
    std::vector<Index> cols(entries.size());
    std::vector<Scalar> vals(entries.size());
    std::vector<Index> fill(count.begin(), count.end() - 1);
    for (const auto& t : entries) {
      const Index pos = fill[t.row]++;
      cols[pos] = t.col;
      vals[pos] = t.value;
    }

    std::vector<Index> rowptr(static_cast<size_t>(nrows) + 1, 0);
    std::vector<Index> colind;
    std::vector<Scalar> values;
    colind.reserve(entries.size());
    values.reserve(entries.size());
    std::vector<Index> order;
    for (Index i = 0; i < nrows; ++i) {
      order.resize(count[i + 1] - count[i]);
      for (size_t k = 0; k < order.size(); ++k) order[k] = count[i] + static_cast<Index>(k);
      std::stable_sort(order.begin(), order.end(),
                       [&](Index a, Index b) { return cols[a] < cols[b]; });
      for (size_t k = 0; k < order.size();) {
        const Index c = cols[order[k]];
        Scalar sum = vals[order[k]];
        size_t m = k + 1;
        for (; m < order.size() && cols[order[m]] == c; ++m) sum += vals[order[m]];
        if (sum != Scalar(0)) {
          colind.push_back(c);
          values.push_back(sum);
        }
        k = m;
      }
      rowptr[i + 1] = static_cast<Index>(colind.size());
    }
    return SparseRowMatrix(nrows, ncols, std::move(rowptr), std::move(colind),
                           std::move(values));
  }

  static SparseRowMatrix from_triplets(Index nrows, Index ncols,
                                       const std::vector<Triplet<Scalar>>& entries) {
    return from_triplets(nrows, ncols, std::span<const Triplet<Scalar>>(entries));
  }

  static SparseRowMatrix identity(Index n) {
    std::vector<Index> rowptr(static_cast<size_t>(n) + 1);
    std::vector<Index> colind(n);
    for (Index i = 0; i <= n; ++i) rowptr[i] = i;
    for (Index i = 0; i < n; ++i) colind[i] = i;
    return SparseRowMatrix(n, n, std::move(rowptr), std::move(colind),
                           std::vector<Scalar>(n, Scalar(1)));
  }

  static SparseRowMatrix from_dense(const DenseMatrix<Scalar>& dense) {
    std::vector<Index> rowptr(dense.rows() + 1, 0);
    std::vector<Index> colind;
    std::vector<Scalar> values;
    for (Index i = 0; i < dense.rows(); ++i) {
      for (Index j = 0; j < dense.cols(); ++j) {
        if (dense(i, j) != Scalar(0)) {
          colind.push_back(j);
          values.push_back(dense(i, j));
        }
      }
      rowptr[i + 1] = static_cast<Index>(colind.size());
    }
    return SparseRowMatrix(dense.rows(), dense.cols(), std::move(rowptr),
                           std::move(colind), std::move(values));
  }

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(colind_.size()); }
  bool is_square() const { return nrows_ == ncols_; }

  std::span<const Index> rowptr() const { return rowptr_; }
  std::span<const Index> colind() const { return colind_; }
  std::span<const Scalar> values() const { return values_; }
  std::span<Scalar> values() { return values_; }

  std::span<const Index> row_cols(Index i) const {
    return {colind_.data() + rowptr_[i], static_cast<size_t>(rowptr_[i + 1] - rowptr_[i])};
  }
  std::span<const Scalar> row_values(Index i) const {
    return {values_.data() + rowptr_[i], static_cast<size_t>(rowptr_[i + 1] - rowptr_[i])};
  }

  /// Storage position of (i, j), or -1 when the entry is not stored.
  Index find(Index i, Index j) const {
    const auto first = colind_.begin() + rowptr_[i];
    const auto last = colind_.begin() + rowptr_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? static_cast<Index>(it - colind_.begin()) : -1;
  }

  Scalar coeff(Index i, Index j) const {
    const Index pos = find(i, j);
    return pos < 0 ? Scalar(0) : values_[pos];
  }

  DenseMatrix<Scalar> to_dense() const {
    DenseMatrix<Scalar> dense = DenseMatrix<Scalar>::Zero(nrows_, ncols_);
    for (Index i = 0; i < nrows_; ++i)
      for (Index k = rowptr_[i]; k < rowptr_[i + 1]; ++k) dense(i, colind_[k]) = values_[k];
    return dense;
  }

  friend bool operator==(const SparseRowMatrix& a, const SparseRowMatrix& b) {
    return a.nrows_ == b.nrows_ && a.ncols_ == b.ncols_ && a.rowptr_ == b.rowptr_ &&
           a.colind_ == b.colind_ && a.values_ == b.values_;
  }

 private:
  void validate() const {
    if (nrows_ < 0 || ncols_ < 0) throw DimensionError("negative matrix dimension");
    if (rowptr_.size() != static_cast<size_t>(nrows_) + 1 || rowptr_.front() != 0)
      throw std::invalid_argument("rowptr must have nrows+1 entries starting at 0");
    if (static_cast<size_t>(rowptr_.back()) != colind_.size() ||
        colind_.size() != values_.size())
      throw std::invalid_argument("rowptr/colind/values sizes disagree");
    for (Index i = 0; i < nrows_; ++i) {
      if (rowptr_[i + 1] < rowptr_[i]) throw std::invalid_argument("rowptr decreasing");
      for (Index k = rowptr_[i]; k < rowptr_[i + 1]; ++k) {
        if (colind_[k] < 0 || colind_[k] >= ncols_)
          throw std::invalid_argument("column index out of range in row " + std::to_string(i));
        if (k > rowptr_[i] && colind_[k] <= colind_[k - 1])
          throw std::invalid_argument("columns not strictly increasing in row " +
                                      std::to_string(i));
      }
    }
  }

  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> rowptr_;
  std::vector<Index> colind_;
  std::vector<Scalar> values_;
};

using CsrMatrix = SparseRowMatrix<double>;

/// y = A x, accumulated per row in ascending column order.
template <typename Scalar, typename Derived>
Vector<Scalar> spmv(const SparseRowMatrix<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
  if (A.cols() != x.size())
    throw DimensionError("spmv: A has " + std::to_string(A.cols()) + " columns, x has length " +
                         std::to_string(x.size()));
  Vector<Scalar> y(A.rows());
  const auto rowptr = A.rowptr();
  const auto colind = A.colind();
  const auto values = A.values();
  for (Index i = 0; i < A.rows(); ++i) {
    Scalar sum(0);
    for (Index k = rowptr[i]; k < rowptr[i + 1]; ++k) sum += values[k] * x(colind[k]);
    y(i) = sum;
  }
  return y;
}

/// r = b - A x, row by row with the same accumulation order as spmv.
template <typename Scalar, typename D1, typename D2>
Vector<Scalar> residual(const SparseRowMatrix<Scalar>& A, const Eigen::MatrixBase<D1>& x,
                        const Eigen::MatrixBase<D2>& b) {
  if (A.cols() != x.size() || A.rows() != b.size()) throw DimensionError("residual: shape");
  Vector<Scalar> r(A.rows());
  const auto rowptr = A.rowptr();
  const auto colind = A.colind();
  const auto values = A.values();
  for (Index i = 0; i < A.rows(); ++i) {
    Scalar sum(0);
    for (Index k = rowptr[i]; k < rowptr[i + 1]; ++k) sum += values[k] * x(colind[k]);
    r(i) = b(i) - sum;
  }
  return r;
}

/// y = A^T x without forming the transpose; scatter in ascending row order.
template <typename Scalar, typename Derived>
Vector<Scalar> spmv_transpose(const SparseRowMatrix<Scalar>& A,
                              const Eigen::MatrixBase<Derived>& x) {
  if (A.rows() != x.size()) throw DimensionError("spmv_transpose: shape");
  Vector<Scalar> y = Vector<Scalar>::Zero(A.cols());
  const auto rowptr = A.rowptr();
  const auto colind = A.colind();
  const auto values = A.values();
  for (Index i = 0; i < A.rows(); ++i) {
    const Scalar xi = x(i);
    for (Index k = rowptr[i]; k < rowptr[i + 1]; ++k) y(colind[k]) += values[k] * xi;
  }
  return y;
}

template <typename Scalar>
SparseRowMatrix<Scalar> transpose(const SparseRowMatrix<Scalar>& A) {
  std::vector<Index> rowptr(static_cast<size_t>(A.cols()) + 1, 0);
  for (Index c : A.colind()) ++rowptr[c + 1];
  for (Index j = 0; j < A.cols(); ++j) rowptr[j + 1] += rowptr[j];
  std::vector<Index> colind(A.nnz());
  std::vector<Scalar> values(A.nnz());
  std::vector<Index> fill(rowptr.begin(), rowptr.end() - 1);
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      const Index pos = fill[cols[k]]++;
      colind[pos] = i;
      values[pos] = vals[k];
    }
  }
  return SparseRowMatrix<Scalar>(A.cols(), A.rows(), std::move(rowptr), std::move(colind),
                                 std::move(values));
}

/// Drops stored entries with |a_ij| <= eps (eps = 0 removes exact zeros only).
template <typename Scalar>
SparseRowMatrix<Scalar> prune(const SparseRowMatrix<Scalar>& A, Scalar eps = Scalar(0)) {
  std::vector<Index> rowptr(static_cast<size_t>(A.rows()) + 1, 0);
  std::vector<Index> colind;
  std::vector<Scalar> values;
  colind.reserve(A.nnz());
  values.reserve(A.nnz());
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k) {
      if (std::abs(vals[k]) > eps) {
        colind.push_back(cols[k]);
        values.push_back(vals[k]);
      }
    }
    rowptr[i + 1] = static_cast<Index>(colind.size());
  }
  return SparseRowMatrix<Scalar>(A.rows(), A.cols(), std::move(rowptr), std::move(colind),
                                 std::move(values));
}

/// Sparse product A B (row-by-row Gustavson); exact zeros are pruned.
template <typename Scalar>
SparseRowMatrix<Scalar> matmat(const SparseRowMatrix<Scalar>& A,
                               const SparseRowMatrix<Scalar>& B) {
  if (A.cols() != B.rows())
    throw DimensionError("matmat: " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()) +
                         " times " + std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
  std::vector<Index> marker(B.cols(), -1);
  std::vector<Scalar> acc(B.cols(), Scalar(0));
  std::vector<Index> rowptr(static_cast<size_t>(A.rows()) + 1, 0);
  std::vector<Index> colind;
  std::vector<Scalar> values;
  std::vector<Index> touched;
  for (Index i = 0; i < A.rows(); ++i) {
    touched.clear();
    const auto acols = A.row_cols(i);
    const auto avals = A.row_values(i);
    for (size_t ka = 0; ka < acols.size(); ++ka) {
      const Index k = acols[ka];
      const auto bcols = B.row_cols(k);
      const auto bvals = B.row_values(k);
      for (size_t kb = 0; kb < bcols.size(); ++kb) {
        const Index j = bcols[kb];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = avals[ka] * bvals[kb];
          touched.push_back(j);
        } else {
          acc[j] += avals[ka] * bvals[kb];
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      if (acc[j] != Scalar(0)) {
        colind.push_back(j);
        values.push_back(acc[j]);
      }
    }
    rowptr[i + 1] = static_cast<Index>(colind.size());
  }
  return SparseRowMatrix<Scalar>(A.rows(), B.cols(), std::move(rowptr), std::move(colind),
                                 std::move(values));
}

/// sa A + sb B, canonical.
template <typename Scalar>
SparseRowMatrix<Scalar> add_scaled(const SparseRowMatrix<Scalar>& A,
                                   const SparseRowMatrix<Scalar>& B, Scalar sa, Scalar sb) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw DimensionError("add_scaled: shape");
  std::vector<Index> rowptr(static_cast<size_t>(A.rows()) + 1, 0);
  std::vector<Index> colind;
  std::vector<Scalar> values;
  colind.reserve(A.nnz() + B.nnz());
  values.reserve(A.nnz() + B.nnz());
  auto emit = [&](Index c, Scalar v) {
    if (v != Scalar(0)) {
      colind.push_back(c);
      values.push_back(v);
    }
  };
  for (Index i = 0; i < A.rows(); ++i) {
    const auto ac = A.row_cols(i);
    const auto av = A.row_values(i);
    const auto bc = B.row_cols(i);
    const auto bv = B.row_values(i);
    size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        emit(ac[p], sa * av[p]);
        ++p;
      } else if (p == ac.size() || bc[q] < ac[p]) {
        emit(bc[q], sb * bv[q]);
        ++q;
      } else {
        emit(ac[p], sa * av[p] + sb * bv[q]);
        ++p;
        ++q;
      }
    }
    rowptr[i + 1] = static_cast<Index>(colind.size());
  }
  return SparseRowMatrix<Scalar>(A.rows(), A.cols(), std::move(rowptr), std::move(colind),
                                 std::move(values));
}

/// True iff |a_ij - a_ji| <= tol over every stored entry and its mirror.
template <typename Scalar>
bool is_symmetric(const SparseRowMatrix<Scalar>& A, Scalar tol = Scalar(0)) {
  if (!A.is_square()) throw DimensionError("is_symmetric: matrix is not square");
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k)
      if (std::abs(vals[k] - A.coeff(cols[k], i)) > tol) return false;
  }
  return true;
}

template <typename Scalar>
Scalar max_abs(const SparseRowMatrix<Scalar>& A) {
  Scalar m(0);
  for (Scalar v : A.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Entrywise absolute values; used for cancellation-free structural products.
template <typename Scalar>
SparseRowMatrix<Scalar> abs_values(const SparseRowMatrix<Scalar>& A) {
  std::vector<Scalar> values(A.values().begin(), A.values().end());
  for (auto& v : values) v = std::abs(v);
  return SparseRowMatrix<Scalar>(A.rows(), A.cols(),
                                 std::vector<Index>(A.rowptr().begin(), A.rowptr().end()),
                                 std::vector<Index>(A.colind().begin(), A.colind().end()),
                                 std::move(values));
}

template <typename Scalar>
bool same_pattern(const SparseRowMatrix<Scalar>& A, const SparseRowMatrix<Scalar>& B) {
  return A.rows() == B.rows() && A.cols() == B.cols() &&
         std::ranges::equal(A.rowptr(), B.rowptr()) && std::ranges::equal(A.colind(), B.colind());
}

/// True when every stored position of `sub` is also stored in `super`.
template <typename Scalar>
bool pattern_contains(const SparseRowMatrix<Scalar>& super, const SparseRowMatrix<Scalar>& sub) {
  if (super.rows() != sub.rows() || super.cols() != sub.cols()) return false;
  for (Index i = 0; i < sub.rows(); ++i)
    for (Index j : sub.row_cols(i))
      if (super.find(i, j) < 0) return false;
  return true;
}

template <typename Scalar>
Vector<Scalar> diagonal(const SparseRowMatrix<Scalar>& A) {
  Vector<Scalar> d(std::min(A.rows(), A.cols()));
  for (Index i = 0; i < d.size(); ++i) d(i) = A.coeff(i, i);
  return d;
}

}  // namespace sgamg
