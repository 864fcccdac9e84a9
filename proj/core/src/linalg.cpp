// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/linalg.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <cmath>
#include <string>

namespace morcert
{
namespace linalg
{

ComplexMatrix::ComplexMatrix(SparseMatrix m) : storage_(std::move(m))
{
  std::get<SparseMatrix>(storage_).makeCompressed();
}

Index ComplexMatrix::rows() const
{
  return is_sparse() ? sparse().rows() : dense().rows();
}

Index ComplexMatrix::cols() const
{
  return is_sparse() ? sparse().cols() : dense().cols();
}

Index ComplexMatrix::nonzeros() const
{
  return is_sparse() ? sparse().nonZeros() : dense().size();
}

const DenseMatrix &ComplexMatrix::dense() const
{
  return std::get<DenseMatrix>(storage_);
}

const SparseMatrix &ComplexMatrix::sparse() const
{
  return std::get<SparseMatrix>(storage_);
}

DenseMatrix ComplexMatrix::to_dense() const
{
  return is_sparse() ? DenseMatrix(sparse()) : dense();
}

double ComplexMatrix::max_abs() const
{
  if (is_sparse())
  {
    const SparseMatrix &s = sparse();
    return s.nonZeros() == 0 ? 0.0 : s.coeffs().cwiseAbs().maxCoeff();
  }
  return dense().size() == 0 ? 0.0 : dense().cwiseAbs().maxCoeff();
}

DenseMatrix ComplexMatrix::apply(const DenseMatrix &x) const
{
  if (cols() != x.rows())
  {
    throw DimensionMismatch("apply: operator has " + std::to_string(cols()) +
                            " columns but operand has " + std::to_string(x.rows()) + " rows");
  }
  return is_sparse() ? DenseMatrix(sparse() * x) : DenseMatrix(dense() * x);
}

DenseMatrix ComplexMatrix::apply_transpose(const DenseMatrix &x) const
{
  if (rows() != x.rows())
  {
    throw DimensionMismatch("apply_transpose: shape mismatch");
  }
  return is_sparse() ? DenseMatrix(sparse().transpose() * x)
                     : DenseMatrix(dense().transpose() * x);
}

DenseMatrix ComplexMatrix::apply_adjoint(const DenseMatrix &x) const
{
  if (rows() != x.rows())
  {
    throw DimensionMismatch("apply_adjoint: shape mismatch");
  }
  return is_sparse() ? DenseMatrix(sparse().adjoint() * x) : DenseMatrix(dense().adjoint() * x);
}

BasisMatrix BasisMatrix::from_orthonormal(DenseMatrix q)
{
#ifndef NDEBUG
  if (q.cols() > 0)
  {
    const double gram_dev =
        (q.adjoint() * q - DenseMatrix::Identity(q.cols(), q.cols())).norm();
    eigen_assert(gram_dev <= 1.0e-8 * std::sqrt(static_cast<double>(q.cols())) &&
                 "from_orthonormal: columns are not orthonormal");
  }
#endif
  return BasisMatrix(std::move(q));
}

bool BasisMatrix::is_real() const
{
  return q_.size() == 0 || q_.imag().cwiseAbs().maxCoeff() == 0.0;
}

namespace
{

// Core modified Gram-Schmidt loop: orthonormalizes the columns of `cand`
// against `q` (whose first `kept` columns are orthonormal) and against each
// other, appending survivors to `q`. Two projection passes keep the loss of
// orthogonality at the roundoff level even for nearly dependent input.
Index mgs_append(DenseMatrix &q, Index kept, const DenseMatrix &cand)
{
  for (Index j = 0; j < cand.cols(); ++j)
  {
    DenseVector v = cand.col(j);
    const double norm0 = v.norm();
    if (!(norm0 > 0.0))
    {
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
    {
      for (Index i = 0; i < kept; ++i)
      {
        v -= q.col(i) * q.col(i).dot(v);
      }
    }
    const double norm1 = v.norm();
    if (norm1 > kOrthDropTol * norm0)
    {
      q.col(kept++) = v / norm1;
    }
  }
  return kept;
}

} // namespace

BasisMatrix orth(const DenseMatrix &columns)
{
  if (columns.cols() == 0)
  {
    throw EmptyBasis("orth: no input columns");
  }
  DenseMatrix q(columns.rows(), columns.cols());
  const Index kept = mgs_append(q, 0, columns);
  if (kept == 0)
  {
    throw EmptyBasis("orth: every column fell below the drop tolerance");
  }
  q.conservativeResize(Eigen::NoChange, kept);
  return BasisMatrix::from_orthonormal(std::move(q));
}

BasisMatrix orth_extend(const BasisMatrix &v, const DenseMatrix &columns)
{
  if (v.empty() && columns.cols() > 0)
  {
    return orth(columns);
  }
  if (columns.cols() == 0)
  {
    return v;
  }
  if (v.rows() != columns.rows())
  {
    throw DimensionMismatch("orth_extend: row count mismatch");
  }
  DenseMatrix q(v.rows(), v.cols() + columns.cols());
  q.leftCols(v.cols()) = v.matrix();
  const Index kept = mgs_append(q, v.cols(), columns);
  q.conservativeResize(Eigen::NoChange, kept);
  return BasisMatrix::from_orthonormal(std::move(q));
}

BasisMatrix real_split(const BasisMatrix &v)
{
  if (v.empty())
  {
    throw EmptyBasis("real_split: empty basis");
  }
  DenseMatrix cand(v.rows(), 2 * v.cols());
  cand.leftCols(v.cols()) = v.matrix().real().cast<Complex>();
  cand.rightCols(v.cols()) = v.matrix().imag().cast<Complex>();
  return orth(cand);
}

Factorization factorize(const ComplexMatrix &a)
{
  if (a.rows() != a.cols() || a.rows() == 0)
  {
    throw DimensionMismatch("factorize: matrix must be square and nonempty");
  }
  const double max_entry = a.max_abs();
  if (max_entry == 0.0)
  {
    throw SingularMatrix("factorize: zero matrix");
  }

  Factorization f;
  f.n_ = a.rows();
  if (!a.is_sparse() || a.rows() < kDenseFallbackDim)
  {
    auto lu = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(a.to_dense());
    const double min_pivot = lu->matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > kPivotRelTol * max_entry))
    {
      throw SingularMatrix("factorize: no usable pivot (smallest " + std::to_string(min_pivot) +
                           " against entry magnitude " + std::to_string(max_entry) + ")");
    }
    f.dense_ = std::move(lu);
  }
  else
  {
    auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
    lu->compute(a.sparse());
    if (lu->info() != Eigen::Success)
    {
      throw SingularMatrix("factorize: sparse LU failed (structurally or numerically singular)");
    }
    f.sparse_ = std::move(lu);
  }
  return f;
}

DenseMatrix Factorization::solve(const DenseMatrix &b) const
{
  if (b.rows() != n_)
  {
    throw DimensionMismatch("solve: right-hand side has wrong row count");
  }
  DenseMatrix x = dense_ ? DenseMatrix(dense_->solve(b)) : DenseMatrix(sparse_->solve(b));
  if (!x.allFinite())
  {
    throw SingularMatrix("solve: non-finite solution entries");
  }
  return x;
}

DenseMatrix Factorization::solve_transpose(const DenseMatrix &b) const
{
  if (b.rows() != n_)
  {
    throw DimensionMismatch("solve_transpose: right-hand side has wrong row count");
  }
  DenseMatrix x = dense_ ? DenseMatrix(dense_->transpose().solve(b))
                         : DenseMatrix(sparse_->transpose().solve(b));
  if (!x.allFinite())
  {
    throw SingularMatrix("solve_transpose: non-finite solution entries");
  }
  return x;
}

SingularValuePair extremal_singular_values(const ComplexMatrix &a, Index max_dim)
{
  if (a.rows() == 0 || a.cols() == 0)
  {
    throw DimensionMismatch("extremal_singular_values: empty matrix");
  }
  if (a.rows() > max_dim || a.cols() > max_dim)
  {
    throw DimensionTooLarge("extremal_singular_values: dimension " +
                            std::to_string(std::max(a.rows(), a.cols())) +
                            " exceeds the dense SVD cap " + std::to_string(max_dim) +
                            "; raise the cap explicitly to force the computation");
  }
  const Eigen::BDCSVD<DenseMatrix> svd(a.to_dense());
  const auto &sv = svd.singularValues();
  return SingularValuePair{sv(sv.size() - 1), sv(0)};
}

} // namespace linalg
} // namespace morcert
