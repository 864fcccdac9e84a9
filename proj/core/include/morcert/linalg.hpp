// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_LINALG_HPP
#define MORCERT_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <variant>

#include "morcert/errors.hpp"

namespace morcert
{

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

namespace linalg
{

// Relative column drop tolerance of the orthonormalization: a candidate
// column is discarded when two projection passes reduce its norm below this
// fraction of its original norm.
inline constexpr double kOrthDropTol = 1.0e-10;

// A pivot (relative to the largest matrix entry) below this threshold makes
// a factorization fail with SingularMatrix.
inline constexpr double kPivotRelTol = 1.0e-14;

// Square systems below this dimension are factorized densely even when
// stored sparse; the sparse direct solver only pays off above it.
inline constexpr Index kDenseFallbackDim = 500;

// Default cap for dense SVD computations; singular values of anything
// larger must be requested with an explicit higher cap.
inline constexpr Index kSvdDimCap = 5000;

// Square complex matrix with either dense or compressed sparse storage.
// Assembled frequency-domain operators are usually sparse; reduced and
// randomly generated test operators are dense. All products promote to
// dense results since they are applied to skinny dense blocks.
class ComplexMatrix
{
public:
  ComplexMatrix() : storage_(DenseMatrix()) {}
  ComplexMatrix(DenseMatrix m) : storage_(std::move(m)) {}
  ComplexMatrix(SparseMatrix m);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }
  Index nonzeros() const;

  const DenseMatrix &dense() const;
  const SparseMatrix &sparse() const;
  DenseMatrix to_dense() const;

  // Largest entry magnitude (0 for an empty matrix).
  double max_abs() const;

  // A * X, Aᵀ * X, and Aᴴ * X against a dense block.
  DenseMatrix apply(const DenseMatrix &x) const;
  DenseMatrix apply_transpose(const DenseMatrix &x) const;
  DenseMatrix apply_adjoint(const DenseMatrix &x) const;

private:
  std::variant<DenseMatrix, SparseMatrix> storage_;
};

// Dense matrix with orthonormal columns (verified on construction in debug
// builds). Produced by orth()/orth_extend()/real_split(); treat instances
// as immutable.
class BasisMatrix
{
public:
  BasisMatrix() = default;
  // Basis with zero columns over an n-dimensional space.
  explicit BasisMatrix(Index n) : q_(n, 0) {}

  // Wraps columns that are already orthonormal. Debug builds verify the
  // Gram deviation; release builds trust the caller.
  static BasisMatrix from_orthonormal(DenseMatrix q);

  const DenseMatrix &matrix() const { return q_; }
  Index rows() const { return q_.rows(); }
  Index cols() const { return q_.cols(); }
  bool empty() const { return q_.cols() == 0; }

  // True when every entry has zero imaginary part.
  bool is_real() const;

private:
  explicit BasisMatrix(DenseMatrix q) : q_(std::move(q)) {}
  DenseMatrix q_;
};

// Orthonormalizes the given columns by modified Gram-Schmidt with one
// re-orthogonalization pass, dropping columns whose projected norm falls
// below kOrthDropTol times their original norm. Throws EmptyBasis when no
// column survives.
BasisMatrix orth(const DenseMatrix &columns);

// Extends an orthonormal basis with additional columns. Existing columns
// pass through unchanged; new directions already represented are dropped
// (possibly all of them, which leaves the basis as-is).
BasisMatrix orth_extend(const BasisMatrix &v, const DenseMatrix &columns);

// Real basis spanning (over the complex field) at least the span of v:
// orthonormalizes [Re v, Im v]. At most doubles the column count; leaves
// real bases with the same span.
BasisMatrix real_split(const BasisMatrix &v);

// Direct LU factorization of a square ComplexMatrix, usable for repeated
// solves with the operator and its (non-conjugated) transpose. Sparse
// inputs of dimension >= kDenseFallbackDim use a sparse direct solver;
// everything else is factorized densely. Throws SingularMatrix when no
// usable pivot above kPivotRelTol * max|entry| exists.
class Factorization
{
public:
  Index rows() const { return n_; }

  // Solves A X = B for one or more right-hand sides.
  DenseMatrix solve(const DenseMatrix &b) const;
  // Solves Aᵀ X = B (plain transpose, no conjugation).
  DenseMatrix solve_transpose(const DenseMatrix &b) const;

private:
  friend Factorization factorize(const ComplexMatrix &a);
  Factorization() = default;

  Index n_ = 0;
  // Exactly one of the two decompositions is populated. The sparse solver
  // is held non-const only because its transpose() accessor is not
  // const-qualified; solves do not mutate it.
  std::shared_ptr<const Eigen::PartialPivLU<DenseMatrix>> dense_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> sparse_;
};

Factorization factorize(const ComplexMatrix &a);

struct SingularValuePair
{
  double min = 0.0;
  double max = 0.0;
};

// Smallest and largest singular values via a dense SVD. Throws
// DimensionTooLarge when either dimension exceeds max_dim.
SingularValuePair extremal_singular_values(const ComplexMatrix &a, Index max_dim = kSvdDimCap);

} // namespace linalg

using linalg::BasisMatrix;
using linalg::ComplexMatrix;
using linalg::Factorization;

} // namespace morcert

#endif // MORCERT_LINALG_HPP
