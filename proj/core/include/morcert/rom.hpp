// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_ROM_HPP
#define MORCERT_ROM_HPP

#include <vector>

#include "morcert/affine.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"

namespace morcert
{

// One affine term of a projected operator. The projection preserves each
// term's scalar coefficient, so a reduced system is assembled with the
// same coefficient algebra as its parent.
struct ReducedTerm
{
  Coefficient coeff;
  DenseMatrix matrix;
};

// Galerkin reduced model: with basis V the reduced operator terms are
// V^H A_q V and the reduced drives V^H Q_q, so that
//
//   Ahat(mu) z = bhat(mu),  xhat = V z,
//
// approximates the full-order solve. The products A_q V are retained so
// full-order residuals can be accumulated term by term without touching
// the parent matrices again.
class ReducedModel
{
public:
  ReducedModel() = default;

  Index full_dimension() const { return basis_.rows(); }
  Index order() const { return basis_.cols(); }
  Index ports() const { return p_; }
  double scale() const { return scale_; }
  const ParameterDomain &domain() const { return domain_; }

  const BasisMatrix &basis() const { return basis_; }
  const std::vector<ReducedTerm> &terms() const { return terms_; }
  const std::vector<ReducedTerm> &rhs_terms() const { return rhs_terms_; }
  // A_q V for each affine matrix term, in term order (n x r each).
  const std::vector<DenseMatrix> &term_products() const { return term_products_; }

  // Wall-clock seconds spent constructing this model (basis building plus
  // projection); recorded by the greedy driver for speedup reporting.
  double offline_seconds() const { return offline_seconds_; }
  void set_offline_seconds(double s) { offline_seconds_ = s; }

  DenseMatrix assemble(const ParameterPoint &pt) const;     // r x r
  DenseMatrix assemble_rhs(const ParameterPoint &pt) const; // r x p, scale applied

  // Reduced coordinates z (r x p), one column per port. Throws
  // SingularMatrix when the reduced operator has no usable pivot.
  DenseMatrix solve(const ParameterPoint &pt) const;

  // V z.
  DenseMatrix lift(const DenseMatrix &z) const;

  // Restores a deserialized model; all shapes are revalidated.
  static ReducedModel from_parts(BasisMatrix basis, std::vector<ReducedTerm> terms,
                                 std::vector<ReducedTerm> rhs_terms,
                                 std::vector<DenseMatrix> term_products, ParameterDomain domain,
                                 Index ports, double scale, double offline_seconds);

private:
  friend ReducedModel project(const AffineSystem &sys, BasisMatrix basis);

  BasisMatrix basis_;
  std::vector<ReducedTerm> terms_;
  std::vector<ReducedTerm> rhs_terms_;
  std::vector<DenseMatrix> term_products_;
  ParameterDomain domain_;
  Index p_ = 0;
  double scale_ = 1.0;
  double offline_seconds_ = 0.0;
};

// Galerkin projection of the system onto a nonempty orthonormal basis.
ReducedModel project(const AffineSystem &sys, BasisMatrix basis);

// Full-order residual b(mu) - A(mu) V z for reduced coordinates z,
// accumulated from the retained term products (n x p).
DenseMatrix residual(const AffineSystem &sys, const ReducedModel &rm, const ParameterPoint &pt,
                     const DenseMatrix &z);

// ||x(mu) - V z(mu)|| per port against a full-order solve; the reference
// solution may be passed in when already available.
RealVector true_error(const AffineSystem &sys, const ReducedModel &rm, const ParameterPoint &pt);
RealVector true_error(const ReducedModel &rm, const ParameterPoint &pt, const DenseMatrix &x_full);

} // namespace morcert

#endif // MORCERT_ROM_HPP
