// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_AFFINE_HPP
#define MORCERT_AFFINE_HPP

#include <vector>

#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"

namespace morcert
{

// Scalar coefficient of one affine term, as a product of primitive
// factors: value * s^s_power * (extra[ratio_index] / extra_ref). This
// covers the frequency-domain forms handled here, e.g. S + s*U + s^2*T and
// material splits s^2 * (d_i/d_ref) * T_i.
struct Coefficient
{
  double value = 1.0;
  int s_power = 0;     // 0, 1, or 2
  int ratio_index = -1; //< 0: no ratio factor

  bool operator==(const Coefficient &other) const = default;
};

Complex evaluate(const Coefficient &c, const ParameterPoint &pt, const ParameterDomain &domain);

struct AffineTerm
{
  Coefficient coeff;
  ComplexMatrix matrix; // n x n
};

struct RhsTerm
{
  Coefficient coeff;
  ComplexMatrix matrix; // n x p
};

// Parametric linear system with affine parameter dependence,
//
//   A(mu) x(mu) = b(mu),  A(mu) = sum_q theta_q(mu) A_q,
//                         b(mu) = (1/scale) sum_q theta_q(mu) Q_q,
//
// where each column of the n x p right-hand side drives one port. The
// matrix terms are shared, immutable, and never materialized into a single
// dense operator unless a consumer explicitly asks for it.
class AffineSystem
{
public:
  // scale <= 0 requests the default right-hand-side normalization
  // 10^max(0, round(log10(max_q max|Q_q| * |s_max|))), which keeps solution
  // norms near unity for typical driven systems.
  AffineSystem(ParameterDomain domain, std::vector<AffineTerm> terms,
               std::vector<RhsTerm> rhs_terms, double scale = 0.0);

  Index dimension() const { return n_; }
  Index ports() const { return p_; }
  double scale() const { return scale_; }
  const ParameterDomain &domain() const { return domain_; }
  const std::vector<AffineTerm> &terms() const { return terms_; }
  const std::vector<RhsTerm> &rhs_terms() const { return rhs_terms_; }

  // sum_q theta_q(mu) A_q. Sparse when every term is sparse.
  ComplexMatrix assemble(const ParameterPoint &pt) const;

  // (1/scale) sum_q theta_q(mu) Q_q; the only place the scale is applied.
  DenseMatrix assemble_rhs(const ParameterPoint &pt) const;

  // A(mu) X for a dense block, accumulated term by term from the affine
  // factors without materializing A(mu).
  DenseMatrix apply(const ParameterPoint &pt, const DenseMatrix &x) const;
  // A(mu)^T X (plain transpose).
  DenseMatrix apply_transpose(const ParameterPoint &pt, const DenseMatrix &x) const;

  Factorization factorize_at(const ParameterPoint &pt) const;

  // Solves all p ports against one factorization and verifies each port's
  // relative residual (<= 1e-9, after at most one step of iterative
  // refinement). A violation signals an (effectively) resonant sample and
  // raises SingularMatrix.
  DenseMatrix fom_solve(const ParameterPoint &pt) const;
  DenseMatrix fom_solve(const Factorization &fact, const ParameterPoint &pt) const;

  static constexpr double kResidualTol = 1.0e-9;

private:
  Index n_ = 0;
  Index p_ = 0;
  ParameterDomain domain_;
  std::vector<AffineTerm> terms_;
  std::vector<RhsTerm> rhs_terms_;
  double scale_ = 1.0;
};

} // namespace morcert

#endif // MORCERT_AFFINE_HPP
