// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/affine.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "morcert/errors.hpp"

namespace morcert
{

Complex evaluate(const Coefficient &c, const ParameterPoint &pt, const ParameterDomain &domain)
{
  Complex theta(c.value, 0.0);
  if (c.s_power > 0)
  {
    const Complex s = pt.s();
    theta *= (c.s_power == 1) ? s : s * s;
  }
  if (c.ratio_index >= 0)
  {
    if (static_cast<size_t>(c.ratio_index) >= pt.extra.size())
    {
      throw DimensionMismatch("evaluate: coefficient references extra parameter " +
                              std::to_string(c.ratio_index) + " but the point has " +
                              std::to_string(pt.extra.size()));
    }
    theta *= pt.extra[static_cast<size_t>(c.ratio_index)] / domain.extra_ref;
  }
  return theta;
}

namespace
{

void validate_coefficient(const Coefficient &c, const ParameterDomain &domain,
                          const char *where)
{
  if (!std::isfinite(c.value) || c.value == 0.0)
  {
    throw InvalidSpec(std::string(where) + ": coefficient value must be finite and nonzero");
  }
  if (c.s_power < 0 || c.s_power > 2)
  {
    throw InvalidSpec(std::string(where) + ": s_power must be 0, 1, or 2");
  }
  if (c.ratio_index >= 0 &&
      static_cast<size_t>(c.ratio_index) >= domain.extra_ranges.size())
  {
    throw InvalidSpec(std::string(where) + ": ratio_index out of range");
  }
}

} // namespace

AffineSystem::AffineSystem(ParameterDomain domain, std::vector<AffineTerm> terms,
                           std::vector<RhsTerm> rhs_terms, double scale)
  : domain_(std::move(domain)), terms_(std::move(terms)), rhs_terms_(std::move(rhs_terms))
{
  domain_.validate();
  if (terms_.empty())
  {
    throw InvalidSpec("system: no matrix terms");
  }
  if (rhs_terms_.empty())
  {
    throw InvalidSpec("system: no right-hand-side terms");
  }

  n_ = terms_.front().matrix.rows();
  for (const auto &t : terms_)
  {
    validate_coefficient(t.coeff, domain_, "system matrix term");
    if (t.matrix.rows() != n_ || t.matrix.cols() != n_)
    {
      throw DimensionMismatch("system: matrix terms must all be " + std::to_string(n_) + " x " +
                              std::to_string(n_));
    }
  }
  p_ = rhs_terms_.front().matrix.cols();
  for (const auto &t : rhs_terms_)
  {
    validate_coefficient(t.coeff, domain_, "system rhs term");
    if (t.matrix.rows() != n_ || t.matrix.cols() != p_)
    {
      throw DimensionMismatch("system: rhs terms must all be " + std::to_string(n_) + " x " +
                              std::to_string(p_));
    }
  }
  if (n_ == 0 || p_ == 0)
  {
    throw InvalidSpec("system: empty operator or no ports");
  }

  if (scale > 0.0)
  {
    scale_ = scale;
  }
  else
  {
    // Default normalization keyed to the strongest drive over the band:
    // 10^max(0, round(log10(max_q max|Q_q| * |s_max|))).
    double max_entry = 0.0;
    for (const auto &t : rhs_terms_)
    {
      max_entry = std::max(max_entry, t.matrix.max_abs());
    }
    const double s_max = 2.0 * std::numbers::pi * domain_.f_max;
    const double magnitude = max_entry * s_max;
    double exponent = 0.0;
    if (magnitude > 0.0)
    {
      exponent = std::max(0.0, std::round(std::log10(magnitude)));
    }
    scale_ = std::pow(10.0, exponent);
  }
  if (!std::isfinite(scale_) || !(scale_ > 0.0))
  {
    throw InvalidSpec("system: invalid right-hand-side scale");
  }
}

ComplexMatrix AffineSystem::assemble(const ParameterPoint &pt) const
{
  bool all_sparse = true;
  for (const auto &t : terms_)
  {
    all_sparse = all_sparse && t.matrix.is_sparse();
  }

  if (all_sparse)
  {
    SparseMatrix acc = evaluate(terms_.front().coeff, pt, domain_) * terms_.front().matrix.sparse();
    for (size_t q = 1; q < terms_.size(); ++q)
    {
      acc = acc + evaluate(terms_[q].coeff, pt, domain_) * terms_[q].matrix.sparse();
    }
    return ComplexMatrix(std::move(acc));
  }

  DenseMatrix acc = DenseMatrix::Zero(n_, n_);
  for (const auto &t : terms_)
  {
    const Complex theta = evaluate(t.coeff, pt, domain_);
    if (t.matrix.is_sparse())
    {
      acc += theta * t.matrix.sparse();
    }
    else
    {
      acc += theta * t.matrix.dense();
    }
  }
  return ComplexMatrix(std::move(acc));
}

DenseMatrix AffineSystem::assemble_rhs(const ParameterPoint &pt) const
{
  DenseMatrix acc = DenseMatrix::Zero(n_, p_);
  for (const auto &t : rhs_terms_)
  {
    const Complex theta = evaluate(t.coeff, pt, domain_);
    if (t.matrix.is_sparse())
    {
      acc += theta * t.matrix.sparse();
    }
    else
    {
      acc += theta * t.matrix.dense();
    }
  }
  return acc / scale_;
}

DenseMatrix AffineSystem::apply(const ParameterPoint &pt, const DenseMatrix &x) const
{
  DenseMatrix acc = DenseMatrix::Zero(n_, x.cols());
  for (const auto &t : terms_)
  {
    acc += evaluate(t.coeff, pt, domain_) * t.matrix.apply(x);
  }
  return acc;
}

DenseMatrix AffineSystem::apply_transpose(const ParameterPoint &pt, const DenseMatrix &x) const
{
  DenseMatrix acc = DenseMatrix::Zero(n_, x.cols());
  for (const auto &t : terms_)
  {
    acc += evaluate(t.coeff, pt, domain_) * t.matrix.apply_transpose(x);
  }
  return acc;
}

Factorization AffineSystem::factorize_at(const ParameterPoint &pt) const
{
  return linalg::factorize(assemble(pt));
}

DenseMatrix AffineSystem::fom_solve(const ParameterPoint &pt) const
{
  return fom_solve(factorize_at(pt), pt);
}

DenseMatrix AffineSystem::fom_solve(const Factorization &fact, const ParameterPoint &pt) const
{
  const DenseMatrix b = assemble_rhs(pt);
  DenseMatrix x = fact.solve(b);

  // Verify per-port backward error; one step of iterative refinement
  // rescues samples where plain LU leaves a residual slightly above the
  // contract before we declare the sample resonant.
  DenseMatrix r = b - apply(pt, x);
  for (int attempt = 0; attempt < 2; ++attempt)
  {
    bool ok = true;
    for (Index j = 0; j < p_; ++j)
    {
      const double bn = b.col(j).norm();
      if (bn > 0.0 && !(r.col(j).norm() <= kResidualTol * bn))
      {
        ok = false;
        break;
      }
    }
    if (ok)
    {
      return x;
    }
    if (attempt == 0)
    {
      x += fact.solve(r);
      r = b - apply(pt, x);
    }
  }
  throw SingularMatrix("fom_solve: residual above " + std::to_string(kResidualTol) +
                       " of the drive at " + format_point(pt) +
                       "; the sample is at or numerically at a resonance");
}

} // namespace morcert
