// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/rom.hpp"

#include <string>

#include "morcert/errors.hpp"

namespace morcert
{

namespace
{

DenseMatrix accumulate_terms(const std::vector<ReducedTerm> &terms, const ParameterPoint &pt,
                             const ParameterDomain &domain)
{
  DenseMatrix acc = DenseMatrix::Zero(terms.front().matrix.rows(), terms.front().matrix.cols());
  for (const auto &t : terms)
  {
    acc += evaluate(t.coeff, pt, domain) * t.matrix;
  }
  return acc;
}

} // namespace

DenseMatrix ReducedModel::assemble(const ParameterPoint &pt) const
{
  return accumulate_terms(terms_, pt, domain_);
}

DenseMatrix ReducedModel::assemble_rhs(const ParameterPoint &pt) const
{
  return accumulate_terms(rhs_terms_, pt, domain_) / scale_;
}

DenseMatrix ReducedModel::solve(const ParameterPoint &pt) const
{
  const Factorization f = linalg::factorize(ComplexMatrix(assemble(pt)));
  return f.solve(assemble_rhs(pt));
}

DenseMatrix ReducedModel::lift(const DenseMatrix &z) const
{
  if (z.rows() != order())
  {
    throw DimensionMismatch("lift: coordinate block has " + std::to_string(z.rows()) +
                            " rows for a model of order " + std::to_string(order()));
  }
  return basis_.matrix() * z;
}

ReducedModel project(const AffineSystem &sys, BasisMatrix basis)
{
  if (basis.empty())
  {
    throw EmptyBasis("project: basis has no columns");
  }
  if (basis.rows() != sys.dimension())
  {
    throw DimensionMismatch("project: basis rows do not match the system dimension");
  }

  ReducedModel rm;
  rm.basis_ = std::move(basis);
  rm.domain_ = sys.domain();
  rm.p_ = sys.ports();
  rm.scale_ = sys.scale();

  const DenseMatrix &v = rm.basis_.matrix();
  rm.terms_.reserve(sys.terms().size());
  rm.term_products_.reserve(sys.terms().size());
  for (const auto &t : sys.terms())
  {
    DenseMatrix av = t.matrix.apply(v);
    rm.terms_.push_back({t.coeff, v.adjoint() * av});
    rm.term_products_.push_back(std::move(av));
  }
  rm.rhs_terms_.reserve(sys.rhs_terms().size());
  for (const auto &t : sys.rhs_terms())
  {
    rm.rhs_terms_.push_back({t.coeff, v.adjoint() * t.matrix.to_dense()});
  }
  return rm;
}

DenseMatrix residual(const AffineSystem &sys, const ReducedModel &rm, const ParameterPoint &pt,
                     const DenseMatrix &z)
{
  if (z.rows() != rm.order())
  {
    throw DimensionMismatch("residual: coordinate block does not match the model order");
  }
  DenseMatrix r = sys.assemble_rhs(pt);
  const auto &products = rm.term_products();
  for (size_t q = 0; q < products.size(); ++q)
  {
    r -= evaluate(sys.terms()[q].coeff, pt, sys.domain()) * (products[q] * z);
  }
  return r;
}

RealVector true_error(const AffineSystem &sys, const ReducedModel &rm, const ParameterPoint &pt)
{
  return true_error(rm, pt, sys.fom_solve(pt));
}

RealVector true_error(const ReducedModel &rm, const ParameterPoint &pt,
                      const DenseMatrix &x_full)
{
  const DenseMatrix xhat = rm.lift(rm.solve(pt));
  if (x_full.rows() != xhat.rows() || x_full.cols() != xhat.cols())
  {
    throw DimensionMismatch("true_error: reference solution shape mismatch");
  }
  RealVector err(xhat.cols());
  for (Index j = 0; j < xhat.cols(); ++j)
  {
    err(j) = (x_full.col(j) - xhat.col(j)).norm();
  }
  return err;
}

ReducedModel ReducedModel::from_parts(BasisMatrix basis, std::vector<ReducedTerm> terms,
                                      std::vector<ReducedTerm> rhs_terms,
                                      std::vector<DenseMatrix> term_products,
                                      ParameterDomain domain, Index ports, double scale,
                                      double offline_seconds)
{
  if (basis.empty())
  {
    throw EmptyBasis("from_parts: basis has no columns");
  }
  const Index r = basis.cols();
  if (terms.empty() || rhs_terms.empty())
  {
    throw InvalidSpec("from_parts: missing reduced terms");
  }
  for (const auto &t : terms)
  {
    if (t.matrix.rows() != r || t.matrix.cols() != r)
    {
      throw DimensionMismatch("from_parts: reduced operator term is not r x r");
    }
  }
  for (const auto &t : rhs_terms)
  {
    if (t.matrix.rows() != r || t.matrix.cols() != ports)
    {
      throw DimensionMismatch("from_parts: reduced drive term is not r x p");
    }
  }
  if (term_products.size() != terms.size())
  {
    throw DimensionMismatch("from_parts: term product count mismatch");
  }
  for (const auto &m : term_products)
  {
    if (m.rows() != basis.rows() || m.cols() != r)
    {
      throw DimensionMismatch("from_parts: term product is not n x r");
    }
  }
  domain.validate();
  if (!(scale > 0.0))
  {
    throw InvalidSpec("from_parts: scale must be positive");
  }

  ReducedModel rm;
  rm.basis_ = std::move(basis);
  rm.terms_ = std::move(terms);
  rm.rhs_terms_ = std::move(rhs_terms);
  rm.term_products_ = std::move(term_products);
  rm.domain_ = std::move(domain);
  rm.p_ = ports;
  rm.scale_ = scale;
  rm.offline_seconds_ = offline_seconds;
  return rm;
}

} // namespace morcert
