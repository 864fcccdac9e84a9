// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "morcert/errors.hpp"
#include "morcert/parallel.hpp"

namespace morcert
{

const char *to_string(EstimatorKind kind)
{
  switch (kind)
  {
    case EstimatorKind::Standard:
      return "standard";
    case EstimatorKind::Residual:
      return "residual";
    case EstimatorKind::Randomized:
      return "randomized";
    case EstimatorKind::Proposed:
      return "proposed";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string &name)
{
  if (name == "standard")
  {
    return EstimatorKind::Standard;
  }
  if (name == "residual")
  {
    return EstimatorKind::Residual;
  }
  if (name == "randomized")
  {
    return EstimatorKind::Randomized;
  }
  if (name == "proposed")
  {
    return EstimatorKind::Proposed;
  }
  throw InvalidSpec("unknown estimator kind '" + name +
                    "' (expected standard, residual, randomized, or proposed)");
}

BasisMatrix build_error_subspace(const BasisMatrix &v_r, const BasisMatrix &v)
{
  if (v.empty())
  {
    throw EmptyBasis("build_error_subspace: reduced basis is empty");
  }
  if (v_r.empty())
  {
    return v;
  }
  if (v_r.rows() != v.rows())
  {
    throw DimensionMismatch("build_error_subspace: basis row mismatch");
  }
  return linalg::orth_extend(v_r, v.matrix());
}

EstimatorState make_standard_state(Index svd_cap)
{
  EstimatorState st;
  st.kind = EstimatorKind::Standard;
  st.svd_cap = svd_cap;
  return st;
}

EstimatorState make_residual_state()
{
  EstimatorState st;
  st.kind = EstimatorKind::Residual;
  return st;
}

EstimatorState make_proposed_state(const AffineSystem &sys, const BasisMatrix &v,
                                   const BasisMatrix &v_r)
{
  EstimatorState st;
  st.kind = EstimatorKind::Proposed;
  st.v_r = v_r;
  st.v_e = build_error_subspace(v_r, v);

  const DenseMatrix &ve = st.v_e.matrix();
  st.error_terms.reserve(sys.terms().size());
  st.error_term_products.reserve(sys.terms().size());
  st.error_cross_terms.reserve(sys.terms().size());
  for (const auto &t : sys.terms())
  {
    DenseMatrix ave = t.matrix.apply(ve);
    st.error_terms.push_back({t.coeff, ve.adjoint() * ave});
    st.error_cross_terms.push_back({t.coeff, ve.adjoint() * t.matrix.apply(v.matrix())});
    st.error_term_products.push_back(std::move(ave));
  }
  st.error_rhs_terms.reserve(sys.rhs_terms().size());
  for (const auto &t : sys.rhs_terms())
  {
    st.error_rhs_terms.push_back({t.coeff, ve.adjoint() * t.matrix.to_dense()});
  }
  return st;
}

EstimatorState make_randomized_state(const AffineSystem &sys, const BasisMatrix &v,
                                     DenseMatrix probes, BasisMatrix v_rd)
{
  if (probes.rows() != sys.dimension() || probes.cols() == 0)
  {
    throw DimensionMismatch("make_randomized_state: probe block must be n x K, K >= 1");
  }
  if (v_rd.empty() || v_rd.rows() != sys.dimension())
  {
    throw DimensionMismatch("make_randomized_state: dual space must be nonempty over n rows");
  }

  EstimatorState st;
  st.kind = EstimatorKind::Randomized;
  st.probes = std::move(probes);
  st.v_rd = std::move(v_rd);

  // Plain-transpose projections throughout: the scalar identity
  // xi^T r = z^T e that justifies the estimator never conjugates.
  const DenseMatrix &w = st.v_rd.matrix();
  st.dual_terms.reserve(sys.terms().size());
  st.dual_cross_terms.reserve(sys.terms().size());
  for (const auto &t : sys.terms())
  {
    const DenseMatrix aw = t.matrix.apply(w);
    st.dual_terms.push_back({t.coeff, DenseMatrix(w.transpose() * aw)});
    st.dual_cross_terms.push_back({t.coeff, DenseMatrix(w.transpose() * t.matrix.apply(v.matrix()))});
  }
  st.dual_rhs_terms.reserve(sys.rhs_terms().size());
  for (const auto &t : sys.rhs_terms())
  {
    st.dual_rhs_terms.push_back({t.coeff, DenseMatrix(w.transpose() * t.matrix.to_dense())});
  }
  st.probe_projection = w.transpose() * st.probes;
  return st;
}

namespace
{

DenseMatrix accumulate(const std::vector<ReducedTerm> &terms, const ParameterPoint &pt,
                       const ParameterDomain &domain)
{
  DenseMatrix acc = DenseMatrix::Zero(terms.front().matrix.rows(), terms.front().matrix.cols());
  for (const auto &t : terms)
  {
    acc += evaluate(t.coeff, pt, domain) * t.matrix;
  }
  return acc;
}

ErrorCertificate make_certificate(const ParameterPoint &pt, Index port, EstimatorKind kind,
                                  double estimate)
{
  ErrorCertificate cert;
  cert.point = pt;
  cert.port = port;
  cert.kind = kind;
  cert.estimate = estimate;
  return cert;
}

// Reduced right-hand side of the error system, V_e^H r(mu), from the
// precomputed affine blocks and the reduced coordinates alone.
DenseMatrix reduced_error_rhs(const EstimatorState &st, const ReducedModel &rm,
                              const ParameterPoint &pt, const DenseMatrix &z)
{
  DenseMatrix rhs = accumulate(st.error_rhs_terms, pt, rm.domain()) / rm.scale();
  for (const auto &t : st.error_cross_terms)
  {
    rhs -= evaluate(t.coeff, pt, rm.domain()) * (t.matrix * z);
  }
  return rhs;
}

// Shared tail of the proposed estimator once the reduced right-hand side
// V_e^H r is known: solve the projected error system and read the estimate
// off the coordinate norms (V_e is orthonormal, so ||V_e z_e|| = ||z_e||).
EstimateOutput finish_proposed(const EstimatorState &st, const ReducedModel &rm,
                               const ParameterPoint &pt, const DenseMatrix &rhs_reduced)
{
  const DenseMatrix op = accumulate(st.error_terms, pt, rm.domain());
  const Factorization f = linalg::factorize(ComplexMatrix(op));

  EstimateOutput out;
  out.reduced_coords = f.solve(rhs_reduced);
  out.certificates.reserve(static_cast<size_t>(out.reduced_coords.cols()));
  for (Index j = 0; j < out.reduced_coords.cols(); ++j)
  {
    out.certificates.push_back(make_certificate(pt, j, EstimatorKind::Proposed,
                                                out.reduced_coords.col(j).norm()));
  }
  return out;
}

} // namespace

EstimateOutput standard_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const EstimatorState &st, const ParameterPoint &pt)
{
  EstimateOutput out;
  const DenseMatrix z = rm.solve(pt);
  out.residual = residual(sys, rm, pt, z);

  const auto sv = linalg::extremal_singular_values(sys.assemble(pt), st.svd_cap);
  const bool degenerate = !(sv.min > 1.0e-14 * sv.max);
  for (Index j = 0; j < out.residual.cols(); ++j)
  {
    const double rn = out.residual.col(j).norm();
    ErrorCertificate cert = make_certificate(
        pt, j, EstimatorKind::Standard,
        degenerate ? std::numeric_limits<double>::infinity() : rn / sv.min);
    cert.residual_norm = rn;
    cert.sigma_min = sv.min;
    cert.sigma_max = sv.max;
    out.certificates.push_back(cert);
  }
  return out;
}

EstimateOutput residual_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const ParameterPoint &pt)
{
  EstimateOutput out;
  const DenseMatrix z = rm.solve(pt);
  out.residual = residual(sys, rm, pt, z);
  for (Index j = 0; j < out.residual.cols(); ++j)
  {
    const double rn = out.residual.col(j).norm();
    ErrorCertificate cert = make_certificate(pt, j, EstimatorKind::Residual, rn);
    cert.residual_norm = rn;
    out.certificates.push_back(cert);
  }
  return out;
}

EstimateOutput proposed_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const EstimatorState &st, const ParameterPoint &pt)
{
  if (st.kind != EstimatorKind::Proposed || st.v_e.empty())
  {
    throw InvalidSpec("proposed_estimate: state was not built for the proposed estimator");
  }
  const DenseMatrix z = rm.solve(pt);
  const DenseMatrix r = residual(sys, rm, pt, z);

  EstimateOutput out = finish_proposed(st, rm, pt, st.v_e.matrix().adjoint() * r);
  out.residual = r;
  out.error_vector = st.v_e.matrix() * out.reduced_coords;
  for (size_t j = 0; j < out.certificates.size(); ++j)
  {
    out.certificates[j].residual_norm = r.col(static_cast<Index>(j)).norm();
  }
  return out;
}

EstimateOutput proposed_estimate(const ReducedModel &rm, const EstimatorState &st,
                                 const ParameterPoint &pt)
{
  if (st.kind != EstimatorKind::Proposed || st.error_terms.empty())
  {
    throw InvalidSpec("proposed_estimate: state lacks the reduced error-system blocks");
  }
  const DenseMatrix z = rm.solve(pt);
  return finish_proposed(st, rm, pt, reduced_error_rhs(st, rm, pt, z));
}

DenseMatrix error_residual(const AffineSystem &sys, const EstimatorState &st,
                           const ParameterPoint &pt, const DenseMatrix &res,
                           const DenseMatrix &reduced_coords)
{
  if (st.error_term_products.empty())
  {
    throw InvalidSpec("error_residual: state lacks error-space products");
  }
  DenseMatrix r_e = res;
  for (size_t q = 0; q < st.error_term_products.size(); ++q)
  {
    r_e -= evaluate(st.error_terms[q].coeff, pt, sys.domain()) *
           (st.error_term_products[q] * reduced_coords);
  }
  return r_e;
}

namespace
{

// Common tail of the randomized estimator: solve the reduced dual systems
// for all probes at once and fold the probe responses into per-port
// root-mean-square estimates.
EstimateOutput finish_randomized(const EstimatorState &st, const ReducedModel &rm,
                                 const ParameterPoint &pt, const DenseMatrix &wr)
{
  // Reduced dual operator (V_rd^T A V_rd)(mu); the dual systems solve its
  // transpose against every probe projection.
  const DenseMatrix op = accumulate(st.dual_terms, pt, rm.domain());
  const Factorization f = linalg::factorize(ComplexMatrix(op));
  const DenseMatrix xi = f.solve_transpose(st.probe_projection); // ell x K

  // t(i, port) = xi_i^T r(mu)|_port, with everything reduced.
  const DenseMatrix t = xi.transpose() * wr; // K x p

  EstimateOutput out;
  const double k = static_cast<double>(t.rows());
  for (Index j = 0; j < t.cols(); ++j)
  {
    const double mean_sq = t.col(j).squaredNorm() / k;
    out.certificates.push_back(
        make_certificate(pt, j, EstimatorKind::Randomized, std::sqrt(mean_sq)));
  }
  return out;
}

} // namespace

EstimateOutput randomized_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                   const EstimatorState &st, const ParameterPoint &pt)
{
  if (st.kind != EstimatorKind::Randomized || st.v_rd.empty())
  {
    throw InvalidSpec("randomized_estimate: state was not built for the randomized estimator");
  }
  const DenseMatrix z = rm.solve(pt);
  const DenseMatrix r = residual(sys, rm, pt, z);
  EstimateOutput out = finish_randomized(st, rm, pt, st.v_rd.matrix().transpose() * r);
  out.residual = r;
  for (size_t j = 0; j < out.certificates.size(); ++j)
  {
    out.certificates[j].residual_norm = r.col(static_cast<Index>(j)).norm();
  }
  return out;
}

EstimateOutput randomized_estimate(const ReducedModel &rm, const EstimatorState &st,
                                   const ParameterPoint &pt)
{
  if (st.kind != EstimatorKind::Randomized || st.dual_terms.empty())
  {
    throw InvalidSpec("randomized_estimate: state lacks the reduced dual blocks");
  }
  const DenseMatrix z = rm.solve(pt);
  DenseMatrix wr = accumulate(st.dual_rhs_terms, pt, rm.domain()) / rm.scale();
  for (const auto &t : st.dual_cross_terms)
  {
    wr -= evaluate(t.coeff, pt, rm.domain()) * (t.matrix * z);
  }
  return finish_randomized(st, rm, pt, wr);
}

EstimateOutput estimate(const AffineSystem *sys, const ReducedModel &rm,
                        const EstimatorState &st, const ParameterPoint &pt)
{
  switch (st.kind)
  {
    case EstimatorKind::Standard:
      if (!sys)
      {
        throw InvalidSpec("standard estimates need the full-order operator (offline only)");
      }
      return standard_estimate(*sys, rm, st, pt);
    case EstimatorKind::Residual:
      if (!sys)
      {
        throw InvalidSpec("residual estimates need the full-order matrices; use "
                          "ResidualNormOnline for the reduced-data path");
      }
      return residual_estimate(*sys, rm, pt);
    case EstimatorKind::Randomized:
      return sys ? randomized_estimate(*sys, rm, st, pt) : randomized_estimate(rm, st, pt);
    case EstimatorKind::Proposed:
      return sys ? proposed_estimate(*sys, rm, st, pt) : proposed_estimate(rm, st, pt);
  }
  throw InvalidSpec("estimate: unknown estimator kind");
}

DualSpaceResult build_dual_space(const AffineSystem &sys, const ParameterGrid &grid,
                                 const DualSpaceConfig &config)
{
  grid.validate(static_cast<Index>(sys.domain().extra_ranges.size()));
  if (config.probes < 1 || config.max_iterations < 1 || !(config.tol > 0.0))
  {
    throw InvalidSpec("build_dual_space: probes, tol, and max_iterations must be positive");
  }

  DualSpaceResult result;

  // Fixed standard-normal probe block; identity covariance makes the
  // estimator target the plain 2-norm.
  std::mt19937_64 gen(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  result.probes = DenseMatrix(sys.dimension(), config.probes);
  for (Index j = 0; j < config.probes; ++j)
  {
    for (Index i = 0; i < sys.dimension(); ++i)
    {
      result.probes(i, j) = Complex(normal(gen), 0.0);
    }
  }

  // Dual snapshots at one sample: A(mu)^{-T} Z.
  const auto dual_snapshots = [&](const ParameterPoint &pt)
  { return sys.factorize_at(pt).solve_transpose(result.probes); };

  const auto extend = [&](BasisMatrix v, const DenseMatrix &cols)
  {
    if (!config.realify)
    {
      return linalg::orth_extend(v, cols);
    }
    DenseMatrix split(cols.rows(), 2 * cols.cols());
    split.leftCols(cols.cols()) = cols.real().cast<Complex>();
    split.rightCols(cols.cols()) = cols.imag().cast<Complex>();
    return linalg::orth_extend(v, split);
  };

  std::uniform_int_distribution<Index> pick(0, grid.size() - 1);
  ParameterPoint sample = grid.points[static_cast<size_t>(pick(gen))];

  for (Index it = 0; it < config.max_iterations; ++it)
  {
    result.samples.push_back(sample);
    result.v_rd = extend(std::move(result.v_rd), dual_snapshots(sample));
    result.iterations = it + 1;

    // Worst dual residual per grid point, max over probes:
    // err(mu) = max_i ||z_i - A(mu)^T V_rd xi_i(mu)||.
    const DenseMatrix &w = result.v_rd.matrix();
    std::vector<DenseMatrix> dual_terms_t; // A_q^T V_rd, n x ell
    std::vector<DenseMatrix> reduced_terms; // V_rd^T A_q V_rd
    for (const auto &t : sys.terms())
    {
      DenseMatrix at_w = t.matrix.apply_transpose(w);
      reduced_terms.push_back(w.transpose() * t.matrix.apply(w));
      dual_terms_t.push_back(std::move(at_w));
    }
    const DenseMatrix wz = w.transpose() * result.probes;

    std::vector<double> errs(static_cast<size_t>(grid.size()),
                             std::numeric_limits<double>::quiet_NaN());
    parallel_for(grid.size(), config.threads,
                 [&](Index g)
                 {
                   const ParameterPoint &pt = grid.points[static_cast<size_t>(g)];
                   DenseMatrix op = DenseMatrix::Zero(w.cols(), w.cols());
                   for (size_t q = 0; q < reduced_terms.size(); ++q)
                   {
                     op += evaluate(sys.terms()[q].coeff, pt, sys.domain()) * reduced_terms[q];
                   }
                   DenseMatrix xi;
                   try
                   {
                     xi = linalg::factorize(ComplexMatrix(op)).solve_transpose(wz);
                   }
                   catch (const SingularMatrix &)
                   {
                     errs[static_cast<size_t>(g)] = -1.0; // skip: reduced dual singular here
                     return;
                   }
                   DenseMatrix res = result.probes;
                   for (size_t q = 0; q < dual_terms_t.size(); ++q)
                   {
                     res -= evaluate(sys.terms()[q].coeff, pt, sys.domain()) *
                            (dual_terms_t[q] * xi);
                   }
                   errs[static_cast<size_t>(g)] = res.colwise().norm().maxCoeff();
                 });

    Index worst = 0;
    double worst_err = -std::numeric_limits<double>::infinity();
    for (Index g = 0; g < grid.size(); ++g)
    {
      const double e = errs[static_cast<size_t>(g)];
      if (e > worst_err)
      {
        worst_err = e;
        worst = g;
      }
    }
    result.final_error = worst_err;
    if (worst_err <= config.tol)
    {
      result.converged = true;
      return result;
    }
    sample = grid.points[static_cast<size_t>(worst)];
  }
  return result;
}

ResidualNormOnline ResidualNormOnline::build(const AffineSystem &sys, const ReducedModel &rm)
{
  const Index n = sys.dimension();
  const Index r = rm.order();
  const Index qb = static_cast<Index>(sys.rhs_terms().size());
  const Index qa = static_cast<Index>(sys.terms().size());

  DenseMatrix stack(n, qb * sys.ports() + qa * r);
  Index col = 0;
  for (const auto &t : sys.rhs_terms())
  {
    stack.middleCols(col, sys.ports()) = t.matrix.to_dense();
    col += sys.ports();
  }
  for (const auto &av : rm.term_products())
  {
    stack.middleCols(col, r) = av;
    col += r;
  }

  ResidualNormOnline out;
  out.gram_ = stack.adjoint() * stack;
  out.qb_ = qb;
  out.qa_ = qa;
  out.r_ = r;
  return out;
}

ResidualNormOnline ResidualNormOnline::from_gram(DenseMatrix gram, Index rhs_terms,
                                                 Index matrix_terms, Index order)
{
  if (gram.rows() != gram.cols() || rhs_terms < 1 || matrix_terms < 1 || order < 1)
  {
    throw InvalidSpec("ResidualNormOnline: malformed Gram data");
  }
  ResidualNormOnline out;
  out.gram_ = std::move(gram);
  out.qb_ = rhs_terms;
  out.qa_ = matrix_terms;
  out.r_ = order;
  return out;
}

RealVector ResidualNormOnline::norms(const ReducedModel &rm, const ParameterPoint &pt,
                                     const DenseMatrix &z) const
{
  if (empty())
  {
    throw InvalidSpec("ResidualNormOnline: evaluator is empty");
  }
  const Index p = z.cols();
  if (gram_.rows() != qb_ * p + qa_ * r_ || z.rows() != r_)
  {
    throw DimensionMismatch("ResidualNormOnline: shape mismatch");
  }

  RealVector out(p);
  DenseVector c(gram_.rows());
  for (Index j = 0; j < p; ++j)
  {
    // Coefficients of r = sum_q theta_q^b Q_q e_j / scale
    //                    - sum_q theta_q^A (A_q V) z_j
    // against the stacked-block Gram matrix. The port selector embeds the
    // drive coefficients into the right column of each Q block.
    c.setZero();
    for (Index q = 0; q < qb_; ++q)
    {
      c(q * p + j) = evaluate(rm.rhs_terms()[static_cast<size_t>(q)].coeff, pt, rm.domain()) /
                     rm.scale();
    }
    Index col = qb_ * p;
    for (Index q = 0; q < qa_; ++q)
    {
      c.segment(col, r_) =
          -evaluate(rm.terms()[static_cast<size_t>(q)].coeff, pt, rm.domain()) * z.col(j);
      col += r_;
    }
    const double sq = std::real(Complex(c.dot(gram_ * c)));
    out(j) = std::sqrt(std::max(sq, 0.0));
  }
  return out;
}

} // namespace morcert
