// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0
//
// A posteriori estimators for the state error e(mu) = x(mu) - V z(mu) of a
// Galerkin reduced model, all driven by the full-order residual
// r(mu) = b(mu) - A(mu) V z(mu):
//
//   standard    ||r|| / sigma_min(A)   -- rigorous upper bound, needs a
//                                         dense SVD per sample and blows up
//                                         near resonances;
//   residual    ||r||                  -- cheap heuristic, off by the
//                                         (unknown) conditioning;
//   randomized  dual-probe estimate    -- K random probes z_i with reduced
//                                         dual solutions approximating
//                                         z_i^T e;
//   proposed    residual-system solve  -- Galerkin solve of A e = r in an
//                                         enlarged space V_e spanning both
//                                         V and dedicated residual
//                                         snapshots; asymptotically exact
//                                         and free of singular-value
//                                         information.

#ifndef MORCERT_ESTIMATORS_HPP
#define MORCERT_ESTIMATORS_HPP

#include <limits>
#include <string>
#include <vector>

#include "morcert/affine.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"
#include "morcert/rom.hpp"

namespace morcert
{

enum class EstimatorKind
{
  Standard,
  Residual,
  Randomized,
  Proposed
};

const char *to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string &name);

// Estimate of one port's state-error norm at one sample. Diagnostic fields
// are NaN unless the producing estimator computed them. A standard
// estimate degenerates to +infinity when sigma_min falls below
// 1e-14 * sigma_max; consumers must treat that as "no finite bound here".
struct ErrorCertificate
{
  ParameterPoint point;
  Index port = 0;
  EstimatorKind kind = EstimatorKind::Residual;
  double estimate = 0.0;
  double residual_norm = std::numeric_limits<double>::quiet_NaN();
  double sigma_min = std::numeric_limits<double>::quiet_NaN();
  double sigma_max = std::numeric_limits<double>::quiet_NaN();
};

// Everything an estimator precomputes against a fixed reduced basis V.
// Only the members of the active kind are populated. The reduced blocks
// make estimates evaluable without the full-order matrices (online); the
// retained n x * products serve the offline loop of the basis training.
struct EstimatorState
{
  EstimatorKind kind = EstimatorKind::Residual;

  // standard
  Index svd_cap = linalg::kSvdDimCap;

  // proposed: error space V_e = orth([V_r, V]) and its projections.
  BasisMatrix v_r;
  BasisMatrix v_e;
  std::vector<ReducedTerm> error_terms;          // V_e^H A_q V_e
  std::vector<DenseMatrix> error_term_products;  // A_q V_e (n x ell)
  std::vector<ReducedTerm> error_cross_terms;    // V_e^H A_q V (ell x r)
  std::vector<ReducedTerm> error_rhs_terms;      // V_e^H Q_q   (ell x p)

  // randomized: fixed probe block Z and the reduced dual space V_rd. All
  // dual algebra uses the plain (non-conjugated) transpose so that
  // xi_i^T r equals z_i^T e exactly when the dual solve is exact.
  DenseMatrix probes;                            // Z, n x K (real-valued)
  BasisMatrix v_rd;
  std::vector<ReducedTerm> dual_terms;           // V_rd^T A_q V_rd
  std::vector<ReducedTerm> dual_cross_terms;     // V_rd^T A_q V (ell x r)
  std::vector<ReducedTerm> dual_rhs_terms;       // V_rd^T Q_q   (ell x p)
  DenseMatrix probe_projection;                  // V_rd^T Z     (ell x K)
};

// orth([V_r, V]): the joint space used by the proposed estimator. An empty
// V_r returns V unchanged, which collapses the estimator to exactly zero
// (the degenerate configuration the tests pin down).
BasisMatrix build_error_subspace(const BasisMatrix &v_r, const BasisMatrix &v);

EstimatorState make_standard_state(Index svd_cap = linalg::kSvdDimCap);
EstimatorState make_residual_state();
EstimatorState make_proposed_state(const AffineSystem &sys, const BasisMatrix &v,
                                   const BasisMatrix &v_r);
EstimatorState make_randomized_state(const AffineSystem &sys, const BasisMatrix &v,
                                     DenseMatrix probes, BasisMatrix v_rd);

// Result of one estimator evaluation at one sample: per-port certificates
// plus whatever intermediate blocks the offline training loop feeds on.
struct EstimateOutput
{
  std::vector<ErrorCertificate> certificates;
  DenseMatrix residual;       // full-order r (n x p); offline paths only
  DenseMatrix reduced_coords; // z_e (ell x p); proposed only
  DenseMatrix error_vector;   // V_e z_e (n x p); proposed offline only
};

EstimateOutput standard_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const EstimatorState &st, const ParameterPoint &pt);
EstimateOutput residual_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const ParameterPoint &pt);
EstimateOutput proposed_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                 const EstimatorState &st, const ParameterPoint &pt);
EstimateOutput proposed_estimate(const ReducedModel &rm, const EstimatorState &st,
                                 const ParameterPoint &pt); // online, reduced data only
EstimateOutput randomized_estimate(const AffineSystem &sys, const ReducedModel &rm,
                                   const EstimatorState &st, const ParameterPoint &pt);
EstimateOutput randomized_estimate(const ReducedModel &rm, const EstimatorState &st,
                                   const ParameterPoint &pt); // online

// Dispatch on st.kind. Passing sys == nullptr selects the online path,
// which only the proposed and randomized kinds support.
EstimateOutput estimate(const AffineSystem *sys, const ReducedModel &rm,
                        const EstimatorState &st, const ParameterPoint &pt);

// Residual of the error approximation, r_e = r - A(mu) V_e z_e,
// accumulated from the retained error-space products. Drives the sampling
// of the error space during training.
DenseMatrix error_residual(const AffineSystem &sys, const EstimatorState &st,
                           const ParameterPoint &pt, const DenseMatrix &residual,
                           const DenseMatrix &reduced_coords);

// Training loop for the randomized estimator's reduced dual space: grow
// V_rd from dual snapshots A(mu)^{-T} z_i at the sample maximizing the
// worst dual residual max_i ||z_i - A(mu)^T xi_i(mu)||, until that worst
// residual drops below tol (absolute) everywhere on the grid.
struct DualSpaceConfig
{
  Index probes = 10;          // K
  double tol = 0.5;           // absolute dual-residual target
  Index max_iterations = 60;
  bool realify = true;
  uint64_t seed = 0;
  int threads = 0;            // 0: all cores
};

struct DualSpaceResult
{
  DenseMatrix probes;  // Z, n x K
  BasisMatrix v_rd;
  Index iterations = 0;
  double final_error = 0.0;
  bool converged = false;
  std::vector<ParameterPoint> samples;
};

DualSpaceResult build_dual_space(const AffineSystem &sys, const ParameterGrid &grid,
                                 const DualSpaceConfig &config);

// Exact online evaluator for ||r(mu)|| per port, from the Gram matrix of
// the stacked blocks [Q_1 .. Q_qb, A_1 V .. A_qa V] computed offline. The
// squared norm is a difference of like-sized terms, so values far below
// sqrt(eps) * ||b|| carry amplified roundoff; the training loop therefore
// always uses the full-order residual instead.
class ResidualNormOnline
{
public:
  ResidualNormOnline() = default;

  static ResidualNormOnline build(const AffineSystem &sys, const ReducedModel &rm);
  static ResidualNormOnline from_gram(DenseMatrix gram, Index rhs_terms, Index matrix_terms,
                                      Index order);

  bool empty() const { return gram_.size() == 0; }
  const DenseMatrix &gram() const { return gram_; }
  Index rhs_term_count() const { return qb_; }
  Index matrix_term_count() const { return qa_; }
  Index order() const { return r_; }

  // Per-port residual norms for reduced coordinates z at pt.
  RealVector norms(const ReducedModel &rm, const ParameterPoint &pt, const DenseMatrix &z) const;

private:
  DenseMatrix gram_;
  Index qb_ = 0;
  Index qa_ = 0;
  Index r_ = 0;
};

} // namespace morcert

#endif // MORCERT_ESTIMATORS_HPP
