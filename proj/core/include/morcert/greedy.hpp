// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_GREEDY_HPP
#define MORCERT_GREEDY_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "morcert/affine.hpp"
#include "morcert/estimators.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"
#include "morcert/rom.hpp"

namespace morcert
{

enum class InitialSamplePolicy
{
  Random,   // two distinct seeded draws from the training grid
  Endpoints // first and last grid points, for reproducible walkthroughs
};

enum class TerminationReason
{
  Converged,     // max estimate fell to the tolerance
  MaxIterations, // iteration budget exhausted above the tolerance
  Stalled        // selected snapshot added no new basis direction
};

const char *to_string(InitialSamplePolicy policy);
const char *to_string(TerminationReason reason);
InitialSamplePolicy initial_sample_policy_from_string(const std::string &name);

struct GreedyConfig
{
  double tol = 1.0e-6;     // acceptable state error
  Index max_iterations = 60;
  EstimatorKind kind = EstimatorKind::Proposed;
  Index probes = 10;       // randomized kind: probe count K
  double tol_rd = 0.5;     // randomized kind: dual-space training tolerance
  Index dual_max_iterations = 60;
  bool realify = true;     // keep V (and V_r) real via [Re, Im] splitting
  uint64_t seed = 0;
  InitialSamplePolicy initial = InitialSamplePolicy::Random;
  Index svd_cap = linalg::kSvdDimCap; // standard kind: largest dense SVD allowed
  Index threads = 0;                  // sweep concurrency; 0 = hardware
  bool track_true_error = false;      // solve the full model over the grid once

  void validate() const;
};

struct GreedyIteration
{
  Index iteration = 0;        // 1-based
  Index basis_size = 0;       // cols(V) after this iteration's extension
  Index error_basis_size = 0; // cols(V_e) / cols(V_rd); 0 when the kind has neither
  double eps_est = 0.0;       // max estimate over the training grid
  double eps_true = std::numeric_limits<double>::quiet_NaN(); // when tracked
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  ParameterPoint mu_star;     // sample whose snapshot extended V this iteration
  ParameterPoint mu_e_star;   // sample whose snapshot extended V_r (proposed only)
  bool has_mu_e = false;
};

struct GreedyReport
{
  std::vector<GreedyIteration> iterations;
  TerminationReason reason = TerminationReason::Converged;
  double final_estimate = 0.0;
  double dual_seconds = 0.0; // randomized kind: time spent training V_rd
  std::vector<std::string> warnings;
};

struct GreedyResult
{
  ReducedModel rom;
  EstimatorState estimator; // matches the final basis; carries the online blocks
  GreedyReport report;
};

// All port solutions at one sample, the columns that extend a basis.
DenseMatrix snapshot(const AffineSystem &sys, const ParameterPoint &pt);

// Argmax selection for the two sample streams. Entries < 0 mark points that
// are not selectable (skipped or excluded); ties break to the lowest index.
// The second stream never returns the first stream's pick: on a collision it
// takes the runner-up, and throws DegenerateGrid when no distinct selectable
// point remains.
std::pair<Index, Index> select_next_samples(const RealVector &estimates,
                                            const RealVector &re_norms);

// Iterative ROM construction driven by the configured estimator: extend V at
// the sample with the largest estimate (and, for the proposed kind, extend
// V_r at the sample with the largest error-approximation residual) until the
// worst estimate over the grid falls to cfg.tol. Exactly singular training
// points are skipped and logged, never fatal. A budget overrun or a stalled
// basis is reported through GreedyReport::reason, not thrown.
GreedyResult greedy_build(const AffineSystem &sys, const ParameterGrid &grid,
                          const GreedyConfig &cfg);

} // namespace morcert

#endif // MORCERT_GREEDY_HPP
