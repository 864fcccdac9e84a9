// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_REPORT_HPP
#define MORCERT_REPORT_HPP

#include <limits>
#include <string>
#include <vector>

#include "morcert/affine.hpp"
#include "morcert/estimators.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"
#include "morcert/rom.hpp"

namespace morcert
{

// One (sample, port) entry of a sweep.
struct SweepRow
{
  ParameterPoint point;
  Index port = 0;
  std::vector<Complex> outputs; // functional values C x-hat for this port
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double true_error = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  bool solved = false; // false: the reduced solve failed at this sample
};

struct SweepResult
{
  ParameterGrid grid;
  Index ports = 0;
  Index output_count = 0;          // rows of the functional matrix
  std::vector<SweepRow> rows;      // |grid| * ports, sample-major
  double offline_seconds = 0.0;    // copied from the model
  double online_seconds = 0.0;     // wall time of the reduced-only pass
  std::vector<std::string> warnings;
};

struct SweepConfig
{
  // Optional output functional C (q x n); empty means no outputs. It is
  // reduced to C V once, before the online timer starts.
  DenseMatrix outputs;
  // Optional estimator. Kinds with an online form (proposed, randomized) run
  // inside the timed reduced pass; the offline-only kinds (standard,
  // residual) need `sys` and run outside it.
  const EstimatorState *estimator = nullptr;
  const AffineSystem *sys = nullptr;
  bool true_errors = false; // solve the full model per sample; needs `sys`
  Index threads = 0;
};

// Evaluate the reduced model over the grid. Samples where the reduced solve
// fails are logged in `warnings` and their rows keep solved = false; an
// empty grid yields an empty result.
SweepResult sweep(const ReducedModel &rm, const ParameterGrid &grid,
                  const SweepConfig &cfg);

// Aggregate of estimate/truth pairs: the maxima are taken over everything
// passed in (all samples and ports), the effectivity is the ratio of the
// maxima, and the quantiles describe the per-row ratio distribution.
// Sentinel (+inf) estimates are excluded from the maximum and counted.
struct EffectivitySummary
{
  Index count = 0;          // rows with finite estimate and truth
  Index sentinel_count = 0; // rows whose estimate was +inf
  double max_estimate = 0.0;
  double max_true_error = 0.0;
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  double ratio_q10 = std::numeric_limits<double>::quiet_NaN();
  double ratio_q50 = std::numeric_limits<double>::quiet_NaN();
  double ratio_q90 = std::numeric_limits<double>::quiet_NaN();
};

EffectivitySummary effectivity_table(const std::vector<ErrorCertificate> &certs,
                                     const std::vector<double> &true_errors);

// Convenience over a sweep that recorded both estimates and true errors.
EffectivitySummary effectivity_table(const SweepResult &result);

// Brute-force full-order sweep against offline + online reduced cost over
// the same grid, wall-clock, with the same thread budget for both sides.
struct SpeedupReport
{
  Index points = 0;
  double fom_seconds = 0.0;
  double fom_per_point = 0.0;
  double rom_online_seconds = 0.0;
  double rom_online_per_point = 0.0;
  double offline_seconds = 0.0; // from the model
  double speedup = 0.0;         // fom / (offline + online)
  double online_speedup = 0.0;  // per-point fom / per-point online
};

SpeedupReport speedup_report(const AffineSystem &sys, const ReducedModel &rm,
                             const ParameterGrid &grid, Index threads = 0);

} // namespace morcert

#endif // MORCERT_REPORT_HPP
