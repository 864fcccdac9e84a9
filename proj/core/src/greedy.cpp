// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "morcert/errors.hpp"
#include "morcert/parallel.hpp"

namespace morcert
{

namespace
{

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Largest selectable entry, ties to the lowest index; -1 when none remain.
Index argmax_selectable(const RealVector &values)
{
  Index best = -1;
  double best_value = -1.0;
  for (Index i = 0; i < values.size(); ++i)
  {
    if (values(i) >= 0.0 && values(i) > best_value)
    {
      best_value = values(i);
      best = i;
    }
  }
  return best;
}

double max_port_estimate(const EstimateOutput &out)
{
  double worst = 0.0;
  for (const auto &cert : out.certificates)
  {
    worst = std::max(worst, cert.estimate);
  }
  return worst;
}

} // namespace

const char *to_string(InitialSamplePolicy policy)
{
  switch (policy)
  {
    case InitialSamplePolicy::Random:
      return "random";
    case InitialSamplePolicy::Endpoints:
      return "endpoints";
  }
  return "unknown";
}

const char *to_string(TerminationReason reason)
{
  switch (reason)
  {
    case TerminationReason::Converged:
      return "converged";
    case TerminationReason::MaxIterations:
      return "max-iterations";
    case TerminationReason::Stalled:
      return "stalled";
  }
  return "unknown";
}

InitialSamplePolicy initial_sample_policy_from_string(const std::string &name)
{
  if (name == "random")
  {
    return InitialSamplePolicy::Random;
  }
  if (name == "endpoints")
  {
    return InitialSamplePolicy::Endpoints;
  }
  throw InvalidSpec("unknown initial-sample policy \"" + name +
                    "\" (expected random or endpoints)");
}

void GreedyConfig::validate() const
{
  if (!(tol > 0.0) || !std::isfinite(tol))
  {
    throw InvalidSpec("greedy tolerance must be a positive finite number");
  }
  if (max_iterations < 1)
  {
    throw InvalidSpec("greedy iteration budget must be at least 1");
  }
  if (probes < 1)
  {
    throw InvalidSpec("randomized estimator needs at least one probe vector");
  }
  if (!(tol_rd > 0.0) || !std::isfinite(tol_rd))
  {
    throw InvalidSpec("dual-space training tolerance must be a positive finite number");
  }
  if (dual_max_iterations < 1)
  {
    throw InvalidSpec("dual-space iteration budget must be at least 1");
  }
  if (svd_cap < 1)
  {
    throw InvalidSpec("singular-value dimension cap must be positive");
  }
  if (threads < 0)
  {
    throw InvalidSpec("thread count must be nonnegative");
  }
}

DenseMatrix snapshot(const AffineSystem &sys, const ParameterPoint &pt)
{
  return sys.fom_solve(pt);
}

std::pair<Index, Index> select_next_samples(const RealVector &estimates,
                                            const RealVector &re_norms)
{
  if (estimates.size() != re_norms.size())
  {
    throw DimensionMismatch("sample-selection streams cover different grids");
  }
  const Index i_star = argmax_selectable(estimates);
  if (i_star < 0)
  {
    throw DegenerateGrid("no selectable training point left for basis extension");
  }
  Index i_e = argmax_selectable(re_norms);
  if (i_e == i_star)
  {
    RealVector masked = re_norms;
    masked(i_e) = -1.0;
    i_e = argmax_selectable(masked);
  }
  if (i_e < 0)
  {
    throw DegenerateGrid(
        "error-space sampling needs a second selectable training point");
  }
  return {i_star, i_e};
}

static GreedyResult greedy_build_impl(const AffineSystem &sys,
                                      const ParameterGrid &grid,
                                      const GreedyConfig &cfg)
{
  const Index m = grid.size();
  const Index n = sys.dimension();
  const Index p = sys.ports();
  const bool paired = cfg.kind == EstimatorKind::Proposed;
  if (paired && m < 2)
  {
    throw DegenerateGrid("error-space sampling needs at least two training points");
  }

  const auto start = std::chrono::steady_clock::now();
  GreedyResult result;
  GreedyReport &report = result.report;

  // The randomized kind trains its dual space once, before the main loop.
  DualSpaceResult dual;
  if (cfg.kind == EstimatorKind::Randomized)
  {
    DualSpaceConfig dc;
    dc.probes = cfg.probes;
    dc.tol = cfg.tol_rd;
    dc.max_iterations = cfg.dual_max_iterations;
    dc.realify = cfg.realify;
    dc.seed = cfg.seed + 1;
    dc.threads = cfg.threads;
    const auto dual_start = std::chrono::steady_clock::now();
    dual = build_dual_space(sys, grid, dc);
    report.dual_seconds = seconds_since(dual_start);
    if (!dual.converged)
    {
      report.warnings.push_back(
          "dual-space training stopped above its tolerance (worst residual " +
          std::to_string(dual.final_error) + "); estimates may be less sharp");
    }
  }

  // Initial samples: two distinct points (Step 1).
  std::mt19937_64 rng(cfg.seed);
  Index i_star = 0;
  Index i_e = m - 1;
  if (cfg.initial == InitialSamplePolicy::Random)
  {
    std::uniform_int_distribution<Index> draw(0, m - 1);
    i_star = draw(rng);
    if (paired)
    {
      do
      {
        i_e = draw(rng);
      } while (i_e == i_star);
    }
  }

  std::vector<char> excluded(static_cast<size_t>(m), 0);  // exactly singular full model
  std::vector<char> saturated(static_cast<size_t>(m), 0); // snapshot already in span(V)
  std::set<Index> warned;
  auto exclude = [&](Index i, const char *role)
  {
    excluded[static_cast<size_t>(i)] = 1;
    report.warnings.push_back(std::string("training point ") +
                              format_point(grid.points[static_cast<size_t>(i)]) +
                              " skipped as " + role + ": full model is singular there");
  };
  auto selectable_at = [&](Index i, Index avoid) -> bool
  {
    return !excluded[static_cast<size_t>(i)] && !saturated[static_cast<size_t>(i)] && i != avoid;
  };

  // Pick a replacement index when a selected point turns out singular or
  // spanned: the best remaining point of the last sweep, or the lowest
  // selectable index before the first sweep has happened.
  auto reselect = [&](const RealVector &last, Index avoid) -> Index
  {
    if (last.size() == m)
    {
      RealVector masked = last;
      for (Index i = 0; i < m; ++i)
      {
        if (!selectable_at(i, avoid))
        {
          masked(i) = -1.0;
        }
      }
      return argmax_selectable(masked);
    }
    for (Index i = 0; i < m; ++i)
    {
      if (selectable_at(i, avoid))
      {
        return i;
      }
    }
    return -1;
  };

  // Optional ground truth: the full model solved once per training point.
  std::vector<DenseMatrix> truth(static_cast<size_t>(m));
  std::vector<char> truth_ok(static_cast<size_t>(m), 0);
  if (cfg.track_true_error)
  {
    parallel_for(m, cfg.threads,
                 [&](Index i)
                 {
                   try
                   {
                     truth[static_cast<size_t>(i)] =
                         snapshot(sys, grid.points[static_cast<size_t>(i)]);
                     truth_ok[static_cast<size_t>(i)] = 1;
                   }
                   catch (const SingularMatrix &)
                   {
                     // Marked below, serially.
                   }
                 });
    for (Index i = 0; i < m; ++i)
    {
      if (!truth_ok[static_cast<size_t>(i)])
      {
        exclude(i, "reference solution");
        warned.insert(i);
      }
    }
  }

  BasisMatrix v(n);
  BasisMatrix v_r(n);
  RealVector last_estimates; // previous sweep, for singular-point reselection

  for (Index iteration = 1; iteration <= cfg.max_iterations; ++iteration)
  {
    // Steps 3-5: extend V (and V_r) with realified snapshot columns.
    GreedyIteration record;
    record.iteration = iteration;
    DenseMatrix x;
    bool exhausted = false;
    while (true)
    {
      if (i_star < 0)
      {
        if (last_estimates.size() != m)
        {
          throw SingularMatrix("every training point is exactly singular");
        }
        exhausted = true;
        break;
      }
      try
      {
        x = snapshot(sys, grid.points[static_cast<size_t>(i_star)]);
      }
      catch (const SingularMatrix &)
      {
        exclude(i_star, "basis sample");
        i_star = reselect(last_estimates, paired ? i_e : -1);
        continue;
      }
      const Index before = v.cols();
      if (cfg.realify)
      {
        DenseMatrix cand(n, 2 * p);
        cand.leftCols(p) = x.real().cast<Complex>();
        cand.rightCols(p) = x.imag().cast<Complex>();
        v = linalg::orth_extend(v, cand);
      }
      else
      {
        v = linalg::orth_extend(v, x);
      }
      if (v.cols() > before)
      {
        break;
      }
      // The snapshot lies in span(V) to within the orthogonalization drop
      // tolerance, so this point can never extend the basis: it leaves the
      // selection stream (while still counting toward certification) and
      // the best remaining candidate takes its place.
      saturated[static_cast<size_t>(i_star)] = 1;
      report.warnings.push_back(
          "snapshot at " + format_point(grid.points[static_cast<size_t>(i_star)]) +
          " spans no new direction; selecting the next-worst training point");
      i_star = reselect(last_estimates, paired ? i_e : -1);
    }
    if (exhausted)
    {
      report.warnings.push_back(
          "stalled: every candidate snapshot lies in the current basis span "
          "while the estimate is above tolerance");
      report.reason = TerminationReason::Stalled;
      break;
    }
    record.mu_star = grid.points[static_cast<size_t>(i_star)];

    if (paired)
    {
      DenseMatrix xe;
      while (true)
      {
        if (i_e < 0 || i_e == i_star)
        {
          throw DegenerateGrid(
              "error-space sampling needs a second selectable training point");
        }
        try
        {
          xe = snapshot(sys, grid.points[static_cast<size_t>(i_e)]);
          break;
        }
        catch (const SingularMatrix &)
        {
          exclude(i_e, "error-space sample");
          i_e = reselect(last_estimates, i_star);
        }
      }
      record.mu_e_star = grid.points[static_cast<size_t>(i_e)];
      record.has_mu_e = true;
      if (cfg.realify)
      {
        DenseMatrix cand(n, 2 * p);
        cand.leftCols(p) = xe.real().cast<Complex>();
        cand.rightCols(p) = xe.imag().cast<Complex>();
        v_r = linalg::orth_extend(v_r, cand);
      }
      else
      {
        v_r = linalg::orth_extend(v_r, xe);
      }
    }

    // Step 6 and the per-iteration projections.
    result.rom = project(sys, v);
    switch (cfg.kind)
    {
      case EstimatorKind::Standard:
        result.estimator = make_standard_state(cfg.svd_cap);
        break;
      case EstimatorKind::Residual:
        result.estimator = make_residual_state();
        break;
      case EstimatorKind::Proposed:
        result.estimator = make_proposed_state(sys, v, v_r);
        record.error_basis_size = result.estimator.v_e.cols();
        break;
      case EstimatorKind::Randomized:
        result.estimator = make_randomized_state(sys, v, dual.probes, dual.v_rd);
        record.error_basis_size = result.estimator.v_rd.cols();
        break;
    }
    record.basis_size = v.cols();

    // Step 7: sweep the estimator over the grid (parallel map; singular
    // samples are skipped for this sweep only).
    const ReducedModel &rom = result.rom;
    const EstimatorState &st = result.estimator;
    RealVector estimates = RealVector::Constant(m, -1.0);
    RealVector re_norms = RealVector::Constant(m, -1.0);
    RealVector true_errors = RealVector::Constant(m, -1.0);
    std::vector<char> sweep_singular(static_cast<size_t>(m), 0);
    parallel_for(
        m, cfg.threads,
        [&](Index i)
        {
          if (excluded[static_cast<size_t>(i)])
          {
            return;
          }
          const ParameterPoint &pt = grid.points[static_cast<size_t>(i)];
          try
          {
            EstimateOutput out;
            switch (cfg.kind)
            {
              case EstimatorKind::Standard:
                out = standard_estimate(sys, rom, st, pt);
                break;
              case EstimatorKind::Residual:
                out = residual_estimate(sys, rom, pt);
                break;
              case EstimatorKind::Proposed:
                out = proposed_estimate(sys, rom, st, pt);
                re_norms(i) = error_residual(sys, st, pt, out.residual, out.reduced_coords)
                                  .colwise()
                                  .norm()
                                  .maxCoeff();
                break;
              case EstimatorKind::Randomized:
                out = randomized_estimate(rom, st, pt);
                break;
            }
            estimates(i) = max_port_estimate(out);
            if (cfg.track_true_error && truth_ok[static_cast<size_t>(i)])
            {
              const DenseMatrix diff =
                  truth[static_cast<size_t>(i)] - rom.lift(rom.solve(pt));
              true_errors(i) = diff.colwise().norm().maxCoeff();
            }
          }
          catch (const SingularMatrix &)
          {
            sweep_singular[static_cast<size_t>(i)] = 1;
          }
        });
    for (Index i = 0; i < m; ++i)
    {
      if (sweep_singular[static_cast<size_t>(i)] && warned.insert(i).second)
      {
        report.warnings.push_back(
            "training point " + format_point(grid.points[static_cast<size_t>(i)]) +
            " skipped in a sweep: reduced or error operator is singular there");
      }
    }

    // Step 10: the worst estimate over the grid.
    const Index worst = argmax_selectable(estimates);
    if (worst < 0)
    {
      throw SingularMatrix("estimator sweep failed at every training point");
    }
    record.eps_est = estimates(worst);
    if (cfg.track_true_error)
    {
      double worst_true = -1.0;
      for (Index i = 0; i < m; ++i)
      {
        worst_true = std::max(worst_true, true_errors(i));
      }
      if (worst_true >= 0.0)
      {
        record.eps_true = worst_true;
        record.effectivity = worst_true > 0.0
                                 ? record.eps_est / worst_true
                                 : std::numeric_limits<double>::infinity();
      }
    }
    report.iterations.push_back(record);
    report.final_estimate = record.eps_est;
    last_estimates = estimates;

    if (record.eps_est <= cfg.tol)
    {
      report.reason = TerminationReason::Converged;
      break;
    }
    if (iteration == cfg.max_iterations)
    {
      report.reason = TerminationReason::MaxIterations;
      report.warnings.push_back(
          "iteration budget exhausted with the worst estimate still above tolerance");
      break;
    }

    // Steps 8-9: the next pair of samples. Saturated points stay in the
    // certification max above but are no longer selectable.
    RealVector selectable = estimates;
    for (Index i = 0; i < m; ++i)
    {
      if (saturated[static_cast<size_t>(i)])
      {
        selectable(i) = -1.0;
      }
    }
    if (selectable.maxCoeff() < 0.0)
    {
      report.warnings.push_back(
          "stalled: every candidate snapshot lies in the current basis span "
          "while the estimate is above tolerance");
      report.reason = TerminationReason::Stalled;
      break;
    }
    if (paired)
    {
      std::tie(i_star, i_e) = select_next_samples(selectable, re_norms);
    }
    else
    {
      i_star = argmax_selectable(selectable);
    }
  }

  result.rom.set_offline_seconds(seconds_since(start));
  return result;
}

GreedyResult greedy_build(const AffineSystem &sys, const ParameterGrid &grid,
                          const GreedyConfig &cfg)
{
  cfg.validate();
  grid.validate(static_cast<Index>(sys.domain().extra_ranges.size()));
  return greedy_build_impl(sys, grid, cfg);
}

} // namespace morcert
