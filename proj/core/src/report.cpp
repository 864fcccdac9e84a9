// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

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

bool online_capable(EstimatorKind kind)
{
  return kind == EstimatorKind::Proposed || kind == EstimatorKind::Randomized;
}

// Interpolated quantile of an ascending sequence.
double quantile(const std::vector<double> &sorted, double q)
{
  if (sorted.empty())
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

} // namespace

SweepResult sweep(const ReducedModel &rm, const ParameterGrid &grid,
                  const SweepConfig &cfg)
{
  SweepResult result;
  result.grid = grid;
  result.ports = rm.ports();
  result.offline_seconds = rm.offline_seconds();
  if (grid.points.empty())
  {
    return result;
  }
  grid.validate(static_cast<Index>(rm.domain().extra_ranges.size()));
  if (cfg.true_errors && cfg.sys == nullptr)
  {
    throw InvalidSpec("true errors in a sweep need the full-order system");
  }
  if (cfg.estimator != nullptr && !online_capable(cfg.estimator->kind) &&
      cfg.sys == nullptr)
  {
    throw InvalidSpec(std::string("the ") + to_string(cfg.estimator->kind) +
                      " estimator has no online form; pass the full-order system");
  }

  const Index m = static_cast<Index>(grid.points.size());
  const Index p = rm.ports();
  // Reduce the output functional once, before anything is timed.
  DenseMatrix reduced_outputs;
  if (cfg.outputs.size() > 0)
  {
    if (cfg.outputs.cols() != rm.full_dimension())
    {
      throw DimensionMismatch("output functional has " +
                              std::to_string(cfg.outputs.cols()) +
                              " columns for a model of dimension " +
                              std::to_string(rm.full_dimension()));
    }
    reduced_outputs = cfg.outputs * rm.basis().matrix();
    result.output_count = cfg.outputs.rows();
  }

  result.rows.resize(static_cast<size_t>(m * p));
  std::vector<DenseMatrix> coords(static_cast<size_t>(m));
  std::vector<char> solved(static_cast<size_t>(m), 0);
  const bool timed_estimates =
      cfg.estimator != nullptr && online_capable(cfg.estimator->kind);

  // Timed pass: everything that needs only the reduced blocks.
  const auto online_start = std::chrono::steady_clock::now();
  parallel_for(
      m, cfg.threads,
      [&](Index i)
      {
        const ParameterPoint &pt = grid.points[static_cast<size_t>(i)];
        for (Index j = 0; j < p; ++j)
        {
          SweepRow &row = result.rows[static_cast<size_t>(i * p + j)];
          row.point = pt;
          row.port = j;
        }
        try
        {
          const DenseMatrix z = rm.solve(pt);
          coords[static_cast<size_t>(i)] = z;
          solved[static_cast<size_t>(i)] = 1;
          DenseMatrix y;
          if (reduced_outputs.size() > 0)
          {
            y = reduced_outputs * z;
          }
          std::vector<ErrorCertificate> certs;
          if (timed_estimates)
          {
            certs = estimate(nullptr, rm, *cfg.estimator, pt).certificates;
          }
          for (Index j = 0; j < p; ++j)
          {
            SweepRow &row = result.rows[static_cast<size_t>(i * p + j)];
            row.solved = true;
            if (y.size() > 0)
            {
              row.outputs.assign(y.col(j).data(), y.col(j).data() + y.rows());
            }
            if (!certs.empty())
            {
              row.estimate = certs[static_cast<size_t>(j)].estimate;
            }
          }
        }
        catch (const SingularMatrix &)
        {
          // Row stays unsolved; logged serially below.
        }
      });
  result.online_seconds = seconds_since(online_start);

  // Untimed pass: offline estimators and reference solutions.
  const bool offline_estimates =
      cfg.estimator != nullptr && !online_capable(cfg.estimator->kind);
  if (offline_estimates || cfg.true_errors)
  {
    parallel_for(
        m, cfg.threads,
        [&](Index i)
        {
          if (!solved[static_cast<size_t>(i)])
          {
            return;
          }
          const ParameterPoint &pt = grid.points[static_cast<size_t>(i)];
          try
          {
            if (offline_estimates)
            {
              const auto certs =
                  estimate(cfg.sys, rm, *cfg.estimator, pt).certificates;
              for (Index j = 0; j < p; ++j)
              {
                result.rows[static_cast<size_t>(i * p + j)].estimate =
                    certs[static_cast<size_t>(j)].estimate;
              }
            }
            if (cfg.true_errors)
            {
              const DenseMatrix x = cfg.sys->fom_solve(pt);
              const DenseMatrix diff =
                  x - rm.lift(coords[static_cast<size_t>(i)]);
              for (Index j = 0; j < p; ++j)
              {
                SweepRow &row = result.rows[static_cast<size_t>(i * p + j)];
                row.true_error = diff.col(j).norm();
                if (std::isfinite(row.estimate))
                {
                  row.effectivity =
                      row.true_error > 0.0
                          ? row.estimate / row.true_error
                          : std::numeric_limits<double>::infinity();
                }
              }
            }
          }
          catch (const SingularMatrix &)
          {
            solved[static_cast<size_t>(i)] = 0; // demoted: reference failed
            for (Index j = 0; j < p; ++j)
            {
              result.rows[static_cast<size_t>(i * p + j)].solved = false;
            }
          }
        });
  }

  for (Index i = 0; i < m; ++i)
  {
    if (!solved[static_cast<size_t>(i)])
    {
      result.warnings.push_back("sample " +
                                format_point(grid.points[static_cast<size_t>(i)]) +
                                " skipped: singular solve");
    }
  }
  return result;
}

EffectivitySummary effectivity_table(const std::vector<ErrorCertificate> &certs,
                                     const std::vector<double> &true_errors)
{
  if (certs.size() != true_errors.size())
  {
    throw DimensionMismatch("effectivity table needs one true error per certificate");
  }
  EffectivitySummary out;
  std::vector<double> ratios;
  ratios.reserve(certs.size());
  for (size_t i = 0; i < certs.size(); ++i)
  {
    const double est = certs[i].estimate;
    const double tru = true_errors[i];
    if (std::isinf(est))
    {
      ++out.sentinel_count;
      continue;
    }
    if (!std::isfinite(est) || !std::isfinite(tru))
    {
      continue;
    }
    ++out.count;
    out.max_estimate = std::max(out.max_estimate, est);
    out.max_true_error = std::max(out.max_true_error, tru);
    if (tru > 0.0)
    {
      ratios.push_back(est / tru);
    }
  }
  if (out.count > 0 && out.max_true_error > 0.0)
  {
    out.effectivity = out.max_estimate / out.max_true_error;
  }
  std::sort(ratios.begin(), ratios.end());
  out.ratio_q10 = quantile(ratios, 0.1);
  out.ratio_q50 = quantile(ratios, 0.5);
  out.ratio_q90 = quantile(ratios, 0.9);
  return out;
}

EffectivitySummary effectivity_table(const SweepResult &result)
{
  std::vector<ErrorCertificate> certs;
  std::vector<double> truths;
  for (const auto &row : result.rows)
  {
    if (!row.solved || std::isnan(row.estimate) || std::isnan(row.true_error))
    {
      continue;
    }
    ErrorCertificate cert;
    cert.point = row.point;
    cert.port = row.port;
    cert.estimate = row.estimate;
    certs.push_back(cert);
    truths.push_back(row.true_error);
  }
  return effectivity_table(certs, truths);
}

SpeedupReport speedup_report(const AffineSystem &sys, const ReducedModel &rm,
                             const ParameterGrid &grid, Index threads)
{
  grid.validate(static_cast<Index>(sys.domain().extra_ranges.size()));
  SpeedupReport out;
  out.points = static_cast<Index>(grid.points.size());
  out.offline_seconds = rm.offline_seconds();

  const auto fom_start = std::chrono::steady_clock::now();
  parallel_for(out.points, threads,
               [&](Index i)
               {
                 const DenseMatrix x =
                     sys.fom_solve(grid.points[static_cast<size_t>(i)]);
                 if (!x.allFinite())
                 {
                   throw SingularMatrix("full-order sweep produced non-finite values");
                 }
               });
  out.fom_seconds = seconds_since(fom_start);

  const auto rom_start = std::chrono::steady_clock::now();
  parallel_for(out.points, threads,
               [&](Index i)
               {
                 const DenseMatrix z =
                     rm.solve(grid.points[static_cast<size_t>(i)]);
                 if (!z.allFinite())
                 {
                   throw SingularMatrix("reduced sweep produced non-finite values");
                 }
               });
  out.rom_online_seconds = seconds_since(rom_start);

  const double m = static_cast<double>(out.points);
  out.fom_per_point = out.fom_seconds / m;
  out.rom_online_per_point = out.rom_online_seconds / m;
  out.speedup = out.fom_seconds / (out.offline_seconds + out.rom_online_seconds);
  out.online_speedup = out.fom_per_point / out.rom_online_per_point;
  return out;
}

} // namespace morcert
