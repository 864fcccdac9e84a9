// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/parameter.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

#include "morcert/errors.hpp"

namespace morcert
{

Complex ParameterPoint::s() const
{
  return Complex(0.0, 2.0 * std::numbers::pi * freq);
}

std::string format_point(const ParameterPoint &pt)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", pt.freq);
  std::string out(buf);
  for (double e : pt.extra)
  {
    std::snprintf(buf, sizeof(buf), "%.17g", e);
    out += ':';
    out += buf;
  }
  return out;
}

ParameterPoint parse_point(const std::string &text)
{
  ParameterPoint pt;
  std::istringstream in(text);
  std::string field;
  bool first = true;
  while (std::getline(in, field, ':'))
  {
    size_t used = 0;
    double v = 0.0;
    try
    {
      v = std::stod(field, &used);
    }
    catch (const std::exception &)
    {
      throw InvalidSpec("parse_point: not a number: '" + field + "'");
    }
    if (used != field.size())
    {
      throw InvalidSpec("parse_point: trailing characters in '" + field + "'");
    }
    if (first)
    {
      pt.freq = v;
      first = false;
    }
    else
    {
      pt.extra.push_back(v);
    }
  }
  if (first || !(pt.freq > 0.0))
  {
    throw InvalidSpec("parse_point: frequency must be positive in '" + text + "'");
  }
  return pt;
}

void ParameterDomain::validate() const
{
  if (!(f_min > 0.0) || !(f_max >= f_min))
  {
    throw InvalidSpec("domain: frequency band must satisfy 0 < f_min <= f_max");
  }
  if (!(extra_ref > 0.0))
  {
    throw InvalidSpec("domain: reference value for ratio parameters must be positive");
  }
  for (const auto &[lo, hi] : extra_ranges)
  {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi >= lo))
    {
      throw InvalidSpec("domain: invalid extra-parameter range");
    }
  }
}

bool ParameterDomain::contains(const ParameterPoint &pt) const
{
  if (pt.freq < f_min || pt.freq > f_max || pt.extra.size() != extra_ranges.size())
  {
    return false;
  }
  for (size_t i = 0; i < pt.extra.size(); ++i)
  {
    if (pt.extra[i] < extra_ranges[i].first || pt.extra[i] > extra_ranges[i].second)
    {
      return false;
    }
  }
  return true;
}

void ParameterGrid::validate(Index expected_extra) const
{
  if (points.empty())
  {
    throw DegenerateGrid("grid: no points");
  }
  std::set<std::pair<double, std::vector<double>>> seen;
  for (const auto &pt : points)
  {
    if (!(pt.freq > 0.0))
    {
      throw InvalidSpec("grid: nonpositive frequency " + std::to_string(pt.freq));
    }
    if (expected_extra >= 0 && static_cast<Index>(pt.extra.size()) != expected_extra)
    {
      throw InvalidSpec("grid: point has " + std::to_string(pt.extra.size()) +
                        " extra parameters, expected " + std::to_string(expected_extra));
    }
    if (!seen.emplace(pt.freq, pt.extra).second)
    {
      throw DegenerateGrid("grid: duplicate point " + format_point(pt));
    }
  }
}

namespace
{

std::vector<double> linspace(double lo, double hi, Index count)
{
  std::vector<double> vals;
  vals.reserve(static_cast<size_t>(count));
  if (count == 1)
  {
    vals.push_back(lo);
    return vals;
  }
  for (Index i = 0; i < count; ++i)
  {
    vals.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return vals;
}

} // namespace

ParameterGrid uniform_grid(const ParameterDomain &domain, Index freq_count,
                           const std::vector<Index> &extra_counts)
{
  domain.validate();
  if (freq_count < 1)
  {
    throw InvalidSpec("uniform_grid: need at least one frequency sample");
  }
  if (!extra_counts.empty() && extra_counts.size() != domain.extra_ranges.size())
  {
    throw InvalidSpec("uniform_grid: extra_counts does not match the domain");
  }

  const std::vector<double> freqs = linspace(domain.f_min, domain.f_max, freq_count);
  std::vector<std::vector<double>> extra_vals;
  for (size_t i = 0; i < domain.extra_ranges.size(); ++i)
  {
    const Index count = extra_counts.empty() ? 1 : extra_counts[i];
    if (count < 1)
    {
      throw InvalidSpec("uniform_grid: extra-parameter counts must be positive");
    }
    extra_vals.push_back(
        linspace(domain.extra_ranges[i].first, domain.extra_ranges[i].second, count));
  }

  // Odometer over the extra-parameter values, frequency innermost.
  ParameterGrid grid;
  std::vector<size_t> idx(extra_vals.size(), 0);
  while (true)
  {
    std::vector<double> extra;
    extra.reserve(idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
    {
      extra.push_back(extra_vals[i][idx[i]]);
    }
    for (double f : freqs)
    {
      grid.points.push_back(ParameterPoint{f, extra});
    }
    size_t pos = 0;
    for (; pos < idx.size(); ++pos)
    {
      if (++idx[pos] < extra_vals[pos].size())
      {
        break;
      }
      idx[pos] = 0;
    }
    if (pos == idx.size())
    {
      break;
    }
  }
  grid.provenance = ParameterGrid::Provenance::Generated;
  grid.validate(static_cast<Index>(domain.extra_ranges.size()));
  return grid;
}

ParameterGrid midpoint_grid(const ParameterGrid &grid)
{
  ParameterGrid out;
  for (size_t i = 0; i + 1 < grid.points.size(); ++i)
  {
    const auto &a = grid.points[i];
    const auto &b = grid.points[i + 1];
    if (a.extra == b.extra && a.freq != b.freq)
    {
      out.points.push_back(ParameterPoint{0.5 * (a.freq + b.freq), a.extra});
    }
  }
  if (out.points.empty())
  {
    throw DegenerateGrid("midpoint_grid: input has no consecutive frequency pairs");
  }
  out.provenance = ParameterGrid::Provenance::Generated;
  return out;
}

} // namespace morcert
