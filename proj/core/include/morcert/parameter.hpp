// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_PARAMETER_HPP
#define MORCERT_PARAMETER_HPP

#include <string>
#include <vector>

#include "morcert/linalg.hpp"

namespace morcert
{

// A sample of the parametric operator: a driving frequency in Hz (always
// present, strictly positive) plus optional auxiliary design parameters
// (e.g. material thicknesses). The frequency enters the operator through
// the Laplace variable s = j*2*pi*f.
struct ParameterPoint
{
  double freq = 0.0;
  std::vector<double> extra;

  Complex s() const;

  bool operator==(const ParameterPoint &other) const = default;
};

// "f" or "f:e0:e1:..." with full round-trip precision.
std::string format_point(const ParameterPoint &pt);
ParameterPoint parse_point(const std::string &text);

// Closed box of admissible parameters. extra_ref is the reference value
// against which ratio-type coefficients normalize their parameter.
struct ParameterDomain
{
  double f_min = 0.0;
  double f_max = 0.0;
  std::vector<std::pair<double, double>> extra_ranges;
  double extra_ref = 1.0;

  // Throws InvalidSpec on empty/reversed/nonpositive ranges.
  void validate() const;
  bool contains(const ParameterPoint &pt) const;
};

// Finite list of distinct parameter samples.
struct ParameterGrid
{
  enum class Provenance
  {
    Generated,
    File
  };

  std::vector<ParameterPoint> points;
  Provenance provenance = Provenance::Generated;

  Index size() const { return static_cast<Index>(points.size()); }

  // Throws DegenerateGrid on duplicates or an empty grid, InvalidSpec on
  // points with nonpositive frequency or wrong extra-parameter count.
  void validate(Index expected_extra = -1) const;
};

// Tensor grid: freq_count uniform frequencies (band endpoints included)
// crossed with uniformly spaced values of each extra parameter. Frequency
// varies fastest, so consecutive points share their extra parameters.
ParameterGrid uniform_grid(const ParameterDomain &domain, Index freq_count,
                           const std::vector<Index> &extra_counts = {});

// Frequency midpoints of consecutive same-extras pairs: a grid disjoint
// from and interleaved with the input, suitable as a held-out test set.
ParameterGrid midpoint_grid(const ParameterGrid &grid);

} // namespace morcert

#endif // MORCERT_PARAMETER_HPP
