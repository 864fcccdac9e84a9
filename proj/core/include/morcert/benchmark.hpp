// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_BENCHMARK_HPP
#define MORCERT_BENCHMARK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "morcert/affine.hpp"
#include "morcert/linalg.hpp"

namespace morcert
{

// Synthetic device families with the S + sU + s^2 T structure. The cavity
// families discretize a Laplacian, so their resonances are known in closed
// form and the band can be placed to contain a requested number of them.
enum class BenchmarkFamily
{
  ResonantCavity,       // U = 0: exactly singular at every resonance
  DampedCavity,         // boundary damping keeps sigma_min positive in band
  ThreeParamDielectric, // mass split into three regions scaled by d_1, d_2
  RandomDense           // small dense terms, no special spectrum
};

const char *to_string(BenchmarkFamily family);
BenchmarkFamily benchmark_family_from_string(const std::string &name);

struct BenchmarkSpec
{
  BenchmarkFamily family = BenchmarkFamily::DampedCavity;
  Index n = 200;      // state dimension; a perfect square when dimension = 2
  Index p = 1;        // ports (right-hand-side columns)
  int dimension = 1;  // 1: chain discretization, 2: square grid
  bool lumped_mass = false; // T = I instead of the consistent mass matrix
  double f_lo = 0.0;  // band in Hz; auto-placed when not both positive
  double f_hi = 0.0;
  Index min_resonances = 3; // auto placement: distinct resonances inside
  double eta = 1.0e-2;      // boundary damping strength
  double d_rel_low = 0.9;   // dielectric ratio range around the reference 1
  double d_rel_high = 1.1;
  uint64_t seed = 1;

  void validate() const;
};

// Deterministic system for the spec; bit-identical for equal specs.
AffineSystem generate_benchmark(const BenchmarkSpec &spec);

// In-band resonance frequencies in Hz, ascending, with multiplicity: the
// generalized eigenvalues of the stiffness/mass pair, in closed form for the
// cavity families (the dielectric family is referenced at d_1 = d_2 = 1).
// The random family has no known spectrum and is rejected.
std::vector<double> reference_resonances(const BenchmarkSpec &spec);

} // namespace morcert

#endif // MORCERT_BENCHMARK_HPP
