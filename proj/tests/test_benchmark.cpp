// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "morcert/benchmark.hpp"
#include "morcert/errors.hpp"
#include "morcert/parameter.hpp"
#include "support/oracles.hpp"
#include "support/testsystems.hpp"

using namespace morcert;

namespace
{

// Recover the real stiffness and mass pair from two assemblies of the
// undamped family: A(f) = S - (2 pi f)^2 T.
std::pair<RealMatrix, RealMatrix> recover_pencil(const AffineSystem &sys, double fa,
                                                 double fb)
{
  const DenseMatrix a1 = testsys::materialize(sys, ParameterPoint{fa, {}});
  const DenseMatrix a2 = testsys::materialize(sys, ParameterPoint{fb, {}});
  const double wa2 = std::pow(2.0 * std::numbers::pi * fa, 2);
  const double wb2 = std::pow(2.0 * std::numbers::pi * fb, 2);
  const RealMatrix t = ((a1 - a2) / (wb2 - wa2)).real();
  const RealMatrix s = a1.real() + wa2 * t;
  return {s, t};
}

} // namespace

TEST_CASE("the four-node chain has the textbook spectrum", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::ResonantCavity;
  spec.n = 4;
  spec.dimension = 1;
  spec.lumped_mass = true;
  spec.f_lo = 1.0e-3;
  spec.f_hi = 1.0;
  const std::vector<double> freqs = reference_resonances(spec);
  REQUIRE(freqs.size() == 4);
  for (size_t k = 1; k <= 4; ++k)
  {
    const double lambda = 2.0 - 2.0 * std::cos(double(k) * std::numbers::pi / 5.0);
    const double expected = std::sqrt(lambda) / (2.0 * std::numbers::pi);
    CHECK(std::abs(freqs[k - 1] - expected) <= 1.0e-12);
  }

  // The same spectrum again, reading the pencil back out of the assembly.
  const AffineSystem sys = generate_benchmark(spec);
  const auto [s, t] = recover_pencil(sys, 0.01, 0.02);
  CHECK((t - RealMatrix::Identity(4, 4)).norm() <= 1.0e-12);
  RealMatrix s_exact(4, 4);
  s_exact << 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2;
  CHECK((s - s_exact).norm() <= 1.0e-10);
}

TEST_CASE("closed-form resonances match a generalized eigenvalue oracle",
          "[benchmark]")
{
  for (int dimension : {1, 2})
  {
    for (bool lumped : {false, true})
    {
      BenchmarkSpec spec;
      spec.family = BenchmarkFamily::ResonantCavity;
      spec.n = dimension == 1 ? 200 : 196;
      spec.dimension = dimension;
      spec.lumped_mass = lumped;
      spec.f_lo = 1.0e-6;
      spec.f_hi = 1.0e3; // the whole spectrum
      const std::vector<double> got = reference_resonances(spec);
      REQUIRE(got.size() == static_cast<size_t>(spec.n));

      const AffineSystem sys = generate_benchmark(spec);
      const auto [s, t] = recover_pencil(sys, 0.011, 0.017);
      Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> eig(s, t);
      REQUIRE(eig.info() == Eigen::Success);
      INFO("dimension " << dimension << " lumped " << lumped);
      for (Index k = 0; k < spec.n; ++k)
      {
        const double expected =
            std::sqrt(eig.eigenvalues()(k)) / (2.0 * std::numbers::pi);
        CHECK(std::abs(got[static_cast<size_t>(k)] - expected) <= 1.0e-8 * expected);
      }
    }
  }
}

TEST_CASE("the undamped family collapses at its resonances", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::ResonantCavity;
  spec.n = 120;
  spec.min_resonances = 3;
  const AffineSystem sys = generate_benchmark(spec);
  const std::vector<double> res = reference_resonances(spec);
  REQUIRE(res.size() >= 3);

  // A fine uniform grid: sigma_min at the grid point nearest each resonance
  // collapses by three orders of magnitude against the band median.
  const ParameterGrid grid = uniform_grid(sys.domain(), 20001);
  auto nearest = [&](double f)
  {
    size_t best = 0;
    for (size_t i = 1; i < grid.points.size(); ++i)
    {
      if (std::abs(grid.points[i].freq - f) < std::abs(grid.points[best].freq - f))
      {
        best = i;
      }
    }
    return best;
  };
  std::vector<double> sample;
  for (size_t i = 0; i < grid.points.size(); i += 1800)
  {
    const DenseMatrix a = testsys::materialize(sys, grid.points[i]);
    sample.push_back(oracle::sigma_min(a));
  }
  std::sort(sample.begin(), sample.end());
  const double median = sample[sample.size() / 2];
  REQUIRE(median > 0.0);
  for (size_t k = 0; k < 3; ++k)
  {
    const DenseMatrix a = testsys::materialize(sys, grid.points[nearest(res[k])]);
    INFO("resonance " << res[k]);
    CHECK(oracle::sigma_min(a) <= 1.0e-3 * median);
  }
}

TEST_CASE("boundary damping keeps the damped family invertible in band",
          "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::DampedCavity;
  spec.n = 120;
  spec.eta = 1.0e-2;
  const AffineSystem sys = generate_benchmark(spec);
  const std::vector<double> res = reference_resonances(spec);
  REQUIRE(res.size() >= 3);

  // Solvable at every point of a uniform grid, including points placed as
  // close to each resonance as the grid gets.
  const ParameterGrid grid = uniform_grid(sys.domain(), 41);
  for (const auto &pt : grid.points)
  {
    const DenseMatrix x = sys.fom_solve(pt);
    CHECK(x.allFinite());
  }

  // At the exact resonance frequency, damping holds sigma_min well above
  // the undamped family's collapse level.
  BenchmarkSpec undamped = spec;
  undamped.family = BenchmarkFamily::ResonantCavity;
  const AffineSystem bare = generate_benchmark(undamped);
  const ParameterPoint at_res{res[1], {}};
  const double damped_floor = oracle::sigma_min(testsys::materialize(sys, at_res));
  const double bare_floor = oracle::sigma_min(testsys::materialize(bare, at_res));
  CHECK(damped_floor > 100.0 * bare_floor);
  CHECK(damped_floor > 0.0);
}

TEST_CASE("the dielectric split is a partition of the unsplit mass", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::ThreeParamDielectric;
  spec.n = 90;
  spec.p = 2;
  const AffineSystem sys = generate_benchmark(spec);
  REQUIRE(sys.domain().extra_ranges.size() == 2);

  BenchmarkSpec damped = spec;
  damped.family = BenchmarkFamily::DampedCavity;
  const AffineSystem whole = generate_benchmark(damped);

  // At d_1 = d_2 = 1 the split assembly equals the unsplit one exactly.
  for (double f : {sys.domain().f_min, 0.5 * (sys.domain().f_min + sys.domain().f_max)})
  {
    const DenseMatrix a = testsys::materialize(sys, ParameterPoint{f, {1.0, 1.0}});
    const DenseMatrix b = testsys::materialize(whole, ParameterPoint{f, {}});
    CHECK((a - b).norm() == 0.0);
  }

  // Off-reference values genuinely move the assembly.
  const double fm = 0.5 * (sys.domain().f_min + sys.domain().f_max);
  const DenseMatrix a = testsys::materialize(sys, ParameterPoint{fm, {1.1, 0.9}});
  const DenseMatrix b = testsys::materialize(sys, ParameterPoint{fm, {1.0, 1.0}});
  CHECK((a - b).norm() > 0.0);
}

TEST_CASE("generation is bit-identical for equal specs and seeded", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::DampedCavity;
  spec.n = 64;
  spec.p = 3;
  spec.seed = 17;
  const AffineSystem a = generate_benchmark(spec);
  const AffineSystem b = generate_benchmark(spec);
  const ParameterPoint pt{0.5 * (a.domain().f_min + a.domain().f_max), {}};
  CHECK((testsys::materialize(a, pt) - testsys::materialize(b, pt)).norm() == 0.0);
  CHECK((a.assemble_rhs(pt) - b.assemble_rhs(pt)).norm() == 0.0);

  BenchmarkSpec other = spec;
  other.seed = 18;
  const AffineSystem c = generate_benchmark(other);
  CHECK((a.assemble_rhs(pt) - c.assemble_rhs(pt)).norm() > 0.0);

  // Port columns are sparse and nonzero.
  REQUIRE(a.rhs_terms().size() == 1);
  CHECK(a.rhs_terms()[0].matrix.nonzeros() <= 64 * 3);
  const DenseMatrix q = a.rhs_terms()[0].matrix.to_dense();
  for (Index j = 0; j < 3; ++j)
  {
    CHECK(q.col(j).norm() > 0.0);
  }
}

TEST_CASE("auto band placement straddles the requested resonance count",
          "[benchmark]")
{
  for (Index want : {Index{3}, Index{5}})
  {
    BenchmarkSpec spec;
    spec.family = BenchmarkFamily::DampedCavity;
    spec.n = 150;
    spec.min_resonances = want;
    const AffineSystem sys = generate_benchmark(spec);
    const std::vector<double> res = reference_resonances(spec);
    CHECK(static_cast<Index>(res.size()) >= want);
    for (double f : res)
    {
      CHECK(f > sys.domain().f_min);
      CHECK(f < sys.domain().f_max);
    }
  }

  BenchmarkSpec pinned;
  pinned.family = BenchmarkFamily::DampedCavity;
  pinned.n = 64;
  pinned.f_lo = 0.2;
  pinned.f_hi = 0.3;
  const AffineSystem sys = generate_benchmark(pinned);
  CHECK(sys.domain().f_min == 0.2);
  CHECK(sys.domain().f_max == 0.3);
}

TEST_CASE("the random dense family solves cleanly over its band", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::RandomDense;
  spec.n = 40;
  spec.p = 2;
  const AffineSystem sys = generate_benchmark(spec);
  CHECK(sys.domain().f_min == 1.0);
  CHECK(sys.domain().f_max == 2.0);
  CHECK(sys.terms().size() == 3);
  for (double f : {1.0, 1.5, 2.0})
  {
    CHECK(sys.fom_solve(ParameterPoint{f, {}}).allFinite());
  }
  CHECK_THROWS_AS(reference_resonances(spec), InvalidSpec);
}

TEST_CASE("spec validation rejects malformed requests", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.n = 3;
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
  spec.n = 200;
  spec.dimension = 2; // not a perfect square
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
  spec.dimension = 1;
  spec.f_lo = 0.5;
  spec.f_hi = 0.2;
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
  spec.f_hi = 0.0;
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
  spec.f_lo = 0.0;
  spec.eta = 0.0;
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
  spec.eta = 1.0e-2;
  spec.family = BenchmarkFamily::ThreeParamDielectric;
  spec.d_rel_low = 0.0;
  CHECK_THROWS_AS(generate_benchmark(spec), InvalidSpec);
}

TEST_CASE("the damped assembly is complex symmetric, not Hermitian", "[benchmark]")
{
  BenchmarkSpec spec;
  spec.family = BenchmarkFamily::DampedCavity;
  spec.n = 49;
  spec.dimension = 2;
  const AffineSystem sys = generate_benchmark(spec);
  const double fm = 0.5 * (sys.domain().f_min + sys.domain().f_max);
  const DenseMatrix a = testsys::materialize(sys, ParameterPoint{fm, {}});
  CHECK((a - a.transpose()).norm() == 0.0);
  CHECK((a - a.adjoint()).norm() > 0.0);
}
