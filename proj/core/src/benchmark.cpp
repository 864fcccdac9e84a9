// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/SparseCore>
#include <unsupported/Eigen/KroneckerProduct>

#include "morcert/errors.hpp"

namespace morcert
{

namespace
{

using RealSparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

RealSparse chain_stiffness(Index n)
{
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(3 * n));
  for (Index i = 0; i < n; ++i)
  {
    t.emplace_back(i, i, 2.0);
    if (i + 1 < n)
    {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  RealSparse m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse chain_mass(Index n)
{
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(3 * n));
  for (Index i = 0; i < n; ++i)
  {
    t.emplace_back(i, i, 4.0 / 6.0);
    if (i + 1 < n)
    {
      t.emplace_back(i, i + 1, 1.0 / 6.0);
      t.emplace_back(i + 1, i, 1.0 / 6.0);
    }
  }
  RealSparse m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

RealSparse sparse_identity(Index n)
{
  RealSparse m(n, n);
  m.setIdentity();
  return m;
}

// Lumped unit mass on the boundary nodes: chain ends, or the rim of the grid.
RealSparse boundary_mass(Index n, int dimension)
{
  std::vector<Triplet> t;
  if (dimension == 1)
  {
    t.emplace_back(0, 0, 1.0);
    t.emplace_back(n - 1, n - 1, 1.0);
  }
  else
  {
    const Index side = static_cast<Index>(std::llround(std::sqrt(double(n))));
    for (Index a = 0; a < side; ++a)
    {
      for (Index b = 0; b < side; ++b)
      {
        if (a == 0 || b == 0 || a + 1 == side || b + 1 == side)
        {
          const Index i = a * side + b;
          t.emplace_back(i, i, 1.0);
        }
      }
    }
  }
  RealSparse m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// Generalized eigenvalues of the 1D stiffness/mass pair in closed form:
// both are diagonalized by the same sine vectors.
std::vector<double> chain_generalized_eigenvalues(Index n, bool lumped)
{
  std::vector<double> lambda(static_cast<size_t>(n));
  for (Index k = 1; k <= n; ++k)
  {
    const double c = std::cos(double(k) * std::numbers::pi / double(n + 1));
    const double stiff = 2.0 - 2.0 * c;
    const double mass = lumped ? 1.0 : (4.0 + 2.0 * c) / 6.0;
    lambda[static_cast<size_t>(k - 1)] = stiff / mass;
  }
  return lambda;
}

struct CavityParts
{
  RealSparse stiffness;
  RealSparse mass;
  RealSparse boundary;
  std::vector<double> resonance_freqs; // Hz, ascending, with multiplicity
};

CavityParts build_cavity(const BenchmarkSpec &spec)
{
  CavityParts parts;
  std::vector<double> lambda;
  if (spec.dimension == 1)
  {
    parts.stiffness = chain_stiffness(spec.n);
    parts.mass = spec.lumped_mass ? sparse_identity(spec.n) : chain_mass(spec.n);
    lambda = chain_generalized_eigenvalues(spec.n, spec.lumped_mass);
  }
  else
  {
    const Index side = static_cast<Index>(std::llround(std::sqrt(double(spec.n))));
    const RealSparse s1 = chain_stiffness(side);
    const RealSparse m1 = spec.lumped_mass ? sparse_identity(side) : chain_mass(side);
    parts.stiffness = RealSparse(Eigen::kroneckerProduct(s1, m1)) +
                      RealSparse(Eigen::kroneckerProduct(m1, s1));
    parts.mass = RealSparse(Eigen::kroneckerProduct(m1, m1));
    const std::vector<double> l1 = chain_generalized_eigenvalues(side, spec.lumped_mass);
    lambda.reserve(static_cast<size_t>(spec.n));
    for (double la : l1)
    {
      for (double lb : l1)
      {
        lambda.push_back(la + lb);
      }
    }
  }
  parts.boundary = boundary_mass(spec.n, spec.dimension);
  parts.resonance_freqs.reserve(lambda.size());
  for (double l : lambda)
  {
    parts.resonance_freqs.push_back(std::sqrt(l) / (2.0 * std::numbers::pi));
  }
  std::sort(parts.resonance_freqs.begin(), parts.resonance_freqs.end());
  return parts;
}

bool explicit_band(const BenchmarkSpec &spec)
{
  return spec.f_lo > 0.0 && spec.f_hi > 0.0;
}

// Band placement over the known spectrum: a window of distinct resonance
// values starting a third of the way up, widened leftwards until it holds
// min_resonances frequencies, bounded by midpoints to the neighbours so no
// resonance sits exactly on a band edge.
std::pair<double, double> place_band(const BenchmarkSpec &spec,
                                     const std::vector<double> &freqs)
{
  std::vector<double> distinct;
  std::vector<Index> count;
  for (double f : freqs)
  {
    if (!distinct.empty() && f <= distinct.back() * (1.0 + 1.0e-9))
    {
      ++count.back();
    }
    else
    {
      distinct.push_back(f);
      count.push_back(1);
    }
  }
  const Index total = std::accumulate(count.begin(), count.end(), Index{0});
  if (total < spec.min_resonances)
  {
    throw InvalidSpec("band placement: the spectrum holds fewer resonances than "
                      "requested");
  }
  Index jd = static_cast<Index>(distinct.size()) / 3;
  auto suffix = [&](Index j)
  {
    Index c = 0;
    for (size_t i = static_cast<size_t>(j); i < count.size(); ++i)
    {
      c += count[i];
    }
    return c;
  };
  while (suffix(jd) < spec.min_resonances)
  {
    --jd;
  }
  Index end = jd, held = 0;
  while (held < spec.min_resonances)
  {
    held += count[static_cast<size_t>(end)];
    ++end;
  }
  const double lo = jd > 0
                        ? 0.5 * (distinct[static_cast<size_t>(jd - 1)] +
                                 distinct[static_cast<size_t>(jd)])
                        : 0.95 * distinct.front();
  const double hi = static_cast<size_t>(end) < distinct.size()
                        ? 0.5 * (distinct[static_cast<size_t>(end - 1)] +
                                 distinct[static_cast<size_t>(end)])
                        : 1.05 * distinct.back();
  return {lo, hi};
}

std::pair<double, double> resolve_band(const BenchmarkSpec &spec,
                                       const std::vector<double> &freqs)
{
  if (explicit_band(spec))
  {
    return {spec.f_lo, spec.f_hi};
  }
  if (spec.family == BenchmarkFamily::RandomDense)
  {
    return {1.0, 2.0};
  }
  return place_band(spec, freqs);
}

// p sparse drive columns: a fixed number of rows per port, drawn without
// replacement, with standard normal weights.
Eigen::SparseMatrix<Complex> port_columns(Index n, Index p, std::mt19937_64 &rng)
{
  const Index nnz = std::min(n, std::clamp<Index>(n / 20, 4, 64));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<size_t>(nnz * p));
  for (Index j = 0; j < p; ++j)
  {
    std::vector<Index> rows(static_cast<size_t>(n));
    std::iota(rows.begin(), rows.end(), Index{0});
    for (Index k = 0; k < nnz; ++k)
    {
      const Index pick = k + static_cast<Index>(rng() % static_cast<uint64_t>(n - k));
      std::swap(rows[static_cast<size_t>(k)], rows[static_cast<size_t>(pick)]);
      t.emplace_back(rows[static_cast<size_t>(k)], j, Complex(normal(rng), 0.0));
    }
  }
  Eigen::SparseMatrix<Complex> q(n, p);
  q.setFromTriplets(t.begin(), t.end());
  return q;
}

SparseMatrix to_complex(const RealSparse &m)
{
  SparseMatrix out = m.cast<Complex>();
  return out;
}

AffineSystem generate_random_dense(const BenchmarkSpec &spec)
{
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_matrix = [&](double scale)
  {
    DenseMatrix m(spec.n, spec.n);
    for (Index j = 0; j < spec.n; ++j)
    {
      for (Index i = 0; i < spec.n; ++i)
      {
        m(i, j) = scale * Complex(normal(rng), normal(rng));
      }
    }
    return m;
  };
  DenseMatrix a0 = random_matrix(1.0);
  a0.diagonal().array() += 40.0 + 4.0 * std::sqrt(double(spec.n));

  const auto [lo, hi] = resolve_band(spec, {});
  ParameterDomain domain;
  domain.f_min = lo;
  domain.f_max = hi;

  std::vector<AffineTerm> terms;
  terms.push_back({Coefficient{1.0, 0, -1}, ComplexMatrix(std::move(a0))});
  terms.push_back({Coefficient{1.0, 1, -1}, ComplexMatrix(random_matrix(0.1))});
  terms.push_back({Coefficient{1.0, 2, -1}, ComplexMatrix(random_matrix(0.05))});
  std::vector<RhsTerm> rhs;
  rhs.push_back(
      {Coefficient{1.0, 1, -1}, ComplexMatrix(port_columns(spec.n, spec.p, rng))});
  return AffineSystem(domain, std::move(terms), std::move(rhs));
}

} // namespace

const char *to_string(BenchmarkFamily family)
{
  switch (family)
  {
    case BenchmarkFamily::ResonantCavity:
      return "resonant_cavity";
    case BenchmarkFamily::DampedCavity:
      return "damped_cavity";
    case BenchmarkFamily::ThreeParamDielectric:
      return "three_param_dielectric";
    case BenchmarkFamily::RandomDense:
      return "random_dense";
  }
  return "unknown";
}

BenchmarkFamily benchmark_family_from_string(const std::string &name)
{
  if (name == "resonant_cavity")
  {
    return BenchmarkFamily::ResonantCavity;
  }
  if (name == "damped_cavity")
  {
    return BenchmarkFamily::DampedCavity;
  }
  if (name == "three_param_dielectric")
  {
    return BenchmarkFamily::ThreeParamDielectric;
  }
  if (name == "random_dense")
  {
    return BenchmarkFamily::RandomDense;
  }
  throw InvalidSpec("unknown benchmark family \"" + name + "\"");
}

void BenchmarkSpec::validate() const
{
  if (n < 4)
  {
    throw InvalidSpec("benchmark dimension must be at least 4");
  }
  if (p < 1)
  {
    throw InvalidSpec("benchmark needs at least one port");
  }
  if (dimension != 1 && dimension != 2)
  {
    throw InvalidSpec("benchmark spatial dimension must be 1 or 2");
  }
  if (dimension == 2)
  {
    const Index side = static_cast<Index>(std::llround(std::sqrt(double(n))));
    if (side < 2 || side * side != n)
    {
      throw InvalidSpec("a 2D benchmark needs n to be a perfect square");
    }
  }
  if ((f_lo > 0.0) != (f_hi > 0.0))
  {
    throw InvalidSpec("give both band edges or neither");
  }
  if (explicit_band(*this) && !(f_lo < f_hi))
  {
    throw InvalidSpec("band edges must satisfy f_lo < f_hi");
  }
  if (min_resonances < 1)
  {
    throw InvalidSpec("at least one resonance must be requested in the band");
  }
  if ((family == BenchmarkFamily::DampedCavity ||
       family == BenchmarkFamily::ThreeParamDielectric) &&
      !(eta > 0.0 && std::isfinite(eta)))
  {
    throw InvalidSpec("damped families need a positive finite damping strength");
  }
  if (family == BenchmarkFamily::ThreeParamDielectric &&
      !(d_rel_low > 0.0 && d_rel_low <= d_rel_high && std::isfinite(d_rel_high)))
  {
    throw InvalidSpec("dielectric ratio range must satisfy 0 < low <= high");
  }
}

AffineSystem generate_benchmark(const BenchmarkSpec &spec)
{
  spec.validate();
  if (spec.family == BenchmarkFamily::RandomDense)
  {
    return generate_random_dense(spec);
  }

  const CavityParts parts = build_cavity(spec);
  const auto [lo, hi] = resolve_band(spec, parts.resonance_freqs);
  ParameterDomain domain;
  domain.f_min = lo;
  domain.f_max = hi;

  std::vector<AffineTerm> terms;
  terms.push_back({Coefficient{1.0, 0, -1}, ComplexMatrix(to_complex(parts.stiffness))});
  if (spec.family != BenchmarkFamily::ResonantCavity)
  {
    terms.push_back(
        {Coefficient{spec.eta, 1, -1}, ComplexMatrix(to_complex(parts.boundary))});
  }
  if (spec.family == BenchmarkFamily::ThreeParamDielectric)
  {
    domain.extra_ranges = {{spec.d_rel_low, spec.d_rel_high},
                           {spec.d_rel_low, spec.d_rel_high}};
    // Split the mass by entry region: region of entry (i, j) is decided by
    // min(i, j), so the three pieces sum to the unsplit mass exactly.
    std::vector<Triplet> t0, t1, t2;
    for (Index k = 0; k < parts.mass.outerSize(); ++k)
    {
      for (RealSparse::InnerIterator it(parts.mass, k); it; ++it)
      {
        const Index region =
            std::min<Index>(2, 3 * std::min(it.row(), it.col()) / spec.n);
        (region == 0 ? t0 : region == 1 ? t1 : t2)
            .emplace_back(it.row(), it.col(), it.value());
      }
    }
    auto piece = [&](const std::vector<Triplet> &t)
    {
      RealSparse m(spec.n, spec.n);
      m.setFromTriplets(t.begin(), t.end());
      return ComplexMatrix(to_complex(m));
    };
    terms.push_back({Coefficient{1.0, 2, -1}, piece(t0)});
    terms.push_back({Coefficient{1.0, 2, 0}, piece(t1)});
    terms.push_back({Coefficient{1.0, 2, 1}, piece(t2)});
  }
  else
  {
    terms.push_back({Coefficient{1.0, 2, -1}, ComplexMatrix(to_complex(parts.mass))});
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<RhsTerm> rhs;
  rhs.push_back(
      {Coefficient{1.0, 1, -1}, ComplexMatrix(port_columns(spec.n, spec.p, rng))});
  return AffineSystem(domain, std::move(terms), std::move(rhs));
}

std::vector<double> reference_resonances(const BenchmarkSpec &spec)
{
  spec.validate();
  if (spec.family == BenchmarkFamily::RandomDense)
  {
    throw InvalidSpec("the random dense family has no known spectrum");
  }
  const CavityParts parts = build_cavity(spec);
  const auto [lo, hi] = resolve_band(spec, parts.resonance_freqs);
  std::vector<double> in_band;
  for (double f : parts.resonance_freqs)
  {
    if (f >= lo && f <= hi)
    {
      in_band.push_back(f);
    }
  }
  return in_band;
}

} // namespace morcert
