// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <thread>
#include <vector>

#include "morcert/errors.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parallel.hpp"
#include "support/oracles.hpp"

using namespace morcert;
using linalg::extremal_singular_values;
using linalg::orth;
using linalg::orth_extend;
using linalg::real_split;

namespace
{

double gram_deviation(const BasisMatrix &q)
{
  const Index k = q.cols();
  return (q.matrix().adjoint() * q.matrix() - DenseMatrix::Identity(k, k)).norm();
}

// Relative distance of x from the span of q.
double span_defect(const BasisMatrix &q, const DenseVector &x)
{
  return (x - q.matrix() * (q.matrix().adjoint() * x)).norm() / x.norm();
}

SparseMatrix banded_test_matrix(Index n, uint64_t seed)
{
  oracle::Rng rng(seed);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index i = 0; i < n; ++i)
  {
    trips.emplace_back(i, i, Complex(4.0, 0.5) + 0.1 * rng.cval());
    if (i > 0)
    {
      trips.emplace_back(i, i - 1, Complex(-1.0, 0.0) + 0.05 * rng.cval());
      trips.emplace_back(i - 1, i, Complex(-1.0, 0.1) + 0.05 * rng.cval());
    }
  }
  SparseMatrix s(n, n);
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

} // namespace

TEST_CASE("orth removes dependent columns and reproduces the span", "[linalg]")
{
  oracle::Rng rng(101);
  DenseMatrix m = rng.matrix(50, 5);
  m.col(2) = m.col(0) + m.col(4); // one exactly dependent column

  const BasisMatrix q = orth(m);
  CHECK(q.cols() == 4);
  CHECK(q.cols() == oracle::rank(m));
  CHECK(gram_deviation(q) <= 1.0e-12);
  for (Index j = 0; j < m.cols(); ++j)
  {
    CHECK(span_defect(q, m.col(j)) <= 1.0e-10);
  }
}

TEST_CASE("orth is idempotent on an orthonormal basis", "[linalg]")
{
  oracle::Rng rng(102);
  const BasisMatrix q = orth(rng.matrix(40, 8));
  const BasisMatrix q2 = orth(q.matrix());
  REQUIRE(q2.cols() == q.cols());
  CHECK((q2.matrix() - q.matrix()).norm() <= 1.0e-12);
}

TEST_CASE("orth matches a rank oracle and stays orthonormal across random shapes", "[linalg]")
{
  for (uint64_t seed = 0; seed < 20; ++seed)
  {
    oracle::Rng rng(7000 + seed);
    const Index n = 20 + static_cast<Index>(seed) * 2;
    const Index k = 3 + static_cast<Index>(seed % 7);
    DenseMatrix m = rng.matrix(n, k);
    if (seed % 3 == 0 && k >= 2)
    {
      m.col(k - 1) = Complex(0.7, -0.3) * m.col(0); // planted dependency
    }

    const BasisMatrix q = orth(m);
    INFO("seed " << seed);
    CHECK(q.cols() == oracle::rank(m));
    CHECK(gram_deviation(q) <= 1.0e-10 * std::sqrt(static_cast<double>(q.cols())));
    for (Index j = 0; j < k; ++j)
    {
      CHECK(span_defect(q, m.col(j)) <= 1.0e-10);
    }
  }
}

TEST_CASE("orth rejects inputs with no usable columns", "[linalg]")
{
  CHECK_THROWS_AS(orth(DenseMatrix::Zero(30, 3)), EmptyBasis);
  CHECK_THROWS_AS(orth(DenseMatrix(30, 0)), EmptyBasis);

  // A duplicated column collapses to a single basis vector, not an error.
  oracle::Rng rng(103);
  DenseMatrix m(25, 2);
  m.col(0) = rng.vector(25);
  m.col(1) = m.col(0);
  CHECK(orth(m).cols() == 1);
}

TEST_CASE("orth_extend keeps existing columns bitwise and only appends new directions",
          "[linalg]")
{
  oracle::Rng rng(104);
  const BasisMatrix v = orth(rng.matrix(60, 4));
  DenseMatrix fresh = rng.matrix(60, 3);
  fresh.col(1) = v.matrix().col(2); // already represented

  const BasisMatrix w = orth_extend(v, fresh);
  CHECK(w.cols() == 6);
  CHECK((w.matrix().leftCols(4) - v.matrix()).norm() == 0.0);
  CHECK(gram_deviation(w) <= 1.0e-10 * std::sqrt(6.0));
  CHECK(span_defect(w, fresh.col(0)) <= 1.0e-10);
  CHECK(span_defect(w, fresh.col(2)) <= 1.0e-10);

  // Extending with columns already in the span is a no-op.
  const BasisMatrix same = orth_extend(w, w.matrix().rightCols(2));
  CHECK(same.cols() == w.cols());
}

TEST_CASE("real_split produces a real basis covering the original span", "[linalg]")
{
  oracle::Rng rng(105);
  const BasisMatrix v = orth(rng.matrix(40, 3));
  const BasisMatrix r = real_split(v);

  CHECK(r.is_real());
  CHECK(r.cols() <= 2 * v.cols());
  CHECK(gram_deviation(r) <= 1.0e-10 * std::sqrt(static_cast<double>(r.cols())));
  for (Index j = 0; j < v.cols(); ++j)
  {
    const DenseVector re = v.matrix().col(j).real().cast<Complex>();
    const DenseVector im = v.matrix().col(j).imag().cast<Complex>();
    CHECK(span_defect(r, re) <= 1.0e-10);
    CHECK(span_defect(r, im) <= 1.0e-10);
  }

  // A real basis splits to itself (same span, same column count).
  const BasisMatrix rr = real_split(r);
  CHECK(rr.cols() == r.cols());
}

TEST_CASE("dense factorization solves forward and transposed systems", "[linalg]")
{
  oracle::Rng rng(106);
  const DenseMatrix a = rng.conditioned_matrix(80);
  const DenseMatrix b = rng.matrix(80, 3);

  const auto sv = oracle::singular_values(a);
  const double cond = sv(0) / sv(sv.size() - 1);

  const Factorization f = linalg::factorize(ComplexMatrix(a));
  const DenseMatrix x = f.solve(b);
  CHECK((a * x - b).norm() <= 1.0e-10 * cond * b.norm());
  CHECK((x - oracle::solve(a, b)).norm() <= 1.0e-10 * x.norm());

  const DenseMatrix xt = f.solve_transpose(b);
  CHECK((a.transpose() * xt - b).norm() <= 1.0e-10 * cond * b.norm());
}

TEST_CASE("sparse inputs below the dense fallback threshold match the dense oracle", "[linalg]")
{
  const Index n = 120; // < kDenseFallbackDim, so the dense path is used
  const SparseMatrix s = banded_test_matrix(n, 107);
  oracle::Rng rng(108);
  const DenseMatrix b = rng.matrix(n, 2);

  const Factorization f = linalg::factorize(ComplexMatrix(s));
  const DenseMatrix x = f.solve(b);
  CHECK((DenseMatrix(s) * x - b).norm() <= 1.0e-10 * b.norm());
  CHECK((x - oracle::solve(DenseMatrix(s), b)).norm() <= 1.0e-10 * x.norm());
}

TEST_CASE("large sparse factorization stays on the sparse path and solves accurately",
          "[linalg]")
{
  const Index n = 800;
  const SparseMatrix s = banded_test_matrix(n, 109);
  oracle::Rng rng(110);
  const DenseMatrix b = rng.matrix(n, 2);

  const Factorization f = linalg::factorize(ComplexMatrix(s));
  const DenseMatrix x = f.solve(b);
  CHECK((DenseMatrix(s) * x - b).norm() <= 1.0e-10 * b.norm());

  const DenseMatrix xt = f.solve_transpose(b);
  CHECK((DenseMatrix(SparseMatrix(s.transpose())) * xt - b).norm() <= 1.0e-10 * b.norm());
}

TEST_CASE("singular matrices are rejected at factorization time", "[linalg]")
{
  oracle::Rng rng(111);
  DenseMatrix a = rng.matrix(50, 50);
  a.col(17) = a.col(3); // exact rank deficiency
  CHECK_THROWS_AS(linalg::factorize(ComplexMatrix(a)), SingularMatrix);

  // Sparse path: a structurally empty row.
  SparseMatrix s = banded_test_matrix(600, 112);
  SparseMatrix mask(600, 600);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index i = 0; i < 600; ++i)
  {
    if (i != 250)
    {
      trips.emplace_back(i, i, Complex(1.0, 0.0));
    }
  }
  mask.setFromTriplets(trips.begin(), trips.end());
  const SparseMatrix singular = (mask * s).pruned();
  CHECK_THROWS_AS(linalg::factorize(ComplexMatrix(singular)), SingularMatrix);

  CHECK_THROWS_AS(linalg::factorize(ComplexMatrix(DenseMatrix::Zero(10, 10))), SingularMatrix);
}

TEST_CASE("extremal singular values match the Hermitian-embedding oracle", "[linalg]")
{
  oracle::Rng rng(113);
  const DenseMatrix a = rng.matrix(30, 30);
  const auto sv = oracle::singular_values(a);

  const auto ext = extremal_singular_values(ComplexMatrix(a));
  CHECK(std::abs(ext.max - sv(0)) <= 1.0e-10 * sv(0));
  CHECK(std::abs(ext.min - sv(sv.size() - 1)) <= 1.0e-10 * sv(0));

  // Scaling covariance: singular values of alpha*A are |alpha| times those of A.
  const Complex alpha(2.5, -1.0);
  const auto scaled = extremal_singular_values(ComplexMatrix(DenseMatrix(alpha * a)));
  CHECK(std::abs(scaled.max - std::abs(alpha) * ext.max) <= 1.0e-10 * scaled.max);
  CHECK(std::abs(scaled.min - std::abs(alpha) * ext.min) <= 1.0e-10 * scaled.max);
}

TEST_CASE("dense SVD refuses dimensions above the cap", "[linalg]")
{
  oracle::Rng rng(114);
  const DenseMatrix a = rng.matrix(60, 60);
  CHECK_THROWS_AS(extremal_singular_values(ComplexMatrix(a), 50), DimensionTooLarge);
  CHECK_NOTHROW(extremal_singular_values(ComplexMatrix(a), 60));
}

TEST_CASE("a factorization is usable from several threads at once", "[linalg]")
{
  const Index n = 640;
  const SparseMatrix s = banded_test_matrix(n, 115);
  const Factorization f = linalg::factorize(ComplexMatrix(s));

  oracle::Rng rng(116);
  std::vector<DenseVector> rhs;
  for (int i = 0; i < 16; ++i)
  {
    rhs.push_back(rng.vector(n));
  }
  std::vector<DenseVector> serial(rhs.size());
  for (size_t i = 0; i < rhs.size(); ++i)
  {
    serial[i] = f.solve(rhs[i]);
  }

  std::vector<DenseVector> parallel(rhs.size());
  parallel_for(static_cast<Index>(rhs.size()), 8,
               [&](Index i) { parallel[static_cast<size_t>(i)] = f.solve(rhs[static_cast<size_t>(i)]); });
  for (size_t i = 0; i < rhs.size(); ++i)
  {
    CHECK((parallel[i] - serial[i]).norm() == 0.0);
  }
}

TEST_CASE("parallel_for covers the range once and propagates exceptions", "[linalg]")
{
  std::vector<std::atomic<int>> hits(257);
  parallel_for(257, 5, [&](Index i) { hits[static_cast<size_t>(i)]++; });
  for (const auto &h : hits)
  {
    CHECK(h.load() == 1);
  }

  CHECK_THROWS_AS(parallel_for(64, 4,
                               [&](Index i)
                               {
                                 if (i == 40)
                                 {
                                   throw SingularMatrix("boom");
                                 }
                               }),
                  SingularMatrix);
}
