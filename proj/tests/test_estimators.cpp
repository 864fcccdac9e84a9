// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "morcert/errors.hpp"
#include "morcert/estimators.hpp"
#include "support/oracles.hpp"
#include "support/testsystems.hpp"

using namespace morcert;

namespace
{

BasisMatrix snapshot_basis(const AffineSystem &sys, const std::vector<double> &freqs)
{
  DenseMatrix cols(sys.dimension(), 0);
  for (double f : freqs)
  {
    const DenseMatrix x = sys.fom_solve(ParameterPoint{f, {}});
    cols.conservativeResize(Eigen::NoChange, cols.cols() + x.cols());
    cols.rightCols(x.cols()) = x;
  }
  return linalg::orth(cols);
}

} // namespace

TEST_CASE("the standard estimate is ||r||/sigma_min and brackets the true error",
          "[estimators]")
{
  for (uint64_t seed = 0; seed < 8; ++seed)
  {
    const AffineSystem sys = testsys::random_dense_system(20 + 2 * seed, 1, 4000 + seed);
    const ReducedModel rm = project(sys, snapshot_basis(sys, {1.2}));
    const EstimatorState st = make_standard_state();
    const ParameterPoint pt{1.65, {}};

    const EstimateOutput out = standard_estimate(sys, rm, st, pt);
    REQUIRE(out.certificates.size() == 1);

    const DenseMatrix a = testsys::materialize(sys, pt);
    const DenseMatrix b = testsys::materialize_rhs(sys, pt);
    const DenseMatrix xhat = rm.lift(rm.solve(pt));
    const DenseMatrix r = b - a * xhat;
    const double err = (oracle::solve(a, b) - xhat).norm();
    const auto sv = oracle::singular_values(a);
    const double smin = sv(sv.size() - 1), smax = sv(0);

    INFO("seed " << seed);
    // Implementation against the oracle definition.
    CHECK(std::abs(out.certificates[0].estimate - r.norm() / smin) <=
          1.0e-9 * out.certificates[0].estimate);
    CHECK(std::abs(out.certificates[0].sigma_min - smin) <= 1.0e-9 * smax);
    // Two-sided bracket of the true error.
    CHECK(r.norm() / smax <= err + 1.0e-12);
    CHECK(err <= out.certificates[0].estimate + 1.0e-12);
  }
}

TEST_CASE("the standard estimate degenerates to +inf at numerically singular samples",
          "[estimators]")
{
  // A(mu) = diag(1, eps) with eps far below the pivot scale: sigma_min
  // underflows the 1e-14 * sigma_max sentinel threshold.
  ParameterDomain domain;
  domain.f_min = 1.0;
  domain.f_max = 2.0;
  DenseMatrix a0 = DenseMatrix::Identity(2, 2);
  a0(1, 1) = Complex(1.0e-20, 0.0);
  std::vector<AffineTerm> terms;
  terms.push_back({Coefficient{}, ComplexMatrix(std::move(a0))});
  std::vector<RhsTerm> rhs;
  DenseMatrix q(2, 1);
  q << Complex(1.0, 0.0), Complex(0.0, 0.0);
  rhs.push_back({Coefficient{}, ComplexMatrix(std::move(q))});
  const AffineSystem sys(domain, std::move(terms), std::move(rhs), 1.0);

  DenseMatrix e1(2, 1);
  e1 << Complex(1.0, 0.0), Complex(0.0, 0.0);
  const ReducedModel rm = project(sys, linalg::orth(e1));
  const EstimateOutput out = standard_estimate(sys, rm, make_standard_state(),
                                               ParameterPoint{1.5, {}});
  CHECK(std::isinf(out.certificates[0].estimate));
  CHECK(out.certificates[0].sigma_min <= 1.0e-14 * out.certificates[0].sigma_max);
}

TEST_CASE("the residual norm alone misjudges the error by the operator scaling",
          "[estimators]")
{
  // A = alpha I makes e = r / alpha exactly: alpha = 100 overestimates the
  // error a hundredfold, alpha = 0.01 underestimates it a hundredfold.
  for (double alpha : {100.0, 0.01})
  {
    ParameterDomain domain;
    domain.f_min = 1.0;
    domain.f_max = 2.0;
    std::vector<AffineTerm> terms;
    terms.push_back(
        {Coefficient{alpha, 0, -1}, ComplexMatrix(DenseMatrix::Identity(12, 12))});
    std::vector<RhsTerm> rhs;
    oracle::Rng rng(4100);
    rhs.push_back({Coefficient{}, ComplexMatrix(rng.matrix(12, 1))});
    const AffineSystem sys(domain, std::move(terms), std::move(rhs), 1.0);

    const ReducedModel rm = project(sys, snapshot_basis(sys, {1.2}));
    const ParameterPoint pt{1.8, {}};
    const EstimateOutput out = residual_estimate(sys, rm, pt);

    const DenseMatrix a = testsys::materialize(sys, pt);
    const DenseMatrix b = testsys::materialize_rhs(sys, pt);
    const double err = (oracle::solve(a, b) - rm.lift(rm.solve(pt))).norm();
    if (err > 1.0e-12)
    {
      const double ratio = out.certificates[0].estimate / err;
      CHECK(std::abs(ratio - alpha) <= 1.0e-6 * alpha);
    }
  }
}

TEST_CASE("the proposed estimate obeys the two-sided gap bound", "[estimators]")
{
  for (uint64_t seed = 0; seed < 10; ++seed)
  {
    const Index n = 24 + 2 * static_cast<Index>(seed);
    const AffineSystem sys = testsys::random_dense_system(n, 2, 4200 + seed);
    const BasisMatrix v = snapshot_basis(sys, {1.15});
    oracle::Rng rng(4300 + seed);
    const BasisMatrix v_r = linalg::orth(rng.matrix(n, 3));
    const EstimatorState st = make_proposed_state(sys, v, v_r);
    const ReducedModel rm = project(sys, v);

    const ParameterPoint pt{1.7, {}};
    const EstimateOutput out = proposed_estimate(sys, rm, st, pt);

    const DenseMatrix a = testsys::materialize(sys, pt);
    const DenseMatrix b = testsys::materialize_rhs(sys, pt);
    const DenseMatrix e = oracle::solve(a, b) - rm.lift(rm.solve(pt));
    INFO("seed " << seed);
    for (Index j = 0; j < sys.ports(); ++j)
    {
      const double est = out.certificates[static_cast<size_t>(j)].estimate;
      const double gap = (e.col(j) - out.error_vector.col(j)).norm();
      CHECK(std::abs(est - e.col(j).norm()) <= gap + 1.0e-12);
    }
  }
}

TEST_CASE("the proposed estimate is exact when the error space is the whole space",
          "[estimators]")
{
  const Index n = 18;
  const AffineSystem sys = testsys::random_dense_system(n, 1, 4400);
  const BasisMatrix v = snapshot_basis(sys, {1.3});
  const BasisMatrix full = linalg::orth(DenseMatrix(DenseMatrix::Identity(n, n)));
  const EstimatorState st = make_proposed_state(sys, v, full);
  const ReducedModel rm = project(sys, v);

  const ParameterPoint pt{1.55, {}};
  const EstimateOutput out = proposed_estimate(sys, rm, st, pt);
  const DenseMatrix a = testsys::materialize(sys, pt);
  const DenseMatrix b = testsys::materialize_rhs(sys, pt);
  const DenseMatrix e = oracle::solve(a, b) - rm.lift(rm.solve(pt));
  CHECK(std::abs(out.certificates[0].estimate - e.norm()) <= 1.0e-9 * e.norm());
  CHECK((out.error_vector - e).norm() <= 1.0e-8 * e.norm());
}

TEST_CASE("collapsing the error space onto the reduced space zeroes the estimate",
          "[estimators]")
{
  const AffineSystem sys = testsys::random_dense_system(30, 2, 4500);
  const BasisMatrix v = snapshot_basis(sys, {1.2, 1.8});
  const EstimatorState st = make_proposed_state(sys, v, BasisMatrix());
  REQUIRE((st.v_e.matrix() - v.matrix()).norm() == 0.0);
  const ReducedModel rm = project(sys, v);

  for (double f : {1.1, 1.4, 1.95})
  {
    const ParameterPoint pt{f, {}};
    const EstimateOutput out = proposed_estimate(sys, rm, st, pt);
    const double b_norm = testsys::materialize_rhs(sys, pt).norm();
    for (const auto &cert : out.certificates)
    {
      CHECK(cert.estimate <= 1.0e-9 * b_norm);
    }
  }
}

TEST_CASE("the error-approximation residual matches its definition", "[estimators]")
{
  const AffineSystem sys = testsys::random_dense_system(26, 1, 4600);
  const BasisMatrix v = snapshot_basis(sys, {1.25});
  oracle::Rng rng(4601);
  const EstimatorState st = make_proposed_state(sys, v, linalg::orth(rng.matrix(26, 2)));
  const ReducedModel rm = project(sys, v);

  const ParameterPoint pt{1.6, {}};
  const EstimateOutput out = proposed_estimate(sys, rm, st, pt);
  const DenseMatrix r_e = error_residual(sys, st, pt, out.residual, out.reduced_coords);

  const DenseMatrix a = testsys::materialize(sys, pt);
  const DenseMatrix direct = out.residual - a * out.error_vector;
  CHECK((r_e - direct).norm() <= 1.0e-11 * (1.0 + out.residual.norm()));
}

TEST_CASE("the randomized estimate with the error space as dual space matches the "
          "probe responses of the error approximation",
          "[estimators]")
{
  const Index n = 32;
  const AffineSystem sys = testsys::random_dense_system(n, 2, 4700);
  const BasisMatrix v = linalg::real_split(snapshot_basis(sys, {1.2}));
  oracle::Rng rng(4701);
  const BasisMatrix v_r = linalg::real_split(linalg::orth(rng.matrix(n, 2)));
  const EstimatorState proposed = make_proposed_state(sys, v, v_r);
  const ReducedModel rm = project(sys, v);

  // Real probes, dual space identical to the (real) error space.
  DenseMatrix z(n, 5);
  oracle::Rng prng(4702);
  for (Index j = 0; j < z.cols(); ++j)
  {
    for (Index i = 0; i < n; ++i)
    {
      z(i, j) = Complex(prng.real(), 0.0);
    }
  }
  const EstimatorState randomized = make_randomized_state(sys, v, z, proposed.v_e);

  const ParameterPoint pt{1.45, {}};
  const EstimateOutput rnd = randomized_estimate(sys, rm, randomized, pt);
  const EstimateOutput prop = proposed_estimate(sys, rm, proposed, pt);

  // With V_rd = V_e (real), xi_i^T r = z_i^T e~ holds exactly, so the
  // estimate equals the root mean square of the probe responses to e~.
  const DenseMatrix responses = z.transpose() * prop.error_vector; // K x p
  for (Index j = 0; j < sys.ports(); ++j)
  {
    const double expected =
        std::sqrt(responses.col(j).squaredNorm() / static_cast<double>(z.cols()));
    const double got = rnd.certificates[static_cast<size_t>(j)].estimate;
    CHECK(std::abs(got - expected) <= 1.0e-10 * std::max(expected, 1.0e-30));
  }
}

TEST_CASE("the dual-space training loop meets its tolerance on the whole grid",
          "[estimators]")
{
  const AffineSystem sys = testsys::random_dense_system(40, 1, 4800);
  ParameterGrid grid = uniform_grid(sys.domain(), 21);

  DualSpaceConfig cfg;
  cfg.probes = 4;
  cfg.tol = 1.0e-6;
  cfg.max_iterations = 30;
  cfg.seed = 11;
  cfg.threads = 1;
  const DualSpaceResult dual = build_dual_space(sys, grid, cfg);

  REQUIRE(dual.converged);
  CHECK(dual.v_rd.is_real());
  CHECK(dual.final_error <= cfg.tol);

  // Recompute the worst dual residual from scratch at every grid point.
  const DenseMatrix &w = dual.v_rd.matrix();
  double worst = 0.0;
  for (const auto &pt : grid.points)
  {
    const DenseMatrix a = testsys::materialize(sys, pt);
    const DenseMatrix op = w.transpose() * a * w;
    const DenseMatrix xi = oracle::solve(op.transpose(), w.transpose() * dual.probes);
    const DenseMatrix res = dual.probes - a.transpose() * (w * xi);
    worst = std::max(worst, res.colwise().norm().maxCoeff());
  }
  CHECK(worst <= cfg.tol * (1.0 + 1.0e-6));
}

TEST_CASE("online estimates agree with their full-order counterparts", "[estimators]")
{
  const Index n = 34;
  const AffineSystem sys = testsys::random_dense_system(n, 2, 4900);
  const BasisMatrix v = linalg::real_split(snapshot_basis(sys, {1.3}));
  oracle::Rng rng(4901);
  const BasisMatrix v_r = linalg::real_split(linalg::orth(rng.matrix(n, 2)));
  const ReducedModel rm = project(sys, v);

  const EstimatorState prop = make_proposed_state(sys, v, v_r);
  DenseMatrix z(n, 6);
  for (Index j = 0; j < z.cols(); ++j)
  {
    for (Index i = 0; i < n; ++i)
    {
      z(i, j) = Complex(rng.real(), 0.0);
    }
  }
  const EstimatorState rnd = make_randomized_state(sys, v, z, prop.v_e);

  for (double f : {1.15, 1.5, 1.85})
  {
    const ParameterPoint pt{f, {}};
    const EstimateOutput a = proposed_estimate(sys, rm, prop, pt);
    const EstimateOutput b = proposed_estimate(rm, prop, pt);
    for (size_t j = 0; j < a.certificates.size(); ++j)
    {
      CHECK(std::abs(a.certificates[j].estimate - b.certificates[j].estimate) <=
            1.0e-8 * (a.certificates[j].estimate + 1.0e-12));
    }

    const EstimateOutput c = randomized_estimate(sys, rm, rnd, pt);
    const EstimateOutput d = randomized_estimate(rm, rnd, pt);
    for (size_t j = 0; j < c.certificates.size(); ++j)
    {
      CHECK(std::abs(c.certificates[j].estimate - d.certificates[j].estimate) <=
            1.0e-8 * (c.certificates[j].estimate + 1.0e-12));
    }
  }
}

TEST_CASE("the online residual norm reproduces the full-order residual norm",
          "[estimators]")
{
  const AffineSystem sys = testsys::random_dense_system(38, 2, 5000);
  const ReducedModel rm = project(sys, snapshot_basis(sys, {1.35}));
  const ResidualNormOnline online = ResidualNormOnline::build(sys, rm);

  for (double f : {1.1, 1.6, 1.9})
  {
    const ParameterPoint pt{f, {}};
    const DenseMatrix z = rm.solve(pt);
    const DenseMatrix r = residual(sys, rm, pt, z);
    const RealVector norms = online.norms(rm, pt, z);
    for (Index j = 0; j < sys.ports(); ++j)
    {
      // The Gram route loses up to half the digits to cancellation, which
      // is still far tighter than these mid-convergence residual levels.
      CHECK(std::abs(norms(j) - r.col(j).norm()) <= 1.0e-7 * (r.col(j).norm() + 1.0e-12));
    }
  }

  const ResidualNormOnline back = ResidualNormOnline::from_gram(
      online.gram(), online.rhs_term_count(), online.matrix_term_count(), online.order());
  const ParameterPoint pt{1.5, {}};
  const DenseMatrix z = rm.solve(pt);
  CHECK((back.norms(rm, pt, z) - online.norms(rm, pt, z)).norm() == 0.0);
}

TEST_CASE("the estimator dispatcher routes kinds and rejects impossible online requests",
          "[estimators]")
{
  const AffineSystem sys = testsys::random_dense_system(22, 1, 5100);
  const BasisMatrix v = snapshot_basis(sys, {1.4});
  const ReducedModel rm = project(sys, v);
  const ParameterPoint pt{1.5, {}};

  const EstimatorState std_st = make_standard_state();
  const EstimatorState res_st = make_residual_state();
  CHECK(estimate(&sys, rm, std_st, pt).certificates[0].kind == EstimatorKind::Standard);
  CHECK(estimate(&sys, rm, res_st, pt).certificates[0].kind == EstimatorKind::Residual);
  CHECK_THROWS_AS(estimate(nullptr, rm, std_st, pt), InvalidSpec);
  CHECK_THROWS_AS(estimate(nullptr, rm, res_st, pt), InvalidSpec);

  CHECK(estimator_kind_from_string("proposed") == EstimatorKind::Proposed);
  CHECK_THROWS_AS(estimator_kind_from_string("bogus"), InvalidSpec);
  CHECK(std::string(to_string(EstimatorKind::Randomized)) == "randomized");
}
