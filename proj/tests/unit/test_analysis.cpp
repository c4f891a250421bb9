#include <gtest/gtest.h>

#include <cmath>

#include "maxent/maxent.hpp"
#include "oracles.hpp"

namespace maxent {
namespace {

ObservableFamily scalar_family() {
  return ObservableFamily({HermitianOperator::diagonal(RealVector{{1.0, 0.0}})});
}

ProblemInstance instance(FamilyKind kind, int n, std::uint64_t seed,
                         bool complete = false) {
  const auto fam = build_family(kind, n, seed);
  return make_instance(fam, std::nullopt, qubit_normalized_beta(fam, 1.0), complete);
}

HessianBundle bundle_at(const RealVector& lambda, const ObservableFamily& obs) {
  return hessian(snapshot(lambda, obs), obs);
}

TEST(Jacobian, ScalarExamples) {
  const auto obs = scalar_family();
  const auto b = bundle_at(RealVector::Zero(1), obs);
  EXPECT_NEAR(b.P(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(b.L(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(jacobian_qis(b)(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(jacobian_gd(b, 1.0)(0, 0), 0.75, 1e-15);
  EXPECT_TRUE(jacobian_gd(b, 0.0).isIdentity(0.0));
}

TEST(Jacobian, ZeroMomentIsSingular) {
  HessianBundle b;
  b.P = RealMatrix::Zero(2, 2);
  b.P(0, 0) = 0.5;
  b.L = RealMatrix::Zero(2, 2);
  EXPECT_THROW(jacobian_qis(b), SingularityError);
  EXPECT_THROW(jacobian_qis_symmetric(b), SingularityError);
}

TEST(Jacobian, ClosedFormsMatchFiniteDifferences) {
  Rng rng(41);
  for (auto kind : {FamilyKind::Ising, FamilyKind::Transversal1D, FamilyKind::Local1D}) {
    const auto inst = instance(kind, 3, 3);
    const Index m = inst.alpha.size();
    const RealVector lambda = oracle::random_vector(rng, m);
    const auto b = bundle_at(lambda, inst.observables);
    const double eta = static_cast<double>(m);
    const RealMatrix fd_q = fd_jacobian_qis(inst.observables, inst.alpha, lambda);
    const RealMatrix fd_g = fd_jacobian_gd(inst.observables, inst.alpha, lambda, eta);
    EXPECT_LE((jacobian_qis(b) - fd_q).cwiseAbs().maxCoeff(), 1e-5) << to_string(kind);
    EXPECT_LE((jacobian_gd(b, eta) - fd_g).cwiseAbs().maxCoeff(), 1e-5) << to_string(kind);
  }
}

TEST(Jacobian, DiagonalFamilyIsClassicalGisJacobian) {
  Rng rng(42);
  RealMatrix f(6, 3);
  for (Index x = 0; x < 6; ++x) {
    for (Index j = 0; j < 3; ++j) f(x, j) = rng.uniform() / 3.0;
  }
  std::vector<HermitianOperator> ops;
  for (Index j = 0; j < 3; ++j) ops.push_back(HermitianOperator::diagonal(f.col(j)));
  const ObservableFamily obs(std::move(ops));
  const RealVector lambda = oracle::random_vector(rng, 3);
  RealVector p = (f * lambda).array().exp();
  p /= p.sum();
  const RealVector mean = f.transpose() * p;
  const RealMatrix cov = f.transpose() * p.asDiagonal() * f - mean * mean.transpose();
  const RealMatrix expected =
      RealMatrix::Identity(3, 3) - mean.cwiseInverse().asDiagonal() * cov;
  EXPECT_LE((jacobian_qis(bundle_at(lambda, obs)) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(RealMatrix::Identity(4, 4)), 1.0, 1e-15);
  const RealMatrix d = RealVector{{0.3, -0.7}}.asDiagonal();
  EXPECT_NEAR(spectral_radius(d), 0.7, 1e-15);
  EXPECT_NEAR(spectral_radius(d, MatrixSymmetry::Symmetric), 0.7, 1e-15);
  const RealMatrix rot{{0.0, 2.0}, {-2.0, 0.0}};
  EXPECT_NEAR(spectral_radius(rot), 2.0, 1e-14);
}

TEST(SpectralRadius, SymmetricFormAgreesWithDirect) {
  Rng rng(43);
  for (auto kind : {FamilyKind::Ising, FamilyKind::Transversal1D, FamilyKind::Local1D}) {
    const auto obs = normalize_family(build_family(kind, 3, 5));
    const auto b = bundle_at(oracle::random_vector(rng, static_cast<Index>(obs.size())), obs);
    EXPECT_NEAR(spectral_radius_qis(b), spectral_radius(jacobian_qis(b)), 1e-10);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(jacobian_qis_symmetric(b));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-10);
    Eigen::SelfAdjointEigenSolver<RealMatrix> el(b.L);
    EXPECT_GT(el.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(EmpiricalRate, LinearMap) {
  SolverTrace trace;
  double x = 1.0;
  for (int t = 0; t < 20; ++t) {
    trace.records.push_back({t, RealVector{{x}}, RealVector{{-0.5 * x}}, x, x, 0});
    x *= 0.5;
  }
  trace.status = Status::Converged;
  EXPECT_DOUBLE_EQ(empirical_rate(trace, RealVector::Zero(1)), 0.5);
  trace.records.resize(12);
  EXPECT_THROW(empirical_rate(trace, RealVector::Zero(1)), InsufficientDataError);
}

TEST(EmpiricalRate, QisMatchesSpectralRadiusAndBeatsGd) {
  const auto inst = instance(FamilyKind::Ising, 3, 44);
  const auto& star = inst.ground_truth->lambda;
  SolverConfig c;
  c.tol = 1e-12;
  c.max_iters = 20000;
  c.record_wall_time = false;
  c.method = Method::QIS;
  const auto qis = run(inst, c);
  c.method = Method::GD;
  const auto gd = run(inst, c);
  ASSERT_EQ(qis.status, Status::Converged);
  ASSERT_EQ(gd.status, Status::Converged);
  const double radius = spectral_radius_qis(bundle_at(star, inst.observables));
  const double rate_qis = empirical_rate(qis, star);
  EXPECT_LE(std::abs(rate_qis - radius), 0.15 * radius);
  EXPECT_GE(empirical_rate(gd, star), rate_qis);
}

TEST(Bounds, CompletedFamilyAtZero) {
  for (auto kind : {FamilyKind::Ising, FamilyKind::Transversal1D, FamilyKind::Local1D}) {
    const auto obs = complete_family(normalize_family(build_family(kind, 3, 6)));
    const auto margins = verify_bounds(bundle_at(RealVector::Zero(static_cast<Index>(obs.size())), obs), obs);
    EXPECT_TRUE(margins.hypotheses_met);
    EXPECT_TRUE(margins.passes()) << to_string(kind);
    EXPECT_EQ(margins.rank_q, 1);
  }
}

TEST(Bounds, RandomFamiliesAndPoints) {
  Rng rng(45);
  const FamilyKind kinds[] = {FamilyKind::Ising, FamilyKind::Transversal1D, FamilyKind::Local1D};
  const BoundTolerances tol;
  int ordering_violations = 0;
  int column_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto kind = kinds[trial % 3];
    const int n = 2 + trial % 3;
    auto obs = normalize_family(build_family(kind, n, 1000 + trial));
    if (trial % 2 == 1) obs = complete_family(obs);
    const RealVector lambda =
        oracle::random_vector(rng, static_cast<Index>(obs.size()), 1.0 + 9.0 * rng.uniform());
    const auto margins = verify_bounds(bundle_at(lambda, obs), obs);
    ASSERT_TRUE(margins.hypotheses_met);
    EXPECT_EQ(margins.rank_q, 1);
    if (!margins.orderings_hold()) ++ordering_violations;
    if (margins.min_column_sum < -tol.column_sum * margins.z) ++column_violations;
  }
  EXPECT_EQ(ordering_violations, 0);
  EXPECT_EQ(column_violations, 0);
}

// The Hessian of Z can have negative entries even with every F_j PSD and
// sum_j F_j = I: the derivative of exp in a PSD direction need not be PSD.
// The ordering Lambda <= Delta still holds.
TEST(Bounds, LambdaEntriesCanBeNegative) {
  const auto obs = complete_family(normalize_family(build_family(FamilyKind::Ising, 2, 1021)));
  const RealVector lambda{{-6.6363, -5.4680, -6.0200, 6.6066}};
  const auto b = bundle_at(lambda, obs);
  const auto margins = verify_bounds(b, obs);
  ASSERT_TRUE(margins.hypotheses_met);
  EXPECT_LT(margins.min_lambda_entry / margins.z, -1e-4);
  EXPECT_FALSE(margins.passes());
  EXPECT_TRUE(margins.orderings_hold());

  // Second difference of Z along (e_0, e_2), independent of the bundle.
  const auto z = [&](double s0, double s2) {
    RealVector x = lambda;
    x[0] += s0;
    x[2] += s2;
    return std::exp(snapshot(x, obs).log_z);
  };
  const double h = 1e-4;
  const double fd = (z(h, h) - z(h, -h) - z(-h, h) + z(-h, -h)) / (4.0 * h * h);
  EXPECT_NEAR(b.Lambda(0, 2), fd, 1e-4);
  EXPECT_LT(fd, -0.05);
}

TEST(Bounds, HypothesesUnmetIsReported) {
  // -diag(1,0)/2 is not PSD.
  const ObservableFamily obs({HermitianOperator::diagonal(RealVector{{-0.5, 0.0}}),
                              HermitianOperator::diagonal(RealVector{{0.25, 0.25}})});
  const auto margins = verify_bounds(bundle_at(RealVector::Zero(2), obs), obs);
  EXPECT_FALSE(margins.hypotheses_met);
  EXPECT_FALSE(margins.passes());
  const ObservableFamily heavy({HermitianOperator::identity(2) * 0.75,
                                HermitianOperator::identity(2) * 0.75});
  EXPECT_FALSE(verify_bounds(bundle_at(RealVector::Zero(2), heavy), heavy).hypotheses_met);
}

TEST(Qbp, ZeroHamiltonianIsIdentityMap) {
  Rng rng(46);
  const auto v = oracle::random_hermitian(rng, 4);
  const auto eig = eig_herm(HermitianOperator::zero(4));
  for (auto variant : {QbpVariant::Anticommutator, QbpVariant::Sandwich}) {
    EXPECT_LE((qbp_channel(eig, v, 1.3, variant).matrix() - v.matrix()).norm(), 1e-15);
  }
}

TEST(Qbp, TracePreserving) {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 2 + trial % 7;
    const auto eig = eig_herm(oracle::random_hermitian(rng, d, 2.0));
    const auto v = oracle::random_hermitian(rng, d);
    for (auto variant : {QbpVariant::Anticommutator, QbpVariant::Sandwich}) {
      EXPECT_NEAR(qbp_channel(eig, v, 1.5, variant).trace(), v.trace(), 1e-10);
    }
  }
}

TEST(Qbp, AnticommutatorChannelKeepsPositivity) {
  Rng rng(48);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 15;
    const auto eig = eig_herm(oracle::random_hermitian(rng, d, 3.0));
    const auto v = oracle::random_psd(rng, d, 1 + trial % 3);
    EXPECT_GE(min_eigenvalue(qbp_channel(eig, v, 2.0, QbpVariant::Anticommutator)), -1e-12);
  }
}

// sinh(x)/x grows away from 0, so it is not a positive-definite kernel and
// the sandwich map sends some PSD inputs outside the PSD cone.
TEST(Qbp, SandwichChannelIsNotPositive) {
  const double omega = 2.0;
  const auto eig = eig_herm(HermitianOperator::diagonal(RealVector{{0.0, omega}}));
  ComplexMatrix ones = ComplexMatrix::Ones(2, 2);
  const HermitianOperator v(ones);
  const auto psi = qbp_channel(eig, v, 1.0, QbpVariant::Sandwich);
  const double s = std::sinh(0.5 * omega) / (0.5 * omega);
  EXPECT_NEAR(psi.matrix()(0, 1).real(), s, 1e-14);
  EXPECT_NEAR(min_eigenvalue(psi), 1.0 - s, 1e-14);
  EXPECT_LT(min_eigenvalue(psi), 0.0);
}

TEST(Qbp, CommutingCase) {
  Rng rng(49);
  const RealVector hd = oracle::random_vector(rng, 5);
  const RealVector vd = oracle::random_vector(rng, 5);
  const auto h = HermitianOperator::diagonal(hd);
  const auto v = HermitianOperator::diagonal(vd);
  const double beta = 0.7;
  const auto r = verify_qbp_identities(h, v, beta);
  EXPECT_LE(r.anticommutator, 1e-9);
  EXPECT_LE(r.sandwich, 1e-9);
  EXPECT_LE(r.forms_agreement, 1e-12);
  const auto eig = eig_herm(h);
  for (auto variant : {QbpVariant::Anticommutator, QbpVariant::Sandwich}) {
    EXPECT_LE((qbp_channel(eig, v, beta, variant).matrix() - v.matrix()).norm(), 1e-14);
  }
}

TEST(Qbp, DerivativeFormsMatchFiniteDifferences) {
  Rng rng(50);
  for (double beta : {0.1, 1.0, 3.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto h = oracle::random_hermitian(rng, 8);
      const auto v = oracle::random_hermitian(rng, 8);
      const auto r = verify_qbp_identities(h, v, beta);
      EXPECT_TRUE(r.passes()) << "beta=" << beta << " anti=" << r.anticommutator
                              << " sandwich=" << r.sandwich;
    }
  }
}

TEST(Qbp, SandwichMatchesDuhamelQuadrature) {
  Rng rng(51);
  const auto h = oracle::random_hermitian(rng, 6);
  const auto v = oracle::random_hermitian(rng, 6);
  const double beta = 1.7;
  const auto eig = eig_herm(h);
  const auto half = mat_exp(h, 0.5 * beta).matrix();
  const ComplexMatrix closed =
      beta * half * qbp_channel(eig, v, beta, QbpVariant::Sandwich).matrix() * half;
  const ComplexMatrix ref = oracle::duhamel_derivative(h.matrix(), v.matrix(), beta);
  EXPECT_LE((closed - ref).norm() / ref.norm(), 1e-12);
}

TEST(Qbp, KernelOverflow) {
  const auto eig = eig_herm(HermitianOperator::diagonal(RealVector{{0.0, 2000.0}}));
  EXPECT_THROW(qbp_channel(eig, HermitianOperator::identity(2), 1.0, QbpVariant::Sandwich),
               OverflowError);
}

TEST(Diagnostics, ReportIsConsistent) {
  const auto inst = instance(FamilyKind::Local1D, 3, 100);
  const auto snap = snapshot(inst.ground_truth->lambda, inst.observables);
  const double eta = static_cast<double>(inst.alpha.size());
  const auto r = build_diagnostics(snap, inst.observables, eta);
  EXPECT_NEAR(r.spectral_radius_qis, r.spectral_radius_qis_direct, 1e-10);
  EXPECT_GE(r.spectral_radius_gd, r.spectral_radius_qis);
  EXPECT_GT(r.min_eig_l, 0.0);
  EXPECT_GE(r.qis_eig_min, -1e-10);
  EXPECT_LE(r.qis_eig_max, 1.0 + 1e-10);
  EXPECT_TRUE(r.bounds.passes());
  EXPECT_TRUE(r.qbp.passes());
  EXPECT_LE(r.qbp_trace_error, 1e-10);
}

}  // namespace
}  // namespace maxent
