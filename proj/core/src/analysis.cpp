#include "maxent/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "maxent/errors.hpp"

namespace maxent {
namespace {

constexpr double kSmallArgument = 1e-8;

// tanh(x)/x and sinh(x)/x with the removable singularity filled in.
double tanh_ratio(double x) {
  return std::abs(x) < kSmallArgument ? 1.0 : std::tanh(x) / x;
}

double sinh_ratio(double x) {
  return std::abs(x) < kSmallArgument ? 1.0 : std::sinh(x) / x;
}

double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& ref) {
  const double scale = ref.norm();
  return (a - ref).norm() / (scale > 0.0 ? scale : 1.0);
}

RealVector qis_map(const ObservableFamily& obs, const RealVector& alpha,
                   const RealVector& lambda) {
  return lambda + qis_step(snapshot(lambda, obs), alpha);
}

RealVector gd_map(const ObservableFamily& obs, const RealVector& alpha,
                  const RealVector& lambda, double eta) {
  return lambda + gd_step(snapshot(lambda, obs), alpha, eta);
}

template <typename Map>
RealMatrix central_jacobian(const RealVector& lambda, double step, Map&& map) {
  const Index m = lambda.size();
  RealMatrix j(m, m);
  for (Index k = 0; k < m; ++k) {
    RealVector plus = lambda;
    RealVector minus = lambda;
    plus[k] += step;
    minus[k] -= step;
    j.col(k) = (map(plus) - map(minus)) / (2.0 * step);
  }
  return j;
}

}  // namespace

RealMatrix jacobian_qis(const HessianBundle& bundle) {
  const RealVector p = bundle.P.diagonal();
  for (Index j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0)) {
      throw SingularityError("QIS Jacobian: moment " + std::to_string(j) +
                             " is not positive");
    }
  }
  const Index m = p.size();
  return RealMatrix::Identity(m, m) - p.cwiseInverse().asDiagonal() * bundle.L;
}

RealMatrix jacobian_gd(const HessianBundle& bundle, double eta) {
  const Index m = bundle.L.rows();
  return RealMatrix::Identity(m, m) - eta * bundle.L;
}

RealMatrix jacobian_qis_symmetric(const HessianBundle& bundle) {
  const RealVector p = bundle.P.diagonal();
  if (!(p.minCoeff() > 0.0)) {
    throw SingularityError("QIS Jacobian: a moment is not positive");
  }
  const RealVector s = p.cwiseSqrt().cwiseInverse();
  const Index m = p.size();
  RealMatrix j = RealMatrix::Identity(m, m) -
                 s.asDiagonal() * bundle.L * s.asDiagonal();
  return 0.5 * (j + j.transpose());
}

double spectral_radius(const RealMatrix& j, MatrixSymmetry hint) {
  if (j.size() == 0) return 0.0;
  if (hint == MatrixSymmetry::Symmetric) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(j, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<RealMatrix> es(j, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius_qis(const HessianBundle& bundle) {
  return spectral_radius(jacobian_qis_symmetric(bundle),
                         MatrixSymmetry::Symmetric);
}

double empirical_rate(const SolverTrace& trace, const RealVector& lambda_star) {
  constexpr int kWindow = 10;
  if (trace.iterations() < kWindow + 2) {
    throw InsufficientDataError("empirical rate needs at least 12 iterations, got " +
                                std::to_string(trace.iterations()));
  }
  std::vector<double> errors;
  errors.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    errors.push_back((rec.lambda - lambda_star).norm());
  }
  std::vector<double> ratios;
  for (std::size_t t = errors.size() - kWindow - 1; t + 1 < errors.size(); ++t) {
    if (errors[t] > 0.0) ratios.push_back(errors[t + 1] / errors[t]);
  }
  if (ratios.empty()) {
    throw InsufficientDataError("iterates coincide with lambda*");
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  return n % 2 == 1 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
}

RealMatrix fd_jacobian_qis(const ObservableFamily& obs, const RealVector& alpha,
                           const RealVector& lambda, double step) {
  return central_jacobian(lambda, step, [&](const RealVector& x) {
    return qis_map(obs, alpha, x);
  });
}

RealMatrix fd_jacobian_gd(const ObservableFamily& obs, const RealVector& alpha,
                          const RealVector& lambda, double eta, double step) {
  return central_jacobian(lambda, step, [&](const RealVector& x) {
    return gd_map(obs, alpha, x, eta);
  });
}

bool BoundMargins::passes(const BoundTolerances& tol) const {
  return hypotheses_met && min_eig_p_minus_l >= -tol.p_minus_l &&
         min_lambda_entry >= -tol.lambda_entry &&
         min_column_sum >= -tol.column_sum * z &&
         identity_residual <= tol.identity && rank_q == 1;
}

bool BoundMargins::orderings_hold(const BoundTolerances& tol) const {
  return hypotheses_met && min_eig_p_minus_l >= -tol.p_minus_l &&
         min_eig_delta_minus_lambda >= -tol.delta_minus_lambda * z &&
         identity_residual <= tol.identity;
}

BoundMargins verify_bounds(const HessianBundle& bundle,
                           const ObservableFamily& obs) {
  BoundMargins out;
  out.z = bundle.Z;

  out.hypotheses_met = true;
  for (const auto& f : obs.operators()) {
    if (min_eigenvalue(f) < -1e-12) out.hypotheses_met = false;
  }
  if (obs.size() > 0 && max_eigenvalue(obs.sum()) > 1.0 + 1e-12) {
    out.hypotheses_met = false;
  }

  const RealMatrix p_minus_l = bundle.P - bundle.L;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(
      0.5 * (p_minus_l + p_minus_l.transpose()), Eigen::EigenvaluesOnly);
  out.min_eig_p_minus_l = es.eigenvalues().minCoeff();
  out.min_lambda_entry = bundle.Lambda.minCoeff();

  const RealVector column_sums =
      bundle.Delta.diagonal() - bundle.Lambda.colwise().sum().transpose();
  out.min_column_sum = column_sums.minCoeff();
  const RealMatrix d_minus_l = bundle.Delta - bundle.Lambda;
  Eigen::SelfAdjointEigenSolver<RealMatrix> ed(
      0.5 * (d_minus_l + d_minus_l.transpose()), Eigen::EigenvaluesOnly);
  out.min_eig_delta_minus_lambda = ed.eigenvalues().minCoeff();

  out.identity_residual =
      (bundle.Lambda - bundle.Z * (bundle.L + bundle.Q)).norm() / bundle.Z;

  Eigen::JacobiSVD<RealMatrix> svd(bundle.Q);
  const RealVector& s = svd.singularValues();
  const double cutoff = 1e-12 * std::max(1e-300, s.maxCoeff());
  out.rank_q = static_cast<int>((s.array() > cutoff).count());
  return out;
}

HermitianOperator qbp_channel(const EigenDecomposition& eig,
                              const HermitianOperator& v, double beta,
                              QbpVariant variant) {
  if (v.dim() != eig.dim()) {
    throw DimensionError("qbp_channel: dimension mismatch");
  }
  const Index d = eig.dim();
  ComplexMatrix vt = eig.to_eigenbasis(v.matrix());
  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < d; ++b) {
      const double x = 0.5 * beta * (eig.eigenvalues[a] - eig.eigenvalues[b]);
      const double k = variant == QbpVariant::Anticommutator ? tanh_ratio(x)
                                                             : sinh_ratio(x);
      if (!std::isfinite(k)) {
        throw OverflowError("qbp_channel: kernel overflow at beta*omega = " +
                            std::to_string(2.0 * x));
      }
      vt(a, b) *= k;
    }
  }
  return hermitian_part(eig.from_eigenbasis(vt));
}

QbpResiduals verify_qbp_identities(const HermitianOperator& h,
                                   const HermitianOperator& v, double beta,
                                   double step) {
  const EigenDecomposition eig = eig_herm(h);
  const ComplexMatrix e_full =
      mat_fn(eig, [beta](double x) { return std::exp(beta * x); }).matrix();
  const ComplexMatrix e_half =
      mat_fn(eig, [beta](double x) { return std::exp(0.5 * beta * x); }).matrix();

  const ComplexMatrix fd =
      (mat_exp(h + v * step, beta).matrix() -
       mat_exp(h - v * step, beta).matrix()) /
      (2.0 * step);

  const ComplexMatrix phi =
      qbp_channel(eig, v, beta, QbpVariant::Anticommutator).matrix();
  const ComplexMatrix psi =
      qbp_channel(eig, v, beta, QbpVariant::Sandwich).matrix();
  const ComplexMatrix anti = 0.5 * beta * (e_full * phi + phi * e_full);
  const ComplexMatrix sandwich = beta * e_half * psi * e_half;

  QbpResiduals out;
  out.anticommutator = relative_frobenius(anti, fd);
  out.sandwich = relative_frobenius(sandwich, fd);
  out.forms_agreement = relative_frobenius(anti, sandwich);
  return out;
}

DiagnosticsReport build_diagnostics(const GibbsSnapshot& snap,
                                    const ObservableFamily& obs, double eta) {
  DiagnosticsReport r;
  const HessianBundle bundle = hessian(snap, obs);
  r.jacobian_qis = jacobian_qis(bundle);
  r.jacobian_gd = jacobian_gd(bundle, eta);
  r.spectral_radius_qis = spectral_radius_qis(bundle);
  r.spectral_radius_qis_direct = spectral_radius(r.jacobian_qis);
  r.spectral_radius_gd =
      spectral_radius(r.jacobian_gd, MatrixSymmetry::Symmetric);

  Eigen::SelfAdjointEigenSolver<RealMatrix> es_l(bundle.L, Eigen::EigenvaluesOnly);
  r.min_eig_l = es_l.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es_j(jacobian_qis_symmetric(bundle),
                                                 Eigen::EigenvaluesOnly);
  r.qis_eig_min = es_j.eigenvalues().minCoeff();
  r.qis_eig_max = es_j.eigenvalues().maxCoeff();

  r.bounds = verify_bounds(bundle, obs);

  const HermitianOperator& v = obs[0];
  r.qbp = verify_qbp_identities(snap.hamiltonian, v, 1.0);
  const HermitianOperator psi =
      qbp_channel(snap.eig, v, 1.0, QbpVariant::Sandwich);
  r.qbp_min_eig_psi = min_eigenvalue(psi);
  r.qbp_trace_error = std::abs(psi.trace() - v.trace());
  return r;
}

}  // namespace maxent
