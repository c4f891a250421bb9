#include "maxent/gibbs.hpp"

#include <cmath>
#include <complex>

#include "maxent/errors.hpp"

namespace maxent {
namespace {

constexpr double kSupportTolerance = 1e-12;

}  // namespace

HermitianOperator linear_combination(const RealVector& lambda,
                                     const ObservableFamily& obs) {
  return obs.combine(lambda);
}

GibbsSnapshot snapshot(const RealVector& lambda, const ObservableFamily& obs,
                       const std::optional<HermitianOperator>& sigma0) {
  GibbsSnapshot snap;
  snap.lambda = lambda;
  snap.hamiltonian = linear_combination(lambda, obs);
  if (sigma0) {
    if (sigma0->dim() != obs.dim()) {
      throw DimensionError("sigma0 dimension does not match the observables");
    }
    snap.hamiltonian += mat_log(*sigma0);
  }
  snap.eig = eig_herm(snap.hamiltonian);

  const RealVector& w = snap.eig.eigenvalues;
  const double top = w.maxCoeff();
  const RealVector p = (w.array() - top).exp();
  const double z_shifted = p.sum();
  snap.log_z = top + std::log(z_shifted);
  snap.state = hermitian_part(snap.eig.basis * (p / z_shifted).asDiagonal() *
                              snap.eig.basis.adjoint());

  snap.moments = obs.expectations(snap.state);
  return snap;
}

GibbsMoments gibbs_moments(const RealVector& lambda,
                           const ObservableFamily& obs) {
  const EigenDecomposition eig = eig_herm(linear_combination(lambda, obs));
  const RealVector& w = eig.eigenvalues;
  const double top = w.maxCoeff();
  const RealVector p = (w.array() - top).exp();
  const double z_shifted = p.sum();
  return {lambda, top + std::log(z_shifted),
          obs.expectations(eig, p / z_shifted)};
}

double dual_objective(const GibbsMoments& point, const RealVector& alpha) {
  if (alpha.size() != point.lambda.size()) {
    throw DimensionError("alpha and lambda sizes differ");
  }
  return point.log_z - point.lambda.dot(alpha);
}

RealVector dual_gradient(const GibbsMoments& point, const RealVector& alpha) {
  if (alpha.size() != point.moments.size()) {
    throw DimensionError("alpha and moment sizes differ");
  }
  return point.moments - alpha;
}

HessianBundle hessian(const GibbsSnapshot& snap, const ObservableFamily& obs) {
  const Index m = static_cast<Index>(obs.size());
  const Index d = snap.eig.dim();
  const RealVector& w = snap.eig.eigenvalues;
  const double top = w.maxCoeff();

  // Work with exp(H - top) throughout; Z and Lambda pick up e^{top} at the end.
  const RealMatrix kernel =
      exp_divided_difference_kernel((w.array() - top).matrix(), 1.0);
  const double z_shifted = (w.array() - top).exp().sum();
  const RealVector& mom = snap.moments;

  // Column j holds vec(U^dagger F_j U); column m + j the centred version.
  ComplexMatrix rotated(d * d, 2 * m);
  for (Index j = 0; j < m; ++j) {
    ComplexMatrix ft = snap.eig.to_eigenbasis(obs[static_cast<std::size_t>(j)].matrix());
    rotated.col(j) = Eigen::Map<const Eigen::VectorXcd>(ft.data(), d * d);
    ft.diagonal().array() -= mom[j];
    rotated.col(m + j) = Eigen::Map<const Eigen::VectorXcd>(ft.data(), d * d);
  }
  const Eigen::VectorXd kvec = Eigen::Map<const Eigen::VectorXd>(kernel.data(), d * d);
  const ComplexMatrix weighted = kvec.asDiagonal() * rotated;
  const RealMatrix gram = (rotated.adjoint() * weighted).real();

  HessianBundle out;
  out.log_z = snap.log_z;
  out.Z = std::exp(snap.log_z);
  const double scale = std::exp(top);
  out.Lambda = scale * gram.topLeftCorner(m, m);
  out.L = gram.bottomRightCorner(m, m) / z_shifted;
  out.Lambda = 0.5 * (out.Lambda + out.Lambda.transpose()).eval();
  out.L = 0.5 * (out.L + out.L.transpose()).eval();
  out.P = mom.asDiagonal();
  out.Q = mom * mom.transpose();
  out.Delta = (out.Z * mom).asDiagonal();
  return out;
}

double kl_divergence(const HermitianOperator& x, const HermitianOperator& y) {
  if (x.dim() != y.dim()) throw DimensionError("kl_divergence: dimension mismatch");
  const EigenDecomposition ex = eig_herm(x);
  const EigenDecomposition ey = eig_herm(y);
  const double xscale = std::max(1.0, ex.eigenvalues.cwiseAbs().maxCoeff());
  const double yscale = std::max(1.0, ey.eigenvalues.cwiseAbs().maxCoeff());

  double x_log_x = 0.0;
  for (Index a = 0; a < ex.dim(); ++a) {
    const double v = ex.eigenvalues[a];
    if (v < -kSupportTolerance * xscale) {
      throw DomainError("kl_divergence: X is not positive semidefinite", v);
    }
    if (v > 0.0) x_log_x += v * std::log(v);
  }

  // tr(X ln Y) = sum_b ln(mu_b) <v_b|X|v_b>, restricted to the support of Y.
  const ComplexMatrix x_in_y = ey.to_eigenbasis(x.matrix());
  double x_log_y = 0.0;
  for (Index b = 0; b < ey.dim(); ++b) {
    const double mu = ey.eigenvalues[b];
    const double weight = x_in_y(b, b).real();
    if (mu <= kSupportTolerance * yscale) {
      if (std::abs(weight) > kSupportTolerance * xscale) {
        throw DomainError("kl_divergence: X is not supported on supp(Y)", mu);
      }
      continue;
    }
    x_log_y += std::log(mu) * weight;
  }
  return x_log_x - x_log_y - x.trace() + y.trace();
}

}  // namespace maxent
