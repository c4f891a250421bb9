#pragma once

#include <optional>

#include "maxent/hermitian.hpp"
#include "maxent/model.hpp"

namespace maxent {

/// ln Z and the moments at one parameter point: all the iterative solvers
/// read from the Gibbs state.
struct GibbsMoments {
  RealVector lambda;
  double log_z = 0.0;   // ln tr exp(hamiltonian)
  RealVector moments;   // <F_j, state>
};

/// Everything evaluated at one parameter point, off a single eigendecomposition.
struct GibbsSnapshot : GibbsMoments {
  HermitianOperator hamiltonian;  // [ln sigma0 +] lambda . F
  EigenDecomposition eig;
  HermitianOperator state;        // exp(hamiltonian) / Z
};

/// sum_j lambda_j F_j.
HermitianOperator linear_combination(const RealVector& lambda,
                                     const ObservableFamily& obs);

/// Gibbs snapshot at lambda. With the default reference state sigma0 = I/d the
/// constant ln sigma0 is dropped, so log_z = ln tr exp(lambda . F). A supplied
/// sigma0 must be positive definite (DomainError otherwise).
GibbsSnapshot snapshot(const RealVector& lambda, const ObservableFamily& obs,
                       const std::optional<HermitianOperator>& sigma0 = {});

/// Same ln Z and moments as snapshot(lambda, obs), without the dense state.
GibbsMoments gibbs_moments(const RealVector& lambda, const ObservableFamily& obs);

/// ln Z(lambda) - lambda . alpha.
double dual_objective(const GibbsMoments& point, const RealVector& alpha);

/// <F_j, xi> - alpha_j.
RealVector dual_gradient(const GibbsMoments& point, const RealVector& alpha);

/// Second-order data of the partition function at a snapshot.
///   Lambda = Hessian of Z, Delta = diag(dZ/dlambda_j), P = diag(moments),
///   Q = moments moments^T and L = Hessian of ln Z.
/// L is evaluated with centred observables, a separate algebraic route from
/// Lambda, so Lambda = Z (L + Q) is a meaningful consistency check.
struct HessianBundle {
  RealMatrix L;
  RealMatrix Lambda;
  RealMatrix Delta;
  RealMatrix P;
  RealMatrix Q;
  double Z = 0.0;
  double log_z = 0.0;
};

HessianBundle hessian(const GibbsSnapshot& snap, const ObservableFamily& obs);

/// tr(X ln X - X ln Y - X + Y) for X >= 0 and Y > 0 on the support of X.
/// Throws DomainError on a support violation.
double kl_divergence(const HermitianOperator& x, const HermitianOperator& y);

}  // namespace maxent
