#pragma once

#include <optional>

#include "maxent/gibbs.hpp"
#include "maxent/model.hpp"
#include "maxent/solvers.hpp"

namespace maxent {

/// I - P^{-1} L. Throws SingularityError when some moment is not positive.
RealMatrix jacobian_qis(const HessianBundle& bundle);

/// I - eta L.
RealMatrix jacobian_gd(const HessianBundle& bundle, double eta);

/// I - P^{-1/2} L P^{-1/2}: symmetric and similar to the QIS Jacobian.
RealMatrix jacobian_qis_symmetric(const HessianBundle& bundle);

enum class MatrixSymmetry { General, Symmetric };

/// Largest eigenvalue modulus.
double spectral_radius(const RealMatrix& j,
                       MatrixSymmetry hint = MatrixSymmetry::General);

/// r(I - P^{-1} L) evaluated through the symmetric similar matrix.
double spectral_radius_qis(const HessianBundle& bundle);

/// Median of the last 10 ratios ||lambda_{t+1} - lambda*|| / ||lambda_t - lambda*||.
/// Throws InsufficientDataError for traces with fewer than 12 iterations.
double empirical_rate(const SolverTrace& trace, const RealVector& lambda_star);

/// Central finite-difference Jacobians of the two iteration maps at lambda.
RealMatrix fd_jacobian_qis(const ObservableFamily& obs, const RealVector& alpha,
                           const RealVector& lambda, double step = 1e-5);
RealMatrix fd_jacobian_gd(const ObservableFamily& obs, const RealVector& alpha,
                          const RealVector& lambda, double eta,
                          double step = 1e-5);

struct BoundTolerances {
  double p_minus_l = 1e-10;       // lambda_min(P - L) >= -tol
  double lambda_entry = 1e-12;    // min Lambda_jk >= -tol
  double column_sum = 1e-10;      // min column sum of Delta - Lambda >= -tol Z
  double identity = 1e-8;         // ||Lambda - Z(L+Q)||_F / Z <= tol
  double delta_minus_lambda = 1e-10;  // lambda_min(Delta - Lambda) >= -tol Z
};

struct BoundMargins {
  bool hypotheses_met = false;
  double min_eig_p_minus_l = 0.0;
  double min_lambda_entry = 0.0;
  double min_column_sum = 0.0;  // of Delta - Lambda, unscaled
  double min_eig_delta_minus_lambda = 0.0;  // unscaled
  double identity_residual = 0.0;
  int rank_q = 0;
  double z = 0.0;

  /// Every margin within tolerance. False when the hypotheses are unmet.
  bool passes(const BoundTolerances& tol = {}) const;
  /// Only the orderings L <= P and Lambda <= Delta (checked directly through
  /// their smallest eigenvalues) and the identity. Negative Lambda entries
  /// and negative column sums do not occur in the orderings themselves.
  bool orderings_hold(const BoundTolerances& tol = {}) const;
};

/// Margins of L <= P, Lambda <= Delta (its smallest eigenvalue, plus
/// entrywise positivity and column dominance of Lambda) and Lambda = Z(L + Q). When some F_j is not PSD or
/// sum_j F_j exceeds I the margins are still computed but hypotheses_met is
/// false.
BoundMargins verify_bounds(const HessianBundle& bundle,
                           const ObservableFamily& obs);

enum class QbpVariant { Anticommutator, Sandwich };

/// Phi_H(V) (kernel tanh(beta w/2)/(beta w/2)) or Psi_H(V)
/// (kernel sinh(beta w/2)/(beta w/2)), applied entrywise in H's eigenbasis.
HermitianOperator qbp_channel(const EigenDecomposition& eig,
                              const HermitianOperator& v, double beta,
                              QbpVariant variant);

struct QbpResiduals {
  double anticommutator = 0.0;  // relative Frobenius vs finite difference
  double sandwich = 0.0;
  double forms_agreement = 0.0;  // between the two closed forms

  bool passes(double fd_tol = 1e-6, double agreement_tol = 1e-9) const {
    return anticommutator <= fd_tol && sandwich <= fd_tol &&
           forms_agreement <= agreement_tol;
  }
};

/// d/ds exp(beta (H + sV)) at s = 0 by central differences, by
/// (beta/2){e^{beta H}, Phi(V)} and by beta e^{beta H/2} Psi(V) e^{beta H/2}.
QbpResiduals verify_qbp_identities(const HermitianOperator& h,
                                   const HermitianOperator& v, double beta,
                                   double step = 1e-5);

struct DiagnosticsReport {
  RealMatrix jacobian_qis;
  RealMatrix jacobian_gd;
  double spectral_radius_qis = 0.0;       // via the symmetric similar form
  double spectral_radius_qis_direct = 0.0;  // eigenvalues of I - P^{-1}L
  double spectral_radius_gd = 0.0;
  double min_eig_l = 0.0;
  double qis_eig_min = 0.0;  // spectrum of I - P^{-1/2} L P^{-1/2}
  double qis_eig_max = 0.0;
  BoundMargins bounds;
  QbpResiduals qbp;
  double qbp_min_eig_psi = 0.0;
  double qbp_trace_error = 0.0;
};

/// Closed-form part of the diagnostics at one point. The QBP checks use
/// H = lambda . F and V = F_0.
DiagnosticsReport build_diagnostics(const GibbsSnapshot& snap,
                                    const ObservableFamily& obs, double eta);

}  // namespace maxent
