#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maxent/gibbs.hpp"
#include "maxent/model.hpp"

namespace maxent {

enum class Method { QIS, GD, AMQIS, LBFGSGD };

std::string_view to_string(Method method);
/// Accepts "QIS", "GD", "AM-QIS", "LBFGS-GD". Throws ConfigError otherwise.
Method parse_method(std::string_view name);

struct SolverConfig {
  Method method = Method::QIS;
  /// GD learning rate and the fixed L-BFGS initial inverse-Hessian scale;
  /// defaults to the number of observables.
  std::optional<double> eta;
  int history = 10;
  bool use_bb = false;
  int max_iters = 10000;
  double tol = 1e-12;
  double rcond = 1e-7;
  bool record_wall_time = true;

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

enum class Status { Converged, MaxIters, NumericalFailure };

std::string_view to_string(Status status);

struct IterationRecord {
  int iteration = 0;
  RealVector lambda;
  RealVector delta;  // empty on the terminal record
  double gap = 0.0;
  double residual = 0.0;  // max_j |<F_j, xi> - alpha_j|
  std::int64_t wall_ns = 0;  // elapsed since the run started; 0 if not recorded
};

struct SolverTrace {
  Method method = Method::QIS;
  std::vector<IterationRecord> records;  // iterates 0..iterations()
  Status status = Status::MaxIters;
  std::string failure;

  int iterations() const noexcept {
    return records.empty() ? 0 : static_cast<int>(records.size()) - 1;
  }
  const RealVector& final_lambda() const { return records.back().lambda; }
  double final_gap() const { return records.back().gap; }
  /// First iterate index whose gap is <= precision (lambda^(1) counts as 0).
  std::optional<int> steps_to(double precision) const;
};

/// ln alpha_j - ln <F_j, xi>. Throws NumericalFailure for a non-positive
/// moment or target.
RealVector qis_step(const GibbsMoments& snap, const RealVector& alpha);

/// -eta * (<F_j, xi> - alpha_j).
RealVector gd_step(const GibbsMoments& snap, const RealVector& alpha,
                   double eta);

/// x + G r with G = beta I - (X + beta R) pinv(R^T R) R^T. The pseudo-inverse
/// drops singular values below rcond * sigma_max. Empty history gives the
/// plain mixing step x + beta r.
RealVector anderson_update(const RealMatrix& dx, const RealMatrix& dr,
                           const RealVector& x, const RealVector& r,
                           double beta, double rcond);

/// argmin_beta ||dx + beta dr||; 1 when ||dr|| <= 1e-300.
double bb_mixing(const RealVector& dx_prev, const RealVector& dr_prev);

struct CurvaturePair {
  RealVector s;  // x_{t+1} - x_t
  RealVector y;  // grad_{t+1} - grad_t
};

/// Pairs with y^T s <= 1e-12 ||y|| ||s|| are skipped.
bool has_positive_curvature(const CurvaturePair& pair);

/// -H grad by the two-loop recursion over `history` (oldest first) with
/// H_0 = h0_scale * I.
RealVector lbfgs_step(const RealVector& gradient,
                      std::span<const CurvaturePair> history, double h0_scale);

/// Dual gap |dual(lambda) - dual_optimum| when ground truth is known,
/// otherwise the max moment residual.
double dual_gap(const GibbsMoments& snap, const ProblemInstance& inst);

/// Iterates from lambda = 0 until the gap falls to tol or max_iters updates
/// have been applied.
SolverTrace run(const ProblemInstance& instance, const SolverConfig& config);

}  // namespace maxent
