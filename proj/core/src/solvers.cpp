#include "maxent/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "maxent/errors.hpp"

namespace maxent {
namespace {

constexpr double kDivergenceFactor = 10.0;

RealMatrix stack_columns(const std::deque<RealVector>& cols, Index rows) {
  RealMatrix out(rows, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Index>(i)) = cols[i];
  }
  return out;
}

RealMatrix pseudo_inverse(const RealMatrix& a, double rcond) {
  Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rcond * s.maxCoeff() : 0.0;
  RealVector inv = RealVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff) inv[i] = 1.0 / s[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Accelerator memory that survives between iterations of run().
struct AcceleratorState {
  std::deque<RealVector> dx;
  std::deque<RealVector> dr;
  std::deque<CurvaturePair> pairs;
  std::optional<RealVector> x_prev;
  std::optional<RealVector> r_prev;  // QIS residual or dual gradient

  void reset() {
    dx.clear();
    dr.clear();
    pairs.clear();
    x_prev.reset();
    r_prev.reset();
  }
};

RealVector anderson_qis_step(const GibbsMoments& snap,
                             const ProblemInstance& inst,
                             const SolverConfig& cfg, AcceleratorState& acc) {
  const RealVector& x = snap.lambda;
  const RealVector r = qis_step(snap, inst.alpha);
  if (acc.x_prev) {
    acc.dx.push_back(x - *acc.x_prev);
    acc.dr.push_back(r - *acc.r_prev);
    if (static_cast<int>(acc.dx.size()) > cfg.history) {
      acc.dx.pop_front();
      acc.dr.pop_front();
    }
  }
  const double beta = (cfg.use_bb && !acc.dx.empty())
                          ? bb_mixing(acc.dx.back(), acc.dr.back())
                          : 1.0;
  const RealVector next =
      anderson_update(stack_columns(acc.dx, x.size()),
                      stack_columns(acc.dr, x.size()), x, r, beta, cfg.rcond);
  acc.x_prev = x;
  acc.r_prev = r;
  return next - x;
}

RealVector lbfgs_gd_step(const GibbsMoments& snap, const ProblemInstance& inst,
                         const SolverConfig& cfg, double eta,
                         AcceleratorState& acc) {
  const RealVector& x = snap.lambda;
  const RealVector g = dual_gradient(snap, inst.alpha);
  if (acc.x_prev) {
    CurvaturePair pair{x - *acc.x_prev, g - *acc.r_prev};
    if (has_positive_curvature(pair)) {
      acc.pairs.push_back(std::move(pair));
      if (static_cast<int>(acc.pairs.size()) > cfg.history) {
        acc.pairs.pop_front();
      }
    }
  }
  double h0 = eta;
  if (cfg.use_bb && !acc.pairs.empty()) {
    const auto& last = acc.pairs.back();
    h0 = last.y.dot(last.s) / last.y.squaredNorm();
  }
  const std::vector<CurvaturePair> history(acc.pairs.begin(), acc.pairs.end());
  acc.x_prev = x;
  acc.r_prev = g;
  return lbfgs_step(g, history, h0);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::QIS: return "QIS";
    case Method::GD: return "GD";
    case Method::AMQIS: return "AM-QIS";
    case Method::LBFGSGD: return "LBFGS-GD";
  }
  return "QIS";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::QIS, Method::GD, Method::AMQIS, Method::LBFGSGD}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown solver method '" + std::string(name) + "'");
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Converged: return "Converged";
    case Status::MaxIters: return "MaxIters";
    case Status::NumericalFailure: return "NumericalFailure";
  }
  return "MaxIters";
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(rcond >= 0.0)) throw ConfigError("rcond must be non-negative");
  const bool accelerated = method == Method::AMQIS || method == Method::LBFGSGD;
  if (accelerated && history < 1) {
    throw ConfigError("accelerated methods need history >= 1");
  }
  if (history < 0) throw ConfigError("history must be non-negative");
}

std::optional<int> SolverTrace::steps_to(double precision) const {
  for (const auto& rec : records) {
    if (rec.gap <= precision) return rec.iteration;
  }
  return std::nullopt;
}

RealVector qis_step(const GibbsMoments& snap, const RealVector& alpha) {
  if (alpha.size() != snap.moments.size()) {
    throw DimensionError("alpha and moment sizes differ");
  }
  RealVector delta(alpha.size());
  for (Index j = 0; j < alpha.size(); ++j) {
    if (!(snap.moments[j] > 0.0)) {
      throw NumericalFailure("QIS step: non-positive moment",
                             static_cast<std::size_t>(j));
    }
    if (!(alpha[j] > 0.0)) {
      throw NumericalFailure("QIS step: non-positive target",
                             static_cast<std::size_t>(j));
    }
    delta[j] = std::log(alpha[j]) - std::log(snap.moments[j]);
  }
  return delta;
}

RealVector gd_step(const GibbsMoments& snap, const RealVector& alpha,
                   double eta) {
  if (!(eta > 0.0)) throw ConfigError("GD step needs eta > 0");
  return -eta * dual_gradient(snap, alpha);
}

RealVector anderson_update(const RealMatrix& dx, const RealMatrix& dr,
                           const RealVector& x, const RealVector& r,
                           double beta, double rcond) {
  if (dx.cols() != dr.cols()) {
    throw DimensionError("Anderson history buffers differ in length");
  }
  if (dx.cols() == 0) return x + beta * r;
  const RealVector gamma =
      pseudo_inverse(dr.transpose() * dr, rcond) * (dr.transpose() * r);
  return x + beta * r - (dx + beta * dr) * gamma;
}

double bb_mixing(const RealVector& dx_prev, const RealVector& dr_prev) {
  const double denom = dr_prev.squaredNorm();
  if (!(std::sqrt(denom) > 1e-300)) return 1.0;
  return -dr_prev.dot(dx_prev) / denom;
}

bool has_positive_curvature(const CurvaturePair& pair) {
  return pair.y.dot(pair.s) > 1e-12 * pair.y.norm() * pair.s.norm();
}

RealVector lbfgs_step(const RealVector& gradient,
                      std::span<const CurvaturePair> history, double h0_scale) {
  std::vector<const CurvaturePair*> kept;
  for (const auto& p : history) {
    if (has_positive_curvature(p)) kept.push_back(&p);
  }
  RealVector q = gradient;
  std::vector<double> a(kept.size());
  std::vector<double> rho(kept.size());
  for (std::size_t k = kept.size(); k-- > 0;) {
    rho[k] = 1.0 / kept[k]->y.dot(kept[k]->s);
    a[k] = rho[k] * kept[k]->s.dot(q);
    q -= a[k] * kept[k]->y;
  }
  RealVector r = h0_scale * q;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const double b = rho[k] * kept[k]->y.dot(r);
    r += (a[k] - b) * kept[k]->s;
  }
  return -r;
}

double dual_gap(const GibbsMoments& snap, const ProblemInstance& inst) {
  if (inst.ground_truth) {
    return std::abs(dual_objective(snap, inst.alpha) -
                    inst.ground_truth->dual_optimum);
  }
  return (snap.moments - inst.alpha).cwiseAbs().maxCoeff();
}

SolverTrace run(const ProblemInstance& inst, const SolverConfig& cfg) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const Index m = static_cast<Index>(inst.observables.size());
  const double eta = cfg.eta.value_or(static_cast<double>(m));

  SolverTrace trace;
  trace.method = cfg.method;
  RealVector lambda = RealVector::Zero(m);
  AcceleratorState acc;
  double prev_gap = std::numeric_limits<double>::infinity();

  for (int t = 0;; ++t) {
    IterationRecord rec;
    rec.iteration = t;
    rec.lambda = lambda;
    auto finish = [&](Status status, std::string why = {}) {
      if (cfg.record_wall_time) {
        rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                          clock::now() - start)
                          .count();
      }
      trace.records.push_back(std::move(rec));
      trace.status = status;
      trace.failure = std::move(why);
    };

    GibbsMoments snap;
    try {
      snap = gibbs_moments(lambda, inst.observables);
    } catch (const Error& e) {
      rec.gap = std::numeric_limits<double>::quiet_NaN();
      rec.residual = std::numeric_limits<double>::quiet_NaN();
      finish(Status::NumericalFailure, e.what());
      break;
    }
    rec.gap = dual_gap(snap, inst);
    rec.residual = (snap.moments - inst.alpha).cwiseAbs().maxCoeff();
    if (!std::isfinite(rec.gap)) {
      finish(Status::NumericalFailure, "non-finite dual gap");
      break;
    }
    if (rec.gap <= cfg.tol) {
      finish(Status::Converged);
      break;
    }
    if (t >= cfg.max_iters) {
      finish(Status::MaxIters);
      break;
    }

    const bool diverging = rec.gap > kDivergenceFactor * prev_gap;
    if (diverging) acc.reset();
    RealVector delta;
    try {
      switch (cfg.method) {
        case Method::QIS:
          delta = qis_step(snap, inst.alpha);
          break;
        case Method::GD:
          delta = gd_step(snap, inst.alpha, eta);
          break;
        case Method::AMQIS:
          delta = anderson_qis_step(snap, inst, cfg, acc);
          break;
        case Method::LBFGSGD:
          delta = lbfgs_gd_step(snap, inst, cfg, eta, acc);
          break;
      }
    } catch (const NumericalFailure& e) {
      finish(Status::NumericalFailure, e.what());
      break;
    }
    if (!delta.allFinite()) {
      finish(Status::NumericalFailure, "non-finite update");
      break;
    }
    rec.delta = delta;
    if (cfg.record_wall_time) {
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        clock::now() - start)
                        .count();
    }
    trace.records.push_back(std::move(rec));
    lambda += delta;
    prev_gap = trace.records.back().gap;
  }
  return trace;
}

}  // namespace maxent
