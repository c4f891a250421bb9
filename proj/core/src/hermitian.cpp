#include "maxent/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maxent/errors.hpp"

namespace maxent {
namespace {

constexpr double kExpArgumentLimit = 700.0;
constexpr double kDegenerateGap = 1e-12;

double max_asymmetry(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix entries, double tolerance) {
  if (entries.rows() != entries.cols()) {
    throw DimensionError("Hermitian operator must be square, got " +
                         std::to_string(entries.rows()) + "x" +
                         std::to_string(entries.cols()));
  }
  if (entries.size() > 0) {
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    const double asym = max_asymmetry(entries);
    if (!(asym <= tolerance * scale)) throw NotHermitianError(asym);
  }
  entries_ = (entries + entries.adjoint()) * 0.5;
}

HermitianOperator HermitianOperator::identity(Index dim) {
  return {ComplexMatrix::Identity(dim, dim), Trusted{}};
}

HermitianOperator HermitianOperator::zero(Index dim) {
  return {ComplexMatrix::Zero(dim, dim), Trusted{}};
}

HermitianOperator HermitianOperator::diagonal(const RealVector& values) {
  ComplexMatrix m = ComplexMatrix::Zero(values.size(), values.size());
  m.diagonal() = values.cast<std::complex<double>>();
  return {std::move(m), Trusted{}};
}

bool HermitianOperator::is_real() const {
  return entries_.size() == 0 || entries_.imag().cwiseAbs().maxCoeff() == 0.0;
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (o.dim() != dim()) throw DimensionError("operator dimension mismatch");
  entries_ += o.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  if (o.dim() != dim()) throw DimensionError("operator dimension mismatch");
  entries_ -= o.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double scale) {
  entries_ *= scale;
  return *this;
}

HermitianOperator hermitian_part(const ComplexMatrix& a) {
  return {(a + a.adjoint()) * 0.5, HermitianOperator::Trusted{}};
}

ComplexMatrix EigenDecomposition::reconstruct() const {
  return basis * eigenvalues.asDiagonal() * basis.adjoint();
}

ComplexMatrix EigenDecomposition::to_eigenbasis(const ComplexMatrix& a) const {
  return basis.adjoint() * a * basis;
}

ComplexMatrix EigenDecomposition::from_eigenbasis(
    const ComplexMatrix& a) const {
  return basis * a * basis.adjoint();
}

EigenDecomposition eig_herm(const HermitianOperator& a) {
  const Index d = a.dim();
  // Real symmetric input (e.g. Ising families) takes the cheaper real solver.
  if (a.is_real()) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a.matrix().real());
    if (solver.info() != Eigen::Success) {
      throw ConvergenceError(Eigen::SelfAdjointEigenSolver<RealMatrix>::m_maxIterations * d);
    }
    return {solver.eigenvalues(),
            solver.eigenvectors().cast<std::complex<double>>()};
  }
  if (d == 1) {
    return {RealVector::Constant(1, a.matrix()(0, 0).real()),
            ComplexMatrix::Identity(1, 1)};
  }
  // Householder reduction leaves a real tridiagonal matrix, so the QR sweeps
  // and their rotation accumulation run in real arithmetic.
  const Eigen::Tridiagonalization<ComplexMatrix> tri(a.matrix());
  const RealVector diag = tri.diagonal();
  const RealVector sub = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver;
  solver.computeFromTridiagonal(diag, sub);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError(Eigen::SelfAdjointEigenSolver<RealMatrix>::m_maxIterations * d);
  }
  const ComplexMatrix q = tri.matrixQ();
  const RealMatrix& z = solver.eigenvectors();
  ComplexMatrix basis(d, d);
  basis.real().noalias() = q.real() * z;
  basis.imag().noalias() = q.imag() * z;
  return {solver.eigenvalues(), std::move(basis)};
}

HermitianOperator mat_fn(const EigenDecomposition& eig,
                         const std::function<double(double)>& f) {
  RealVector values(eig.dim());
  for (Index k = 0; k < eig.dim(); ++k) {
    const double v = f(eig.eigenvalues[k]);
    if (!std::isfinite(v)) {
      throw DomainError("matrix function undefined at eigenvalue",
                        eig.eigenvalues[k]);
    }
    values[k] = v;
  }
  return hermitian_part(eig.basis * values.asDiagonal() * eig.basis.adjoint());
}

HermitianOperator mat_fn(const HermitianOperator& a,
                         const std::function<double(double)>& f) {
  return mat_fn(eig_herm(a), f);
}

HermitianOperator mat_exp(const HermitianOperator& a, double scale) {
  return mat_fn(a, [scale](double x) { return std::exp(scale * x); });
}

HermitianOperator mat_log(const HermitianOperator& a) {
  const EigenDecomposition eig = eig_herm(a);
  for (Index k = 0; k < eig.dim(); ++k) {
    if (!(eig.eigenvalues[k] > 0.0)) {
      throw DomainError("logarithm of a matrix that is not positive definite",
                        eig.eigenvalues[k]);
    }
  }
  return mat_fn(eig, [](double x) { return std::log(x); });
}

double hs_inner(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("hs_inner: dimension mismatch " +
                         std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
  const std::complex<double> value =
      a.matrix().conjugate().cwiseProduct(b.matrix()).sum();
  const double scale = std::max(1.0, a.frobenius_norm() * b.frobenius_norm());
  if (std::abs(value.imag()) > 1e-12 * scale) {
    throw DomainError("hs_inner: imaginary residue on Hermitian inputs",
                      value.imag());
  }
  return value.real();
}

double min_eigenvalue(const HermitianOperator& a) {
  return eig_herm(a).eigenvalues.minCoeff();
}

double max_eigenvalue(const HermitianOperator& a) {
  return eig_herm(a).eigenvalues.maxCoeff();
}

double spectral_norm(const HermitianOperator& a) {
  return eig_herm(a).eigenvalues.cwiseAbs().maxCoeff();
}

RealMatrix exp_divided_difference_kernel(const RealVector& eigenvalues,
                                         double beta) {
  const Index d = eigenvalues.size();
  for (Index a = 0; a < d; ++a) {
    if (!std::isfinite(eigenvalues[a])) {
      throw DomainError("divided-difference kernel: non-finite eigenvalue",
                        eigenvalues[a]);
    }
    if (std::abs(beta * eigenvalues[a]) > kExpArgumentLimit) {
      throw OverflowError("divided-difference kernel: |beta*lambda| = " +
                          std::to_string(std::abs(beta * eigenvalues[a])) +
                          " exceeds 700");
    }
  }
  RealMatrix k(d, d);
  for (Index a = 0; a < d; ++a) {
    for (Index b = a; b < d; ++b) {
      const double lo = std::min(eigenvalues[a], eigenvalues[b]);
      const double hi = std::max(eigenvalues[a], eigenvalues[b]);
      const double gap = hi - lo;
      double value;
      if (gap <= kDegenerateGap * std::max({1.0, std::abs(lo), std::abs(hi)})) {
        value = beta * std::exp(beta * 0.5 * (lo + hi));
      } else {
        // e^{beta lo} (e^{beta gap} - 1) / gap, free of cancellation.
        value = std::exp(beta * lo) * std::expm1(beta * gap) / gap;
      }
      k(a, b) = value;
      k(b, a) = value;
    }
  }
  return k;
}

}  // namespace maxent
