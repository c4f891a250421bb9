#pragma once

#include <Eigen/Dense>

#include <functional>

namespace maxent {

using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative tolerance for the Hermiticity check, scaled by max(1, max|a_ij|).
inline constexpr double kHermitianTolerance = 1e-12;

/// Dense complex Hermitian matrix.
///
/// Construction checks A = A^dagger within tolerance and then stores the
/// exactly Hermitian part (A + A^dagger)/2, so every stored value is
/// Hermitian to the last bit.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(ComplexMatrix entries,
                             double tolerance = kHermitianTolerance);

  static HermitianOperator identity(Index dim);
  static HermitianOperator zero(Index dim);
  static HermitianOperator diagonal(const RealVector& values);

  Index dim() const noexcept { return entries_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return entries_; }
  double trace() const { return entries_.diagonal().real().sum(); }
  double frobenius_norm() const { return entries_.norm(); }
  /// True when every entry has zero imaginary part.
  bool is_real() const;

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator-=(const HermitianOperator& other);
  HermitianOperator& operator*=(double scale);

  friend HermitianOperator operator+(HermitianOperator a,
                                     const HermitianOperator& b) {
    return a += b;
  }
  friend HermitianOperator operator-(HermitianOperator a,
                                     const HermitianOperator& b) {
    return a -= b;
  }
  friend HermitianOperator operator*(HermitianOperator a, double s) {
    return a *= s;
  }
  friend HermitianOperator operator*(double s, HermitianOperator a) {
    return a *= s;
  }

 private:
  struct Trusted {};
  HermitianOperator(ComplexMatrix entries, Trusted) noexcept
      : entries_(std::move(entries)) {}
  friend HermitianOperator hermitian_part(const ComplexMatrix&);

  ComplexMatrix entries_;
};

/// (A + A^dagger)/2 without any tolerance check.
HermitianOperator hermitian_part(const ComplexMatrix& a);

/// Eigenvalues ascending; columns of `basis` are the matching eigenvectors.
struct EigenDecomposition {
  RealVector eigenvalues;
  ComplexMatrix basis;

  Index dim() const noexcept { return eigenvalues.size(); }
  ComplexMatrix reconstruct() const;
  /// U^dagger A U.
  ComplexMatrix to_eigenbasis(const ComplexMatrix& a) const;
  /// U A U^dagger.
  ComplexMatrix from_eigenbasis(const ComplexMatrix& a) const;
};

EigenDecomposition eig_herm(const HermitianOperator& a);

/// Spectral functional calculus: sum_k f(lambda_k) |u_k><u_k|.
/// Throws DomainError when f is not finite at some eigenvalue.
HermitianOperator mat_fn(const EigenDecomposition& eig,
                         const std::function<double(double)>& f);
HermitianOperator mat_fn(const HermitianOperator& a,
                         const std::function<double(double)>& f);

/// exp(scale * A).
HermitianOperator mat_exp(const HermitianOperator& a, double scale = 1.0);
/// Principal logarithm; A must be positive definite.
HermitianOperator mat_log(const HermitianOperator& a);

/// Hilbert-Schmidt inner product tr(A^dagger B).
double hs_inner(const HermitianOperator& a, const HermitianOperator& b);

double min_eigenvalue(const HermitianOperator& a);
double max_eigenvalue(const HermitianOperator& a);
double spectral_norm(const HermitianOperator& a);

/// Loewner matrix of t -> exp(beta t) at the given eigenvalues:
///   K_ab = (e^{beta l_a} - e^{beta l_b}) / (l_a - l_b),  K_aa = beta e^{beta l_a}.
/// The Frechet derivative of exp(beta H) in direction V is U (K o V~) U^dagger
/// with V~ = U^dagger V U. Throws OverflowError when |beta l| > 700.
RealMatrix exp_divided_difference_kernel(const RealVector& eigenvalues,
                                         double beta);

}  // namespace maxent
