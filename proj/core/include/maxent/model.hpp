#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "maxent/hermitian.hpp"

namespace maxent {

enum class Axis { X, Y, Z };

/// One single-qubit Pauli factor; sites are 1-based, site 1 is the most
/// significant tensor factor.
struct PauliFactor {
  int site;
  Axis axis;
};

struct PauliTerm {
  int n_qubits = 1;
  std::vector<PauliFactor> factors;
  double coefficient = 1.0;
};

inline constexpr int kDefaultMaxQubits = 12;

/// Dense 2^n x 2^n realization. Throws CapacityError above `max_qubits`
/// and ConfigError for repeated or out-of-range sites.
HermitianOperator pauli_to_dense(const PauliTerm& term,
                                 int max_qubits = kDefaultMaxQubits);

std::string pauli_label(const PauliTerm& term);

enum class FamilyKind { Ising, Transversal1D, Local1D, Custom };

std::string_view to_string(FamilyKind kind);
/// Throws ConfigError for unknown names.
FamilyKind parse_family_kind(std::string_view name);

struct FamilyTerm {
  std::string label;
  std::vector<PauliTerm> paulis;  // the term is their sum
  HermitianOperator op;           // dense, before prescaling
  double weight = 0.0;
};

struct HamiltonianFamily {
  FamilyKind kind = FamilyKind::Custom;
  int n_qubits = 0;
  std::vector<FamilyTerm> terms;
  double prescale = 1.0;

  std::size_t size() const noexcept { return terms.size(); }
  Index dim() const { return Index{1} << n_qubits; }
  RealVector weights() const;
  /// H_j / prescale.
  HermitianOperator scaled_term(std::size_t j) const;
};

/// Benchmark families with i.i.d. standard normal weights in declaration
/// order: single-site terms first (site-major, axis x,y,z), then couplings
/// (site-major, first axis, second axis).
///   Ising:         n X_i fields and n-1 open-chain Z_i Z_{i+1} couplings.
///   Transversal1D: 12 translation-invariant sums over a periodic chain,
///                  prescale = n.
///   Local1D:       3n fields and 9n periodic couplings.
HamiltonianFamily build_family(FamilyKind kind, int n_qubits,
                               std::uint64_t seed,
                               int max_qubits = kDefaultMaxQubits);

/// Family with caller-supplied terms (weights are taken from the terms).
HamiltonianFamily custom_family(int n_qubits, std::vector<FamilyTerm> terms,
                                double prescale = 1.0);

/// Normalized observables F_1..F_k. Each operator also keeps a sparse copy;
/// lambda . F and the moments <F_j, rho> run over the stored nonzeros only.
class ObservableFamily {
 public:
  using SparseOperator = Eigen::SparseMatrix<std::complex<double>>;

  ObservableFamily() = default;
  explicit ObservableFamily(std::vector<HermitianOperator> operators,
                            bool complete = false);

  std::size_t size() const noexcept { return dense_.size(); }
  Index dim() const { return dense_.empty() ? 0 : dense_.front().dim(); }
  bool complete() const noexcept { return complete_; }

  const HermitianOperator& operator[](std::size_t j) const { return dense_[j]; }
  const std::vector<HermitianOperator>& operators() const noexcept {
    return dense_;
  }
  const SparseOperator& sparse(std::size_t j) const { return sparse_[j]; }

  HermitianOperator sum() const;
  /// sum_j lambda_j F_j.
  HermitianOperator combine(const RealVector& lambda) const;
  /// <F_j, rho> for every j.
  RealVector expectations(const HermitianOperator& rho) const;
  /// <F_j, U diag(weights) U^dagger> for every j. Only the entries of the
  /// state inside the joint sparsity pattern of the family are formed.
  RealVector expectations(const EigenDecomposition& eig,
                          const RealVector& weights) const;

 private:
  struct PatternEntry {
    std::size_t slot;             // index into pattern_
    std::complex<double> factor;  // conj(F_ab), doubled off the diagonal
  };

  std::vector<HermitianOperator> dense_;
  std::vector<SparseOperator> sparse_;
  // Upper-triangle positions (a <= b) touched by any F_j.
  std::vector<std::pair<Index, Index>> pattern_;
  std::vector<std::vector<PatternEntry>> entries_;
  bool complete_ = false;
};

/// F_j = (I + H_j / prescale) / (2m). Throws NormalizationError when some
/// ||H_j / prescale|| exceeds 1 + 1e-9.
ObservableFamily normalize_family(const HamiltonianFamily& family);

/// Appends I - sum_j F_j.
ObservableFamily complete_family(const ObservableFamily& obs);

struct GroundTruth {
  RealVector mu;      // physical weights
  RealVector lambda;  // matching dual parameters over the F family
  double dual_optimum = 0.0;
};

struct ProblemInstance {
  std::string label;
  ObservableFamily observables;
  RealVector alpha;
  double beta = 1.0;
  std::size_t base_terms = 0;  // m, before completion
  std::optional<GroundTruth> ground_truth;
};

/// Synthetic instance: targets alpha_j = <F_j, exp(-beta H(mu*))/Z> with
/// H(mu*) = sum_j mu*_j H_j / prescale. mu* is the family weight vector, or a
/// fresh standard-normal draw when `weight_seed` is given.
ProblemInstance make_instance(const HamiltonianFamily& family,
                              std::optional<std::uint64_t> weight_seed,
                              double beta, bool complete = false);

/// Inverse temperature after dividing the whole Hamiltonian by the qubit
/// count. The family prescale already counts toward that division, so this is
/// beta * prescale / n.
double qubit_normalized_beta(const HamiltonianFamily& family, double beta);

/// lambda_j = -2 m beta mu_j (and 0 for the completing term).
RealVector lambda_from_mu(const RealVector& mu, double beta, bool complete);
/// mu_j = -(lambda_j - lambda_{m+1}) / (2 m beta); lambda_{m+1} := 0 when the
/// family is not completed.
RealVector mu_from_lambda(const RealVector& lambda, std::size_t base_terms,
                          double beta, bool complete);

}  // namespace maxent
