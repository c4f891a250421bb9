#include "maxent/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "maxent/errors.hpp"
#include "maxent/rng.hpp"

namespace maxent {
namespace {

using cd = std::complex<double>;

constexpr Axis kAxes[] = {Axis::X, Axis::Y, Axis::Z};

char axis_char(Axis a) {
  switch (a) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

HermitianOperator dense_sum(const std::vector<PauliTerm>& paulis,
                            int max_qubits) {
  HermitianOperator total = pauli_to_dense(paulis.front(), max_qubits);
  for (std::size_t i = 1; i < paulis.size(); ++i) {
    total += pauli_to_dense(paulis[i], max_qubits);
  }
  return total;
}

PauliTerm single(int n, int site, Axis a) {
  return {n, {{site, a}}, 1.0};
}

PauliTerm pair(int n, int s1, Axis a1, int s2, Axis a2) {
  return {n, {{s1, a1}, {s2, a2}}, 1.0};
}

// Periodic successor of a 1-based site.
int next_site(int site, int n) { return site % n + 1; }

// Cheap upper bound on the spectral norm: max absolute row sum.
double row_sum_bound(const HermitianOperator& a) {
  return a.matrix().cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

HermitianOperator pauli_to_dense(const PauliTerm& term, int max_qubits) {
  const int n = term.n_qubits;
  if (n < 1) throw ConfigError("Pauli term needs at least one qubit");
  if (n > max_qubits) {
    throw CapacityError("Pauli term on " + std::to_string(n) +
                        " qubits exceeds the cap of " +
                        std::to_string(max_qubits));
  }
  std::uint64_t flip = 0;
  std::vector<int> seen;
  for (const auto& f : term.factors) {
    if (f.site < 1 || f.site > n) {
      throw ConfigError("Pauli site " + std::to_string(f.site) +
                        " outside 1.." + std::to_string(n));
    }
    if (std::find(seen.begin(), seen.end(), f.site) != seen.end()) {
      throw ConfigError("Pauli site " + std::to_string(f.site) + " repeated");
    }
    seen.push_back(f.site);
    if (f.axis != Axis::Z) flip |= std::uint64_t{1} << (n - f.site);
  }
  const std::uint64_t d = std::uint64_t{1} << n;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::uint64_t col = 0; col < d; ++col) {
    cd phase = term.coefficient;
    for (const auto& f : term.factors) {
      const bool bit = (col >> (n - f.site)) & 1U;
      switch (f.axis) {
        case Axis::X: break;
        case Axis::Y: phase *= bit ? cd(0, -1) : cd(0, 1); break;
        case Axis::Z: if (bit) phase = -phase; break;
      }
    }
    m(static_cast<Index>(col ^ flip), static_cast<Index>(col)) = phase;
  }
  return HermitianOperator(std::move(m));
}

std::string pauli_label(const PauliTerm& term) {
  std::string out;
  for (const auto& f : term.factors) {
    out += axis_char(f.axis);
    out += std::to_string(f.site);
  }
  return out.empty() ? "I" : out;
}

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Ising: return "Ising";
    case FamilyKind::Transversal1D: return "Transversal1D";
    case FamilyKind::Local1D: return "Local1D";
    case FamilyKind::Custom: return "Custom";
  }
  return "Custom";
}

FamilyKind parse_family_kind(std::string_view name) {
  for (auto k : {FamilyKind::Ising, FamilyKind::Transversal1D,
                 FamilyKind::Local1D, FamilyKind::Custom}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown family kind '" + std::string(name) + "'");
}

RealVector HamiltonianFamily::weights() const {
  RealVector w(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) w[j] = terms[j].weight;
  return w;
}

HermitianOperator HamiltonianFamily::scaled_term(std::size_t j) const {
  return terms.at(j).op * (1.0 / prescale);
}

HamiltonianFamily build_family(FamilyKind kind, int n, std::uint64_t seed,
                               int max_qubits) {
  if (n < 2) throw ConfigError("benchmark families need n_qubits >= 2");
  if (n > max_qubits) {
    throw CapacityError(std::to_string(n) + " qubits exceeds the cap of " +
                        std::to_string(max_qubits));
  }
  std::vector<std::vector<PauliTerm>> groups;
  std::vector<std::string> labels;
  double prescale = 1.0;

  switch (kind) {
    case FamilyKind::Ising:
      for (int i = 1; i <= n; ++i) {
        groups.push_back({single(n, i, Axis::X)});
      }
      for (int i = 1; i < n; ++i) {
        groups.push_back({pair(n, i, Axis::Z, i + 1, Axis::Z)});
      }
      break;
    case FamilyKind::Transversal1D:
      prescale = n;
      for (Axis p : kAxes) {
        std::vector<PauliTerm> g;
        for (int i = 1; i <= n; ++i) g.push_back(single(n, i, p));
        groups.push_back(std::move(g));
        labels.push_back(std::string("sum_i ") + axis_char(p) + "_i");
      }
      for (Axis p : kAxes) {
        for (Axis q : kAxes) {
          std::vector<PauliTerm> g;
          for (int i = 1; i <= n; ++i) {
            g.push_back(pair(n, i, p, next_site(i, n), q));
          }
          groups.push_back(std::move(g));
          labels.push_back(std::string("sum_i ") + axis_char(p) + "_i " +
                           axis_char(q) + "_i+1");
        }
      }
      break;
    case FamilyKind::Local1D:
      for (int i = 1; i <= n; ++i) {
        for (Axis p : kAxes) groups.push_back({single(n, i, p)});
      }
      for (int i = 1; i <= n; ++i) {
        for (Axis p : kAxes) {
          for (Axis q : kAxes) {
            groups.push_back({pair(n, i, p, next_site(i, n), q)});
          }
        }
      }
      break;
    case FamilyKind::Custom:
      throw ConfigError("Custom families are built with custom_family()");
  }

  Rng rng(seed);
  HamiltonianFamily family;
  family.kind = kind;
  family.n_qubits = n;
  family.prescale = prescale;
  family.terms.reserve(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    FamilyTerm t;
    t.label = labels.empty() ? pauli_label(groups[j].front()) : labels[j];
    t.op = dense_sum(groups[j], max_qubits);
    t.paulis = std::move(groups[j]);
    t.weight = rng.normal();
    family.terms.push_back(std::move(t));
  }
  return family;
}

HamiltonianFamily custom_family(int n_qubits, std::vector<FamilyTerm> terms,
                                double prescale) {
  if (terms.empty()) throw ConfigError("custom family needs at least one term");
  const Index d = Index{1} << n_qubits;
  for (const auto& t : terms) {
    if (t.op.dim() != d) {
      throw DimensionError("custom family term '" + t.label +
                           "' has the wrong dimension");
    }
  }
  HamiltonianFamily family;
  family.kind = FamilyKind::Custom;
  family.n_qubits = n_qubits;
  family.terms = std::move(terms);
  family.prescale = prescale;
  return family;
}

ObservableFamily::ObservableFamily(std::vector<HermitianOperator> operators,
                                   bool complete)
    : dense_(std::move(operators)), complete_(complete) {
  const Index d = dim();
  sparse_.reserve(dense_.size());
  for (const auto& f : dense_) {
    if (f.dim() != d) throw DimensionError("observables differ in dimension");
    sparse_.push_back(f.matrix().sparseView());
    sparse_.back().makeCompressed();
  }

  for (const auto& f : sparse_) {
    for (Index col = 0; col < f.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(f, col); it; ++it) {
        if (it.row() <= col) pattern_.emplace_back(it.row(), col);
      }
    }
  }
  std::sort(pattern_.begin(), pattern_.end());
  pattern_.erase(std::unique(pattern_.begin(), pattern_.end()), pattern_.end());

  entries_.resize(sparse_.size());
  for (std::size_t j = 0; j < sparse_.size(); ++j) {
    const SparseOperator& f = sparse_[j];
    for (Index col = 0; col < f.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(f, col); it; ++it) {
        if (it.row() > col) continue;
        const auto pos = std::lower_bound(pattern_.begin(), pattern_.end(),
                                          std::make_pair(it.row(), col));
        const double mult = it.row() == col ? 1.0 : 2.0;
        entries_[j].push_back({static_cast<std::size_t>(pos - pattern_.begin()),
                               mult * std::conj(it.value())});
      }
    }
  }
}

RealVector ObservableFamily::expectations(const EigenDecomposition& eig,
                                          const RealVector& weights) const {
  const Index d = dim();
  if (eig.dim() != d || weights.size() != d) {
    throw DimensionError("eigendecomposition dimension mismatch");
  }
  // Past a quarter of the matrix the dense product is cheaper.
  if (4 * pattern_.size() > static_cast<std::size_t>(d * d)) {
    return expectations(hermitian_part(eig.basis * weights.asDiagonal() *
                                       eig.basis.adjoint()));
  }
  // Rows of U and U diag(w), stored as columns for contiguous dot products.
  const ComplexMatrix ut = eig.basis.transpose();
  const ComplexMatrix wt = weights.asDiagonal() * ut;
  std::vector<std::complex<double>> values(pattern_.size());
  for (std::size_t k = 0; k < pattern_.size(); ++k) {
    const auto [a, b] = pattern_[k];
    values[k] = ut.col(b).dot(wt.col(a));  // rho_ab
  }
  RealVector out(static_cast<Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    double acc = 0.0;
    for (const auto& e : entries_[j]) acc += (e.factor * values[e.slot]).real();
    out[static_cast<Index>(j)] = acc;
  }
  return out;
}

HermitianOperator ObservableFamily::sum() const {
  return combine(RealVector::Ones(static_cast<Index>(size())));
}

HermitianOperator ObservableFamily::combine(const RealVector& lambda) const {
  if (static_cast<std::size_t>(lambda.size()) != size()) {
    throw DimensionError("lambda has " + std::to_string(lambda.size()) +
                         " entries for " + std::to_string(size()) +
                         " observables");
  }
  ComplexMatrix h = ComplexMatrix::Zero(dim(), dim());
  for (std::size_t j = 0; j < size(); ++j) {
    const double c = lambda[static_cast<Index>(j)];
    if (c == 0.0) continue;
    const SparseOperator& f = sparse_[j];
    for (Index col = 0; col < f.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(f, col); it; ++it) {
        h(it.row(), col) += c * it.value();
      }
    }
  }
  return hermitian_part(h);
}

RealVector ObservableFamily::expectations(const HermitianOperator& rho) const {
  if (rho.dim() != dim()) throw DimensionError("state dimension mismatch");
  const ComplexMatrix& r = rho.matrix();
  RealVector out(static_cast<Index>(size()));
  for (std::size_t j = 0; j < size(); ++j) {
    const SparseOperator& f = sparse_[j];
    double acc = 0.0;
    for (Index col = 0; col < f.outerSize(); ++col) {
      for (SparseOperator::InnerIterator it(f, col); it; ++it) {
        // Re(conj(f) r)
        const std::complex<double> v = it.value();
        const std::complex<double> x = r(it.row(), col);
        acc += v.real() * x.real() + v.imag() * x.imag();
      }
    }
    out[static_cast<Index>(j)] = acc;
  }
  return out;
}

ObservableFamily normalize_family(const HamiltonianFamily& family) {
  const std::size_t m = family.size();
  const Index d = family.dim();
  std::vector<HermitianOperator> ops;
  ops.reserve(m);
  const HermitianOperator id = HermitianOperator::identity(d);
  for (std::size_t j = 0; j < m; ++j) {
    HermitianOperator h = family.scaled_term(j);
    if (row_sum_bound(h) > 1.0 + 1e-9) {
      const double norm = spectral_norm(h);
      if (norm > 1.0 + 1e-9) {
        throw NormalizationError("term '" + family.terms[j].label +
                                 "' has norm " + std::to_string(norm) +
                                 " > 1 after prescaling");
      }
    }
    ops.push_back((id + h) * (1.0 / (2.0 * static_cast<double>(m))));
  }
  return ObservableFamily(std::move(ops));
}

ObservableFamily complete_family(const ObservableFamily& obs) {
  std::vector<HermitianOperator> ops = obs.operators();
  ops.push_back(HermitianOperator::identity(obs.dim()) - obs.sum());
  return ObservableFamily(std::move(ops), true);
}

double qubit_normalized_beta(const HamiltonianFamily& family, double beta) {
  if (family.n_qubits < 1) throw ConfigError("family has no qubits");
  return beta * family.prescale / static_cast<double>(family.n_qubits);
}

RealVector lambda_from_mu(const RealVector& mu, double beta, bool complete) {
  const auto m = static_cast<double>(mu.size());
  RealVector lambda = RealVector::Zero(mu.size() + (complete ? 1 : 0));
  lambda.head(mu.size()) = -2.0 * m * beta * mu;
  return lambda;
}

RealVector mu_from_lambda(const RealVector& lambda, std::size_t base_terms,
                          double beta, bool complete) {
  const auto m = static_cast<Index>(base_terms);
  const double shift = complete ? lambda[m] : 0.0;
  return -(lambda.head(m).array() - shift) /
         (2.0 * static_cast<double>(m) * beta);
}

ProblemInstance make_instance(const HamiltonianFamily& family,
                              std::optional<std::uint64_t> weight_seed,
                              double beta, bool complete) {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const std::size_t m = family.size();
  RealVector mu = family.weights();
  if (weight_seed) {
    Rng rng(*weight_seed);
    for (Index j = 0; j < mu.size(); ++j) mu[j] = rng.normal();
  }

  HermitianOperator h = HermitianOperator::zero(family.dim());
  for (std::size_t j = 0; j < m; ++j) h += family.scaled_term(j) * mu[j];

  const EigenDecomposition eig = eig_herm(h);
  const double span = beta * eig.eigenvalues.cwiseAbs().maxCoeff();
  if (span > 700.0) {
    throw OverflowError("beta * ||H|| = " + std::to_string(span) +
                        " overflows exp(-beta H)");
  }
  // exp(-beta H) with the largest exponent shifted to zero.
  const RealVector exponent = -beta * eig.eigenvalues;
  const double top = exponent.maxCoeff();
  const RealVector weights = (exponent.array() - top).exp();
  const double z_shifted = weights.sum();
  const double log_z = top + std::log(z_shifted);
  const HermitianOperator state = hermitian_part(
      eig.basis * (weights / z_shifted).asDiagonal() * eig.basis.adjoint());

  ProblemInstance inst;
  inst.observables = normalize_family(family);
  if (complete) inst.observables = complete_family(inst.observables);
  inst.beta = beta;
  inst.base_terms = m;
  inst.label = std::to_string(family.n_qubits) + "-qubit-" +
               std::string(to_string(family.kind));

  const std::size_t k = inst.observables.size();
  inst.alpha.resize(static_cast<Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const double a = hs_inner(inst.observables[j], state);
    if (!(a > 0.0)) {
      throw NumericalFailure("target moment is not positive", j);
    }
    inst.alpha[static_cast<Index>(j)] = a;
  }

  GroundTruth truth;
  truth.mu = mu;
  truth.lambda = lambda_from_mu(mu, beta, complete);
  // lambda*.F = -beta H + c I with c = sum_{j<=m} lambda*_j / (2m).
  const double shift =
      truth.lambda.head(static_cast<Index>(m)).sum() / (2.0 * static_cast<double>(m));
  truth.dual_optimum = (log_z + shift) - truth.lambda.dot(inst.alpha);
  inst.ground_truth = std::move(truth);
  return inst;
}

}  // namespace maxent
