#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hlpe {

using Complex = std::complex<double>;

inline constexpr double kTauUnitary = 1e-10;
inline constexpr double kTauPrune = 1e-14;
inline constexpr double kNormTol = 1e-9;
inline constexpr int kDefaultCutoff = 6;

// Ordered, immutable list of mode labels. Every matrix row/column and every
// occupation vector index refers to this ordering.
class ModeRegistry {
 public:
  explicit ModeRegistry(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool operator==(const ModeRegistry& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

RegistryPtr make_registry(std::vector<std::string> names);
// Registry whose first modes are `base` followed by `extra`.
RegistryPtr extend_registry(const ModeRegistry& base, const std::vector<std::string>& extra);
bool same_registry(const RegistryPtr& a, const RegistryPtr& b);

// Power of each creation operator in a monomial.
using Occupation = std::vector<std::uint8_t>;

int total_photons(const Occupation& occ);

// Multimode state written as f(a_1^dag, ..., a_M^dag)|0>, stored as a sparse map
// from monomials to complex coefficients.
class FockPolynomial {
 public:
  using Terms = std::map<Occupation, Complex>;

  explicit FockPolynomial(RegistryPtr registry, int cutoff = kDefaultCutoff);

  static FockPolynomial vacuum(RegistryPtr registry, int cutoff = kDefaultCutoff);
  static FockPolynomial monomial(RegistryPtr registry, const Occupation& occ,
                                 Complex coeff = 1.0, int cutoff = kDefaultCutoff);
  // Product of creation operators for the named modes, e.g. {"a_H", "b_H"}.
  static FockPolynomial monomial(RegistryPtr registry, const std::vector<std::string>& modes,
                                 Complex coeff = 1.0, int cutoff = kDefaultCutoff);

  // Adds coeff to the monomial, merging like terms and dropping terms below the
  // prune tolerance. Throws when the photon cutoff is exceeded.
  void add(const Occupation& occ, Complex coeff);

  const Terms& terms() const { return terms_; }
  const RegistryPtr& registry() const { return registry_; }
  int cutoff() const { return cutoff_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  Complex coefficient(const Occupation& occ) const;

  // Norm of the state the polynomial creates from vacuum (n! factors included).
  double squared_norm() const;

  FockPolynomial& operator+=(const FockPolynomial& other);
  FockPolynomial& operator*=(Complex scale);
  // Product of the two creation-operator polynomials.
  FockPolynomial operator*(const FockPolynomial& other) const;

 private:
  RegistryPtr registry_;
  int cutoff_;
  Terms terms_;
};

FockPolynomial operator+(FockPolynomial a, const FockPolynomial& b);
FockPolynomial operator*(FockPolynomial a, Complex scale);
FockPolynomial normalized(const FockPolynomial& state);

// Re-expresses a polynomial on a registry whose leading modes match its own.
FockPolynomial embed(const FockPolynomial& state, RegistryPtr larger);

// Transfer matrix S of a passive linear network, a_m^dag -> sum_k S(k, m) a_k^dag.
class LinearNetwork {
 public:
  LinearNetwork(RegistryPtr registry, Eigen::MatrixXcd matrix);

  static LinearNetwork identity(RegistryPtr registry);

  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const RegistryPtr& registry() const { return registry_; }
  std::size_t size() const { return registry_->size(); }

  // Network equivalent to this one followed by `next`.
  LinearNetwork then(const LinearNetwork& next) const;

 private:
  RegistryPtr registry_;
  Eigen::MatrixXcd matrix_;
};

double unitarity_defect(const Eigen::MatrixXcd& s);

FockPolynomial apply_network(const FockPolynomial& state, const LinearNetwork& net);

// Amplitude on |n_1, ..., n_M> is coefficient * prod sqrt(n_m!).
std::map<Occupation, Complex> to_fock_amplitudes(const FockPolynomial& state);
FockPolynomial from_fock_amplitudes(const std::map<Occupation, Complex>& amplitudes,
                                    RegistryPtr registry, int cutoff = kDefaultCutoff);
double fock_factor(const Occupation& occ);

enum class CountRule { Any, Exactly, AtLeast };

struct Constraint {
  CountRule rule = CountRule::Any;
  int n = 0;

  static Constraint any() { return {CountRule::Any, 0}; }
  static Constraint exactly(int n) { return {CountRule::Exactly, n}; }
  static Constraint at_least(int n) { return {CountRule::AtLeast, n}; }
  bool accepts(int count) const;
};

// Constraints on photon counts. A constraint applies to the total count of a
// set of modes; a single-mode set is the per-mode case.
class SelectionPattern {
 public:
  SelectionPattern& require(std::size_t mode, Constraint c);
  SelectionPattern& require(std::vector<std::size_t> modes, Constraint c);

  bool accepts(const Occupation& occ) const;
  bool trivial() const;
  const std::vector<std::pair<std::vector<std::size_t>, Constraint>>& clauses() const {
    return clauses_;
  }

 private:
  std::vector<std::pair<std::vector<std::size_t>, Constraint>> clauses_;
};

// Exactly one photon in each listed (H, V) pair and vacuum in every other mode.
SelectionPattern one_photon_per_pair(std::size_t mode_count,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

struct PostSelection {
  FockPolynomial state;
  double probability;
};

PostSelection post_select(const FockPolynomial& state, const SelectionPattern& pattern,
                          bool renormalize);

double bundle_number_expectation(const FockPolynomial& state,
                                 const std::vector<std::vector<std::size_t>>& bundles);

class QubitState;

// Dual-rail readout; pairs are (H mode, V mode), first pair is the most
// significant qubit.
QubitState extract_qubit_state(const FockPolynomial& state,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

}  // namespace hlpe
