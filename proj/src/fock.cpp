#include "hlpe/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hlpe/errors.hpp"
#include "hlpe/qubit_state.hpp"

namespace hlpe {

ModeRegistry::ModeRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw ConfigError("mode registry must not be empty");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw ConfigError("duplicate mode label '" + names_[i] + "'");
    }
  }
}

std::size_t ModeRegistry::index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown mode '" + std::string(name) + "'");
  return it->second;
}

bool ModeRegistry::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

RegistryPtr make_registry(std::vector<std::string> names) {
  return std::make_shared<const ModeRegistry>(std::move(names));
}

RegistryPtr extend_registry(const ModeRegistry& base, const std::vector<std::string>& extra) {
  auto names = base.names();
  names.insert(names.end(), extra.begin(), extra.end());
  return make_registry(std::move(names));
}

bool same_registry(const RegistryPtr& a, const RegistryPtr& b) {
  return a == b || (a && b && *a == *b);
}

int total_photons(const Occupation& occ) {
  return std::accumulate(occ.begin(), occ.end(), 0);
}

double fock_factor(const Occupation& occ) {
  double f = 1.0;
  for (auto n : occ) f *= std::tgamma(static_cast<double>(n) + 1.0);
  return std::sqrt(f);
}

FockPolynomial::FockPolynomial(RegistryPtr registry, int cutoff)
    : registry_(std::move(registry)), cutoff_(cutoff) {
  if (!registry_) throw ConfigError("polynomial needs a registry");
  if (cutoff_ < 0) throw ConfigError("photon cutoff must be non-negative");
}

FockPolynomial FockPolynomial::vacuum(RegistryPtr registry, int cutoff) {
  FockPolynomial p(registry, cutoff);
  p.add(Occupation(registry->size(), 0), 1.0);
  return p;
}

FockPolynomial FockPolynomial::monomial(RegistryPtr registry, const Occupation& occ,
                                        Complex coeff, int cutoff) {
  FockPolynomial p(std::move(registry), cutoff);
  p.add(occ, coeff);
  return p;
}

FockPolynomial FockPolynomial::monomial(RegistryPtr registry,
                                        const std::vector<std::string>& modes, Complex coeff,
                                        int cutoff) {
  Occupation occ(registry->size(), 0);
  for (const auto& m : modes) ++occ[registry->index(m)];
  return monomial(std::move(registry), occ, coeff, cutoff);
}

void FockPolynomial::add(const Occupation& occ, Complex coeff) {
  if (occ.size() != registry_->size()) {
    throw ConfigError("monomial length does not match the mode registry");
  }
  if (total_photons(occ) > cutoff_) {
    throw NumericError("photon-number cutoff " + std::to_string(cutoff_) + " exceeded");
  }
  auto [it, inserted] = terms_.try_emplace(occ, coeff);
  if (!inserted) it->second += coeff;
  if (std::abs(it->second) < kTauPrune) terms_.erase(it);
}

Complex FockPolynomial::coefficient(const Occupation& occ) const {
  auto it = terms_.find(occ);
  return it == terms_.end() ? Complex{} : it->second;
}

double FockPolynomial::squared_norm() const {
  double s = 0.0;
  for (const auto& [occ, c] : terms_) {
    const double f = fock_factor(occ);
    s += std::norm(c) * f * f;
  }
  return s;
}

FockPolynomial& FockPolynomial::operator+=(const FockPolynomial& other) {
  if (!same_registry(registry_, other.registry_)) throw ConfigError("registry mismatch");
  for (const auto& [occ, c] : other.terms_) add(occ, c);
  return *this;
}

FockPolynomial& FockPolynomial::operator*=(Complex scale) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scale;
    if (std::abs(it->second) < kTauPrune) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

FockPolynomial FockPolynomial::operator*(const FockPolynomial& other) const {
  if (!same_registry(registry_, other.registry_)) throw ConfigError("registry mismatch");
  FockPolynomial out(registry_, std::max(cutoff_, other.cutoff_));
  Occupation occ(registry_->size());
  for (const auto& [o1, c1] : terms_) {
    for (const auto& [o2, c2] : other.terms_) {
      for (std::size_t m = 0; m < occ.size(); ++m) occ[m] = o1[m] + o2[m];
      out.add(occ, c1 * c2);
    }
  }
  return out;
}

FockPolynomial operator+(FockPolynomial a, const FockPolynomial& b) { return a += b; }
FockPolynomial operator*(FockPolynomial a, Complex scale) { return a *= scale; }

FockPolynomial normalized(const FockPolynomial& state) {
  const double n2 = state.squared_norm();
  if (!(n2 > 0.0)) throw NumericError("cannot normalize the zero polynomial");
  return state * Complex(1.0 / std::sqrt(n2));
}

FockPolynomial embed(const FockPolynomial& state, RegistryPtr larger) {
  const auto& src = state.registry()->names();
  const auto& dst = larger->names();
  if (dst.size() < src.size() || !std::equal(src.begin(), src.end(), dst.begin())) {
    throw ConfigError("target registry does not extend the state's registry");
  }
  FockPolynomial out(larger, state.cutoff());
  for (const auto& [occ, c] : state.terms()) {
    Occupation wide(occ);
    wide.resize(dst.size(), 0);
    out.add(wide, c);
  }
  return out;
}

double unitarity_defect(const Eigen::MatrixXcd& s) {
  const auto n = s.rows();
  return (s.adjoint() * s - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

LinearNetwork::LinearNetwork(RegistryPtr registry, Eigen::MatrixXcd matrix)
    : registry_(std::move(registry)), matrix_(std::move(matrix)) {
  if (!registry_) throw ConfigError("network needs a registry");
  const auto m = static_cast<Eigen::Index>(registry_->size());
  if (matrix_.rows() != m || matrix_.cols() != m) {
    throw ConfigError("transfer matrix size does not match the mode registry");
  }
  if (unitarity_defect(matrix_) > kTauUnitary) {
    throw NumericError("transfer matrix is not unitary");
  }
}

LinearNetwork LinearNetwork::identity(RegistryPtr registry) {
  const auto m = static_cast<Eigen::Index>(registry->size());
  return LinearNetwork(registry, Eigen::MatrixXcd::Identity(m, m));
}

LinearNetwork LinearNetwork::then(const LinearNetwork& next) const {
  if (!same_registry(registry_, next.registry_)) throw ConfigError("registry mismatch");
  return LinearNetwork(registry_, next.matrix_ * matrix_);
}

namespace {

using Column = std::vector<std::pair<std::size_t, Complex>>;

struct Expander {
  const std::vector<Column>& columns;
  const std::vector<std::size_t>& photons;
  std::map<Occupation, Complex>& out;
  Occupation occ;

  void run(std::size_t depth, Complex coeff) {
    if (depth == photons.size()) {
      out[occ] += coeff;
      return;
    }
    for (const auto& [k, s] : columns[photons[depth]]) {
      ++occ[k];
      run(depth + 1, coeff * s);
      --occ[k];
    }
  }
};

}  // namespace

FockPolynomial apply_network(const FockPolynomial& state, const LinearNetwork& net) {
  if (!same_registry(state.registry(), net.registry())) {
    throw ConfigError("state and network use different mode registries");
  }
  const auto& s = net.matrix();
  const std::size_t m = net.size();
  std::vector<Column> columns(m);
  for (std::size_t col = 0; col < m; ++col) {
    for (std::size_t row = 0; row < m; ++row) {
      const Complex v = s(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      if (v != Complex{}) columns[col].emplace_back(row, v);
    }
  }

  std::map<Occupation, Complex> acc;
  std::vector<std::size_t> photons;
  for (const auto& [occ, c] : state.terms()) {
    photons.clear();
    for (std::size_t mode = 0; mode < m; ++mode) {
      photons.insert(photons.end(), occ[mode], mode);
    }
    Expander{columns, photons, acc, Occupation(m, 0)}.run(0, c);
  }

  FockPolynomial out(state.registry(), state.cutoff());
  for (const auto& [occ, c] : acc) {
    if (std::abs(c) >= kTauPrune) out.add(occ, c);
  }

  const double before = state.squared_norm();
  const double after = out.squared_norm();
  if (std::abs(after - before) > 10.0 * kTauUnitary * std::max(1.0, before)) {
    throw NumericError("linear network did not preserve the state norm");
  }
  return out;
}

std::map<Occupation, Complex> to_fock_amplitudes(const FockPolynomial& state) {
  std::map<Occupation, Complex> amps;
  for (const auto& [occ, c] : state.terms()) amps.emplace(occ, c * fock_factor(occ));
  return amps;
}

FockPolynomial from_fock_amplitudes(const std::map<Occupation, Complex>& amplitudes,
                                    RegistryPtr registry, int cutoff) {
  FockPolynomial out(std::move(registry), cutoff);
  for (const auto& [occ, a] : amplitudes) out.add(occ, a / fock_factor(occ));
  return out;
}

bool Constraint::accepts(int count) const {
  switch (rule) {
    case CountRule::Any: return true;
    case CountRule::Exactly: return count == n;
    case CountRule::AtLeast: return count >= n;
  }
  return false;
}

SelectionPattern& SelectionPattern::require(std::size_t mode, Constraint c) {
  return require(std::vector<std::size_t>{mode}, c);
}

SelectionPattern& SelectionPattern::require(std::vector<std::size_t> modes, Constraint c) {
  if (modes.empty()) throw ConfigError("selection clause needs at least one mode");
  clauses_.emplace_back(std::move(modes), c);
  return *this;
}

bool SelectionPattern::accepts(const Occupation& occ) const {
  for (const auto& [modes, c] : clauses_) {
    int count = 0;
    for (auto m : modes) {
      if (m >= occ.size()) throw ConfigError("selection pattern refers to a missing mode");
      count += occ[m];
    }
    if (!c.accepts(count)) return false;
  }
  return true;
}

bool SelectionPattern::trivial() const {
  return std::all_of(clauses_.begin(), clauses_.end(),
                     [](const auto& cl) { return cl.second.rule == CountRule::Any; });
}

SelectionPattern one_photon_per_pair(std::size_t mode_count,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  SelectionPattern p;
  std::vector<bool> used(mode_count, false);
  for (const auto& [h, v] : pairs) {
    p.require({h, v}, Constraint::exactly(1));
    used.at(h) = used.at(v) = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < mode_count; ++m) {
    if (!used[m]) rest.push_back(m);
  }
  if (!rest.empty()) p.require(rest, Constraint::exactly(0));
  return p;
}

PostSelection post_select(const FockPolynomial& state, const SelectionPattern& pattern,
                          bool renormalize) {
  if (std::abs(state.squared_norm() - 1.0) > kNormTol) {
    throw NumericError("post-selection expects a normalized state");
  }
  FockPolynomial kept(state.registry(), state.cutoff());
  for (const auto& [occ, c] : state.terms()) {
    if (pattern.accepts(occ)) kept.add(occ, c);
  }
  const double p = kept.squared_norm();
  if (renormalize) {
    if (p < 1e-15) throw NumericError("post-selection kept nothing");
    kept *= Complex(1.0 / std::sqrt(p));
  }
  return {std::move(kept), p};
}

double bundle_number_expectation(const FockPolynomial& state,
                                 const std::vector<std::vector<std::size_t>>& bundles) {
  std::set<std::size_t> seen;
  for (const auto& b : bundles) {
    for (auto m : b) {
      if (m >= state.registry()->size()) throw ConfigError("bundle refers to a missing mode");
      if (!seen.insert(m).second) throw ConfigError("detection bundles overlap");
    }
  }
  if (std::abs(state.squared_norm() - 1.0) > kNormTol) {
    throw NumericError("bundle expectation expects a normalized state");
  }
  double e = 0.0;
  for (const auto& [occ, a] : to_fock_amplitudes(state)) {
    double prod = 1.0;
    for (const auto& b : bundles) {
      int n = 0;
      for (auto m : b) n += occ[m];
      prod *= n;
    }
    e += std::norm(a) * prod;
  }
  return e;
}

QubitState extract_qubit_state(const FockPolynomial& state,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t m = state.registry()->size();
  if (pairs.empty()) throw ConfigError("no dual-rail pairs given");
  std::vector<int> role(m, -1);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    if (pairs[q].first >= m || pairs[q].second >= m) throw ConfigError("pair mode out of range");
    role[pairs[q].first] = role[pairs[q].second] = static_cast<int>(q);
  }
  const std::size_t nq = pairs.size();
  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(Eigen::Index{1} << nq);
  double inside = 0.0;
  double outside = 0.0;
  for (const auto& [occ, a] : to_fock_amplitudes(state)) {
    bool ok = true;
    std::size_t index = 0;
    for (std::size_t mode = 0; mode < m && ok; ++mode) {
      if (role[mode] < 0 && occ[mode] != 0) ok = false;
    }
    for (std::size_t q = 0; q < nq && ok; ++q) {
      const int h = occ[pairs[q].first];
      const int v = occ[pairs[q].second];
      if (h + v != 1) {
        ok = false;
      } else if (v == 1) {
        index |= std::size_t{1} << (nq - 1 - q);
      }
    }
    if (ok) {
      ket(static_cast<Eigen::Index>(index)) += a;
      inside += std::norm(a);
    } else {
      outside += std::norm(a);
    }
  }
  if (outside > 1e-9 * std::max(1.0, inside + outside)) {
    throw NumericError("state has amplitude outside the dual-rail qubit subspace");
  }
  if (inside < 1e-15) throw NumericError("state has no dual-rail qubit component");
  ket /= std::sqrt(ket.squaredNorm());
  return QubitState::from_ket(ket);
}

}  // namespace hlpe
