#include "hlpe/circuits.hpp"

#include <cmath>
#include <numbers>

#include "hlpe/errors.hpp"
#include "hlpe/noise.hpp"

namespace hlpe {

const std::vector<std::string>& canonical_mode_names() {
  static const std::vector<std::string> names{"v_a", "a_V", "a_H", "b_H",
                                              "b_V", "c_V", "c_H", "v_c"};
  return names;
}

RegistryPtr canonical_registry() {
  static const RegistryPtr reg = make_registry(canonical_mode_names());
  return reg;
}

std::vector<std::pair<std::size_t, std::size_t>> photon_pairs() {
  return {{mode::a_H, mode::a_V}, {mode::b_H, mode::b_V}, {mode::c_H, mode::c_V}};
}

Eigen::MatrixXcd beamsplitter_matrix(std::size_t modes, std::size_t p, std::size_t q,
                                     double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("splitter reflectivity outside [0, 1]");
  if (p >= modes || q >= modes || p == q) throw ConfigError("invalid splitter ports");
  const auto n = static_cast<Eigen::Index>(modes);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(n, n);
  const double r = std::sqrt(eta);
  const double t = std::sqrt(1.0 - eta);
  const auto ip = static_cast<Eigen::Index>(p);
  const auto iq = static_cast<Eigen::Index>(q);
  s(ip, ip) = r;
  s(iq, ip) = t;
  s(ip, iq) = t;
  s(iq, iq) = -r;
  return s;
}

Eigen::MatrixXcd swap_matrix(std::size_t modes, std::size_t p, std::size_t q) {
  if (p >= modes || q >= modes) throw ConfigError("invalid swap ports");
  const auto n = static_cast<Eigen::Index>(modes);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(n, n);
  const auto ip = static_cast<Eigen::Index>(p);
  const auto iq = static_cast<Eigen::Index>(q);
  s(ip, ip) = s(iq, iq) = 0.0;
  s(ip, iq) = s(iq, ip) = 1.0;
  return s;
}

Eigen::MatrixXcd ncn_matrix(double eta1) {
  const double r = std::sqrt(eta1 * (1.0 - eta1));
  const double e = eta1;
  const double f = 1.0 - eta1;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(8, 8);
  // Rows/columns a_V, a_H, b_H, b_V as printed; unitary at eta1 = 1/2 only.
  const double block[4][4] = {{e, r, -r, f}, {r, f, e, -r}, {-r, e, f, r}, {f, -r, r, f}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) s(1 + i, 1 + j) = block[i][j];
  }
  return s;
}

Eigen::MatrixXcd cn_matrix(double eta1, double eta2) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(8, 8);
  const double r2 = std::sqrt(eta2);
  const double t2 = std::sqrt(1.0 - eta2);
  s(mode::v_a, mode::v_a) = -r2;
  s(mode::v_a, mode::a_V) = t2;
  s(mode::a_V, mode::v_a) = t2;
  s(mode::a_V, mode::a_V) = r2;

  const double p = std::sqrt(eta1 * (1.0 - eta2));
  const double q = std::sqrt((1.0 - eta1) * (1.0 - eta2));
  const double d = (1.0 - 2.0 * eta1) * r2;
  const double x = 2.0 * std::sqrt(eta1 * eta2 * (1.0 - eta1));
  const std::size_t idx[4] = {mode::a_H, mode::c_V, mode::c_H, mode::v_c};
  const double block[4][4] = {{-r2, p, q, 0.0}, {p, d, x, q}, {q, x, d, -p}, {0.0, -q, p, -r2}};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) s(idx[i], idx[j]) = block[i][j];
  }
  return s;
}

LinearNetwork build_ncn() { return LinearNetwork(canonical_registry(), ncn_matrix()); }

LinearNetwork build_cn() { return LinearNetwork(canonical_registry(), cn_matrix()); }

LinearNetwork build_gate(const GateSpec& spec, RegistryPtr registry) {
  for (double eta : {spec.eta1, spec.eta2, spec.eta}) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("reflectivity outside [0, 1]");
  }
  const std::size_t m = registry->size();
  switch (spec.kind) {
    case GateKind::Ncn:
      if (!same_registry(registry, canonical_registry())) {
        throw ConfigError("NCN gate needs the canonical registry");
      }
      return LinearNetwork(registry, ncn_matrix(spec.eta1));
    case GateKind::Cn:
      if (!same_registry(registry, canonical_registry())) {
        throw ConfigError("CN gate needs the canonical registry");
      }
      return LinearNetwork(registry, cn_matrix(spec.eta1, spec.eta2));
    case GateKind::GenericBs:
      return LinearNetwork(registry, beamsplitter_matrix(m, spec.port1, spec.port2, spec.eta));
    case GateKind::Swap:
      return LinearNetwork(registry, swap_matrix(m, spec.port1, spec.port2));
  }
  throw ConfigError("unknown gate kind");
}

const std::vector<std::size_t>& OpticalCircuit::replicas_of(std::size_t base_mode) const {
  for (std::size_t i = 0; i < base_modes.size(); ++i) {
    if (base_modes[i] == base_mode) return replicas[i];
  }
  throw ConfigError("mode is not a base optical mode of the circuit");
}

OpticalCircuit make_circuit(RegistryPtr registry, std::vector<CircuitStage> stages) {
  OpticalCircuit c;
  for (const auto& st : stages) {
    if (!same_registry(st.network.registry(), registry)) {
      throw ConfigError("circuit stage uses a different registry");
    }
  }
  c.registry = std::move(registry);
  c.stages = std::move(stages);
  for (std::size_t m = 0; m < c.registry->size(); ++m) {
    c.base_modes.push_back(m);
    c.replicas.push_back({m});
  }
  return c;
}

OpticalCircuit optimal_state_circuit() {
  return make_circuit(canonical_registry(),
                      {{build_ncn(), true, "NCN"}, {build_cn(), true, "CN"}});
}

FockPolynomial run_circuit(const OpticalCircuit& circuit, const FockPolynomial& input) {
  FockPolynomial state = same_registry(input.registry(), circuit.registry)
                             ? input
                             : embed(input, circuit.registry);
  for (const auto& st : circuit.stages) state = apply_network(state, st.network);
  return state;
}

std::vector<double> optimal_amplitudes(int N) {
  if (N < 1) throw ConfigError("resource count must be at least 1");
  if (((N + 1) & N) != 0) throw ConfigError("resource count must be 2^(K+1) - 1");
  std::vector<double> psi(static_cast<std::size_t>(N) + 1);
  double norm = 0.0;
  for (int n = 0; n <= N; ++n) {
    psi[n] = std::sin((n + 1) * std::numbers::pi / (N + 2));
    norm += psi[n] * psi[n];
  }
  for (auto& v : psi) v /= std::sqrt(norm);
  return psi;
}

std::array<double, 4> optimal_alpha() {
  const auto psi = optimal_amplitudes(7);
  std::array<double, 4> alpha{};
  for (int j = 0; j < 4; ++j) alpha[j] = std::sqrt(2.0) * psi[j];
  return alpha;
}

std::array<Complex, 4> to_complex(const std::array<double, 4>& alpha) {
  return {alpha[0], alpha[1], alpha[2], alpha[3]};
}

TargetState ghz_target(int j) {
  if (j < 0 || j > 3) throw ConfigError("GHZ index must be in 0..3");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
  v(j) = v(7 - j) = 1.0 / std::sqrt(2.0);
  return {TargetKind::Ghz, v};
}

TargetState optimal_target() {
  const auto psi = optimal_amplitudes(7);
  Eigen::VectorXcd v(8);
  for (int n = 0; n < 8; ++n) v(n) = psi[n];
  return {TargetKind::OptimalN7, v};
}

namespace {

void check_unit(const std::array<Complex, 4>& alpha) {
  double n = 0.0;
  for (const auto& a : alpha) n += std::norm(a);
  if (std::abs(n - 1.0) > kNormTol) throw ConfigError("alpha amplitudes are not normalized");
}

}  // namespace

TargetState psi_bc_target(const std::array<Complex, 4>& alpha) {
  check_unit(alpha);
  Eigen::VectorXcd v(4);
  for (int i = 0; i < 4; ++i) v(i) = alpha[i];
  return {TargetKind::PsiBc, v};
}

TargetState psi1_target(const std::array<Complex, 4>& alpha) {
  check_unit(alpha);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
  const double h = 1.0 / std::sqrt(2.0);
  for (int bc = 0; bc < 4; ++bc) {
    v(bc) += h * alpha[bc];
    v(4 + (bc ^ 2)) += h * alpha[bc];
  }
  return {TargetKind::Psi1, v};
}

FockPolynomial prepare_input(const std::array<Complex, 4>& alpha) {
  check_unit(alpha);
  const auto reg = canonical_registry();
  FockPolynomial p(reg);
  const std::size_t b_modes[2] = {mode::b_H, mode::b_V};
  const std::size_t c_modes[2] = {mode::c_H, mode::c_V};
  for (int bc = 0; bc < 4; ++bc) {
    Occupation occ(reg->size(), 0);
    occ[mode::a_H] = 1;
    occ[b_modes[bc >> 1]] = 1;
    occ[c_modes[bc & 1]] = 1;
    p.add(occ, alpha[bc]);
  }
  return p;
}

GeneratedState generate_optimal_state() {
  const auto out = run_circuit(optimal_state_circuit(), prepare_input(to_complex(optimal_alpha())));
  const auto pairs = photon_pairs();
  auto sel = post_select(out, one_photon_per_pair(out.registry()->size(), pairs), true);
  return {extract_qubit_state(sel.state, pairs), sel.probability};
}

GeneratedState generate_optimal_state(const NoiseConfig& noise) {
  const bool spdc = noise.eps1 > 0.0 || noise.eps2 > 0.0;
  return noisy_probe_state(noise, spdc ? NoiseMode::SpdcHigherOrder : NoiseMode::Mismatch);
}

}  // namespace hlpe
