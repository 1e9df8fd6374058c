#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hlpe/fock.hpp"
#include "hlpe/qubit_state.hpp"

namespace hlpe {

// Canonical eight-mode ordering of the state generator.
namespace mode {
inline constexpr std::size_t v_a = 0;
inline constexpr std::size_t a_V = 1;
inline constexpr std::size_t a_H = 2;
inline constexpr std::size_t b_H = 3;
inline constexpr std::size_t b_V = 4;
inline constexpr std::size_t c_V = 5;
inline constexpr std::size_t c_H = 6;
inline constexpr std::size_t v_c = 7;
}  // namespace mode

const std::vector<std::string>& canonical_mode_names();
RegistryPtr canonical_registry();
// (H, V) mode pairs of photons a, b, c. Photon a is the most significant qubit.
std::vector<std::pair<std::size_t, std::size_t>> photon_pairs();

enum class GateKind { Ncn, Cn, GenericBs, Swap };

struct GateSpec {
  GateKind kind = GateKind::Ncn;
  double eta1 = 0.5;
  double eta2 = 1.0 / 3.0;
  double eta = 0.5;  // GenericBs reflectivity
  std::size_t port1 = 0;
  std::size_t port2 = 1;
};

// Real splitter on ports (p, q): p -> sqrt(eta) p + sqrt(1-eta) q,
// q -> sqrt(1-eta) p - sqrt(eta) q. Identity on every other mode.
Eigen::MatrixXcd beamsplitter_matrix(std::size_t modes, std::size_t p, std::size_t q, double eta);
Eigen::MatrixXcd swap_matrix(std::size_t modes, std::size_t p, std::size_t q);
Eigen::MatrixXcd ncn_matrix(double eta1 = 0.5);
Eigen::MatrixXcd cn_matrix(double eta1 = 0.5, double eta2 = 1.0 / 3.0);

LinearNetwork build_ncn();
LinearNetwork build_cn();
LinearNetwork build_gate(const GateSpec& spec, RegistryPtr registry);

// One network in a sequence. Replicated stages also act on every private copy
// created by a mismatch site; auxiliary stages (mismatch and loss splitters)
// do not.
struct CircuitStage {
  LinearNetwork network;
  bool replicate = true;
  std::string label;
};

struct OpticalCircuit {
  RegistryPtr registry;
  std::vector<CircuitStage> stages;
  // base_modes[i] and all of its mismatch copies.
  std::vector<std::size_t> base_modes;
  std::vector<std::vector<std::size_t>> replicas;
  int mismatch_sites = 0;

  const std::vector<std::size_t>& replicas_of(std::size_t base_mode) const;
};

OpticalCircuit make_circuit(RegistryPtr registry, std::vector<CircuitStage> stages);
// NCN followed by CN on the canonical registry.
OpticalCircuit optimal_state_circuit();
// Embeds `input` into the circuit registry and applies every stage in order.
FockPolynomial run_circuit(const OpticalCircuit& circuit, const FockPolynomial& input);

// psi_n proportional to sin((n+1) pi / (N+2)), n = 0..N, unit norm.
std::vector<double> optimal_amplitudes(int N);
// GHZ weights alpha_j of the N=7 optimal state.
std::array<double, 4> optimal_alpha();

enum class TargetKind { OptimalN7, Ghz, PsiBc, Psi1 };

struct TargetState {
  TargetKind kind;
  Eigen::VectorXcd amplitudes;

  QubitState density() const { return QubitState::from_ket(amplitudes); }
};

// GHZ_j = (|j> + |7-j>)/sqrt(2), j = 0..3.
TargetState ghz_target(int j);
TargetState optimal_target();
TargetState psi_bc_target(const std::array<Complex, 4>& alpha);
// CNOT_ab (|+>_a (x) psi_bc): the post-selected NCN output.
TargetState psi1_target(const std::array<Complex, 4>& alpha);

// a_H^dag (alpha_0 b_H c_H + alpha_1 b_H c_V + alpha_2 b_V c_H + alpha_3 b_V c_V)^dag |0>.
FockPolynomial prepare_input(const std::array<Complex, 4>& alpha);
std::array<Complex, 4> to_complex(const std::array<double, 4>& alpha);

struct GeneratedState {
  QubitState state;
  double success_probability;
};

struct NoiseConfig;

GeneratedState generate_optimal_state();
// Mismatch model when both SPDC efficiencies are zero, SPDC model otherwise.
GeneratedState generate_optimal_state(const NoiseConfig& noise);

}  // namespace hlpe
