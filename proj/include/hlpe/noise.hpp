#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "hlpe/circuits.hpp"
#include "hlpe/fock.hpp"
#include "hlpe/qubit_state.hpp"

namespace hlpe {

// A mode-overlap splitter placed in front of circuit stage `stage` (index into
// the base circuit). The matched fraction keeps amplitude sqrt(xi); the rest
// continues through a private copy of the optical modes.
struct MismatchSite {
  std::size_t stage = 0;
  std::vector<std::size_t> path_modes;
  double xi = 1.0;
};

enum class MismatchLayout {
  // Heralded photon a against the pair photons, at the circuit input.
  HeraldedInput,
  // Every interfering input of the two gates: a, b before the NCN and a, c
  // before the CN.
  InterferingInputs,
};

// How monomial coefficients become detection probabilities.
enum class AmplitudeConvention {
  Fock,                // |coefficient|^2 * prod n!
  MonomialCoefficient  // |coefficient|^2
};

// Weight of the order-n source term.
enum class SourceNormalization {
  KetAmplitude,  // amplitude eps^n / n! on the normalized n-pair Fock ket
  OperatorPower  // (eps X^dag)^n / n! acting on vacuum
};

struct NoiseConfig {
  double xi = 1.0;
  double zeta = 0.13;
  double eps1 = 0.0;
  double eps2 = 0.0;
  MismatchLayout layout = MismatchLayout::HeraldedInput;
  std::vector<MismatchSite> sites;  // overrides `layout` when non-empty
  AmplitudeConvention convention = AmplitudeConvention::Fock;
  // Sources feeding the noisy generator; see SourceNormalization.
  SourceNormalization source = SourceNormalization::KetAmplitude;

  void validate() const;
};

enum class NoiseMode { Mismatch, SpdcHigherOrder };

std::vector<MismatchSite> mismatch_sites(MismatchLayout layout, double xi);

// Extends every stage to a registry with a fresh copy of the base modes and
// inserts the mismatch splitters before current stage `position`.
OpticalCircuit insert_mismatch(const OpticalCircuit& circuit, std::size_t position,
                               const std::vector<std::size_t>& path_modes, double xi);
// One vacuum loss mode per path; the transmitted amplitude is sqrt(zeta).
OpticalCircuit insert_loss(const OpticalCircuit& circuit, std::size_t position,
                           const std::vector<std::size_t>& path_modes, double zeta);

// Block-embeds a network into a registry whose leading modes match its own.
LinearNetwork extend_network(const LinearNetwork& net, RegistryPtr larger);

struct HomResult {
  double p_coin;
  double nu;
};

HomResult hom_visibility(double xi1, double xi2);

// Two photons on a splitter of reflectivity eta, each behind its own
// mismatch site. Detector bundles collect every copy of each output port.
struct HomBench {
  OpticalCircuit circuit;
  FockPolynomial input;
  std::vector<std::vector<std::size_t>> bundles;
};

HomBench hom_bench(double xi1, double xi2, double eta = 0.5);
double hom_coincidence(double xi1, double xi2, double eta = 0.5);

enum class SourceKind { Heralded, EntangledPair };

struct SpdcSpec {
  SourceKind kind = SourceKind::Heralded;
  double eps = 0.0;
  SourceNormalization normalization = SourceNormalization::OperatorPower;
  double beta = 0.0;   // pair source: b_V c_V weight
  double gamma = 1.0;  // pair source: b_H c_H weight
};

// Canonical modes followed by the trigger mode "t".
RegistryPtr spdc_registry();
// Order-n term of the source built from X = a_H t or gamma b_H c_H + beta b_V c_V.
// With OperatorPower it is (eps X^dag)^n / n!; with KetAmplitude each monomial
// is further divided by prod sqrt(n_m!), so the n-pair ket carries eps^n / n!.
// Orders above 3 (heralded) or 2 (pair) are zero.
FockPolynomial spdc_order(const SpdcSpec& spec, int n, RegistryPtr registry = spdc_registry());
FockPolynomial spdc_state(const SpdcSpec& spec, RegistryPtr registry = spdc_registry());

struct SchmidtRotations {
  double beta;
  double gamma;
  double theta_b;
  double theta_c;
};

// Polarization rotation m_H -> cos m_H + sin m_V, m_V -> -sin m_H + cos m_V.
Eigen::Matrix2d polarization_rotation(double theta);
SchmidtRotations schmidt_rotations(const std::array<double, 4>& target_alpha);

double epsilon_from_counts(double coincidences, double rate, double lambda_i, double lambda_s);

struct QubitReadout {
  std::vector<std::size_t> h_modes;
  std::vector<std::size_t> v_modes;
};

struct DetectionLayout {
  std::vector<QubitReadout> qubits;
  std::vector<std::vector<std::size_t>> heralds;
};

struct DetectedState {
  std::optional<QubitState> state;
  double probability;
};

// Threshold detection of dual-rail qubits. Every pattern with at least one
// click per qubit (and per herald) is kept; all unread information (copies,
// loss modes, heralds, vacuum ports) is traced out.
DetectedState detect_qubits(const FockPolynomial& state, const DetectionLayout& layout,
                            AmplitudeConvention convention = AmplitudeConvention::Fock);

GeneratedState noisy_probe_state(const NoiseConfig& config, NoiseMode mode);

}  // namespace hlpe
