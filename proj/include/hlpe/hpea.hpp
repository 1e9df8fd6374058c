#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hlpe/qubit_state.hpp"

namespace hlpe {

enum class Estimator { Binary, Calibrated };
enum class Feedback { On, Off };

// Outcomes are indexed by j = sum_k bit_k 2^(K-k), so the binary estimate is
// 2 pi j / 2^(K+1) and the bit string phi_0 phi_1 ... phi_K reads j in binary.
struct CalibrationTable {
  int K = 0;
  std::vector<double> phase;

  std::size_t size() const { return phase.size(); }
  std::string key(std::size_t outcome) const;
};

CalibrationTable dyadic_table(int K);
std::string bit_string(std::size_t outcome, int K);

struct ProtocolConfig {
  explicit ProtocolConfig(QubitState state);

  int K;
  QubitState input;
  Estimator estimator = Estimator::Binary;
  std::optional<CalibrationTable> calibration;
  Feedback feedback = Feedback::On;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ProtocolRun {
  double phi_true;
  std::vector<int> bits;  // bits[k] = phi_k
  double phi_est;

  std::size_t outcome() const;
};

// Measurement sign to bit value.
struct BitConvention {
  int plus;
  int minus;
  bool operator==(const BitConvention&) const = default;
};

inline constexpr BitConvention kBitConvention{0, 1};

// Searches the two sign-to-bit mappings for the one under which the Fourier
// product state reads every dyadic phase deterministically for K = 0, 1, 2.
BitConvention bit_convention_check();

// diag(1, e^{i m phi}).
Eigen::Matrix2cd phase_unitary(long long m, double phi);
// diag(e^{i theta/2}, e^{-i theta/2}).
Eigen::Matrix2cd feedback_rotation(double theta);

// |+>^(K+1): the plain phase-estimation probe.
QubitState qpea_state(int K);
// Sum_n psi_n |n> with psi_n from optimal_amplitudes(2^(K+1) - 1).
QubitState optimal_probe(int K);

using Rng = std::mt19937_64;

// Independent stream for run `run_index` of an ensemble seeded with `seed`.
Rng run_stream(std::uint64_t seed, std::uint64_t run_index);
double uniform01(Rng& rng);

double estimate_phase(std::size_t outcome, int K, Estimator estimator,
                      const std::optional<CalibrationTable>& table);

ProtocolRun run_protocol(const ProtocolConfig& config, double phi_true, Rng& rng);
// Uses the stream (config.seed, 0).
ProtocolRun run_protocol(const ProtocolConfig& config, double phi_true);
// Run i draws phi_true uniformly on [0, 2 pi) from stream (config.seed, i).
std::vector<ProtocolRun> run_ensemble(const ProtocolConfig& config, std::size_t n_ens);

// Exact probabilities of every outcome at phase phi, by branch enumeration.
std::vector<double> outcome_distribution(const ProtocolConfig& config, double phi);

struct OutcomeDistribution {
  int K = 0;
  std::vector<double> phi;  // uniform grid on [0, 2 pi)
  Eigen::MatrixXd prob;     // prob(g, j) = P(j | phi[g])

  std::size_t outcomes() const { return static_cast<std::size_t>(prob.cols()); }
};

OutcomeDistribution tabulate_outcomes(const ProtocolConfig& config,
                                      std::size_t grid_points = 4096);

}  // namespace hlpe
