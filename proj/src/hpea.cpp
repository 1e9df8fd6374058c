#include "hlpe/hpea.hpp"

#include <cmath>
#include <numbers>

#include "hlpe/circuits.hpp"
#include "hlpe/errors.hpp"
#include "hlpe/parallel.hpp"

namespace hlpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w >= kTwoPi ? 0.0 : w;
}

// Diagonal of the operator applied before measuring qubit k. The register
// holds qubits k, k-1, ..., 0 in tensor order. Qubit k picks up U^(2^k); if
// the previous measurement read bit 1 and feedback is on, qubit k also gets
// R(pi/2) and qubit k-j gets R(pi/2^(j+1)).
Eigen::VectorXcd round_diagonal(int k, int prev_bit, bool feedback, double phi) {
  const bool on = feedback && prev_bit == 1;
  Eigen::VectorXcd d(1);
  d(0) = 1.0;
  for (int j = 0; j <= k; ++j) {
    Eigen::Matrix2cd f = Eigen::Matrix2cd::Identity();
    if (j == 0) f = phase_unitary(1LL << k, phi);
    if (on) f = f * feedback_rotation(std::numbers::pi / std::ldexp(1.0, j + 1));
    Eigen::VectorXcd next(d.size() * 2);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      next(2 * i) = d(i) * f(0, 0);
      next(2 * i + 1) = d(i) * f(1, 1);
    }
    d = next;
  }
  return d;
}

void apply_diagonal(Eigen::MatrixXcd& rho, const Eigen::VectorXcd& d) {
  rho = (rho.array() * (d * d.adjoint()).array()).matrix();
}

// <s|rho|s> on the first tensor factor, s = + or -, left unnormalized.
Eigen::MatrixXcd measure_x(const Eigen::MatrixXcd& rho, int sign) {
  const auto h = rho.rows() / 2;
  const double s = sign > 0 ? 1.0 : -1.0;
  return 0.5 * (rho.topLeftCorner(h, h) + rho.bottomRightCorner(h, h) +
                s * (rho.topRightCorner(h, h) + rho.bottomLeftCorner(h, h)));
}

void enumerate(const Eigen::MatrixXcd& rho, int k, int K, int prev_bit, std::size_t outcome,
               double phi, BitConvention conv, bool feedback, std::vector<double>& probs) {
  Eigen::MatrixXcd cur = rho;
  apply_diagonal(cur, round_diagonal(k, prev_bit, feedback, phi));
  for (int sign : {+1, -1}) {
    Eigen::MatrixXcd sub = measure_x(cur, sign);
    const double p = sub.trace().real();
    const int bit = sign > 0 ? conv.plus : conv.minus;
    const std::size_t j = outcome | (static_cast<std::size_t>(bit) << (K - k));
    if (k == 0) {
      probs[j] += p;
    } else if (p > 0.0) {
      enumerate(sub, k - 1, K, bit, j, phi, conv, feedback, probs);
    }
  }
}

std::vector<double> distribution_with(const QubitState& input, int K, double phi,
                                      BitConvention conv, bool feedback) {
  std::vector<double> probs(std::size_t{1} << (K + 1), 0.0);
  enumerate(input.matrix(), K, K, -1, 0, phi, conv, feedback, probs);
  return probs;
}

ProtocolRun sample(const ProtocolConfig& config, double phi_true, Rng& rng) {
  const int K = config.K;
  const bool feedback = config.feedback == Feedback::On;
  Eigen::MatrixXcd rho = config.input.matrix();
  ProtocolRun run{phi_true, std::vector<int>(static_cast<std::size_t>(K) + 1, 0), 0.0};
  int prev_bit = -1;
  for (int k = K; k >= 0; --k) {
    apply_diagonal(rho, round_diagonal(k, prev_bit, feedback, phi_true));
    Eigen::MatrixXcd plus = measure_x(rho, +1);
    const double p_plus = plus.trace().real();
    const bool is_plus = uniform01(rng) < p_plus;
    Eigen::MatrixXcd next = is_plus ? std::move(plus) : measure_x(rho, -1);
    const double p = next.trace().real();
    if (!(p > 0.0)) throw NumericError("sampled a zero-probability branch");
    rho = next / p;
    if (std::abs(rho.trace().real() - 1.0) > 1e-6) {
      throw NumericError("protocol density matrix trace drifted");
    }
    const int bit = is_plus ? kBitConvention.plus : kBitConvention.minus;
    run.bits[static_cast<std::size_t>(k)] = bit;
    prev_bit = bit;
  }
  run.phi_est = estimate_phase(run.outcome(), K, config.estimator, config.calibration);
  return run;
}

}  // namespace

std::string bit_string(std::size_t outcome, int K) {
  std::string s;
  for (int k = 0; k <= K; ++k) s.push_back(((outcome >> (K - k)) & 1U) ? '1' : '0');
  return s;
}

std::string CalibrationTable::key(std::size_t outcome) const { return bit_string(outcome, K); }

CalibrationTable dyadic_table(int K) {
  if (K < 0) throw ConfigError("K must be non-negative");
  CalibrationTable t;
  t.K = K;
  const std::size_t n = std::size_t{1} << (K + 1);
  for (std::size_t j = 0; j < n; ++j) t.phase.push_back(kTwoPi * static_cast<double>(j) / n);
  return t;
}

ProtocolConfig::ProtocolConfig(QubitState state)
    : K(state.qubits() - 1), input(std::move(state)) {}

void ProtocolConfig::validate() const {
  if (K < 0) throw ConfigError("K must be non-negative");
  if (input.qubits() != K + 1) throw ConfigError("input state does not have K+1 qubits");
  if (estimator == Estimator::Calibrated) {
    if (!calibration) throw ConfigError("calibrated estimator needs a calibration table");
    if (calibration->K != K || calibration->size() != (std::size_t{1} << (K + 1))) {
      throw ConfigError("calibration table does not match K");
    }
    for (double v : calibration->phase) {
      if (!(v >= 0.0 && v < kTwoPi)) throw ConfigError("calibration entry outside [0, 2 pi)");
    }
  }
}

std::size_t ProtocolRun::outcome() const {
  const int K = static_cast<int>(bits.size()) - 1;
  std::size_t j = 0;
  for (int k = 0; k <= K; ++k) j |= static_cast<std::size_t>(bits[k]) << (K - k);
  return j;
}

BitConvention bit_convention_check() {
  for (BitConvention conv : {BitConvention{0, 1}, BitConvention{1, 0}}) {
    bool ok = true;
    for (int K = 0; K <= 2 && ok; ++K) {
      const auto probe = qpea_state(K);
      const std::size_t n = std::size_t{1} << (K + 1);
      for (std::size_t j = 0; j < n && ok; ++j) {
        const auto p = distribution_with(probe, K, kTwoPi * static_cast<double>(j) / n, conv, true);
        ok = p[j] >= 1.0 - 1e-9;
      }
    }
    if (ok) return conv;
  }
  throw NumericError("no bit convention reproduces dyadic determinism");
}

Eigen::Matrix2cd phase_unitary(long long m, double phi) {
  if (m < 1) throw ConfigError("phase power must be at least 1");
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = std::polar(1.0, static_cast<double>(m) * phi);
  return u;
}

Eigen::Matrix2cd feedback_rotation(double theta) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  r(0, 0) = std::polar(1.0, theta / 2.0);
  r(1, 1) = std::polar(1.0, -theta / 2.0);
  return r;
}

QubitState qpea_state(int K) {
  const auto d = Eigen::Index{1} << (K + 1);
  return QubitState::from_ket(Eigen::VectorXcd::Constant(d, 1.0 / std::sqrt(double(d))));
}

QubitState optimal_probe(int K) {
  const auto psi = optimal_amplitudes((1 << (K + 1)) - 1);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
  for (std::size_t n = 0; n < psi.size(); ++n) v(static_cast<Eigen::Index>(n)) = psi[n];
  return QubitState::from_ket(v);
}

Rng run_stream(std::uint64_t seed, std::uint64_t run_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run_index),
                    static_cast<std::uint32_t>(run_index >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double estimate_phase(std::size_t outcome, int K, Estimator estimator,
                      const std::optional<CalibrationTable>& table) {
  const std::size_t n = std::size_t{1} << (K + 1);
  if (outcome >= n) throw ConfigError("outcome index out of range");
  if (estimator == Estimator::Calibrated) {
    if (!table) throw ConfigError("calibrated estimator needs a calibration table");
    return table->phase.at(outcome);
  }
  return kTwoPi * static_cast<double>(outcome) / static_cast<double>(n);
}

ProtocolRun run_protocol(const ProtocolConfig& config, double phi_true, Rng& rng) {
  config.validate();
  if (!std::isfinite(phi_true)) throw ConfigError("true phase must be finite");
  return sample(config, wrap(phi_true), rng);
}

ProtocolRun run_protocol(const ProtocolConfig& config, double phi_true) {
  Rng rng = run_stream(config.seed, 0);
  return run_protocol(config, phi_true, rng);
}

std::vector<ProtocolRun> run_ensemble(const ProtocolConfig& config, std::size_t n_ens) {
  config.validate();
  if (n_ens == 0) throw ConfigError("ensemble size must be positive");
  std::vector<ProtocolRun> runs(n_ens);
  parallel_for(n_ens, [&](std::size_t i) {
    Rng rng = run_stream(config.seed, i);
    const double phi = wrap(kTwoPi * uniform01(rng));
    runs[i] = sample(config, phi, rng);
  });
  return runs;
}

std::vector<double> outcome_distribution(const ProtocolConfig& config, double phi) {
  config.validate();
  auto p = distribution_with(config.input, config.K, phi, kBitConvention,
                             config.feedback == Feedback::On);
  double total = 0.0;
  for (double& v : p) {
    if (v < 0.0 && v > -1e-12) v = 0.0;
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw NumericError("outcome probabilities do not sum to one");
  }
  return p;
}

OutcomeDistribution tabulate_outcomes(const ProtocolConfig& config, std::size_t grid_points) {
  if (grid_points < 2) throw ConfigError("phase grid needs at least two points");
  config.validate();
  OutcomeDistribution dist;
  dist.K = config.K;
  const auto n = Eigen::Index{1} << (config.K + 1);
  dist.prob.resize(static_cast<Eigen::Index>(grid_points), n);
  dist.phi.resize(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    dist.phi[g] = kTwoPi * static_cast<double>(g) / static_cast<double>(grid_points);
  }
  parallel_for(grid_points, [&](std::size_t g) {
    const auto p = outcome_distribution(config, dist.phi[g]);
    for (Eigen::Index j = 0; j < n; ++j) dist.prob(static_cast<Eigen::Index>(g), j) = p[j];
  });
  return dist;
}

}  // namespace hlpe
