#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hlpe/errors.hpp"
#include "hlpe/hpea.hpp"
#include "hlpe/qubit_state.hpp"

namespace hlpe {

struct HolevoStats {
  double mu;
  double deviation;  // mu^-2 - 1
  std::size_t n_ens;
  double mu_stderr;
  double deviation_stderr;
};

// mu^-2 - 1; throws DeviationOverflow when mu < 1e-12.
double holevo_deviation(double mu);

HolevoStats holevo_from_runs(std::span<const ProtocolRun> runs);

// Per-outcome estimates for the chosen estimator.
std::vector<double> estimator_phases(int K, Estimator estimator,
                                     const std::optional<CalibrationTable>& table);

// |sum_j P(j|phi) e^{i(phi - est_j)}|^-2 - 1 at one phase.
double phase_dependent_deviation(const std::vector<double>& probabilities,
                                 const std::vector<double>& estimates, double phi);

// Resultant over the whole grid (trapezoid rule on the periodic grid).
double mean_resultant(const OutcomeDistribution& dist, const std::vector<double>& estimates);
double mean_deviation(const OutcomeDistribution& dist, const std::vector<double>& estimates);

// Ideal outcome density (1/2pi)|sum_n C_n e^{-in(phi_est - phi)}|^2 for unit-norm C.
double analytic_pdf(const Eigen::VectorXcd& coeffs, double phi, double phi_est);
Eigen::VectorXcd qpea_coefficients(int N);
Eigen::VectorXcd hpea_coefficients(int N);

double hl_bound(int N);
double qpea_bound(int N);

struct AngleSet {
  std::vector<double> theta;
};

// Mean resultant of the best non-adaptive single-photon strategy with the
// given measurement angles.
double snl_mu(const AngleSet& angles);
double snl_variance(const AngleSet& angles);

struct SnlResult {
  AngleSet angles;
  double variance;
};

SnlResult snl_optimize(int m, int restarts = 64, std::uint64_t seed = 0, double tol = 1e-8);

CalibrationTable calibrate_estimator(const OutcomeDistribution& dist);

template <typename D>
double purity(const Eigen::MatrixBase<D>& rho) {
  return (rho * rho).trace().real();
}

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. When either state is
// pure it is evaluated as <psi|other|psi>, which avoids square roots of
// rounding-level eigenvalues.
template <typename DA, typename DB>
double fidelity(const Eigen::MatrixBase<DA>& rho, const Eigen::MatrixBase<DB>& sigma) {
  using Mat = Eigen::MatrixXcd;
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw ConfigError("fidelity needs matrices of the same dimension");
  }
  const Mat a = (rho + rho.adjoint()) / 2.0;
  const Mat b = (sigma + sigma.adjoint()) / 2.0;
  for (const Mat* pure : {&a, &b}) {
    if (std::abs(purity(*pure) - 1.0) < 1e-10) {
      Eigen::SelfAdjointEigenSolver<Mat> es(*pure);
      const Eigen::VectorXcd psi = es.eigenvectors().col(es.eigenvectors().cols() - 1);
      const Mat& other = pure == &a ? b : a;
      return (psi.adjoint() * other * psi)(0, 0).real();
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  const Mat sqrt_a = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  const Mat inner = sqrt_a * b * sqrt_a;
  Eigen::SelfAdjointEigenSolver<Mat> es2(Mat((inner + inner.adjoint()) / 2.0),
                                         Eigen::EigenvaluesOnly);
  const double root_trace = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return root_trace * root_trace;
}

inline double fidelity(const QubitState& rho, const QubitState& sigma) {
  return fidelity(rho.matrix(), sigma.matrix());
}
inline double purity(const QubitState& rho) { return purity(rho.matrix()); }

}  // namespace hlpe
