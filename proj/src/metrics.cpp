#include "hlpe/metrics.hpp"

#include <numbers>
#include <string>

#include "hlpe/parallel.hpp"
#include "hlpe/simplex.hpp"

namespace hlpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w >= kTwoPi ? 0.0 : w;
}

void check_resources(int N) {
  if (N < 1) throw ConfigError("resource count must be at least 1");
}

// Laurent coefficients in z = e^{i phi}, exponents -m..m stored at offset m.
using Laurent = std::vector<std::complex<double>>;

struct SnlWalker {
  const std::vector<double>& theta;
  int m;
  std::vector<Laurent> levels;
  double total = 0.0;

  void walk(int depth) {
    if (depth == m) {
      total += std::abs(levels[depth][m - 1]);
      return;
    }
    const auto up = 0.25 * std::polar(1.0, -theta[depth]);  // z coefficient for u = +1
    const auto down = std::conj(up);                        // z^-1 coefficient
    const Laurent& cur = levels[depth];
    Laurent& next = levels[depth + 1];
    for (int u : {+1, -1}) {
      std::fill(next.begin(), next.end(), 0.0);
      const double s = u;
      for (int e = 0; e <= 2 * m; ++e) {
        const auto c = cur[e];
        if (c == 0.0) continue;
        next[e] += 0.5 * c;
        if (e + 1 <= 2 * m) next[e + 1] += s * up * c;
        if (e >= 1) next[e - 1] += s * down * c;
      }
      walk(depth + 1);
    }
  }
};

}  // namespace

double holevo_deviation(double mu) {
  if (!(mu >= 1e-12)) {
    throw DeviationOverflow("mean resultant length " + std::to_string(mu) +
                            " is below 1e-12: deviation overflow");
  }
  return 1.0 / (mu * mu) - 1.0;
}

HolevoStats holevo_from_runs(std::span<const ProtocolRun> runs) {
  if (runs.empty()) throw ConfigError("need at least one protocol run");
  std::complex<double> sum = 0.0;
  for (const auto& r : runs) sum += std::polar(1.0, r.phi_true - r.phi_est);
  const double n = static_cast<double>(runs.size());
  const auto mean = sum / n;
  const double mu = std::min(1.0, std::abs(mean));
  const double deviation = holevo_deviation(mu);

  double se = 0.0;
  if (runs.size() > 1) {
    const auto dir = std::polar(1.0, -std::arg(mean));
    double ss = 0.0;
    for (const auto& r : runs) {
      const double x = (std::polar(1.0, r.phi_true - r.phi_est) * dir).real() - mu;
      ss += x * x;
    }
    se = std::sqrt(ss / (n - 1.0) / n);
  }
  return {mu, deviation, runs.size(), se, 2.0 * se / (mu * mu * mu)};
}

std::vector<double> estimator_phases(int K, Estimator estimator,
                                     const std::optional<CalibrationTable>& table) {
  const std::size_t n = std::size_t{1} << (K + 1);
  std::vector<double> est(n);
  for (std::size_t j = 0; j < n; ++j) est[j] = estimate_phase(j, K, estimator, table);
  return est;
}

double phase_dependent_deviation(const std::vector<double>& probabilities,
                                 const std::vector<double>& estimates, double phi) {
  if (probabilities.size() != estimates.size()) {
    throw ConfigError("probabilities and estimates differ in length");
  }
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    s += probabilities[j] * std::polar(1.0, phi - estimates[j]);
  }
  return holevo_deviation(std::abs(s));
}

double mean_resultant(const OutcomeDistribution& dist, const std::vector<double>& estimates) {
  if (estimates.size() != dist.outcomes()) throw ConfigError("estimate table size mismatch");
  std::complex<double> s = 0.0;
  for (std::size_t g = 0; g < dist.phi.size(); ++g) {
    for (std::size_t j = 0; j < estimates.size(); ++j) {
      s += dist.prob(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)) *
           std::polar(1.0, dist.phi[g] - estimates[j]);
    }
  }
  return std::abs(s) / static_cast<double>(dist.phi.size());
}

double mean_deviation(const OutcomeDistribution& dist, const std::vector<double>& estimates) {
  return holevo_deviation(mean_resultant(dist, estimates));
}

double analytic_pdf(const Eigen::VectorXcd& coeffs, double phi, double phi_est) {
  if (coeffs.size() == 0 || std::abs(coeffs.squaredNorm() - 1.0) > 1e-9) {
    throw ConfigError("pdf coefficients must have unit norm");
  }
  std::complex<double> s = 0.0;
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) {
    s += coeffs(n) * std::polar(1.0, -static_cast<double>(n) * (phi_est - phi));
  }
  return std::norm(s) / kTwoPi;
}

Eigen::VectorXcd qpea_coefficients(int N) {
  check_resources(N);
  return Eigen::VectorXcd::Constant(N + 1, 1.0 / std::sqrt(N + 1.0));
}

Eigen::VectorXcd hpea_coefficients(int N) {
  check_resources(N);
  Eigen::VectorXcd c(N + 1);
  for (int n = 0; n <= N; ++n) c(n) = std::sin((n + 1) * std::numbers::pi / (N + 2));
  return c / c.norm();
}

double hl_bound(int N) {
  check_resources(N);
  const double t = std::tan(std::numbers::pi / (N + 2));
  return t * t;
}

double qpea_bound(int N) {
  check_resources(N);
  return 2.0 / N + 1.0 / (static_cast<double>(N) * N);
}

double snl_mu(const AngleSet& angles) {
  const int m = static_cast<int>(angles.theta.size());
  if (m < 1 || m > 12) throw ConfigError("SNL angle sets need 1..12 angles");
  SnlWalker w{angles.theta, m, std::vector<Laurent>(m + 1, Laurent(2 * m + 1, 0.0))};
  w.levels[0][m] = 1.0;
  w.walk(0);
  return w.total;
}

double snl_variance(const AngleSet& angles) { return holevo_deviation(snl_mu(angles)); }

SnlResult snl_optimize(int m, int restarts, std::uint64_t seed, double tol) {
  if (m < 1 || m > 10) throw ConfigError("snl_optimize supports 1..10 photons");
  if (restarts < 1) throw ConfigError("need at least one restart");
  // mu is invariant under a common shift of all angles, so theta_0 = 0.
  const auto full = [m](const Eigen::VectorXd& x) {
    AngleSet a{std::vector<double>(static_cast<std::size_t>(m), 0.0)};
    for (int i = 1; i < m; ++i) a.theta[i] = x(i - 1);
    return a;
  };
  const auto objective = [&](const Eigen::VectorXd& x) { return -snl_mu(full(x)); };

  std::vector<SimplexResult> results(static_cast<std::size_t>(restarts));
  parallel_for(results.size(), [&](std::size_t r) {
    Rng rng = run_stream(seed, r);
    Eigen::VectorXd x0(m - 1);
    for (int i = 0; i < m - 1; ++i) x0(i) = kTwoPi * uniform01(rng);
    auto res = nelder_mead(objective, x0, 0.5, tol, 20000);
    // Restart from the optimum with a smaller simplex until it stops improving.
    for (int polish = 0; polish < 4; ++polish) {
      auto again = nelder_mead(objective, res.x, 0.05, tol, 20000);
      const bool better = again.value < res.value - tol;
      again.converged = again.converged && res.converged;
      res = again;
      if (!better) break;
    }
    results[r] = res;
  });

  const SimplexResult* best = nullptr;
  for (const auto& r : results) {
    if (r.converged && (!best || r.value < best->value)) best = &r;
  }
  if (!best) throw NumericError("SNL optimizer did not converge in any restart");
  AngleSet angles = full(best->x);
  for (auto& t : angles.theta) t = wrap(t);
  return {angles, holevo_deviation(-best->value)};
}

CalibrationTable calibrate_estimator(const OutcomeDistribution& dist) {
  const std::size_t g = dist.phi.size();
  if (g < 720) throw ConfigError("calibration needs a phase grid of at least 720 points");
  if (static_cast<std::size_t>(dist.prob.rows()) != g) throw ConfigError("malformed distribution");
  for (std::size_t i = 0; i < g; ++i) {
    if (std::abs(dist.phi[i] - kTwoPi * static_cast<double>(i) / static_cast<double>(g)) > 1e-9) {
      throw ConfigError("calibration needs a uniform phase grid starting at 0");
    }
  }
  CalibrationTable table;
  table.K = dist.K;
  for (std::size_t j = 0; j < dist.outcomes(); ++j) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      s += dist.prob(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
           std::polar(1.0, dist.phi[i]);
    }
    s /= static_cast<double>(g);
    if (std::abs(s) < 1e-12) {
      throw NumericError("outcome " + bit_string(j, dist.K) + " has a vanishing resultant");
    }
    table.phase.push_back(wrap(std::arg(s)));
  }
  return table;
}

}  // namespace hlpe
