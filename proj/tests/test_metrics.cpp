#include <doctest.h>

#include <numbers>
#include <random>

#include "hlpe/circuits.hpp"
#include "hlpe/errors.hpp"
#include "hlpe/metrics.hpp"
#include "hlpe/simplex.hpp"
#include "oracles.hpp"

using namespace hlpe;

namespace {

constexpr double kPi = std::numbers::pi;
using Complex = std::complex<double>;

const AngleSet kPublishedN7{{0.0, 0.0, 2.31099, 1.32133, 1.32133, 0.843774, -0.830605}};

QubitState random_state(int qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const int d = 1 << qubits;
  Eigen::MatrixXcd a(d, 2);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  Eigen::MatrixXcd rho = a * a.adjoint();
  rho /= rho.trace().real();
  return QubitState(rho);
}

}  // namespace

TEST_CASE("Holevo deviation") {
  CHECK(holevo_deviation(1.0) == 0.0);
  CHECK(holevo_deviation(0.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(holevo_deviation(1e-13), DeviationOverflow);
  CHECK_THROWS_AS(holevo_deviation(std::nan("")), DeviationOverflow);

  std::vector<ProtocolRun> exact(10, ProtocolRun{1.0, {0}, 1.0});
  const auto s = holevo_from_runs(exact);
  CHECK(s.mu == doctest::Approx(1.0));
  CHECK(s.deviation == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.mu_stderr == doctest::Approx(0.0));

  std::vector<ProtocolRun> spread;
  for (int i = 0; i < 1000; ++i) spread.push_back({0.0, {0}, i % 2 ? 0.3 : -0.3});
  const auto t = holevo_from_runs(spread);
  CHECK(t.mu == doctest::Approx(std::cos(0.3)).epsilon(1e-12));
  CHECK(t.n_ens == 1000);
  CHECK(t.deviation_stderr == doctest::Approx(2.0 * t.mu_stderr / std::pow(t.mu, 3)));
  CHECK_THROWS_AS(holevo_from_runs({}), ConfigError);
}

TEST_CASE("bounds") {
  CHECK(hl_bound(7) == doctest::Approx(0.132474).epsilon(1e-5));
  CHECK(hl_bound(3) == doctest::Approx(0.527864).epsilon(1e-5));
  CHECK(qpea_bound(7) == doctest::Approx(15.0 / 49.0).epsilon(1e-15));
  CHECK(std::abs(qpea_bound(7) - 0.306122) < 1e-6);
  CHECK_THROWS_AS(hl_bound(0), ConfigError);
}

TEST_CASE("ideal density functions") {
  for (int N : {1, 3, 7}) {
    for (const auto& c : {qpea_coefficients(N), hpea_coefficients(N)}) {
      const int grid = 512;
      double mass = 0.0;
      for (int g = 0; g < grid; ++g) mass += analytic_pdf(c, 0.4, 2 * kPi * g / grid);
      CHECK(mass * 2 * kPi / grid == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(analytic_pdf(qpea_coefficients(N), 1.0, 1.0) == doctest::Approx((N + 1) / (2 * kPi)));
  }
  CHECK_THROWS_AS(analytic_pdf(Eigen::VectorXcd::Ones(3), 0.0, 0.0), ConfigError);

  const auto c = hpea_coefficients(7);
  const auto probe = optimal_probe(2);
  ProtocolConfig cfg(probe);
  for (double phi : {0.0, 0.9, 2.5, 4.1}) {
    const auto p = outcome_distribution(cfg, phi);
    for (std::size_t y = 0; y < 8; ++y) {
      const double expect = 2 * kPi / 8 * analytic_pdf(c, phi, 2 * kPi * y / 8);
      CHECK(std::abs(p[y] - expect) < 1e-12);
    }
  }
}

TEST_CASE("property: SNL resultant matches quadrature") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  std::uniform_int_distribution<int> size(1, 7);
  for (int t = 0; t < 50; ++t) {
    AngleSet a;
    const int m = size(rng);
    for (int i = 0; i < m; ++i) a.theta.push_back(u(rng));
    CHECK(std::abs(snl_mu(a) - oracle::snl_mu(a.theta)) < 1e-12);
  }
  CHECK_THROWS_AS(snl_mu(AngleSet{}), ConfigError);
}

TEST_CASE("SNL values") {
  CHECK(snl_mu(AngleSet{{0.7}}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(snl_variance(AngleSet{{0.0}}) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(snl_variance(kPublishedN7) - 0.232688) < 1e-6);
  const auto n3 = snl_optimize(3, 16, 0);
  CHECK(std::abs(n3.variance - 0.655845) < 1e-4);
  CHECK(n3.angles.theta.size() == 3);
  CHECK(n3.angles.theta[0] == 0.0);
  CHECK(snl_variance(n3.angles) == doctest::Approx(n3.variance).epsilon(1e-12));
  const auto n7 = snl_optimize(7, 16, 0);
  CHECK(std::abs(n7.variance - 0.232688) < 1e-4);
  CHECK(hl_bound(7) < n7.variance);
  CHECK(n7.variance < qpea_bound(7));
  CHECK_THROWS_AS(snl_optimize(0), ConfigError);
}

TEST_CASE("Nelder-Mead") {
  const auto rosen = [](const Eigen::VectorXd& x) {
    return std::pow(1.0 - x(0), 2) + 100.0 * std::pow(x(1) - x(0) * x(0), 2);
  };
  const auto r = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), 0.5, 1e-14, 20000);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));
  const auto capped = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), 0.5, 1e-14, 10);
  CHECK_FALSE(capped.converged);
}

TEST_CASE("calibrated estimator for the optimal probe") {
  ProtocolConfig cfg(optimal_probe(2));
  const auto dist = tabulate_outcomes(cfg, 4096);
  const auto table = calibrate_estimator(dist);
  const auto dyadic = dyadic_table(2);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(std::abs(std::remainder(table.phase[j] - dyadic.phase[j], 2 * kPi)) < 1e-6);
  }
  const auto est = estimator_phases(2, Estimator::Calibrated, table);
  CHECK(std::abs(mean_deviation(dist, est) - hl_bound(7)) < 1e-6);
  CHECK_THROWS_AS(calibrate_estimator(tabulate_outcomes(cfg, 100)), ConfigError);
}

TEST_CASE("property: the calibrated estimator is never worse") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 20; ++t) {
    ProtocolConfig cfg(random_state(3, rng));
    const auto dist = tabulate_outcomes(cfg, 720);
    const double mu_bin = mean_resultant(dist, estimator_phases(2, Estimator::Binary, std::nullopt));
    const auto table = calibrate_estimator(dist);
    const double mu_cal = mean_resultant(dist, estimator_phases(2, Estimator::Calibrated, table));
    CHECK(mu_cal >= mu_bin - 1e-12);
    std::vector<double> shifted = table.phase;
    for (auto& v : shifted) v += 0.05;
    CHECK(mean_resultant(dist, shifted) <= mu_cal + 1e-12);
  }
}

TEST_CASE("phase-dependent deviation has minima at multiples of pi/4") {
  ProtocolConfig cfg(optimal_probe(2));
  const auto est = estimator_phases(2, Estimator::Binary, std::nullopt);
  const int grid = 2048;
  std::vector<double> d(grid);
  for (int g = 0; g < grid; ++g) {
    const double phi = 2 * kPi * g / grid;
    d[g] = phase_dependent_deviation(outcome_distribution(cfg, phi), est, phi);
  }
  int minima = 0;
  for (int g = 0; g < grid; ++g) {
    const double prev = d[(g + grid - 1) % grid];
    const double next = d[(g + 1) % grid];
    if (d[g] < prev && d[g] <= next) {
      ++minima;
      CHECK(g % (grid / 8) == 0);
    }
  }
  CHECK(minima == 8);
}

TEST_CASE("fidelity and purity") {
  const auto mixed = QubitState::maximally_mixed(2);
  CHECK(purity(mixed) == doctest::Approx(0.25));
  CHECK(fidelity(mixed, mixed) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::VectorXcd k0 = Eigen::VectorXcd::Zero(4);
  k0(0) = 1.0;
  Eigen::VectorXcd k1 = Eigen::VectorXcd::Zero(4);
  k1(3) = 1.0;
  const auto p0 = QubitState::from_ket(k0);
  CHECK(fidelity(p0, QubitState::from_ket(k1)) == doctest::Approx(0.0));
  CHECK(fidelity(p0, mixed) == doctest::Approx(0.25));
  CHECK(fidelity(mixed, p0) == doctest::Approx(0.25));

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  a(0, 0) = 0.7;
  a(1, 1) = 0.3;
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 2);
  b(0, 0) = 0.2;
  b(1, 1) = 0.8;
  const double expect = std::pow(std::sqrt(0.7 * 0.2) + std::sqrt(0.3 * 0.8), 2);
  CHECK(fidelity(QubitState(a), QubitState(b)) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(fidelity(Eigen::MatrixXcd(a), Eigen::MatrixXcd::Identity(4, 4)), ConfigError);
}
