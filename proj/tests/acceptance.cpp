// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hlpe/circuits.hpp"
#include "hlpe/cli.hpp"
#include "hlpe/hpea.hpp"
#include "hlpe/io.hpp"
#include "hlpe/metrics.hpp"
#include "hlpe/noise.hpp"

using namespace hlpe;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances and budgets.
constexpr double kTolGate = 1e-9;
constexpr double kTolFidelity = 1e-9;
constexpr double kTolGhz = 1e-9;
constexpr double kTolAlphaPrinted = 1e-6;
constexpr double kTolHl = 1e-6;
constexpr double kStochasticSigmas = 3.0;
constexpr std::size_t kEnsembleHl = 50000;
constexpr double kTolQpea = 1e-15;
constexpr double kTolQpeaPrinted = 5e-7;
constexpr double kTolSnlOptimized = 1e-4;
constexpr double kTolSnlPublished = 1e-6;
constexpr double kTolHom = 1e-10;
constexpr std::size_t kEnsembleSweep = 10000;
constexpr double kZeta = 0.13;
constexpr double kCrossLow = 0.92;
constexpr double kCrossHigh = 0.95;
constexpr double kEpsFixed = 0.05;
constexpr double kTolDyadic = 1e-9;
constexpr std::size_t kPdfGrid = 4096;
constexpr double kRhoExpTarget = 0.445;
constexpr double kRhoExpTol = 0.01;
constexpr std::uint64_t kSeed = 20240601;

const AngleSet kPublishedN7{{0.0, 0.0, 2.31099, 1.32133, 1.32133, 0.843774, -0.830605}};
constexpr double kSnlN3 = 0.655845;
constexpr double kSnlN7 = 0.232688;

int failures = 0;

struct Outcome {
  bool pass;
  std::string detail;
};

void criterion(const std::string& id, const std::string& title, double budget_s,
               const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << ": " << o.detail
            << " (" << std::fixed << std::setprecision(2) << secs << " s)" << std::endl;
  std::cout.unsetf(std::ios::floatfield);
}

void info(const std::string& text) { std::cout << "       " << text << std::endl; }

std::string fmt(double v, int digits = 7) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::array<Complex, 2> random_qubit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Complex a(g(rng), g(rng));
  Complex b(g(rng), g(rng));
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  return {a / n, b / n};
}

FockPolynomial photon(std::size_t h, std::size_t v, std::array<Complex, 2> q) {
  const auto reg = canonical_registry();
  FockPolynomial p(reg);
  Occupation o(reg->size(), 0);
  o[h] = 1;
  p.add(o, q[0]);
  o[h] = 0;
  o[v] = 1;
  p.add(o, q[1]);
  return p;
}

double gate_probability(const LinearNetwork& net, const FockPolynomial& input) {
  const auto circuit = make_circuit(canonical_registry(), {{net, true, "gate"}});
  const auto out = run_circuit(circuit, input);
  return post_select(out, one_photon_per_pair(out.registry()->size(), photon_pairs()), false)
      .probability;
}

struct SweepPoint {
  double param;
  HolevoStats stats;
  double exact;
};

SweepPoint sweep_point(double param, const NoiseConfig& noise, NoiseMode mode) {
  const auto g = noisy_probe_state(noise, mode);
  ProtocolConfig cfg(g.state);
  cfg.seed = kSeed;
  const auto stats = holevo_from_runs(run_ensemble(cfg, kEnsembleSweep));
  const auto dist = tabulate_outcomes(cfg, kPdfGrid);
  const double exact = mean_deviation(dist, estimator_phases(2, Estimator::Binary, std::nullopt));
  return {param, stats, exact};
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= n; ++i) v.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  return v;
}

// First xi (scanning downward from 1) where the curve reaches the threshold,
// by linear interpolation between neighbouring points. NaN if it never does.
double crossing(const std::vector<double>& x, const std::vector<double>& y, double level) {
  for (std::size_t i = x.size() - 1; i > 0; --i) {
    if (y[i] < level && y[i - 1] >= level) {
      const double t = (level - y[i]) / (y[i - 1] - y[i]);
      return x[i] + t * (x[i - 1] - x[i]);
    }
  }
  return std::nan("");
}

struct SpdcCheck {
  bool monotone = true;
  bool sub_snl = true;
  std::string values;
};

SpdcCheck spdc_sweep(bool vary_eps1, SourceNormalization source) {
  SpdcCheck c;
  std::vector<SweepPoint> pts;
  for (double e : grid(0.05, 0.10, 0.01)) {
    NoiseConfig noise;
    noise.zeta = kZeta;
    noise.source = source;
    noise.eps1 = vary_eps1 ? e : kEpsFixed;
    noise.eps2 = vary_eps1 ? kEpsFixed : e;
    pts.push_back(sweep_point(e, noise, NoiseMode::SpdcHigherOrder));
  }
  const double snl = snl_variance(kPublishedN7);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& s = pts[i].stats;
    if (!(s.deviation < snl)) c.sub_snl = false;
    if (i > 0) {
      const auto& prev = pts[i - 1].stats;
      const double slack = std::max(prev.deviation_stderr, s.deviation_stderr);
      if (s.deviation < prev.deviation - slack) c.monotone = false;
    }
    c.values += (i ? " " : "") + fmt(pts[i].param, 3) + ":" + fmt(s.deviation, 4);
  }
  return c;
}

}  // namespace

int main() {
  std::cout << "Acceptance run, seed " << kSeed << std::endl;

  criterion("C1", "gate success probabilities", 1.0, [] {
    std::mt19937_64 rng(kSeed);
    double worst_ncn = 0.0;
    double worst_cn = 0.0;
    for (int i = 0; i < 20; ++i) {
      std::normal_distribution<double> g;
      std::array<Complex, 4> alpha;
      double n = 0.0;
      for (auto& a : alpha) {
        a = Complex(g(rng), g(rng));
        n += std::norm(a);
      }
      for (auto& a : alpha) a /= std::sqrt(n);
      worst_ncn = std::max(worst_ncn, std::abs(gate_probability(build_ncn(), prepare_input(alpha)) - 0.5));
      const auto in = photon(mode::a_H, mode::a_V, random_qubit(rng)) *
                      photon(mode::b_H, mode::b_V, random_qubit(rng)) *
                      photon(mode::c_H, mode::c_V, random_qubit(rng));
      worst_cn = std::max(worst_cn, std::abs(gate_probability(build_cn(), in) - 1.0 / 9.0));
    }
    const double full = generate_optimal_state().success_probability;
    const double dfull = std::abs(full - 1.0 / 18.0);
    return Outcome{worst_ncn <= kTolGate && worst_cn <= kTolGate && dfull <= kTolGate,
                   "max |p_NCN - 1/2| = " + fmt(worst_ncn, 3) + ", max |p_CN - 1/9| = " +
                       fmt(worst_cn, 3) + ", p_full = " + fmt(full, 12)};
  });

  criterion("C2", "optimal-state construction", 1.0, [] {
    const auto g = generate_optimal_state();
    const double f = fidelity(g.state, optimal_target().density());
    const auto alpha = optimal_alpha();
    const double printed[4] = {0.228013, 0.428525, 0.577350, 0.656539};
    double ghz_err = 0.0;
    double print_err = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double proj = fidelity(g.state, ghz_target(j).density());
      ghz_err = std::max(ghz_err, std::abs(proj - alpha[j] * alpha[j]));
      print_err = std::max(print_err, std::abs(alpha[j] - printed[j]));
    }
    return Outcome{f >= 1.0 - kTolFidelity && ghz_err <= kTolGhz && print_err <= kTolAlphaPrinted,
                   "F = " + fmt(f, 12) + ", max GHZ projection error " + fmt(ghz_err, 3) +
                       ", max |alpha - printed| " + fmt(print_err, 3)};
  });

  criterion("C3", "exact Heisenberg limit", 30.0, [] {
    ProtocolConfig cfg(generate_optimal_state().state);
    const auto dist = tabulate_outcomes(cfg, kPdfGrid);
    cfg.estimator = Estimator::Calibrated;
    cfg.calibration = calibrate_estimator(dist);
    cfg.seed = kSeed;
    const double exact = mean_deviation(dist, estimator_phases(2, Estimator::Calibrated, cfg.calibration));
    const double hl = std::pow(std::tan(kPi / 9.0), 2);
    const auto stats = holevo_from_runs(run_ensemble(cfg, kEnsembleHl));
    const double z = std::abs(stats.deviation - hl) / stats.deviation_stderr;
    return Outcome{std::abs(exact - hl) <= kTolHl && z <= kStochasticSigmas,
                   "semi-analytic D_H = " + fmt(exact, 9) + " vs " + fmt(hl, 9) +
                       ", stochastic D_H = " + fmt(stats.deviation, 5) + " +/- " +
                       fmt(stats.deviation_stderr, 2) + " (" + fmt(z, 2) + " sigma)"};
  });

  criterion("C4", "phase-estimation bounds", 60.0, [] {
    const double q = qpea_bound(7);
    const auto n3 = snl_optimize(3, 64, kSeed);
    const auto n7 = snl_optimize(7, 64, kSeed);
    const double pub = snl_variance(kPublishedN7);
    const bool ok = std::abs(q - 15.0 / 49.0) <= kTolQpea &&
                    std::abs(q - 0.306122) <= kTolQpeaPrinted &&
                    std::abs(n3.variance - kSnlN3) <= kTolSnlOptimized &&
                    std::abs(n7.variance - kSnlN7) <= kTolSnlOptimized &&
                    std::abs(pub - kSnlN7) <= kTolSnlPublished;
    return Outcome{ok, "qpea(7) = " + fmt(q, 9) + ", SNL(3) = " + fmt(n3.variance, 9) +
                           ", SNL(7) = " + fmt(n7.variance, 9) + ", published angles " +
                           fmt(pub, 9)};
  });

  criterion("C5", "HOM model", 5.0, [] {
    double worst = 0.0;
    double worst_nu = 0.0;
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        const double x1 = i / 9.0;
        const double x2 = j / 9.0;
        const auto h = hom_visibility(x1, x2);
        worst = std::max(worst, std::abs(hom_coincidence(x1, x2) - 0.5 * (1.0 - x1 * x2)));
        worst = std::max(worst, std::abs(h.p_coin - 0.5 * (1.0 - x1 * x2)));
        // Visibility from the brute-force rate against the distinguishable maximum 1/2.
        const double nu = (0.5 - hom_coincidence(x1, x2)) / 0.5;
        worst_nu = std::max(worst_nu, std::abs(nu - x1 * x2));
      }
    }
    return Outcome{worst <= kTolHom && worst_nu <= 2 * kTolHom,
                   "max coincidence error " + fmt(worst, 3) + ", max visibility error " +
                       fmt(worst_nu, 3)};
  });

  criterion("C6", "mode-mismatch sweep", 600.0, [] {
    std::vector<double> xs = grid(0.90, 1.00, 0.01);
    std::vector<double> stoch;
    std::vector<double> exact;
    HolevoStats at_one{};
    std::string values;
    for (double xi : xs) {
      NoiseConfig noise;
      noise.xi = xi;
      noise.zeta = kZeta;
      const auto p = sweep_point(xi, noise, NoiseMode::Mismatch);
      stoch.push_back(p.stats.deviation);
      exact.push_back(p.exact);
      if (xi == 1.0) at_one = p.stats;
      values += (values.empty() ? "" : " ") + fmt(xi, 3) + ":" + fmt(p.stats.deviation, 4);
    }
    info("D_H by xi: " + values);
    const double snl = snl_variance(kPublishedN7);
    const double cross = crossing(xs, stoch, snl);
    info("crossing from exact averages: " + fmt(crossing(xs, exact, snl), 5));
    const double z = std::abs(at_one.deviation - hl_bound(7)) / at_one.deviation_stderr;
    const bool ok = z <= kStochasticSigmas && cross >= kCrossLow && cross <= kCrossHigh;
    return Outcome{ok, "D_H(1) = " + fmt(at_one.deviation, 5) + " (" + fmt(z, 2) +
                           " sigma from HL), SNL crossing at xi = " + fmt(cross, 5)};
  });

  criterion("C7", "SPDC higher-order sweep", 600.0, [] {
    const auto e1 = spdc_sweep(true, SourceNormalization::KetAmplitude);
    const auto e2 = spdc_sweep(false, SourceNormalization::KetAmplitude);
    info("vary eps1: " + e1.values);
    info("vary eps2: " + e2.values);
    const auto op = spdc_sweep(true, SourceNormalization::OperatorPower);
    info("operator-form source, vary eps1 (not gated): " + op.values);
    const bool ok = e1.monotone && e1.sub_snl && e2.monotone && e2.sub_snl;
    return Outcome{ok, std::string("monotone ") + (e1.monotone && e2.monotone ? "yes" : "no") +
                           ", sub-SNL " + (e1.sub_snl && e2.sub_snl ? "yes" : "no")};
  });

  criterion("C8", "dyadic determinism", 10.0, [] {
    ProtocolConfig q(qpea_state(2));
    double worst = 1.0;
    for (int j = 0; j < 8; ++j) {
      const auto run = run_protocol(q, 2 * kPi * j / 8);
      if (static_cast<int>(run.outcome()) != j) worst = 0.0;
      worst = std::min(worst, outcome_distribution(q, 2 * kPi * j / 8)[j]);
    }
    ProtocolConfig opt(generate_optimal_state().state);
    const auto dist = tabulate_outcomes(opt, kPdfGrid);
    const double step = 2 * kPi / kPdfGrid;
    double worst_peak = 0.0;
    for (Eigen::Index j = 0; j < 8; ++j) {
      Eigen::Index arg = 0;
      dist.prob.col(j).maxCoeff(&arg);
      const double off = std::abs(std::remainder(dist.phi[arg] - 2 * kPi * j / 8, 2 * kPi));
      worst_peak = std::max(worst_peak, off);
    }
    return Outcome{worst >= 1.0 - kTolDyadic && worst_peak <= step * (1 + 1e-9),
                   "min P(bits of j | 2 pi j/8) = " + fmt(worst, 12) +
                       ", max peak offset " + fmt(worst_peak / step, 3) + " grid steps"};
  });

  criterion("C9", "property suites", 120.0, [] {
    std::mt19937_64 rng(kSeed);
    std::vector<std::string> bad;
    // Norm conservation under random networks.
    {
      std::normal_distribution<double> g;
      auto reg = make_registry({"m0", "m1", "m2", "m3", "m4", "m5"});
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXcd z(6, 6);
        for (int i = 0; i < 6; ++i) {
          for (int j = 0; j < 6; ++j) z(i, j) = Complex(g(rng), g(rng));
        }
        Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
        FockPolynomial s(reg);
        s.add({1, 1, 0, 1, 0, 0}, Complex(g(rng), g(rng)));
        s.add({0, 2, 0, 0, 0, 1}, Complex(g(rng), g(rng)));
        s.add({0, 0, 0, 0, 3, 0}, Complex(g(rng), g(rng)));
        s = normalized(s);
        worst = std::max(worst, std::abs(apply_network(s, LinearNetwork(reg, u)).squared_norm() - 1.0));
      }
      if (worst > 1e-10) bad.push_back("norm conservation");
    }
    // Sampling against enumeration.
    {
      ProtocolConfig cfg(optimal_probe(2));
      const double phi = 1.3;
      const auto p = outcome_distribution(cfg, phi);
      std::vector<double> f(8, 0.0);
      Rng r = run_stream(kSeed, 7);
      const int n = 50000;
      for (int i = 0; i < n; ++i) f[run_protocol(cfg, phi, r).outcome()] += 1.0 / n;
      for (int j = 0; j < 8; ++j) {
        if (std::abs(f[j] - p[j]) > 5 * std::sqrt(p[j] * (1 - p[j]) / n) + 1e-9) {
          bad.push_back("sampling vs enumeration");
          break;
        }
      }
    }
    // Unit mass of the ideal densities.
    for (const auto& c : {qpea_coefficients(7), hpea_coefficients(7)}) {
      double mass = 0.0;
      for (int g = 0; g < 256; ++g) mass += analytic_pdf(c, 0.0, 2 * kPi * g / 256) * 2 * kPi / 256;
      if (std::abs(mass - 1.0) > 1e-12) bad.push_back("pdf unit mass");
    }
    // Estimator and bound ordering.
    {
      if (!(hl_bound(7) < snl_variance(kPublishedN7) && snl_variance(kPublishedN7) < qpea_bound(7))) {
        bad.push_back("bound ordering");
      }
      std::normal_distribution<double> g;
      for (int t = 0; t < 5; ++t) {
        Eigen::MatrixXcd a(8, 2);
        for (int i = 0; i < 8; ++i) {
          for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(rng), g(rng));
        }
        Eigen::MatrixXcd rho = a * a.adjoint();
        rho /= rho.trace().real();
        ProtocolConfig cfg{QubitState(rho)};
        const auto dist = tabulate_outcomes(cfg, 720);
        const auto table = calibrate_estimator(dist);
        if (mean_resultant(dist, table.phase) <
            mean_resultant(dist, estimator_phases(2, Estimator::Binary, std::nullopt)) - 1e-12) {
          bad.push_back("estimator optimality");
          break;
        }
      }
    }
    // Seeded CLI determinism.
    {
      const char* argv[] = {"hlpe", "sweep-mismatch", "--n-ens", "500", "--min", "0.97", "--seed", "5"};
      std::ostringstream o1, o2, e1, e2;
      const int c1 = run_cli(8, argv, o1, e1);
      const int c2 = run_cli(8, argv, o2, e2);
      if (c1 != 0 || c2 != 0 || o1.str() != o2.str()) bad.push_back("CLI determinism");
    }
    std::string detail = bad.empty() ? "all suites hold" : "failed:";
    for (const auto& b : bad) detail += " " + b;
    return Outcome{bad.empty(), detail};
  });

  if (const char* path = std::getenv("HLPE_RHO_EXP")) {
    criterion("C9", "measured-state deviation", 60.0, [path] {
      const auto loaded = load_density_matrix(path);
      ProtocolConfig cfg(loaded.state);
      const auto dist = tabulate_outcomes(cfg, kPdfGrid);
      const auto table = calibrate_estimator(dist);
      const double d = mean_deviation(dist, estimator_phases(cfg.K, Estimator::Calibrated, table));
      return Outcome{std::abs(d - kRhoExpTarget) <= kRhoExpTol,
                     "calibrated D_H = " + fmt(d, 5) + " vs " + fmt(kRhoExpTarget, 3)};
    });
  } else {
    std::cout << "[SKIP] C9 measured-state deviation: set HLPE_RHO_EXP to a density file"
              << std::endl;
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
