#include "hlpe/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hlpe/circuits.hpp"
#include "hlpe/errors.hpp"
#include "hlpe/hpea.hpp"
#include "hlpe/io.hpp"
#include "hlpe/metrics.hpp"
#include "hlpe/noise.hpp"

namespace hlpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Published N=7 angle set for the non-adaptive single-photon reference.
const AngleSet kSnlAnglesN7{{0.0, 0.0, 2.31099, 1.32133, 1.32133, 0.843774, -0.830605}};

struct ExperimentConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_ens;
  std::optional<double> xi;
  std::optional<double> zeta;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::string state = "optimal";
  std::string out;
  std::string estimator = "binary";
  std::optional<std::size_t> grid;
  int n = 7;
  int restarts = 64;
  double xi1 = 1.0;
  double xi2 = 1.0;
  std::string kind = "outcomes";
  std::string vary = "eps1";
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> step;
  std::string layout = "heralded";
  std::string convention = "fock";
  std::string source = "ket";

  // Every parameter except the output path, in a fixed order.
  std::string canonical() const {
    std::ostringstream s;
    s << std::setprecision(17);
    auto opt = [&](const char* k, const auto& v) {
      s << k << '=';
      if (v) {
        s << *v;
      } else {
        s << '-';
      }
      s << ';';
    };
    s << "command=" << command << ";seed=" << seed << ';';
    opt("n_ens", n_ens);
    opt("xi", xi);
    opt("zeta", zeta);
    opt("eps1", eps1);
    opt("eps2", eps2);
    s << "state=" << state << ";estimator=" << estimator << ';';
    opt("grid", grid);
    s << "n=" << n << ";restarts=" << restarts << ";xi1=" << xi1 << ";xi2=" << xi2
      << ";kind=" << kind << ";vary=" << vary << ';';
    opt("min", min);
    opt("max", max);
    opt("step", step);
    s << "layout=" << layout << ";convention=" << convention << ";source=" << source;
    return s.str();
  }

  std::string hash() const { return config_hash(canonical()); }
};

void check_range(const std::optional<double>& v, double lo, double hi, const char* name) {
  if (v && !(*v >= lo && *v <= hi)) {
    std::ostringstream m;
    m << "--" << name << " must lie in [" << lo << ", " << hi << "]";
    throw ConfigError(m.str());
  }
}

void validate(const ExperimentConfig& c) {
  check_range(c.xi, 0.0, 1.0, "xi");
  check_range(c.zeta, 0.0, 1.0, "zeta");
  check_range(c.eps1, 0.0, 0.2, "eps1");
  check_range(c.eps2, 0.0, 0.2, "eps2");
  check_range(std::optional<double>(c.xi1), 0.0, 1.0, "xi1");
  check_range(std::optional<double>(c.xi2), 0.0, 1.0, "xi2");
  if (c.n_ens && (*c.n_ens < 1 || *c.n_ens > 100000000)) {
    throw ConfigError("--n-ens must lie in [1, 1e8]");
  }
  if (c.grid && (*c.grid < 2 || *c.grid > 1000000)) throw ConfigError("--grid must lie in [2, 1e6]");
  if (c.n < 1 || c.n > 10) throw ConfigError("--n must lie in [1, 10]");
  if (c.restarts < 1 || c.restarts > 10000) throw ConfigError("--restarts must lie in [1, 1e4]");
  if (c.step && !(*c.step > 0.0)) throw ConfigError("--step must be positive");
}

NoiseConfig noise_from(const ExperimentConfig& c) {
  NoiseConfig n;
  n.xi = c.xi.value_or(1.0);
  n.zeta = c.zeta.value_or(0.13);
  n.eps1 = c.eps1.value_or(0.0);
  n.eps2 = c.eps2.value_or(0.0);
  n.layout = c.layout == "interfering" ? MismatchLayout::InterferingInputs
                                       : MismatchLayout::HeraldedInput;
  n.convention = c.convention == "monomial" ? AmplitudeConvention::MonomialCoefficient
                                            : AmplitudeConvention::Fock;
  n.source = c.source == "operator" ? SourceNormalization::OperatorPower
                                    : SourceNormalization::KetAmplitude;
  return n;
}

QubitState resolve_state(const ExperimentConfig& c, std::ostream& err) {
  if (c.state == "optimal") return optimal_probe(2);
  if (c.state == "qpea") return qpea_state(2);
  auto loaded = load_density_matrix(c.state);
  for (const auto& w : loaded.warnings) err << "warning: " << c.state << ": " << w << "\n";
  return loaded.state;
}

ProtocolConfig protocol_for(const ExperimentConfig& c, QubitState state, std::size_t grid) {
  ProtocolConfig pc(std::move(state));
  pc.seed = c.seed;
  if (c.estimator == "calibrated") {
    pc.estimator = Estimator::Calibrated;
    pc.calibration = calibrate_estimator(tabulate_outcomes(pc, grid));
  }
  return pc;
}

std::vector<double> sweep_values(const ExperimentConfig& c, double lo, double hi, double step) {
  lo = c.min.value_or(lo);
  hi = c.max.value_or(hi);
  step = c.step.value_or(step);
  if (hi < lo) throw ConfigError("--max must not be below --min");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 10000) throw ConfigError("sweep has too many points");
  std::vector<double> v;
  // Rounded to 12 decimals so grid points print as typed (0.94, not 0.94000000000000006).
  for (std::size_t i = 0; i < count; ++i) {
    v.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return v;
}

// CSV goes to --out when given, otherwise to the report stream.
class Sink {
 public:
  Sink(const ExperimentConfig& c, std::ostream& report) : report_(report) {
    if (!c.out.empty()) {
      file_ = std::make_unique<std::ofstream>(c.out);
      if (!*file_) throw ConfigError("cannot open '" + c.out + "' for writing");
    }
  }
  std::ostream& csv() { return file_ ? *file_ : report_; }
  bool separate() const { return file_ != nullptr; }

 private:
  std::ostream& report_;
  std::unique_ptr<std::ofstream> file_;
};

void report_line(std::ostream& out, const std::string& key, double v) {
  out << key << ": " << std::setprecision(10) << v << "\n";
}

void cmd_generate_state(const ExperimentConfig& c, std::ostream& out) {
  const bool noisy = c.xi || c.zeta || c.eps1 || c.eps2;
  const GeneratedState g = noisy ? generate_optimal_state(noise_from(c)) : generate_optimal_state();
  const auto target = optimal_target().density();
  ProtocolConfig pc(g.state);
  const auto dist = tabulate_outcomes(pc, c.grid.value_or(4096));
  const auto table = calibrate_estimator(dist);
  out << "config_hash: " << c.hash() << "\n";
  report_line(out, "fidelity", fidelity(g.state, target));
  report_line(out, "purity", purity(g.state));
  report_line(out, "success_probability", g.success_probability);
  report_line(out, "holevo_deviation_binary",
              mean_deviation(dist, estimator_phases(2, Estimator::Binary, std::nullopt)));
  report_line(out, "holevo_deviation_calibrated",
              mean_deviation(dist, estimator_phases(2, Estimator::Calibrated, table)));
  if (!c.out.empty()) save_density_matrix(c.out, g.state);
}

void reference_lines(std::ostream& out, int K) {
  const int N = (1 << (K + 1)) - 1;
  report_line(out, "hl_bound", hl_bound(N));
  if (N == 7) report_line(out, "snl_reference", snl_variance(kSnlAnglesN7));
  report_line(out, "qpea_bound", qpea_bound(N));
}

void cmd_simulate_hpea(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  auto pc = protocol_for(c, resolve_state(c, err), c.grid.value_or(4096));
  const auto runs = run_ensemble(pc, c.n_ens.value_or(50000));
  const auto stats = holevo_from_runs(runs);
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw ConfigError("cannot open '" + c.out + "' for writing");
    CsvWriter csv(f, {"run", "phi_true", "bits", "phi_est"}, c.hash(), c.seed);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      csv.cell(static_cast<std::int64_t>(i))
          .cell(runs[i].phi_true)
          .cell(bit_string(runs[i].outcome(), pc.K))
          .cell(runs[i].phi_est)
          .end_row();
    }
  }
  out << "config_hash: " << c.hash() << "\nseed: " << c.seed << "\nn_ens: " << stats.n_ens
      << "\nestimator: " << c.estimator << "\n";
  report_line(out, "mu", stats.mu);
  report_line(out, "mu_stderr", stats.mu_stderr);
  report_line(out, "holevo_deviation", stats.deviation);
  report_line(out, "holevo_deviation_stderr", stats.deviation_stderr);
  reference_lines(out, pc.K);
}

struct SweepPoint {
  double parameter;
  HolevoStats stats;
  double exact;
  double success;
  double fidelity;
};

SweepPoint sweep_point(const ExperimentConfig& c, double parameter, const NoiseConfig& noise,
                       NoiseMode mode) {
  const auto g = noisy_probe_state(noise, mode);
  auto pc = protocol_for(c, g.state, c.grid.value_or(4096));
  const auto dist = tabulate_outcomes(pc, c.grid.value_or(4096));
  const double exact = mean_deviation(dist, estimator_phases(pc.K, pc.estimator, pc.calibration));
  const auto stats = holevo_from_runs(run_ensemble(pc, c.n_ens.value_or(10000)));
  return {parameter, stats, exact, g.success_probability,
          fidelity(g.state, optimal_target().density())};
}

void write_sweep(const ExperimentConfig& c, const std::string& name,
                 const std::vector<SweepPoint>& pts, std::ostream& out) {
  Sink sink(c, out);
  CsvWriter csv(sink.csv(),
                {name, "D_H", "stderr", "mu", "D_H_exact", "success_probability", "fidelity"},
                c.hash(), c.seed);
  for (const auto& p : pts) {
    csv.cell(p.parameter)
        .cell(p.stats.deviation)
        .cell(p.stats.deviation_stderr)
        .cell(p.stats.mu)
        .cell(p.exact)
        .cell(p.success)
        .cell(p.fidelity)
        .end_row();
  }
  if (sink.separate()) {
    out << "config_hash: " << c.hash() << "\nseed: " << c.seed << "\npoints: " << pts.size()
        << "\n";
    reference_lines(out, 2);
  }
}

void cmd_sweep_mismatch(const ExperimentConfig& c, std::ostream& out) {
  std::vector<SweepPoint> pts;
  for (double xi : sweep_values(c, 0.90, 1.00, 0.01)) {
    auto noise = noise_from(c);
    noise.xi = std::min(1.0, xi);
    pts.push_back(sweep_point(c, xi, noise, NoiseMode::Mismatch));
  }
  write_sweep(c, "xi", pts, out);
}

void cmd_sweep_spdc(const ExperimentConfig& c, std::ostream& out) {
  if (c.vary != "eps1" && c.vary != "eps2") throw ConfigError("--vary must be eps1 or eps2");
  std::vector<SweepPoint> pts;
  for (double e : sweep_values(c, 0.05, 0.10, 0.01)) {
    auto noise = noise_from(c);
    if (c.vary == "eps1") {
      noise.eps1 = e;
      noise.eps2 = c.eps2.value_or(0.05);
    } else {
      noise.eps2 = e;
      noise.eps1 = c.eps1.value_or(0.05);
    }
    pts.push_back(sweep_point(c, e, noise, NoiseMode::SpdcHigherOrder));
  }
  write_sweep(c, c.vary, pts, out);
}

void cmd_snl(const ExperimentConfig& c, std::ostream& out) {
  const auto res = snl_optimize(c.n, c.restarts, c.seed);
  out << "config_hash: " << c.hash() << "\nseed: " << c.seed << "\nphotons: " << c.n << "\n";
  report_line(out, "snl_variance", res.variance);
  out << "angles:";
  for (double t : res.angles.theta) out << ' ' << std::setprecision(10) << t;
  out << "\n";
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw ConfigError("cannot open '" + c.out + "' for writing");
    CsvWriter csv(f, {"photon", "theta"}, c.hash(), c.seed);
    for (std::size_t i = 0; i < res.angles.theta.size(); ++i) {
      csv.cell(static_cast<std::int64_t>(i)).cell(res.angles.theta[i]).end_row();
    }
  }
}

void cmd_pdf(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const std::size_t grid = c.grid.value_or(256);
  Sink sink(c, out);
  if (c.kind == "analytic") {
    CsvWriter csv(sink.csv(), {"delta", "qpea_N3", "qpea_N7", "hpea_N3", "hpea_N7"}, c.hash(),
                  c.seed);
    const Eigen::VectorXcd coeffs[4] = {qpea_coefficients(3), qpea_coefficients(7),
                                        hpea_coefficients(3), hpea_coefficients(7)};
    for (std::size_t g = 0; g < grid; ++g) {
      const double delta = -std::numbers::pi + kTwoPi * static_cast<double>(g) / grid;
      csv.cell(delta);
      for (const auto& co : coeffs) csv.cell(analytic_pdf(co, 0.0, delta));
      csv.end_row();
    }
    return;
  }
  if (c.kind != "outcomes" && c.kind != "deviation") {
    throw ConfigError("--kind must be outcomes, analytic or deviation");
  }
  auto pc = protocol_for(c, resolve_state(c, err), std::max<std::size_t>(grid, 4096));
  const auto dist = tabulate_outcomes(pc, grid);
  if (c.kind == "outcomes") {
    std::vector<std::string> cols{"phi"};
    for (std::size_t j = 0; j < dist.outcomes(); ++j) cols.push_back("P_" + bit_string(j, dist.K));
    CsvWriter csv(sink.csv(), cols, c.hash(), c.seed);
    for (std::size_t g = 0; g < grid; ++g) {
      csv.cell(dist.phi[g]);
      for (std::size_t j = 0; j < dist.outcomes(); ++j) {
        csv.cell(dist.prob(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j)));
      }
      csv.end_row();
    }
    return;
  }
  const auto est = estimator_phases(pc.K, pc.estimator, pc.calibration);
  CsvWriter csv(sink.csv(), {"phi", "D_H_phi"}, c.hash(), c.seed);
  for (std::size_t g = 0; g < grid; ++g) {
    std::vector<double> p(dist.outcomes());
    for (std::size_t j = 0; j < p.size(); ++j) {
      p[j] = dist.prob(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(j));
    }
    csv.cell(dist.phi[g]).cell(phase_dependent_deviation(p, est, dist.phi[g])).end_row();
  }
}

void cmd_hom(const ExperimentConfig& c, std::ostream& out) {
  Sink sink(c, out);
  CsvWriter csv(sink.csv(), {"xi1", "xi2", "p_coin", "nu", "p_coin_fock"}, c.hash(), c.seed);
  std::vector<std::pair<double, double>> pts;
  if (c.grid) {
    const std::size_t n = *c.grid;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        pts.emplace_back(static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1));
      }
    }
  } else {
    pts.emplace_back(c.xi1, c.xi2);
  }
  for (const auto& [a, b] : pts) {
    const auto h = hom_visibility(a, b);
    csv.cell(a).cell(b).cell(h.p_coin).cell(h.nu).cell(hom_coincidence(a, b)).end_row();
  }
}

void cmd_calibrate(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  ProtocolConfig pc(resolve_state(c, err));
  const auto table = calibrate_estimator(tabulate_outcomes(pc, c.grid.value_or(4096)));
  const auto dyadic = dyadic_table(pc.K);
  Sink sink(c, out);
  CsvWriter csv(sink.csv(), {"outcome", "phi_est", "dyadic", "shift"}, c.hash(), c.seed);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double shift = std::remainder(table.phase[j] - dyadic.phase[j], kTwoPi);
    csv.cell(table.key(j)).cell(table.phase[j]).cell(dyadic.phase[j]).cell(shift).end_row();
  }
}

void cmd_analyze_state(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto state = resolve_state(c, err);
  out << "config_hash: " << c.hash() << "\n";
  report_line(out, "purity", purity(state));
  if (state.qubits() == 3) {
    report_line(out, "fidelity", fidelity(state, optimal_target().density()));
    for (int j = 0; j < 4; ++j) {
      report_line(out, "ghz_" + std::to_string(j), fidelity(state, ghz_target(j).density()));
    }
  }
  ProtocolConfig pc(state);
  const auto dist = tabulate_outcomes(pc, c.grid.value_or(4096));
  const auto table = calibrate_estimator(dist);
  report_line(out, "holevo_deviation_binary",
              mean_deviation(dist, estimator_phases(pc.K, Estimator::Binary, std::nullopt)));
  report_line(out, "holevo_deviation_calibrated",
              mean_deviation(dist, estimator_phases(pc.K, Estimator::Calibrated, table)));
  reference_lines(out, pc.K);
}

void add_options(CLI::App& app, ExperimentConfig& c) {
  app.add_option("--seed", c.seed, "RNG seed (echoed in outputs)");
  app.add_option("--n-ens", c.n_ens, "protocol runs per ensemble");
  app.add_option("--xi", c.xi, "mode-overlap reflectivity per mismatch site");
  app.add_option("--zeta", c.zeta, "detection efficiency (default 0.13 when noise is on)");
  app.add_option("--eps1", c.eps1, "heralded SPDC source efficiency");
  app.add_option("--eps2", c.eps2, "pair SPDC source efficiency");
  app.add_option("--state", c.state, "optimal, qpea, or a density-matrix file");
  app.add_option("--out", c.out, "output file");
  app.add_option("--estimator", c.estimator, "phase estimator")
      ->check(CLI::IsMember({"binary", "calibrated"}));
  app.add_option("--grid,--phi-grid", c.grid, "phase grid points");
  app.add_option("--n", c.n, "photon count for the SNL search");
  app.add_option("--restarts", c.restarts, "SNL optimizer restarts");
  app.add_option("--xi1", c.xi1, "HOM overlap of photon 1");
  app.add_option("--xi2", c.xi2, "HOM overlap of photon 2");
  app.add_option("--kind", c.kind, "pdf output: outcomes, analytic or deviation")
      ->check(CLI::IsMember({"outcomes", "analytic", "deviation"}));
  app.add_option("--vary", c.vary, "SPDC sweep parameter")->check(CLI::IsMember({"eps1", "eps2"}));
  app.add_option("--min", c.min, "sweep start");
  app.add_option("--max", c.max, "sweep end");
  app.add_option("--step", c.step, "sweep step");
  app.add_option("--layout", c.layout, "mismatch sites")
      ->check(CLI::IsMember({"heralded", "interfering"}));
  app.add_option("--convention", c.convention, "amplitude convention")
      ->check(CLI::IsMember({"fock", "monomial"}));
  app.add_option("--source", c.source, "SPDC term weights: ket or operator")
      ->check(CLI::IsMember({"ket", "operator"}));
  app.set_config("--config", "", "configuration file (TOML or INI)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heisenberg-limited phase estimation simulator"};
  app.name("hlpe");
  ExperimentConfig c;
  add_options(app, c);
  app.fallthrough();
  app.require_subcommand(1, 1);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"generate-state", "build the probe state and report fidelity, purity, success probability"},
      {"simulate-hpea", "run a seeded protocol ensemble and report the Holevo deviation"},
      {"sweep-mismatch", "deviation against the mode-overlap reflectivity"},
      {"sweep-spdc", "deviation against one SPDC efficiency"},
      {"snl-optimize", "search measurement angles for the standard-limit variance"},
      {"pdf", "tabulate outcome or ideal phase distributions"},
      {"hom", "two-photon coincidence table"},
      {"calibrate", "per-outcome estimator table"},
      {"analyze-state", "exact deviation and state figures for a density file"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    validate(c);
    if (c.command == "generate-state") {
      cmd_generate_state(c, out);
    } else if (c.command == "simulate-hpea") {
      cmd_simulate_hpea(c, out, err);
    } else if (c.command == "sweep-mismatch") {
      cmd_sweep_mismatch(c, out);
    } else if (c.command == "sweep-spdc") {
      cmd_sweep_spdc(c, out);
    } else if (c.command == "snl-optimize") {
      cmd_snl(c, out);
    } else if (c.command == "pdf") {
      cmd_pdf(c, out, err);
    } else if (c.command == "hom") {
      cmd_hom(c, out);
    } else if (c.command == "calibrate") {
      cmd_calibrate(c, out, err);
    } else {
      cmd_analyze_state(c, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace hlpe
