#include "hlpe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "hlpe/errors.hpp"

namespace hlpe {

namespace {

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

Eigen::MatrixXcd widen(const Eigen::MatrixXcd& s, Eigen::Index size) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(size, size);
  out.topLeftCorner(s.rows(), s.cols()) = s;
  return out;
}

// Splitter between a path and its partner mode: path keeps sqrt(keep).
void couple(Eigen::MatrixXcd& s, std::size_t path, std::size_t partner, double keep) {
  const auto p = static_cast<Eigen::Index>(path);
  const auto q = static_cast<Eigen::Index>(partner);
  const double r = std::sqrt(keep);
  const double t = std::sqrt(1.0 - keep);
  s(p, p) = r;
  s(q, p) = t;
  s(p, q) = -t;
  s(q, q) = r;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

void NoiseConfig::validate() const {
  check_unit_interval(xi, "xi");
  check_unit_interval(zeta, "zeta");
  if (!(eps1 >= 0.0 && eps1 <= 0.2)) throw ConfigError("eps1 must lie in [0, 0.2]");
  if (!(eps2 >= 0.0 && eps2 <= 0.2)) throw ConfigError("eps2 must lie in [0, 0.2]");
  for (const auto& s : sites) {
    check_unit_interval(s.xi, "site xi");
    if (s.path_modes.empty()) throw ConfigError("mismatch site without path modes");
  }
}

std::vector<MismatchSite> mismatch_sites(MismatchLayout layout, double xi) {
  const std::vector<std::size_t> a{mode::a_H, mode::a_V};
  const std::vector<std::size_t> b{mode::b_H, mode::b_V};
  const std::vector<std::size_t> c{mode::c_H, mode::c_V};
  switch (layout) {
    case MismatchLayout::HeraldedInput:
      return {{0, a, xi}};
    case MismatchLayout::InterferingInputs:
      return {{0, a, xi}, {0, b, xi}, {1, a, xi}, {1, c, xi}};
  }
  throw ConfigError("unknown mismatch layout");
}

LinearNetwork extend_network(const LinearNetwork& net, RegistryPtr larger) {
  const auto& src = net.registry()->names();
  const auto& dst = larger->names();
  if (dst.size() < src.size() || !std::equal(src.begin(), src.end(), dst.begin())) {
    throw ConfigError("target registry does not extend the network's registry");
  }
  return LinearNetwork(larger, widen(net.matrix(), static_cast<Eigen::Index>(dst.size())));
}

OpticalCircuit insert_mismatch(const OpticalCircuit& circuit, std::size_t position,
                               const std::vector<std::size_t>& path_modes, double xi) {
  check_unit_interval(xi, "xi");
  if (position > circuit.stages.size()) throw ConfigError("mismatch site position out of range");
  const int site = circuit.mismatch_sites + 1;
  const std::size_t m = circuit.registry->size();
  const std::size_t nb = circuit.base_modes.size();

  std::vector<std::string> extra;
  for (auto b : circuit.base_modes) {
    extra.push_back(circuit.registry->name(b) + "~m" + std::to_string(site));
  }
  auto reg = extend_registry(*circuit.registry, extra);
  const auto size = static_cast<Eigen::Index>(reg->size());

  OpticalCircuit out;
  out.registry = reg;
  out.base_modes = circuit.base_modes;
  out.replicas = circuit.replicas;
  out.mismatch_sites = site;
  for (std::size_t i = 0; i < nb; ++i) out.replicas[i].push_back(m + i);

  for (std::size_t i = 0; i < circuit.stages.size(); ++i) {
    const auto& st = circuit.stages[i];
    Eigen::MatrixXcd s = widen(st.network.matrix(), size);
    if (st.replicate && i >= position) {
      for (std::size_t r = 0; r < nb; ++r) {
        for (std::size_t c = 0; c < nb; ++c) {
          s(static_cast<Eigen::Index>(m + r), static_cast<Eigen::Index>(m + c)) =
              st.network.matrix()(static_cast<Eigen::Index>(circuit.base_modes[r]),
                                  static_cast<Eigen::Index>(circuit.base_modes[c]));
        }
      }
      if (unitarity_defect(s) > kTauUnitary) {
        throw ConfigError("stage '" + st.label + "' couples optical modes to auxiliary modes");
      }
    }
    out.stages.push_back({LinearNetwork(reg, s), st.replicate, st.label});
  }

  Eigen::MatrixXcd split = Eigen::MatrixXcd::Identity(size, size);
  for (auto p : path_modes) {
    auto it = std::find(circuit.base_modes.begin(), circuit.base_modes.end(), p);
    if (it == circuit.base_modes.end()) throw ConfigError("mismatch path is not a base mode");
    couple(split, p, m + static_cast<std::size_t>(it - circuit.base_modes.begin()), xi);
  }
  out.stages.insert(out.stages.begin() + static_cast<std::ptrdiff_t>(position),
                    {LinearNetwork(reg, split), false, "mismatch" + std::to_string(site)});
  return out;
}

OpticalCircuit insert_loss(const OpticalCircuit& circuit, std::size_t position,
                           const std::vector<std::size_t>& path_modes, double zeta) {
  check_unit_interval(zeta, "zeta");
  if (position > circuit.stages.size()) throw ConfigError("loss position out of range");
  const std::size_t m = circuit.registry->size();
  std::vector<std::string> extra;
  for (auto p : path_modes) {
    if (p >= m) throw ConfigError("loss path out of range");
    std::string name = circuit.registry->name(p) + "~loss";
    while (circuit.registry->contains(name) ||
           std::find(extra.begin(), extra.end(), name) != extra.end()) {
      name += "'";
    }
    extra.push_back(name);
  }
  auto reg = extend_registry(*circuit.registry, extra);
  const auto size = static_cast<Eigen::Index>(reg->size());

  OpticalCircuit out = circuit;
  out.registry = reg;
  out.stages.clear();
  for (const auto& st : circuit.stages) {
    out.stages.push_back({LinearNetwork(reg, widen(st.network.matrix(), size)), st.replicate,
                          st.label});
  }
  Eigen::MatrixXcd split = Eigen::MatrixXcd::Identity(size, size);
  for (std::size_t i = 0; i < path_modes.size(); ++i) couple(split, path_modes[i], m + i, zeta);
  out.stages.insert(out.stages.begin() + static_cast<std::ptrdiff_t>(position),
                    {LinearNetwork(reg, split), false, "loss"});
  return out;
}

HomResult hom_visibility(double xi1, double xi2) {
  check_unit_interval(xi1, "xi1");
  check_unit_interval(xi2, "xi2");
  return {0.5 * (1.0 - xi1 * xi2), xi1 * xi2};
}

HomBench hom_bench(double xi1, double xi2, double eta) {
  auto reg = make_registry({"a", "b"});
  auto circuit = make_circuit(
      reg, {{LinearNetwork(reg, beamsplitter_matrix(2, 0, 1, eta)), true, "splitter"}});
  circuit = insert_mismatch(circuit, 0, {1}, xi2);
  circuit = insert_mismatch(circuit, 0, {0}, xi1);
  auto input = embed(FockPolynomial::monomial(reg, std::vector<std::string>{"a", "b"}),
                     circuit.registry);
  return {circuit, input, {circuit.replicas_of(0), circuit.replicas_of(1)}};
}

double hom_coincidence(double xi1, double xi2, double eta) {
  const auto bench = hom_bench(xi1, xi2, eta);
  return bundle_number_expectation(run_circuit(bench.circuit, bench.input), bench.bundles);
}

RegistryPtr spdc_registry() {
  static const RegistryPtr reg = [] {
    auto names = canonical_mode_names();
    names.push_back("t");
    return make_registry(names);
  }();
  return reg;
}

FockPolynomial spdc_order(const SpdcSpec& spec, int n, RegistryPtr registry) {
  if (n < 0) throw ConfigError("source order must be non-negative");
  const int max_order = spec.kind == SourceKind::Heralded ? 3 : 2;
  if (n > max_order) return FockPolynomial(registry);
  FockPolynomial x(registry);
  if (spec.kind == SourceKind::Heralded) {
    x = FockPolynomial::monomial(registry, std::vector<std::string>{"a_H", "t"});
  } else {
    if (std::abs(spec.beta * spec.beta + spec.gamma * spec.gamma - 1.0) > kNormTol) {
      throw ConfigError("pump amplitudes must satisfy beta^2 + gamma^2 = 1");
    }
    x = FockPolynomial::monomial(registry, std::vector<std::string>{"b_H", "c_H"}, spec.gamma) +
        FockPolynomial::monomial(registry, std::vector<std::string>{"b_V", "c_V"}, spec.beta);
  }
  auto term = FockPolynomial::vacuum(registry);
  for (int k = 0; k < n; ++k) term = term * x;
  term *= Complex(std::pow(spec.eps, n) / factorial(n));
  if (spec.normalization == SourceNormalization::OperatorPower) return term;
  FockPolynomial ket(registry);
  for (const auto& [occ, c] : term.terms()) ket.add(occ, c / fock_factor(occ));
  return ket;
}

FockPolynomial spdc_state(const SpdcSpec& spec, RegistryPtr registry) {
  if (!(spec.eps >= 0.0)) throw ConfigError("source efficiency must be non-negative");
  FockPolynomial out(registry);
  const int max_order = spec.kind == SourceKind::Heralded ? 3 : 2;
  for (int n = 0; n <= max_order; ++n) out += spdc_order(spec, n, registry);
  return out;
}

Eigen::Matrix2d polarization_rotation(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

SchmidtRotations schmidt_rotations(const std::array<double, 4>& target_alpha) {
  Eigen::Matrix2d a;
  a << target_alpha[0], target_alpha[1], target_alpha[2], target_alpha[3];
  if (!a.allFinite()) throw ConfigError("target amplitudes must be finite");
  if (std::abs(a.squaredNorm() - 1.0) > kNormTol) throw ConfigError("target is not normalized");
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d u = svd.matrixU();
  Eigen::Matrix2d v = svd.matrixV();
  Eigen::Vector2d s = svd.singularValues();
  if (u.determinant() < 0) {
    u.col(1) *= -1.0;
    s(1) *= -1.0;
  }
  if (v.determinant() < 0) {
    v.col(1) *= -1.0;
    s(1) *= -1.0;
  }
  return {s(1), s(0), std::atan2(u(1, 0), u(0, 0)), std::atan2(v(1, 0), v(0, 0))};
}

double epsilon_from_counts(double coincidences, double rate, double lambda_i, double lambda_s) {
  if (coincidences < 0.0) throw ConfigError("coincidence rate must be non-negative");
  if (!(lambda_i > 0.0 && lambda_i <= 1.0 && lambda_s > 0.0 && lambda_s <= 1.0)) {
    throw ConfigError("heralding efficiencies must lie in (0, 1]");
  }
  const double denom = rate * lambda_i * lambda_s;
  if (!(denom > 0.0)) throw ConfigError("non-positive denominator");
  return std::sqrt(coincidences / denom);
}

DetectedState detect_qubits(const FockPolynomial& state, const DetectionLayout& layout,
                            AmplitudeConvention convention) {
  const std::size_t m = state.registry()->size();
  const std::size_t nq = layout.qubits.size();
  if (nq == 0) throw ConfigError("detection layout has no qubits");
  std::vector<bool> readout(m, false);
  for (const auto& q : layout.qubits) {
    for (const auto* modes : {&q.h_modes, &q.v_modes}) {
      for (auto md : *modes) {
        if (md >= m) throw ConfigError("readout mode out of range");
        if (readout[md]) throw ConfigError("readout bundles overlap");
        readout[md] = true;
      }
    }
  }

  std::map<Occupation, Complex> amps;
  if (convention == AmplitudeConvention::Fock) {
    amps = to_fock_amplitudes(state);
  } else {
    amps.insert(state.terms().begin(), state.terms().end());
  }
  double total = 0.0;
  for (const auto& [occ, a] : amps) total += std::norm(a);
  if (!(total > 0.0)) throw NumericError("cannot detect the zero state");
  const double scale = 1.0 / std::sqrt(total);

  const auto dim = Eigen::Index{1} << nq;
  std::map<std::vector<int>, Eigen::VectorXcd> branches;

  struct Partial {
    std::vector<int> key;
    std::size_t index;
    Complex amp;
  };

  for (const auto& [occ, a] : amps) {
    bool heralded = true;
    for (const auto& h : layout.heralds) {
      int n = 0;
      for (auto md : h) n += occ.at(md);
      if (n == 0) heralded = false;
    }
    if (!heralded) continue;

    std::vector<Partial> parts{{{}, 0, a * scale}};
    for (std::size_t md = 0; md < m; ++md) {
      if (!readout[md]) parts[0].key.push_back(occ[md]);
    }
    bool clicked = true;
    for (std::size_t q = 0; q < nq && clicked; ++q) {
      const auto& r = layout.qubits[q];
      std::vector<int> hc;
      std::vector<int> vc;
      int h = 0;
      int v = 0;
      for (auto md : r.h_modes) {
        hc.push_back(occ[md]);
        h += occ[md];
      }
      for (auto md : r.v_modes) {
        vc.push_back(occ[md]);
        v += occ[md];
      }
      const std::size_t bit = std::size_t{1} << (nq - 1 - q);
      if (h + v == 0) {
        clicked = false;
      } else if (v == 0 || h == 0) {
        for (auto& p : parts) {
          p.key.push_back(0);
          const auto& counts = v == 0 ? hc : vc;
          p.key.insert(p.key.end(), counts.begin(), counts.end());
          if (h == 0) p.index |= bit;
        }
      } else {
        // Both rails clicked: read as 0 or 1 with equal weight, as distinct events.
        std::vector<Partial> next;
        for (const auto& p : parts) {
          for (int choice = 0; choice < 2; ++choice) {
            Partial n = p;
            n.key.push_back(1 + choice);
            n.key.insert(n.key.end(), hc.begin(), hc.end());
            n.key.insert(n.key.end(), vc.begin(), vc.end());
            if (choice == 1) n.index |= bit;
            n.amp *= std::sqrt(0.5);
            next.push_back(std::move(n));
          }
        }
        parts = std::move(next);
      }
    }
    if (!clicked) continue;
    for (const auto& p : parts) {
      auto [it, inserted] = branches.try_emplace(p.key, Eigen::VectorXcd::Zero(dim));
      it->second(static_cast<Eigen::Index>(p.index)) += p.amp;
    }
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [key, vec] : branches) rho.noalias() += vec * vec.adjoint();
  const double p = rho.trace().real();
  if (p < 1e-15) return {std::nullopt, 0.0};
  rho /= p;
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return {QubitState(rho), p};
}

namespace {

DetectionLayout photon_readout(const OpticalCircuit& circuit, bool trigger) {
  DetectionLayout layout;
  for (const auto& [h, v] : photon_pairs()) {
    layout.qubits.push_back({circuit.replicas_of(h), circuit.replicas_of(v)});
  }
  if (trigger) layout.heralds.push_back(circuit.replicas_of(circuit.registry->index("t")));
  return layout;
}

OpticalCircuit with_mismatch(OpticalCircuit circuit, std::vector<MismatchSite> sites) {
  std::stable_sort(sites.begin(), sites.end(),
                   [](const auto& x, const auto& y) { return x.stage > y.stage; });
  const std::size_t base_stages = circuit.stages.size();
  for (const auto& s : sites) {
    if (s.stage > base_stages) throw ConfigError("mismatch site stage out of range");
    if (s.xi < 1.0) circuit = insert_mismatch(circuit, s.stage, s.path_modes, s.xi);
  }
  return circuit;
}

}  // namespace

GeneratedState noisy_probe_state(const NoiseConfig& config, NoiseMode mode) {
  config.validate();
  const auto sites = config.sites.empty() ? mismatch_sites(config.layout, config.xi) : config.sites;
  const std::vector<std::size_t> photon_modes{mode::a_H, mode::a_V, mode::b_H,
                                              mode::b_V, mode::c_H, mode::c_V};

  OpticalCircuit circuit;
  FockPolynomial input(canonical_registry());
  bool trigger = false;

  if (mode == NoiseMode::Mismatch) {
    if (config.eps1 != 0.0 || config.eps2 != 0.0) {
      throw ConfigError("mismatch mode needs eps1 = eps2 = 0");
    }
    circuit = with_mismatch(optimal_state_circuit(), sites);
    circuit = insert_loss(circuit, 0, photon_modes, config.zeta);
    input = prepare_input(to_complex(optimal_alpha()));
  } else {
    if (!(config.eps1 > 0.0)) throw ConfigError("SPDC mode needs eps1 > 0");
    const auto reg = spdc_registry();
    const auto rot = schmidt_rotations(optimal_alpha());
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(9, 9);
    const Eigen::Matrix2d rb = polarization_rotation(rot.theta_b);
    const Eigen::Matrix2d rc = polarization_rotation(rot.theta_c);
    const Eigen::Index bi[2] = {mode::b_H, mode::b_V};
    const Eigen::Index ci[2] = {mode::c_H, mode::c_V};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        r(bi[i], bi[j]) = rb(i, j);
        r(ci[i], ci[j]) = rc(i, j);
      }
    }
    circuit = make_circuit(reg, {{LinearNetwork(reg, r), true, "rotations"},
                                 {extend_network(build_ncn(), reg), true, "NCN"},
                                 {extend_network(build_cn(), reg), true, "CN"}});
    // Site stages refer to the gate sequence; shift past the rotation stage.
    auto shifted = sites;
    for (auto& s : shifted) ++s.stage;
    circuit = with_mismatch(circuit, shifted);
    auto lossy = photon_modes;
    lossy.push_back(reg->index("t"));
    circuit = insert_loss(circuit, 0, lossy, config.zeta);

    const SpdcSpec heralded{SourceKind::Heralded, config.eps1, config.source};
    const SpdcSpec pair{SourceKind::EntangledPair, config.eps2, config.source, rot.beta,
                        rot.gamma};
    FockPolynomial source(reg);
    for (int i = 0; i <= 3; ++i) {
      for (int j = 0; i + j <= 3 && j <= 2; ++j) {
        source += spdc_order(heralded, i, reg) * spdc_order(pair, j, reg);
      }
    }
    input = normalized(source);
    trigger = true;
  }

  auto out = run_circuit(circuit, input);
  auto det = detect_qubits(out, photon_readout(circuit, trigger), config.convention);
  if (!det.state) throw NumericError("no detection events survive post-selection");
  return {*det.state, det.probability};
}

}  // namespace hlpe
