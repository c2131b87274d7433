#include "sqz/recipes.hpp"

#include "sqz/constants.hpp"
#include "sqz/csv.hpp"
#include "sqz/hamiltonians.hpp"
#include "sqz/magnetometry.hpp"
#include "sqz/noise.hpp"
#include "sqz/spin_ops.hpp"
#include "sqz/squeezing.hpp"

#include <cmath>
#include <fstream>

namespace sqz {

namespace {

std::string fmt(double v) { return CsvWriter::format_double(v); }

} // namespace

SpinEnsemble ensemble_from_config(const Config& cfg, const RunOverrides& ov) {
  if (ov.geometry_file) {
    std::ifstream f(*ov.geometry_file);
    if (!f) throw ConfigError("cannot open geometry file: " + *ov.geometry_file);
    SpinEnsemble e;
    e.positions = read_positions(f);
    if (e.positions.size() < 2) throw ConfigError("geometry file holds fewer than 2 spins");
    e.quant_axis = SpinAxis::z();
    e.couplings = dipolar_couplings(e.positions, e.quant_axis);
    e.kind = GeometryKind::RandomSlab3D;
    // consume the section so schema validation still passes
    if (cfg.has("geometry.kind")) (void)cfg.get_word("geometry.kind");
    for (const char* k : {"geometry.lx", "geometry.ly", "geometry.lz"})
      if (cfg.has(k)) (void)cfg.get_length_nm(k);
    if (cfg.has("geometry.density")) (void)cfg.get_density_nm3("geometry.density");
    if (cfg.has("geometry.seed")) (void)cfg.get_seed("geometry.seed");
    if (cfg.has("geometry.n")) (void)cfg.get_integer("geometry.n");
    if (cfg.has("geometry.spacing")) (void)cfg.get_length_nm("geometry.spacing");
    if (cfg.has("geometry.r_min")) (void)cfg.get_length_nm("geometry.r_min");
    return e;
  }

  GeometrySpec spec;
  const std::string kind = cfg.get_word("geometry.kind");
  if (kind == "chain")
    spec.kind = GeometryKind::Chain1D;
  else if (kind == "lattice2d")
    spec.kind = GeometryKind::Lattice2D;
  else if (kind == "random_slab")
    spec.kind = GeometryKind::RandomSlab3D;
  else
    throw ConfigError("geometry.kind must be chain | lattice2d | random_slab");

  if (spec.kind == GeometryKind::RandomSlab3D) {
    spec.lx = cfg.get_length_nm("geometry.lx");
    spec.ly = cfg.get_length_nm("geometry.ly");
    spec.lz = cfg.get_length_nm("geometry.lz");
    spec.density = cfg.get_density_nm3("geometry.density");
    spec.seed = ov.seed ? *ov.seed : cfg.get_seed("geometry.seed");
    if (ov.seed && cfg.has("geometry.seed")) (void)cfg.get_seed("geometry.seed");
    if (cfg.has("geometry.n")) spec.n = static_cast<int>(cfg.get_integer("geometry.n"));
    if (cfg.has("geometry.r_min")) spec.r_min = cfg.get_length_nm("geometry.r_min");
  } else {
    spec.n = static_cast<int>(cfg.get_integer("geometry.n"));
    spec.spacing = cfg.get_length_nm("geometry.spacing");
  }
  return make_ensemble(spec);
}

SequenceSpec sequence_from_config(const Config& cfg, const std::string& variant_key,
                                  double epsilon) {
  SequenceSpec s;
  const std::string tmpl = cfg.get_word("sequence.template");
  if (tmpl != "mrev8_echo")
    throw ConfigError("sequence.template must be mrev8_echo");
  s.tau = cfg.get_time_us("sequence.tau");
  s.epsilon_target = epsilon;
  if (variant_key == "1a") {
    s.variant = SequenceVariant::OneAxis;
    const double delta = epsilon / (3.0 + epsilon); // eps = 3 delta / (1 - delta)
    s.tau_plus = s.tau * (1.0 + 2.0 * delta);
    s.tau_minus = s.tau * (1.0 - delta);
  } else if (variant_key == "2a") {
    s.variant = SequenceVariant::TwoAxis;
    s.tau_plus = s.tau * (1.0 + epsilon);
    s.tau_minus = s.tau * (1.0 - epsilon);
  } else {
    throw ConfigError("sequence variant must be 1a or 2a");
  }
  s.seq = mrev8_with_echo(s.tau, s.tau_plus, s.tau_minus, s.variant);
  return s;
}

namespace {

struct SimCurve {
  std::vector<double> xi2_ideal, xi2_noisy, leakage;
};

enum class PropagationModel { Pulse, Average };

// Pulse: exact piecewise unitaries (valid when ||H_int|| tau << 1).
// Average: the internal couplings evolve under the engineered average
// Hamiltonian while the dephasing keeps its exact toggled frame, the
// regime of strong couplings and long delays where pulse-level averaging
// of the interaction no longer converges but noise averaging does.
SimCurve simulate_variant(const SpinEnsemble& ens, const Config& cfg, const std::string& variant,
                          double epsilon, int cycles, const NoiseModel& noise,
                          const TrajectoryConfig& tcfg, PropagationModel model) {
  const int n = ens.n();
  const SequenceSpec sspec = sequence_from_config(cfg, variant, epsilon);
  const OperatorMatrix h_int = ising_hamiltonian(ens);
  const SpinAxis init_axis = variant == "1a" ? SpinAxis::x() : SpinAxis::z();
  const StateVector init = polarized_state(init_axis, n, Basis::Full);

  SimCurve out;
  Matrix cycle_u;
  if (model == PropagationModel::Pulse) {
    Propagator hp(h_int);
    std::map<double, Matrix> delay_u;
    cycle_u = Matrix::Identity(h_int.dim(), h_int.dim());
    for (const auto& e : sspec.seq.events) {
      if (e.kind == PulseEvent::Kind::Delay) {
        auto it = delay_u.find(e.duration);
        if (it == delay_u.end())
          it = delay_u.emplace(e.duration, hp.unitary(e.duration).data).first;
        cycle_u = it->second * cycle_u;
      } else {
        cycle_u = collective_rotation(e.axis, e.angle, n, Basis::Full).data * cycle_u;
      }
    }
  } else {
    const ToggledFrame frames = toggling_frames(sspec.seq, h_int);
    const OperatorMatrix h_avg = magnus(frames, 1);
    cycle_u = Propagator(h_avg).unitary(sspec.seq.cycle_time()).data;
  }

  {
    Vector v = init.amps;
    for (int c = 1; c <= cycles; ++c) {
      v = cycle_u * v;
      out.xi2_ideal.push_back(xi2_metrological(StateVector(v, Basis::Full, n)).xi2);
    }
  }

  const MomentSeries ms =
      model == PropagationModel::Pulse
          ? evolve_noisy_sequence(init, h_int, sspec.seq, cycles, noise, tcfg)
          : evolve_noisy_average_frame(init, magnus(toggling_frames(sspec.seq, h_int), 1),
                                       sspec.seq, cycles, noise, tcfg);
  for (int c = 0; c < cycles; ++c) {
    out.xi2_noisy.push_back(xi2_from_moments(ms.mean[c], ms.second[c], n).xi2);
    out.leakage.push_back(1.0 - ms.sym_weight[c]);
  }
  return out;
}

// the protected picture needs the symmetric multiplet lowest; flip the
// coupling signs when the exchange Hamiltonian orders it on top
bool apply_ferro_convention(SpinEnsemble& e) {
  const GapResult g = gap_exact(e);
  if (g.flipped_sign) e.couplings = -e.couplings;
  return g.flipped_sign;
}

} // namespace

std::string run_simulate(const Config& cfg, const RunOverrides& ov) {
  SpinEnsemble ens = ensemble_from_config(cfg, ov);
  const bool flipped = apply_ferro_convention(ens);
  const int cycles = static_cast<int>(cfg.get_integer("sequence.cycles"));
  const double epsilon = cfg.get_number("sequence.epsilon");
  const double eps_1a =
      cfg.has("sequence.epsilon_1a") ? cfg.get_number("sequence.epsilon_1a") : epsilon;
  const double eps_2a =
      cfg.has("sequence.epsilon_2a") ? cfg.get_number("sequence.epsilon_2a") : epsilon;

  NoiseModel noise;
  noise.gamma = cfg.get_rate_perus("noise.gamma");
  noise.tau_c = cfg.get_time_us("noise.tau_c");
  noise.mode = NoiseMode::PerSpin;

  TrajectoryConfig tcfg;
  tcfg.n_traj = static_cast<int>(cfg.get_integer("noise.trajectories"));
  tcfg.dt = cfg.get_time_us("noise.dt");
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_seed("run.seed");
  if (ov.seed && cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  tcfg.seed = seed;

  PropagationModel model = PropagationModel::Pulse;
  if (cfg.has("sequence.propagation")) {
    const std::string w = cfg.get_word("sequence.propagation");
    if (w == "average")
      model = PropagationModel::Average;
    else if (w != "pulse")
      throw ConfigError("sequence.propagation must be pulse | average");
  }

  const SequenceSpec probe = sequence_from_config(cfg, "1a", epsilon); // consumes keys
  (void)probe;
  cfg.require_all_consumed();

  const SimCurve c1 = simulate_variant(ens, cfg, "1a", eps_1a, cycles, noise, tcfg, model);
  const SimCurve c2 = simulate_variant(ens, cfg, "2a", eps_2a, cycles, noise, tcfg, model);

  const double tc = 48.0 * cfg.get_time_us("sequence.tau");
  const double d_mean = coupling_mean(ens);

  CsvWriter csv(cfg.hash(), seed,
                {"t_us", "xi2_1a_ideal", "xi2_1a_noisy", "leak_1a", "xi2_2a_ideal",
                 "xi2_2a_noisy", "leak_2a"},
                {"ferro-flip: " + std::to_string(flipped ? 1 : 0),
                 "coupling-mean-radus: " + fmt(d_mean),
                 "n-spins: " + std::to_string(ens.n())});
  for (int c = 0; c < cycles; ++c) {
    csv.row({(c + 1) * tc, c1.xi2_ideal[c], c1.xi2_noisy[c], c1.leakage[c], c2.xi2_ideal[c],
             c2.xi2_noisy[c], c2.leakage[c]});
  }
  return csv.str();
}

std::string run_verify_sequence(const Config& cfg, const RunOverrides& ov) {
  SpinEnsemble ens = ensemble_from_config(cfg, ov);
  const double epsilon = cfg.get_number("sequence.epsilon");
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");

  CsvWriter csv(cfg.hash(), seed,
                {"variant", "n_pulses", "cycle_time_us", "epsilon_fit", "fit_residual",
                 "h2_norm_rel", "field_x", "field_y", "field_z", "field_nu"});

  const OperatorMatrix h_int = ising_hamiltonian(ens);
  const double h_norm = h_int.data.norm();
  for (const std::string variant : {"1a", "2a"}) {
    const SequenceSpec s = sequence_from_config(cfg, variant, epsilon);
    const ToggledFrame frames = toggling_frames(s.seq, h_int);
    const EpsilonFit fit =
        calibrate_epsilon(s.tau, s.tau_plus, s.tau_minus, s.variant, ens.couplings);
    const OperatorMatrix h2 = magnus(frames, 2);
    // the AC-synchronized average is the sensing field for both variants;
    // the plain average (what static noise sees) vanishes by construction
    const EffectiveField field = effective_field(frames, /*echo_synced=*/true);
    csv.row_mixed({variant, std::to_string(s.seq.pulse_count()), fmt(s.seq.cycle_time()),
                   fmt(fit.epsilon), fmt(fit.residual), fmt(h2.data.norm() / h_norm),
                   fmt(field.direction.x() * field.magnitude),
                   fmt(field.direction.y() * field.magnitude),
                   fmt(field.direction.z() * field.magnitude), fmt(field.nu)});
  }
  cfg.require_all_consumed();
  return csv.str();
}

std::string run_gap(const Config& cfg, const RunOverrides& ov) {
  SpinEnsemble ens = ensemble_from_config(cfg, ov);
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  cfg.require_all_consumed();

  const GapResult g = gap_exact(ens);
  const double d_mean = coupling_mean(ens);
  const double d_median = coupling_median_abs(ens);
  const int n = ens.n();
  // order-of-magnitude estimate from the random-placement scaling
  const double j0 = constants::dipolar_prefactor();
  const double est = ens.density > 0
                         ? gap_estimate(GapKind::Random3d, n, j0, ens.density)
                         : gap_estimate(GapKind::Chain1dDipolar, n, d_median);

  CsvWriter csv(cfg.hash(), seed,
                {"n", "gap_radus", "flipped_sign", "not_protected", "d_mean_radus",
                 "d_median_radus", "gap_estimate_radus"});
  csv.row_mixed({std::to_string(n), fmt(g.gap), std::to_string(g.flipped_sign ? 1 : 0),
                 std::to_string(g.not_protected ? 1 : 0), fmt(d_mean), fmt(d_median), fmt(est)});
  return csv.str();
}

std::string run_squeeze(const Config& cfg, const RunOverrides& ov) {
  const int n = static_cast<int>(cfg.get_integer("squeeze.n"));
  const double d = cfg.get_freq_radus("squeeze.strength");
  const double t_max = cfg.get_time_us("squeeze.t_max");
  const int points = static_cast<int>(cfg.get_integer("squeeze.points"));
  const double gamma = cfg.has("squeeze.gamma") ? cfg.get_rate_perus("squeeze.gamma") : 0.0;
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  cfg.require_all_consumed();
  if (n < 2 || points < 1 || t_max <= 0 || d <= 0)
    throw ConfigError("squeeze section: positive n/points/t_max/strength required");

  // exact evolution reference: one-axis twisting is diagonal in the Dicke basis
  const StateVector init = polarized_state(SpinAxis::x(), n, Basis::Dicke);
  const OperatorMatrix h = one_axis_twisting(d, n);
  Propagator prop(h);

  CsvWriter csv(cfg.hash(), seed,
                {"t_us", "chi", "xi2_ideal", "xi2_noisy_unprotected", "xi2_noisy_protected",
                 "xi2_exact", "jx", "nu_opt"});
  for (int k = 1; k <= points; ++k) {
    const double t = t_max * k / points;
    const double chi = d * t;
    const StateVector psi = prop.apply(init, t);
    const SqueezingReport rep = xi2_metrological(psi);
    csv.row({t, chi, xi2_ideal(n, chi), xi2_noisy_unprotected(n, chi, gamma * t),
             xi2_noisy_protected(n, chi, gamma * t), rep.xi2, oat_observables(n, chi).jx,
             nu_optimal(n, chi).nu_min});
  }
  return csv.str();
}

namespace {

SensitivityConfig sensitivity_from_config(const Config& cfg) {
  SensitivityConfig sc;
  sc.volume = cfg.get_length_nm("sense.lx") * cfg.get_length_nm("sense.ly") *
              cfg.get_length_nm("sense.lz");
  sc.conversion_f = cfg.get_number("sense.conversion");
  sc.contrast = cfg.get_number("sense.contrast");
  sc.t2 = cfg.get_time_us("sense.t2");
  sc.tau_pulse = cfg.get_time_us("sense.tau");
  sc.alpha_tilde = cfg.has("sense.alpha_tilde") ? cfg.get_number("sense.alpha_tilde") : 0.0;
  sc.epsilon = cfg.has("sense.epsilon") ? cfg.get_number("sense.epsilon") : 0.1;
  if (cfg.has("sense.d_per_density")) sc.d_per_density = cfg.get_number("sense.d_per_density");
  return sc;
}

Scheme scheme_from_word(const std::string& w) {
  if (w == "echo") return Scheme::EchoOnly;
  if (w == "cpmg") return Scheme::Cpmg;
  if (w == "mrev8") return Scheme::Mrev8;
  if (w == "squeeze1a") return Scheme::Squeeze1A;
  if (w == "squeeze2a") return Scheme::Squeeze2A;
  throw ConfigError("unknown scheme '" + w + "'");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::EchoOnly: return "echo";
    case Scheme::Cpmg: return "cpmg";
    case Scheme::Mrev8: return "mrev8";
    case Scheme::Squeeze1A: return "squeeze1a";
    case Scheme::Squeeze2A: return "squeeze2a";
  }
  return "?";
}

} // namespace

std::string run_sensitivity(const Config& cfg, const RunOverrides& ov) {
  SensitivityConfig sc = sensitivity_from_config(cfg);
  sc.density = cfg.get_density_nm3("sense.density");
  sc.scheme = scheme_from_word(cfg.get_word("sense.scheme"));
  sc.mode = sc.squeezed() ? SenseMode::Concurrent : SenseMode::Sequential;
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  cfg.require_all_consumed();

  const SqueezeEstimate est = squeeze_estimate(sc, sc.scheme);
  const TimeOptimum opt = optimize_time(sc, est.t_sqz, est.xi);

  CsvWriter csv(cfg.hash(), seed,
                {"scheme", "n_s[cm^-3]", "N", "T_opt[us]", "xi", "eta[T/sqrtHz]", "xi_source"});
  csv.row_mixed({scheme_name(sc.scheme), fmt(sc.density * 1e21), std::to_string(sc.n_spins()),
                 fmt(opt.t_total), fmt(est.xi),
                 fmt(opt.eta * constants::tesla_sqrt_us_to_tesla_per_sqrt_hz),
                 sc.squeezed() ? "scaling" : "unity"});
  return csv.str();
}

std::string run_sweep(const Config& cfg, const RunOverrides& ov) {
  SensitivityConfig sc = sensitivity_from_config(cfg);
  const double lo = cfg.get_density_nm3("sweep.density_min");
  const double hi = cfg.get_density_nm3("sweep.density_max");
  const int points = static_cast<int>(cfg.get_integer("sweep.points"));
  const std::string scheme_list = cfg.get_word("sweep.schemes");
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  cfg.require_all_consumed();
  if (points < 1 || lo <= 0 || hi < lo) throw ConfigError("sweep: bad density range");

  std::vector<double> densities;
  for (int k = 0; k < points; ++k) {
    const double f = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    densities.push_back(lo * std::pow(hi / lo, f));
  }
  std::vector<Scheme> schemes;
  std::string word;
  for (char c : scheme_list + ",") {
    if (c == ',') {
      if (!word.empty()) schemes.push_back(scheme_from_word(word));
      word.clear();
    } else {
      word += c;
    }
  }
  if (schemes.empty()) throw ConfigError("sweep.schemes is empty");

  const auto pts = density_sweep(sc, densities, schemes);
  CsvWriter csv(cfg.hash(), seed,
                {"scheme", "n_s[cm^-3]", "N", "T_opt[us]", "xi", "eta[T/sqrtHz]", "xi_source"});
  for (const auto& p : pts)
    csv.row_mixed({scheme_name(p.scheme), fmt(p.n_s * 1e21), std::to_string(p.n), fmt(p.t_total),
                   fmt(p.xi), fmt(p.eta), p.xi_source});
  return csv.str();
}

std::string run_project_check(const Config& cfg, const RunOverrides& ov) {
  SpinEnsemble ens = ensemble_from_config(cfg, ov);
  const std::uint64_t seed = ov.seed ? *ov.seed : cfg.get_or<std::uint64_t>("run.seed", 1);
  if (cfg.has("run.seed")) (void)cfg.get_seed("run.seed");
  cfg.require_all_consumed();

  CsvWriter csv(cfg.hash(), seed,
                {"quad", "c_quad", "c_id", "residual", "d_over_nm1", "rel_error"});
  const int n = ens.n();
  for (const QuadKind kind : {QuadKind::Zz, QuadKind::DoubleQuantum}) {
    const ProjectionCheck pc = project_check(ens, kind);
    const double expected = pc.d_mean / (n - 1);
    const double rel = std::abs(pc.c_quad - expected) / std::abs(expected);
    csv.row_mixed({kind == QuadKind::Zz ? "zz" : "dq", fmt(pc.c_quad), fmt(pc.c_id),
                   fmt(pc.residual), fmt(expected), fmt(rel)});
  }
  return csv.str();
}

std::string run_recipe(const std::string& command, const Config& cfg, const RunOverrides& ov) {
  if (command == "simulate") return run_simulate(cfg, ov);
  if (command == "verify-sequence") return run_verify_sequence(cfg, ov);
  if (command == "gap") return run_gap(cfg, ov);
  if (command == "squeeze") return run_squeeze(cfg, ov);
  if (command == "sensitivity") return run_sensitivity(cfg, ov);
  if (command == "sweep") return run_sweep(cfg, ov);
  if (command == "project-check") return run_project_check(cfg, ov);
  throw ConfigError("unknown subcommand '" + command + "'");
}

} // namespace sqz
