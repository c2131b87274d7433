#include "sqz/noise.hpp"

#include "sqz/spin_ops.hpp"

#include <bit>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sqz {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// per-basis-state eigenvalues of S_z^k for the diagonal noise phases
struct ZTable {
  int n_spins = 0;
  Basis basis = Basis::Full;

  double collective_z(long index) const {
    if (basis == Basis::Dicke) return 0.5 * n_spins - index;
    return 0.5 * (n_spins - 2 * std::popcount(static_cast<unsigned long>(index)));
  }
  double spin_z(long index, int k) const {
    // full basis only
    return ((index >> (n_spins - 1 - k)) & 1) ? -0.5 : 0.5;
  }
};

struct TrajectorySlot {
  std::vector<Vec3> mean;
  std::vector<Eigen::Matrix3d> second;
  std::vector<double> sym_weight;
};

// shared per-run immutable context
struct RunContext {
  Matrix j[3];
  Matrix sym_basis; // 2^N x (N+1), empty in the Dicke basis
  ZTable zt;
};

void record_observables(const Vector& v, const RunContext& ctx, TrajectorySlot& slot,
                        std::size_t sample_idx) {
  Vector jv[3];
  Vec3 mean;
  for (int a = 0; a < 3; ++a) {
    jv[a] = ctx.j[a] * v;
    mean(a) = v.dot(jv[a]).real();
  }
  Eigen::Matrix3d sec;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      sec(a, b) = jv[a].dot(jv[b]).real();
      sec(b, a) = sec(a, b);
    }
  slot.mean[sample_idx] = mean;
  slot.second[sample_idx] = sec;
  slot.sym_weight[sample_idx] =
      ctx.sym_basis.size() > 0 ? (ctx.sym_basis.adjoint() * v).squaredNorm() : v.squaredNorm();
}

MomentSeries reduce_slots(const std::vector<TrajectorySlot>& slots,
                          const std::vector<double>& times, int n_spins) {
  MomentSeries out;
  out.times = times;
  out.n_traj = static_cast<int>(slots.size());
  out.n_spins = n_spins;
  const std::size_t nt = times.size();
  out.mean.assign(nt, Vec3::Zero());
  out.second.assign(nt, Eigen::Matrix3d::Zero());
  out.sym_weight.assign(nt, 0.0);
  out.mean_se.assign(nt, 0.0);

  for (const auto& s : slots) {
    for (std::size_t i = 0; i < nt; ++i) {
      out.mean[i] += s.mean[i];
      out.second[i] += s.second[i];
      out.sym_weight[i] += s.sym_weight[i];
    }
  }
  const double inv = 1.0 / out.n_traj;
  for (std::size_t i = 0; i < nt; ++i) {
    out.mean[i] *= inv;
    out.second[i] *= inv;
    out.sym_weight[i] *= inv;
  }
  if (out.n_traj > 1) {
    for (std::size_t i = 0; i < nt; ++i) {
      double ss = 0.0;
      for (const auto& s : slots) ss += (s.mean[i] - out.mean[i]).squaredNorm();
      out.mean_se[i] = std::sqrt(ss / (out.n_traj * (out.n_traj - 1.0)));
    }
  }
  return out;
}

} // namespace

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index * 0xd1b54a32d192ed03ULL + 1)));
}

std::vector<double> sample_ou(double tau_c, double variance, double dt, int n_steps,
                              std::mt19937_64& rng) {
  if (tau_c <= 0 || variance < 0 || dt <= 0 || n_steps < 1)
    throw std::invalid_argument("sample_ou: bad parameters");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> path(n_steps);
  if (variance == 0.0) {
    // keep the draw count identical so substreams stay aligned
    for (int k = 0; k < n_steps; ++k) { gauss(rng); path[k] = 0.0; }
    return path;
  }
  const double rho = std::exp(-dt / tau_c);
  const double sigma = std::sqrt(variance);
  const double step_sigma = std::sqrt(variance * (1.0 - rho * rho));
  path[0] = sigma * gauss(rng);
  for (int k = 1; k < n_steps; ++k) path[k] = path[k - 1] * rho + step_sigma * gauss(rng);
  return path;
}

double ou_phase_variance(double tau_c, double variance, double dt, int n_steps) {
  const double rho = std::exp(-dt / tau_c);
  double cross = 0.0;
  double rk = 1.0;
  for (int k = 1; k < n_steps; ++k) {
    rk *= rho;
    cross += (n_steps - k) * rk;
  }
  return variance * dt * dt * (n_steps + 2.0 * cross);
}

double gamma_from_kernel(double variance, double tau_c, double t, int n_spins) {
  if (t <= 0) return 0.0;
  const double x = t / tau_c;
  return variance * tau_c / n_spins * (1.0 - (1.0 - std::exp(-x)) / x);
}

std::vector<double> collective_projection(const std::vector<std::vector<double>>& paths) {
  if (paths.empty()) throw std::invalid_argument("no paths");
  std::vector<double> avg(paths[0].size(), 0.0);
  for (const auto& p : paths) {
    if (p.size() != avg.size()) throw std::invalid_argument("path length mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) avg[i] += p[i];
  }
  for (double& v : avg) v /= paths.size();
  return avg;
}

namespace {

RunContext make_context(Basis basis, int n) {
  RunContext ctx;
  ctx.j[0] = collective_op(SpinAxis::x(), n, basis).data;
  ctx.j[1] = collective_op(SpinAxis::y(), n, basis).data;
  ctx.j[2] = collective_op(SpinAxis::z(), n, basis).data;
  if (basis == Basis::Full) ctx.sym_basis = symmetric_basis_full(n);
  ctx.zt.n_spins = n;
  ctx.zt.basis = basis;
  return ctx;
}

// diagonal dephasing phases for one segment: PerSpin needs the full basis
void apply_noise_phases(Vector& v, const std::vector<double>& omegas, double duration,
                        NoiseMode mode, const ZTable& zt) {
  const long dim = v.size();
  if (mode == NoiseMode::CollectiveOnly) {
    double wbar = 0.0;
    for (double w : omegas) wbar += w;
    wbar /= omegas.size();
    for (long i = 0; i < dim; ++i)
      v(i) *= std::exp(Complex(0.0, -wbar * zt.collective_z(i) * duration));
    return;
  }
  for (long i = 0; i < dim; ++i) {
    double phase = 0.0;
    for (int k = 0; k < zt.n_spins; ++k) phase += omegas[k] * zt.spin_z(i, k);
    v(i) *= std::exp(Complex(0.0, -phase * duration));
  }
}

// advance each per-spin OU value by `delta` (exact discretization)
void advance_ou(std::vector<double>& omegas, double delta, double tau_c, double variance,
                std::mt19937_64& rng, std::normal_distribution<double>& gauss) {
  const double rho = std::exp(-delta / tau_c);
  const double step_sigma = variance > 0 ? std::sqrt(variance * (1.0 - rho * rho)) : 0.0;
  for (double& w : omegas) w = w * rho + step_sigma * gauss(rng);
}

void init_ou(std::vector<double>& omegas, double variance, std::mt19937_64& rng,
             std::normal_distribution<double>& gauss) {
  const double sigma = variance > 0 ? std::sqrt(variance) : 0.0;
  for (double& w : omegas) w = sigma * gauss(rng);
}

} // namespace

MomentSeries evolve_noisy(const StateVector& state, const OperatorMatrix& h,
                          const NoiseModel& noise, const TrajectoryConfig& cfg,
                          const std::vector<double>& sample_times) {
  require_same_basis(state, h);
  if (noise.mode == NoiseMode::PerSpin && state.basis != Basis::Full)
    throw std::invalid_argument("per-spin noise requires the full basis");
  if (cfg.dt > noise.tau_c / 10.0 + 1e-15)
    throw std::invalid_argument("noise step must satisfy dt <= tau_c / 10");
  if (cfg.n_traj < 1) throw std::invalid_argument("n_traj >= 1");
  if (sample_times.empty()) throw std::invalid_argument("no sample times");

  const int n = state.n_spins;
  const RunContext ctx = make_context(state.basis, n);

  // step propagator for one dt slice
  Propagator hp(h);
  const Matrix u_dt = hp.unitary(cfg.dt).data;

  std::vector<long> sample_steps;
  long n_steps = 0;
  for (double t : sample_times) {
    const long s = std::llround(t / cfg.dt);
    if (std::abs(s * cfg.dt - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("sample times must be multiples of dt");
    sample_steps.push_back(s);
    n_steps = std::max(n_steps, s);
  }

  const double variance = noise.ou_variance(n);
  std::vector<TrajectorySlot> slots(cfg.n_traj);
  for (auto& s : slots) {
    s.mean.resize(sample_times.size());
    s.second.resize(sample_times.size());
    s.sym_weight.resize(sample_times.size());
  }

  auto run_one = [&](int traj) {
    std::mt19937_64 rng = substream(cfg.seed, traj);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> omegas(n);
    init_ou(omegas, variance, rng, gauss);

    Vector v = state.amps;
    long step = 0;
    auto maybe_record = [&] {
      for (std::size_t si = 0; si < sample_steps.size(); ++si)
        if (sample_steps[si] == step) record_observables(v, ctx, slots[traj], si);
    };
    maybe_record();
    while (step < n_steps) {
      apply_noise_phases(v, omegas, 0.5 * cfg.dt, noise.mode, ctx.zt);
      v = u_dt * v;
      apply_noise_phases(v, omegas, 0.5 * cfg.dt, noise.mode, ctx.zt);
      advance_ou(omegas, cfg.dt, noise.tau_c, variance, rng, gauss);
      ++step;
      maybe_record();
    }
  };

  if (cfg.exec == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  } else {
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  }

  return reduce_slots(slots, sample_times, n);
}

MomentSeries evolve_noisy_sequence(const StateVector& state, const OperatorMatrix& h_int,
                                   const PulseSequence& seq, int n_cycles,
                                   const NoiseModel& noise, const TrajectoryConfig& cfg) {
  require_same_basis(state, h_int);
  if (noise.mode == NoiseMode::PerSpin && state.basis != Basis::Full)
    throw std::invalid_argument("per-spin noise requires the full basis");
  if (!seq.is_cyclic()) throw std::invalid_argument("cyclic sequence required");
  if (n_cycles < 1) throw std::invalid_argument("n_cycles >= 1");

  const int n = state.n_spins;
  const RunContext ctx = make_context(state.basis, n);

  // cache propagators per delay duration and per pulse
  Propagator hp(h_int);
  std::map<double, Matrix> delay_u;
  std::vector<const Matrix*> step_delay;
  std::vector<double> step_duration;
  std::vector<Matrix> pulses;
  struct Op { bool is_delay; std::size_t idx; };
  std::vector<Op> program;
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Delay) {
      if (e.duration > noise.tau_c / 10.0 + 1e-15)
        throw std::invalid_argument("delay exceeds tau_c / 10; noise step model invalid");
      auto it = delay_u.find(e.duration);
      if (it == delay_u.end()) it = delay_u.emplace(e.duration, hp.unitary(e.duration).data).first;
      program.push_back({true, step_duration.size()});
      step_delay.push_back(&it->second);
      step_duration.push_back(e.duration);
    } else {
      program.push_back({false, pulses.size()});
      pulses.push_back(collective_rotation(e.axis, e.angle, n, state.basis).data);
    }
  }

  const double variance = noise.ou_variance(n);
  std::vector<double> times(n_cycles);
  const double tc = seq.cycle_time();
  for (int c = 0; c < n_cycles; ++c) times[c] = (c + 1) * tc;

  std::vector<TrajectorySlot> slots(cfg.n_traj);
  for (auto& s : slots) {
    s.mean.resize(n_cycles);
    s.second.resize(n_cycles);
    s.sym_weight.resize(n_cycles);
  }

  auto run_one = [&](int traj) {
    std::mt19937_64 rng = substream(cfg.seed, traj);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> omegas(n);
    init_ou(omegas, variance, rng, gauss);

    Vector v = state.amps;
    for (int c = 0; c < n_cycles; ++c) {
      for (const Op& op : program) {
        if (!op.is_delay) {
          v = pulses[op.idx] * v;
          continue;
        }
        const double d = step_duration[op.idx];
        apply_noise_phases(v, omegas, 0.5 * d, noise.mode, ctx.zt);
        v = (*step_delay[op.idx]) * v;
        apply_noise_phases(v, omegas, 0.5 * d, noise.mode, ctx.zt);
        advance_ou(omegas, d, noise.tau_c, variance, rng, gauss);
      }
      record_observables(v, ctx, slots[traj], c);
    }
  };

  if (cfg.exec == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  } else {
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  }

  return reduce_slots(slots, times, n);
}

namespace {

// apply exp(-i theta (v . sigma)/2) on one spin of the register, site 0 MSB
void apply_single_spin(Vector& state, int site, int n, const Vec3& v, double theta) {
  if (theta == 0.0) return;
  const double half = 0.5 * theta;
  const double c = std::cos(half), s = std::sin(half);
  // u = cos 1 - i sin (v . sigma)
  const Complex u00(c, -s * v.z());
  const Complex u11(c, s * v.z());
  const Complex u01(-s * v.y(), -s * v.x());
  const Complex u10(s * v.y(), -s * v.x());
  const long stride = 1L << (n - 1 - site);
  const long dim = state.size();
  for (long base = 0; base < dim; base += 2 * stride) {
    for (long off = 0; off < stride; ++off) {
      const long i0 = base + off;
      const long i1 = i0 + stride;
      const Complex a = state(i0), b = state(i1);
      state(i0) = u00 * a + u01 * b;
      state(i1) = u10 * a + u11 * b;
    }
  }
}

// toggled frame axis of S_z before each delay segment, from a 2x2 walk
std::vector<std::pair<Vec3, double>> frame_axes(const PulseSequence& seq) {
  std::vector<std::pair<Vec3, double>> out;
  Matrix2c uc = Matrix2c::Identity();
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Rotation) {
      const Matrix2c r =
          (std::cos(0.5 * e.angle) * Matrix2c::Identity() -
           Complex(0, 1) * std::sin(0.5 * e.angle) *
               (e.axis.u.x() * pauli_x() + e.axis.u.y() * pauli_y() + e.axis.u.z() * pauli_z()));
      uc = r * uc;
      continue;
    }
    const Matrix2c toggled = uc.adjoint() * pauli_z() * uc;
    const Vec3 v(0.5 * (toggled * pauli_x()).trace().real(),
                 0.5 * (toggled * pauli_y()).trace().real(),
                 0.5 * (toggled * pauli_z()).trace().real());
    out.emplace_back(v, e.duration);
  }
  return out;
}

} // namespace

MomentSeries evolve_noisy_average_frame(const StateVector& state, const OperatorMatrix& h_avg,
                                        const PulseSequence& seq, int n_cycles,
                                        const NoiseModel& noise, const TrajectoryConfig& cfg) {
  if (state.basis != Basis::Full || h_avg.basis != Basis::Full)
    throw std::invalid_argument("toggled-frame trajectories need the full basis");
  require_same_basis(state, h_avg);
  if (!seq.is_cyclic()) throw std::invalid_argument("cyclic sequence required");
  if (n_cycles < 1) throw std::invalid_argument("n_cycles >= 1");

  const int n = state.n_spins;
  const RunContext ctx = make_context(Basis::Full, n);
  const auto axes = frame_axes(seq);
  if (axes.empty()) throw std::invalid_argument("sequence has no delays");
  for (const auto& [v, d] : axes)
    if (d > noise.tau_c / 10.0 + 1e-15)
      throw std::invalid_argument("delay exceeds tau_c / 10; noise step model invalid");

  Propagator hp(h_avg);
  std::map<double, Matrix> delay_u;
  for (const auto& [v, d] : axes)
    if (!delay_u.count(d)) delay_u.emplace(d, hp.unitary(d).data);

  const double variance = noise.ou_variance(n);
  std::vector<double> times(n_cycles);
  const double tc = seq.cycle_time();
  for (int c = 0; c < n_cycles; ++c) times[c] = (c + 1) * tc;

  std::vector<TrajectorySlot> slots(cfg.n_traj);
  for (auto& s : slots) {
    s.mean.resize(n_cycles);
    s.second.resize(n_cycles);
    s.sym_weight.resize(n_cycles);
  }

  auto run_one = [&](int traj) {
    std::mt19937_64 rng = substream(cfg.seed, traj);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> omegas(n);
    init_ou(omegas, variance, rng, gauss);

    Vector v = state.amps;
    for (int c = 0; c < n_cycles; ++c) {
      for (const auto& [axis, dur] : axes) {
        auto apply_noise_half = [&] {
          if (noise.mode == NoiseMode::CollectiveOnly) {
            double wbar = 0.0;
            for (double w : omegas) wbar += w;
            wbar /= n;
            for (int k = 0; k < n; ++k) apply_single_spin(v, k, n, axis, wbar * dur * 0.5);
          } else {
            for (int k = 0; k < n; ++k) apply_single_spin(v, k, n, axis, omegas[k] * dur * 0.5);
          }
        };
        apply_noise_half();
        v = delay_u.at(dur) * v;
        apply_noise_half();
        advance_ou(omegas, dur, noise.tau_c, variance, rng, gauss);
      }
      record_observables(v, ctx, slots[traj], c);
    }
  };

  if (cfg.exec == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  } else {
    for (int traj = 0; traj < cfg.n_traj; ++traj) run_one(traj);
  }

  return reduce_slots(slots, times, n);
}

double fit_decay_rate(const MomentSeries& series, double t_min, double t_max) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t_min || t > t_max) continue;
    const double s = std::abs(series.mean[i].x());
    if (s <= 0) continue;
    ts.push_back(t);
    ys.push_back(-std::log(s));
  }
  if (ts.size() < 2) throw std::invalid_argument("fit window contains fewer than 2 samples");
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  if (std::abs(denom) < 1e-300) throw std::invalid_argument("degenerate fit window");
  return (n * sty - st * sy) / denom;
}

} // namespace sqz
