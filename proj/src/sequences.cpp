#include "sqz/sequences.hpp"

#include "sqz/constants.hpp"
#include "sqz/hamiltonians.hpp"
#include "sqz/spin_ops.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sqz {

namespace {

using constants::pi;

bool is_pi_pulse(const PulseEvent& e) {
  return e.kind == PulseEvent::Kind::Rotation && std::abs(std::abs(e.angle) - pi) < 1e-9;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

} // namespace

PulseEvent PulseEvent::rotation(const SpinAxis& ax, double angle) {
  if (angle <= -2.0 * pi || angle > 2.0 * pi)
    throw std::invalid_argument("rotation angle out of (-2pi, 2pi]");
  PulseEvent e;
  e.kind = Kind::Rotation;
  e.axis = ax;
  e.angle = angle;
  return e;
}

PulseEvent PulseEvent::delay(double duration) {
  if (duration <= 0) throw std::invalid_argument("delay must be positive");
  PulseEvent e;
  e.kind = Kind::Delay;
  e.duration = duration;
  return e;
}

double PulseSequence::cycle_time() const {
  double t = 0.0;
  for (const auto& e : events)
    if (e.kind == PulseEvent::Kind::Delay) t += e.duration;
  return t;
}

int PulseSequence::pulse_count() const {
  int k = 0;
  for (const auto& e : events)
    if (e.kind == PulseEvent::Kind::Rotation) ++k;
  return k;
}

bool PulseSequence::is_cyclic(int probe_spins, double tol) const {
  // rotations are collective, so the net unitary factors over spins and a
  // small probe register decides cyclicity up to the global phase
  Matrix u = Matrix::Identity(1L << probe_spins, 1L << probe_spins);
  for (const auto& e : events) {
    if (e.kind != PulseEvent::Kind::Rotation) continue;
    u = collective_rotation(e.axis, e.angle, probe_spins, Basis::Full).data * u;
  }
  Complex phase = 0.0;
  for (long i = 0; i < u.rows(); ++i)
    if (std::abs(u(i, i)) > std::abs(phase)) phase = u(i, i);
  if (std::abs(phase) < 0.5) return false;
  phase /= std::abs(phase);
  return (u / phase - Matrix::Identity(u.rows(), u.cols())).norm() <= tol;
}

ToggledFrame toggling_frames(const PulseSequence& seq, const OperatorMatrix& h_int) {
  if (!seq.is_cyclic()) throw std::invalid_argument("toggling_frames requires a cyclic sequence");
  ToggledFrame out;
  out.basis = h_int.basis;
  out.n_spins = h_int.n_spins;
  const OperatorMatrix jz = collective_op(SpinAxis::z(), h_int.n_spins, h_int.basis);

  Matrix uc = Matrix::Identity(h_int.dim(), h_int.dim());
  int echo_sign = 1;
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Rotation) {
      uc = collective_rotation(e.axis, e.angle, h_int.n_spins, h_int.basis).data * uc;
      if (is_pi_pulse(e)) echo_sign = -echo_sign;
      continue;
    }
    ToggledFrame::Segment s;
    s.h = OperatorMatrix(uc.adjoint() * h_int.data * uc, h_int.basis, h_int.n_spins);
    s.jz = OperatorMatrix(uc.adjoint() * jz.data * uc, h_int.basis, h_int.n_spins);
    s.duration = e.duration;
    s.echo_sign = echo_sign;
    out.segments.push_back(std::move(s));
    out.cycle_time += e.duration;
  }
  if (out.segments.empty()) throw std::invalid_argument("sequence has no delays");
  return out;
}

StateVector propagate_sequence(const PulseSequence& seq, const OperatorMatrix& h_int,
                               const StateVector& state, int n_cycles) {
  if (n_cycles < 1) throw std::invalid_argument("n_cycles >= 1");
  if (!seq.is_cyclic())
    throw std::invalid_argument("stroboscopic propagation requires a cyclic sequence");
  require_same_basis(state, h_int);

  Propagator hp(h_int);
  std::map<double, Matrix> delay_u;

  Matrix cycle = Matrix::Identity(h_int.dim(), h_int.dim());
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Delay) {
      auto it = delay_u.find(e.duration);
      if (it == delay_u.end())
        it = delay_u.emplace(e.duration, hp.unitary(e.duration).data).first;
      cycle = it->second * cycle;
    } else {
      cycle = collective_rotation(e.axis, e.angle, h_int.n_spins, h_int.basis).data * cycle;
    }
  }

  Vector v = state.amps;
  for (int c = 0; c < n_cycles; ++c) v = cycle * v;
  StateVector out(std::move(v), state.basis, state.n_spins);
  out.require_normalized(1e-9);
  return out;
}

OperatorMatrix magnus(const ToggledFrame& frames, int order, ExecMode mode) {
  if (order < 1 || order > 3) throw std::invalid_argument("magnus order must be 1..3");
  const auto& seg = frames.segments;
  if (seg.empty()) throw std::invalid_argument("empty frame list");
  const long dim = seg[0].h.dim();
  const double T = frames.cycle_time;
  const int m = static_cast<int>(seg.size());

  Matrix acc = Matrix::Zero(dim, dim);

  if (order == 1) {
    for (const auto& s : seg) acc += s.duration * s.h.data;
    acc /= T;
  } else if (order == 2) {
    for (int a = 1; a < m; ++a)
      for (int b = 0; b < a; ++b)
        acc += seg[a].duration * seg[b].duration * commutator(seg[a].h.data, seg[b].h.data);
    acc *= Complex(0.0, -0.5 / T);
  } else {
    // ordered triple sum; partials indexed by the outer segment so the
    // OpenMP kernel and the serial reference reduce in the same order
    std::vector<Matrix> partial(m, Matrix::Zero(dim, dim));

    auto body = [&](int a) {
      Matrix local = Matrix::Zero(dim, dim);
      const Matrix& ha = seg[a].h.data;
      const double ta = seg[a].duration;
      for (int b = 0; b < a; ++b) {
        const Matrix& hb = seg[b].h.data;
        const double tb = seg[b].duration;
        // coincident-index pieces carry half weight from the time ordering
        local += (0.5 * ta * tb * tb) * commutator(hb, commutator(hb, ha));
        local += (0.5 * ta * ta * tb) * commutator(ha, commutator(ha, hb));
        for (int c = 0; c < b; ++c) {
          const Matrix& hc = seg[c].h.data;
          const double w = ta * tb * seg[c].duration;
          local += w * (commutator(ha, commutator(hb, hc)) +
                        commutator(hc, commutator(hb, ha)));
        }
      }
      partial[a] = std::move(local);
    };

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int a = 0; a < m; ++a) body(a);
    } else {
      for (int a = 0; a < m; ++a) body(a);
    }
    for (int a = 0; a < m; ++a) acc += partial[a];
    acc *= -1.0 / (6.0 * T);
  }

  return OperatorMatrix(0.5 * (acc + acc.adjoint()), frames.basis, frames.n_spins);
}

namespace {

const SpinAxis kAxisX = SpinAxis::x();
const SpinAxis kAxisY = SpinAxis::y();
const SpinAxis kAxisZ = SpinAxis::z();

void push_rot(std::vector<PulseEvent>& ev, const SpinAxis& ax, double angle) {
  ev.push_back(PulseEvent::rotation(ax, angle));
}
void push_delay(std::vector<PulseEvent>& ev, double d) { ev.push_back(PulseEvent::delay(d)); }

// 4-pulse 3-axis cycling subcycle; S_z frames [z, y, +x, y, z] (mirror=false)
// or [z, y, -x, y, z] (mirror=true), delays [d_z, d_y, 2 d_x, d_y, d_z].
void push_wahuha(std::vector<PulseEvent>& ev, double d_z, double d_y, double d_x, bool mirror) {
  push_delay(ev, d_z);
  push_rot(ev, kAxisX, 0.5 * pi);
  push_delay(ev, d_y);
  push_rot(ev, kAxisY, mirror ? 0.5 * pi : -0.5 * pi);
  push_delay(ev, 2.0 * d_x);
  push_rot(ev, kAxisY, mirror ? -0.5 * pi : 0.5 * pi);
  push_delay(ev, d_y);
  push_rot(ev, kAxisX, -0.5 * pi);
  push_delay(ev, d_z);
}

// single rotation equal to "R1 then R2"
std::pair<SpinAxis, double> compose_rotations(const SpinAxis& ax1, double a1,
                                              const SpinAxis& ax2, double a2) {
  const Eigen::AngleAxisd r(Eigen::AngleAxisd(a2, ax2.u) * Eigen::AngleAxisd(a1, ax1.u));
  if (std::abs(r.angle()) < 1e-14) return {SpinAxis::z(), 0.0};
  return {SpinAxis(r.axis()), r.angle()};
}

// Two-axis subcycle: mirrored 3-axis block. With net_flip the closing pulse
// absorbs an extra pi rotation about (y-x)/sqrt2, which alternates the x/y
// frame roles of the following subcycle; delays [tau, d2, 2 d3, d2, tau].
void push_two_axis_subcycle(std::vector<PulseEvent>& ev, double tau, double d2, double d3,
                            bool net_flip) {
  push_delay(ev, tau);
  push_rot(ev, kAxisX, 0.5 * pi);
  push_delay(ev, d2);
  push_rot(ev, kAxisY, 0.5 * pi);
  push_delay(ev, 2.0 * d3);
  push_rot(ev, kAxisY, -0.5 * pi);
  push_delay(ev, d2);
  if (net_flip) {
    const SpinAxis n(-1.0, 1.0, 0.0);
    const auto [ax, ang] = compose_rotations(kAxisX, -0.5 * pi, n, pi);
    push_rot(ev, ax, ang);
  } else {
    push_rot(ev, kAxisX, -0.5 * pi);
  }
  push_delay(ev, tau);
}

} // namespace

PulseSequence wahuha(double tau) {
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  PulseSequence s;
  push_wahuha(s.events, tau, tau, tau, false);
  return s;
}

PulseSequence mrev8(double tau, double tau_plus, double tau_minus, SequenceVariant v) {
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  PulseSequence s;
  if (v == SequenceVariant::OneAxis) {
    if (std::abs(tau_plus + 2.0 * tau_minus - 3.0 * tau) > 1e-12 * tau)
      throw std::invalid_argument("one-axis delays must satisfy tau+ + 2 tau- = 3 tau");
    push_wahuha(s.events, tau_plus, tau_minus, tau_minus, false);
    push_wahuha(s.events, tau_plus, tau_minus, tau_minus, true);
  } else {
    if (std::abs(tau_plus + tau_minus - 2.0 * tau) > 1e-12 * tau)
      throw std::invalid_argument("two-axis delays must satisfy tau+ + tau- = 2 tau");
    // both subcycles net-flipped: the pair closes to the identity up to phase
    push_two_axis_subcycle(s.events, tau, tau_minus, tau_plus, true);
    push_two_axis_subcycle(s.events, tau, tau_plus, tau_minus, true);
  }
  return s;
}

PulseSequence mrev8_with_echo(double tau, double tau_plus, double tau_minus,
                              SequenceVariant v) {
  if (tau <= 0) throw std::invalid_argument("tau must be positive");
  PulseSequence s;

  if (v == SequenceVariant::OneAxis) {
    if (std::abs(tau_plus + 2.0 * tau_minus - 3.0 * tau) > 1e-12 * tau)
      throw std::invalid_argument("one-axis delays must satisfy tau+ + 2 tau- = 3 tau");
    auto block = [&] {
      push_wahuha(s.events, tau_plus, tau_minus, tau_minus, false);
      push_wahuha(s.events, tau_plus, tau_minus, tau_minus, true);
    };
    block();
    push_rot(s.events, kAxisX, pi);
    block();
    block();
    push_rot(s.events, kAxisX, pi);
    block();
    return s;
  }

  if (std::abs(tau_plus + tau_minus - 2.0 * tau) > 1e-12 * tau)
    throw std::invalid_argument("two-axis delays must satisfy tau+ + tau- = 2 tau");

  // Frame roles run T1 T2 | T2 T1 T1 T2 | T2 T1 (palindromic in time):
  // x-like frames carry tau_plus, y-like tau_minus, z frames stay at tau.
  auto t1_flip = [&] { push_two_axis_subcycle(s.events, tau, tau_minus, tau_plus, true); };
  auto t1_plain = [&] { push_two_axis_subcycle(s.events, tau, tau_minus, tau_plus, false); };
  auto t2_flip = [&] { push_two_axis_subcycle(s.events, tau, tau_plus, tau_minus, true); };
  auto t2_plain = [&] { push_two_axis_subcycle(s.events, tau, tau_plus, tau_minus, false); };

  t1_flip();  // w1
  t2_plain(); // w2
  push_rot(s.events, kAxisZ, pi);
  t2_flip();  // w3
  t1_plain(); // w4
  t1_flip();  // w5
  t2_plain(); // w6
  push_rot(s.events, kAxisZ, pi);
  t2_flip();  // w7
  t1_plain(); // w8
  return s;
}

EffectiveField effective_field(const ToggledFrame& frames, bool echo_synced) {
  const long dim = basis_dim(frames.basis, frames.n_spins);
  Matrix acc = Matrix::Zero(dim, dim);
  for (const auto& s : frames.segments) {
    const double w = (echo_synced ? s.echo_sign : 1) * s.duration;
    acc += w * s.jz.data;
  }
  acc /= frames.cycle_time;

  EffectiveField f;
  f.op = OperatorMatrix(std::move(acc), frames.basis, frames.n_spins);

  const int n = frames.n_spins;
  const Matrix jx = collective_op(SpinAxis::x(), n, frames.basis).data;
  const Matrix jy = collective_op(SpinAxis::y(), n, frames.basis).data;
  const Matrix jz = collective_op(SpinAxis::z(), n, frames.basis).data;
  const double jnorm2 = jx.squaredNorm();
  f.direction = Vec3((f.op.data.adjoint() * jx).trace().real(),
                     (f.op.data.adjoint() * jy).trace().real(),
                     (f.op.data.adjoint() * jz).trace().real()) /
                jnorm2;
  f.magnitude = f.direction.norm();
  if (f.magnitude > 1e-14) {
    // one-axis fields live in the z-y plane (nu measured from z toward y),
    // two-axis fields in the x-y plane (nu from -x toward y)
    if (std::abs(f.direction.z()) > 1e-9 * f.magnitude)
      f.nu = std::atan2(f.direction.y(), f.direction.z());
    else
      f.nu = std::atan2(f.direction.y(), -f.direction.x());
    f.direction /= f.magnitude;
  }
  return f;
}

double moment_t6(const OperatorMatrix& h3bar, const SpinAxis& perp_axis) {
  h3bar.require_hermitian(1e-9);
  const OperatorMatrix jp = collective_op(perp_axis, h3bar.n_spins, h3bar.basis);
  const Matrix c = commutator(h3bar.data, jp.data);
  const double num = (c * c).trace().real();
  const double den = (jp.data * jp.data).trace().real();
  return std::abs(num) / den;
}

double pulse_error_contrast(double contrast, double p, int k) {
  if (p < 0 || p > 1) throw std::invalid_argument("p must be in [0,1]");
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  return contrast * std::pow(1.0 - p, k);
}

EpsilonFit calibrate_epsilon(double tau, double tau_plus, double tau_minus,
                             SequenceVariant v, const Eigen::MatrixXd& couplings) {
  const PulseSequence seq = mrev8_with_echo(tau, tau_plus, tau_minus, v);
  const OperatorMatrix h_int = ising_hamiltonian(couplings);
  const ToggledFrame frames = toggling_frames(seq, h_int);
  const OperatorMatrix h1 = magnus(frames, 1);

  const Matrix base = heisenberg_hamiltonian(couplings).data;
  const Matrix pert = v == SequenceVariant::OneAxis
                          ? ising_hamiltonian(couplings).data
                          : double_quantum_hamiltonian(couplings).data;

  auto iprod = [](const Matrix& a, const Matrix& b) { return (a.adjoint() * b).trace().real(); };
  const double bb = iprod(base, base), bp = iprod(base, pert), pp = iprod(pert, pert);
  const double mb = iprod(base, h1.data), mp = iprod(pert, h1.data);
  const double det = bb * pp - bp * bp;
  if (std::abs(det) < 1e-300) throw NumericalContractError("epsilon fit singular");
  const double c_base = (mb * pp - mp * bp) / det;
  const double c_pert = (mp * bb - mb * bp) / det;

  EpsilonFit fit;
  fit.scale = c_base;
  fit.epsilon = c_pert / c_base;
  const Matrix resid = h1.data - c_base * base - c_pert * pert;
  fit.residual = h1.data.norm() > 0 ? resid.norm() / h1.data.norm() : resid.norm();
  return fit;
}

void write_sequence(std::ostream& os, const PulseSequence& seq) {
  os.precision(17);
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Delay) {
      os << "DELAY " << e.duration << '\n';
      continue;
    }
    const Vec3& u = e.axis.u;
    if (u.isApprox(Vec3::UnitX()))
      os << "ROT x ";
    else if (u.isApprox(Vec3::UnitY()))
      os << "ROT y ";
    else if (u.isApprox(Vec3::UnitZ()))
      os << "ROT z ";
    else
      os << "ROT " << u.x() << ',' << u.y() << ',' << u.z() << ' ';
    os << e.angle << '\n';
  }
}

PulseSequence read_sequence(std::istream& is) {
  PulseSequence seq;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "DELAY") {
      double d;
      if (!(ss >> d)) throw ConfigError("sequence line " + std::to_string(lineno) + ": bad delay");
      seq.events.push_back(PulseEvent::delay(d));
    } else if (tag == "ROT") {
      std::string axis_str;
      double angle;
      if (!(ss >> axis_str >> angle))
        throw ConfigError("sequence line " + std::to_string(lineno) + ": bad rotation");
      SpinAxis ax = SpinAxis::z();
      if (axis_str == "x") ax = SpinAxis::x();
      else if (axis_str == "y") ax = SpinAxis::y();
      else if (axis_str == "z") ax = SpinAxis::z();
      else {
        double ux, uy, uz;
        char c1, c2;
        std::istringstream as(axis_str);
        if (!(as >> ux >> c1 >> uy >> c2 >> uz) || c1 != ',' || c2 != ',')
          throw ConfigError("sequence line " + std::to_string(lineno) + ": bad axis");
        ax = SpinAxis(ux, uy, uz);
      }
      seq.events.push_back(PulseEvent::rotation(ax, angle));
    } else {
      throw ConfigError("sequence line " + std::to_string(lineno) + ": unknown tag '" + tag +
                        "'");
    }
  }
  return seq;
}

} // namespace sqz
