#include "sqz/sequences.hpp"

#include "sqz/constants.hpp"
#include "sqz/geometry.hpp"
#include "sqz/hamiltonians.hpp"
#include "sqz/spin_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

using namespace sqz;

namespace {

using constants::pi;

SpinEnsemble test_ensemble(int n, std::uint64_t seed) {
  GeometrySpec spec;
  spec.kind = GeometryKind::RandomSlab3D;
  spec.lx = spec.ly = 20.0;
  spec.lz = 8.0;
  spec.n = n;
  spec.density = 1e-3;
  spec.seed = seed;
  return make_ensemble(spec);
}

// exact single-cycle unitary of a sequence
Matrix cycle_unitary(const PulseSequence& seq, const OperatorMatrix& h) {
  Propagator hp(h);
  Matrix u = Matrix::Identity(h.dim(), h.dim());
  for (const auto& e : seq.events) {
    if (e.kind == PulseEvent::Kind::Delay)
      u = hp.unitary(e.duration).data * u;
    else
      u = collective_rotation(e.axis, e.angle, h.n_spins, h.basis).data * u;
  }
  return u;
}

OperatorMatrix magnus_sum_123(const ToggledFrame& f) {
  Matrix s = magnus(f, 1).data + magnus(f, 2).data + magnus(f, 3).data;
  return OperatorMatrix(std::move(s), f.basis, f.n_spins);
}

} // namespace

TEST_CASE("sequence bookkeeping") {
  const PulseSequence w = wahuha(0.5);
  CHECK(w.pulse_count() == 4);
  CHECK(w.cycle_time() == doctest::Approx(3.0));
  CHECK(w.is_cyclic());

  CHECK_THROWS_AS(PulseEvent::delay(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(PulseEvent::rotation(SpinAxis::x(), 7.0), std::invalid_argument);

  // non-cyclic sequence is rejected for stroboscopic work
  PulseSequence bad;
  bad.events.push_back(PulseEvent::delay(1.0));
  bad.events.push_back(PulseEvent::rotation(SpinAxis::x(), 0.5 * pi));
  CHECK_FALSE(bad.is_cyclic());
  const OperatorMatrix h = ising_hamiltonian(test_ensemble(3, 1));
  const StateVector psi = polarized_state(SpinAxis::x(), 3, Basis::Full);
  CHECK_THROWS_AS(propagate_sequence(bad, h, psi, 1), std::invalid_argument);
}

TEST_CASE("piecewise propagation identities") {
  const int n = 3;
  const OperatorMatrix jz = collective_op(SpinAxis::z(), n, Basis::Full);
  const OperatorMatrix jy = collective_op(SpinAxis::y(), n, Basis::Full);
  const StateVector psi = polarized_state(SpinAxis(0.2, -0.4, 0.9), n, Basis::Full);
  const double omega = 0.8, tau = 0.6;

  // a bare delay equals free evolution
  PulseSequence bare;
  bare.events.push_back(PulseEvent::delay(tau));
  const OperatorMatrix h(omega * jz.data, Basis::Full, n);
  const StateVector a = propagate_sequence(bare, h, psi, 1);
  const StateVector b = evolve(psi, h, tau);
  CHECK((a.amps - b.amps).norm() < 1e-12);

  // [pi/2]_x - tau - [-pi/2]_x toggles J_z into J_y for the delay
  PulseSequence toggled;
  toggled.events.push_back(PulseEvent::rotation(SpinAxis::x(), 0.5 * pi));
  toggled.events.push_back(PulseEvent::delay(tau));
  toggled.events.push_back(PulseEvent::rotation(SpinAxis::x(), -0.5 * pi));
  const StateVector c = propagate_sequence(toggled, h, psi, 1);
  const StateVector d = evolve(psi, OperatorMatrix(omega * jy.data, Basis::Full, n), tau);
  CHECK((c.amps - d.amps).norm() < 1e-10);
}

TEST_CASE("3-axis cycling approaches the isotropic average") {
  const int n = 4;
  const SpinEnsemble e = test_ensemble(n, 5);
  const OperatorMatrix h_int = ising_hamiltonian(e);
  const OperatorMatrix h_iso(heisenberg_hamiltonian(e).data / 3.0, Basis::Full, n);
  const StateVector psi = polarized_state(SpinAxis::x(), n, Basis::Full);

  double prev_err = 0.0;
  for (int halving = 0; halving < 3; ++halving) {
    const double tau = 0.02 / (1 << halving);
    const PulseSequence w = wahuha(tau);
    const StateVector stro = propagate_sequence(w, h_int, psi, 1);
    // the isotropic part commutes with everything collective, so compare
    // against direct evolution for one cycle time
    const StateVector iso = evolve(psi, h_iso, w.cycle_time());
    const double err = (stro.amps - iso.amps).norm();
    if (halving > 0) CHECK(prev_err / err > 3.0); // second-order convergence in tau
    prev_err = err;
  }
}

TEST_CASE("toggling frames") {
  const int n = 3;
  const OperatorMatrix jz = collective_op(SpinAxis::z(), n, Basis::Full);
  const OperatorMatrix h(0.7 * jz.data, Basis::Full, n);

  SUBCASE("no pulses: a single frame") {
    PulseSequence s;
    s.events.push_back(PulseEvent::delay(2.0));
    const ToggledFrame f = toggling_frames(s, h);
    REQUIRE(f.segments.size() == 1);
    CHECK((f.segments[0].h.data - h.data).norm() < 1e-14);
    CHECK(f.cycle_time == doctest::Approx(2.0));
  }

  SUBCASE("echo: the frame flips sign") {
    PulseSequence s;
    s.events.push_back(PulseEvent::delay(1.0));
    s.events.push_back(PulseEvent::rotation(SpinAxis::x(), pi));
    s.events.push_back(PulseEvent::delay(1.0));
    s.events.push_back(PulseEvent::rotation(SpinAxis::x(), pi));
    const ToggledFrame f = toggling_frames(s, h);
    REQUIRE(f.segments.size() == 2);
    CHECK((f.segments[0].h.data - h.data).norm() < 1e-12);
    CHECK((f.segments[1].h.data + h.data).norm() < 1e-12);
    CHECK(f.segments[0].echo_sign == 1);
    CHECK(f.segments[1].echo_sign == -1);

    // first-order average vanishes; so do the higher orders (commuting frames)
    CHECK(magnus(f, 1).data.norm() < 1e-12);
    CHECK(magnus(f, 2).data.norm() < 1e-12);
    CHECK(magnus(f, 3).data.norm() < 1e-12);
  }

  SUBCASE("3-axis cycling of the Ising interaction") {
    const SpinEnsemble e = test_ensemble(4, 3);
    const OperatorMatrix h_int = ising_hamiltonian(e);
    const ToggledFrame f = toggling_frames(wahuha(0.3), h_int);
    REQUIRE(f.segments.size() == 5);
    // frames are the Ising form along z, y, x, y, z
    auto h_along = [&](const SpinAxis& ax) {
      // rotate the quantization axis of the pair form
      Matrix sum = Matrix::Zero(16, 16);
      for (int l = 0; l < 4; ++l)
        for (int j = l + 1; j < 4; ++j) {
          const Matrix sl = embed_single(spin_half(ax), l, 4).data;
          const Matrix sj = embed_single(spin_half(ax), j, 4).data;
          sum += 2.0 * e.couplings(l, j) * sl * sj;
        }
      return sum;
    };
    CHECK((f.segments[0].h.data - h_along(SpinAxis::z())).norm() < 1e-12);
    CHECK((f.segments[1].h.data - h_along(SpinAxis::y())).norm() < 1e-12);
    CHECK((f.segments[2].h.data - h_along(SpinAxis::x())).norm() < 1e-12);
    CHECK((f.segments[3].h.data - h_along(SpinAxis::y())).norm() < 1e-12);
    CHECK((f.segments[4].h.data - h_along(SpinAxis::z())).norm() < 1e-12);
  }
}

TEST_CASE("average-Hamiltonian series against the propagator logarithm") {
  const int n = 4;
  const SpinEnsemble e = test_ensemble(n, 8);
  const OperatorMatrix h_int = ising_hamiltonian(e);

  // single frame: order 1 is everything
  PulseSequence bare;
  bare.events.push_back(PulseEvent::delay(0.4));
  const ToggledFrame f0 = toggling_frames(bare, h_int);
  CHECK((magnus(f0, 1).data - h_int.data).norm() < 1e-14);
  CHECK(magnus(f0, 2).data.norm() < 1e-14);
  CHECK(magnus(f0, 3).data.norm() < 1e-14);
  CHECK_THROWS_AS(magnus(f0, 4), std::invalid_argument);

  // deliberately asymmetric cycle: residual after 3 orders scales as tc^3 H^4
  auto asym = [&](double tau) {
    PulseSequence s;
    s.events.push_back(PulseEvent::delay(tau));
    s.events.push_back(PulseEvent::rotation(SpinAxis::x(), 0.5 * pi));
    s.events.push_back(PulseEvent::delay(2.0 * tau));
    s.events.push_back(PulseEvent::rotation(SpinAxis::y(), 0.5 * pi));
    s.events.push_back(PulseEvent::delay(tau));
    s.events.push_back(PulseEvent::rotation(SpinAxis::y(), -0.5 * pi));
    s.events.push_back(PulseEvent::rotation(SpinAxis::x(), -0.5 * pi));
    return s;
  };
  double prev = 0.0;
  for (int halving = 0; halving < 3; ++halving) {
    const double tau = 0.08 / (1 << halving);
    const PulseSequence s = asym(tau);
    const ToggledFrame f = toggling_frames(s, h_int);
    const Matrix u = cycle_unitary(s, h_int);
    const Matrix hlog = (u.log() * Complex(0, 1) / s.cycle_time()).eval();
    const double err = (hlog - magnus_sum_123(f).data).norm();
    if (halving > 0) CHECK(prev / err > 6.0); // ~2^3 per halving
    prev = err;
  }
}

TEST_CASE("34-pulse echo template contracts") {
  const int n = 4;
  const SpinEnsemble e = test_ensemble(n, 13);
  const OperatorMatrix h_int = ising_hamiltonian(e);
  const Matrix hh = heisenberg_hamiltonian(e).data;
  const Matrix hzz = h_int.data;
  const Matrix hdq = double_quantum_hamiltonian(e).data;
  const double tau = 0.05;

  SUBCASE("structure and closure") {
    const PulseSequence s = mrev8_with_echo(tau, tau, tau, SequenceVariant::OneAxis);
    CHECK(s.pulse_count() == 34);
    CHECK(s.cycle_time() == doctest::Approx(48.0 * tau).epsilon(1e-12));
    CHECK(s.is_cyclic());
    CHECK_THROWS_AS(mrev8_with_echo(tau, 1.4 * tau, 0.9 * tau, SequenceVariant::OneAxis),
                    std::invalid_argument);
    CHECK_THROWS_AS(mrev8_with_echo(tau, 1.2 * tau, 0.9 * tau, SequenceVariant::TwoAxis),
                    std::invalid_argument);
  }

  SUBCASE("equal delays give the isotropic average") {
    for (auto v : {SequenceVariant::OneAxis, SequenceVariant::TwoAxis}) {
      const PulseSequence s = mrev8_with_echo(tau, tau, tau, v);
      const ToggledFrame f = toggling_frames(s, h_int);
      const OperatorMatrix h1 = magnus(f, 1);
      CHECK((h1.data - hh / 3.0).norm() < 1e-10 * h1.data.norm());
    }
  }

  SUBCASE("calibrated perturbations and vanishing second order") {
    const double eps = 0.1;
    // one-axis: z frames lengthened
    {
      const double delta = eps / (3.0 + eps);
      const double tp = tau * (1 + 2 * delta), tm = tau * (1 - delta);
      const EpsilonFit fit = calibrate_epsilon(tau, tp, tm, SequenceVariant::OneAxis, e.couplings);
      CHECK(fit.epsilon == doctest::Approx(eps).epsilon(1e-9));
      CHECK(fit.residual < 1e-10);

      const PulseSequence s = mrev8_with_echo(tau, tp, tm, SequenceVariant::OneAxis);
      const ToggledFrame f = toggling_frames(s, h_int);
      const OperatorMatrix h1 = magnus(f, 1);
      const Matrix target = fit.scale * (hh + fit.epsilon * hzz);
      CHECK((h1.data - target).norm() < 1e-6 * h1.data.norm());
      CHECK(magnus(f, 2).data.norm() < 1e-9 * hzz.norm());
    }
    // two-axis: x frames lengthened, exact (H_H + eps H_dq)/3
    {
      const double tp = tau * (1 + eps), tm = tau * (1 - eps);
      const EpsilonFit fit = calibrate_epsilon(tau, tp, tm, SequenceVariant::TwoAxis, e.couplings);
      CHECK(fit.epsilon == doctest::Approx(eps).epsilon(1e-9));
      CHECK(fit.scale == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
      CHECK(fit.residual < 1e-10);

      const PulseSequence s = mrev8_with_echo(tau, tp, tm, SequenceVariant::TwoAxis);
      const ToggledFrame f = toggling_frames(s, h_int);
      const OperatorMatrix h1 = magnus(f, 1);
      const Matrix target = (hh + eps * hdq) / 3.0;
      CHECK((h1.data - target).norm() < 1e-6 * h1.data.norm());
      CHECK(magnus(f, 2).data.norm() < 1e-9 * hzz.norm());
    }
  }

  SUBCASE("epsilon grows monotonically with the delay asymmetry") {
    double prev = -1.0;
    for (int k = 0; k <= 6; ++k) {
      const double eps = 0.05 * k;
      const double delta = eps / (3.0 + eps);
      const EpsilonFit fit = calibrate_epsilon(tau, tau * (1 + 2 * delta), tau * (1 - delta),
                                               SequenceVariant::OneAxis, e.couplings);
      CHECK(fit.epsilon > prev);
      prev = fit.epsilon;
    }
  }

  SUBCASE("propagator consistency tightens fourth order under halving") {
    double prev = 0.0;
    for (int halving = 0; halving < 2; ++halving) {
      const double t = 0.08 / (1 << halving);
      const double delta = 0.1 / 3.1;
      const PulseSequence s =
          mrev8_with_echo(t, t * (1 + 2 * delta), t * (1 - delta), SequenceVariant::OneAxis);
      const ToggledFrame f = toggling_frames(s, h_int);
      const Matrix u_exact = cycle_unitary(s, h_int);
      const Matrix u_avg = propagator_direct(magnus_sum_123(f), s.cycle_time()).data;
      const double err = (u_exact - u_avg).norm();
      if (halving > 0) CHECK(prev / err > 16.0);
      prev = err;
    }
  }
}

TEST_CASE("effective field of the shipped templates") {
  const int n = 4;
  const SpinEnsemble e = test_ensemble(n, 13);
  const OperatorMatrix h_int = ising_hamiltonian(e);
  const double tau = 0.05;
  const Matrix jy = collective_op(SpinAxis::y(), n, Basis::Full).data;
  const Matrix jz = collective_op(SpinAxis::z(), n, Basis::Full).data;
  const Matrix jx = collective_op(SpinAxis::x(), n, Basis::Full).data;

  SUBCASE("no pulses leaves J_z untouched") {
    PulseSequence s;
    s.events.push_back(PulseEvent::delay(1.0));
    const EffectiveField f = effective_field(toggling_frames(s, h_int), false);
    CHECK((f.op.data - jz).norm() < 1e-12);
    CHECK(f.magnitude == doctest::Approx(1.0));
  }

  SUBCASE("one-axis: sqrt(2)(J_z cos nu + J_y sin nu)/3, echo-synchronized") {
    const PulseSequence s = mrev8_with_echo(tau, tau, tau, SequenceVariant::OneAxis);
    const ToggledFrame fr = toggling_frames(s, h_int);
    const EffectiveField f = effective_field(fr, true);
    CHECK(f.nu == doctest::Approx(0.25 * pi).epsilon(1e-9));
    const Matrix expect = std::sqrt(2.0) / 3.0 * (jz * std::cos(f.nu) + jy * std::sin(f.nu));
    CHECK((f.op.data - expect).norm() < 1e-9 * expect.norm());
    // the unsynchronized average vanishes: static offsets are decoupled
    CHECK(effective_field(fr, false).magnitude < 1e-12);
  }

  SUBCASE("two-axis: (J_y - J_x)/3") {
    const PulseSequence s = mrev8_with_echo(tau, tau, tau, SequenceVariant::TwoAxis);
    const ToggledFrame fr = toggling_frames(s, h_int);
    const EffectiveField f = effective_field(fr, true);
    const Matrix expect = (jy - jx) / 3.0;
    CHECK((f.op.data - expect).norm() < 1e-9 * expect.norm());
    CHECK(effective_field(fr, false).magnitude < 1e-12);
  }
}

TEST_CASE("sixth-moment dephasing coefficient") {
  const int n = 4;
  CHECK(moment_t6(OperatorMatrix(Matrix::Zero(16, 16), Basis::Full, n), SpinAxis::x()) ==
        doctest::Approx(0.0));

  // h3 = c J_z against J_x gives exactly c^2
  const double c = 0.37;
  const OperatorMatrix jz = collective_op(SpinAxis::z(), n, Basis::Full);
  const OperatorMatrix h3(c * jz.data, Basis::Full, n);
  CHECK(moment_t6(h3, SpinAxis::x()) == doctest::Approx(c * c).epsilon(1e-12));

  // tau^4 scaling of the sequence coefficient on a fixed geometry
  const SpinEnsemble e = test_ensemble(n, 21);
  const OperatorMatrix h_int = ising_hamiltonian(e);
  auto alpha_at = [&](double tau) {
    const PulseSequence s = mrev8(tau, tau, tau, SequenceVariant::OneAxis);
    const ToggledFrame f = toggling_frames(s, h_int);
    return moment_t6(magnus(f, 3), SpinAxis::x());
  };
  const double r = alpha_at(0.08) / alpha_at(0.04);
  CHECK(std::abs(r - 16.0) / 16.0 < 0.05);
}

TEST_CASE("depolarizing contrast") {
  CHECK(pulse_error_contrast(0.8, 0.0, 12) == doctest::Approx(0.8));
  CHECK(pulse_error_contrast(1.0, 0.002, 34) == doctest::Approx(0.9342).epsilon(1.1e-4));
  CHECK(pulse_error_contrast(0.6, 0.01, 0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(pulse_error_contrast(1.0, -0.1, 3), std::invalid_argument);
}

TEST_CASE("parallel Magnus kernel matches the serial reference bitwise") {
  const SpinEnsemble e = test_ensemble(4, 29);
  const OperatorMatrix h_int = ising_hamiltonian(e);
  const PulseSequence s = mrev8_with_echo(0.05, 0.055, 0.0475, SequenceVariant::OneAxis);
  const ToggledFrame f = toggling_frames(s, h_int);
  for (int order : {2, 3}) {
    const Matrix a = magnus(f, order, ExecMode::Parallel).data;
    const Matrix b = magnus(f, order, ExecMode::Serial).data;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sequence text round trip") {
  const PulseSequence s = mrev8_with_echo(1.4, 1.4, 1.4, SequenceVariant::TwoAxis);
  std::ostringstream os;
  write_sequence(os, s);
  std::istringstream is(os.str());
  const PulseSequence back = read_sequence(is);
  REQUIRE(back.events.size() == s.events.size());
  CHECK(back.pulse_count() == 34);
  CHECK(back.cycle_time() == doctest::Approx(s.cycle_time()).epsilon(1e-15));
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    CHECK(back.events[i].kind == s.events[i].kind);
    if (s.events[i].kind == PulseEvent::Kind::Rotation) {
      CHECK((back.events[i].axis.u - s.events[i].axis.u).norm() < 1e-15);
      CHECK(back.events[i].angle == doctest::Approx(s.events[i].angle).epsilon(1e-15));
    }
  }

  std::istringstream bad("WAIT 1.0\n");
  CHECK_THROWS_AS(read_sequence(bad), ConfigError);
}
