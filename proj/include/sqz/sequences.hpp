#pragma once

#include "sqz/types.hpp"

#include <iosfwd>
#include <vector>

// Pulse-sequence model, piecewise propagation, toggling-frame transformation,
// Magnus expansion, the multiple-pulse decoupling templates used to engineer
// the collective Hamiltonians, effective-field computation, and the
// sixth-moment dephasing coefficient.

namespace sqz {

struct PulseEvent {
  enum class Kind { Rotation, Delay };
  Kind kind = Kind::Delay;
  SpinAxis axis = SpinAxis::z(); // rotations only
  double angle = 0.0;            // rad, in (-2pi, 2pi]
  double duration = 0.0;         // us, delays only

  static PulseEvent rotation(const SpinAxis& ax, double angle);
  static PulseEvent delay(double duration);
};

struct PulseSequence {
  std::vector<PulseEvent> events;

  double cycle_time() const; // sum of delays
  int pulse_count() const;

  // net rotation equals the identity up to a global phase
  bool is_cyclic(int probe_spins = 1, double tol = 1e-10) const;
};

// U_c-conjugated internal Hamiltonian, piecewise constant over the delays.
struct ToggledFrame {
  struct Segment {
    OperatorMatrix h;   // toggled internal Hamiltonian
    OperatorMatrix jz;  // toggled collective J_z (for field/noise averages)
    double duration = 0.0;
    int echo_sign = 1;  // +-1, flips at every pi rotation
  };
  std::vector<Segment> segments;
  double cycle_time = 0.0;
  Basis basis = Basis::Full;
  int n_spins = 0;
};

ToggledFrame toggling_frames(const PulseSequence& seq, const OperatorMatrix& h_int);

// Exact piecewise evolution over n_cycles repetitions: delays evolve under
// h_int, rotations are instantaneous collective unitaries.
StateVector propagate_sequence(const PulseSequence& seq, const OperatorMatrix& h_int,
                               const StateVector& state, int n_cycles);

// k-th term of the average-Hamiltonian (Magnus) series, k = 1..3, with the
// lowest order numbered 1. Piecewise-constant segments; order 3 is a triple
// sum evaluated by the OpenMP kernel (Parallel) or the reference loop
// (Serial); both reduce in fixed segment order and agree bitwise.
OperatorMatrix magnus(const ToggledFrame& frames, int order,
                      ExecMode mode = ExecMode::Parallel);

enum class SequenceVariant { OneAxis, TwoAxis };

// Plain 4-pulse 3-axis cycling block (cycle 6 tau, isotropic average H/3).
PulseSequence wahuha(double tau);

// 8-pulse symmetrized decoupling block, cycle 12 tau. tau_plus/tau_minus
// adjust the per-axis frame times to retain a perturbation on top of the
// isotropic average; equal delays give the pure isotropic limit.
PulseSequence mrev8(double tau, double tau_plus, double tau_minus, SequenceVariant v);

// Four mrev8 blocks embedded in an echo: 34 pulses, cycle 48 tau.
// OneAxis closure: tau_plus + 2 tau_minus = 3 tau (z frames lengthened);
// TwoAxis closure: tau_plus + tau_minus = 2 tau (x lengthened, y shortened).
PulseSequence mrev8_with_echo(double tau, double tau_plus, double tau_minus,
                              SequenceVariant v);

struct EffectiveField {
  OperatorMatrix op;      // first-order average of the toggled J_z
  Vec3 direction;         // Frobenius projection onto (J_x, J_y, J_z), normalized
  double magnitude = 0.0; // |projection| / |J|
  double nu = 0.0;        // angle in the plane relevant to the variant
};

// First-order average of the toggled Zeeman operator. echo_synced flips the
// sign of the accumulation at every pi pulse, modeling an AC field locked to
// the echo; the plain average is what a static offset sees.
EffectiveField effective_field(const ToggledFrame& frames, bool echo_synced);

// <T^2_phi,6> = |Tr([h3, J_perp]^2)| / Tr(J_perp^2); reported as a positive
// squared rate (the trace itself is negative semidefinite).
double moment_t6(const OperatorMatrix& h3bar, const SpinAxis& perp_axis);

// C' = C (1-p)^k for k depolarizing pulses.
double pulse_error_contrast(double contrast, double p, int k);

struct EpsilonFit {
  double epsilon = 0.0;  // fitted perturbation ratio
  double scale = 0.0;    // fitted coefficient of the isotropic part
  double residual = 0.0; // relative Frobenius residual of the two-term fit
};

// Least-squares fit of the order-1 average Hamiltonian of the
// mrev8_with_echo template against span{H_heis, H_zz or H_dq}.
EpsilonFit calibrate_epsilon(double tau, double tau_plus, double tau_minus,
                             SequenceVariant v, const Eigen::MatrixXd& couplings);

// Line-oriented text form: "ROT <x|y|z|ax,ay,az> <angle>" / "DELAY <us>".
void write_sequence(std::ostream& os, const PulseSequence& seq);
PulseSequence read_sequence(std::istream& is);

} // namespace sqz
