#pragma once

#include "sqz/types.hpp"

#include <optional>
#include <string>
#include <vector>

// Sensitivity model for the spin-ensemble AC magnetometer: ideal shot-noise
// sensitivity, sensitivity per root averaging time with its decay terms,
// paramagnetic-bath coherence model, interrogation-time optimization, and
// the density sweep comparing control schemes.

namespace sqz {

enum class Scheme { EchoOnly, Cpmg, Mrev8, Squeeze1A, Squeeze2A };
enum class SenseMode { Sequential, Concurrent };

struct SensitivityConfig {
  double volume = 0.0;       // nm^3
  double density = 0.0;      // nm^-3
  double conversion_f = 1.0; // vacancy conversion efficiency, (0, 1]
  double contrast = 1.0;     // optical readout contrast, (0, 1]
  double t2 = 0.0;           // us, nuclear-bath coherence (stretched exponential)
  double tau_pulse = 1.5;    // us, delay between decoupling pulses
  double alpha_tilde = 0.0;  // pulse-sequence dephasing coefficient / n_s^6
  Scheme scheme = Scheme::EchoOnly;
  SenseMode mode = SenseMode::Sequential;
  // squeezing-strength policy for the closed-form sweeps
  double epsilon = 0.1;      // perturbation retained by the sequence
  double d_per_density = 0.0; // D = d_per_density * n_s (rad/us per nm^-3); 0 = default calibration

  int n_spins() const;
  bool uses_pulse_sequence() const {
    return scheme == Scheme::Mrev8 || scheme == Scheme::Squeeze1A || scheme == Scheme::Squeeze2A;
  }
  bool squeezed() const { return scheme == Scheme::Squeeze1A || scheme == Scheme::Squeeze2A; }
};

// T_epr = 4 / (J0 * n_epr), n_epr = n_s (1-f)/f; f = 1 -> no bath (infinity).
std::optional<double> t_epr(double n_s, double f);

// Delta B = (hbar / g mu_B) xi / sqrt(N t T), Tesla, times in us.
double sensitivity_ideal(int n, double t, double total_time, double xi);

// eta = (hbar/g mu_B) 3 pi e^{(T/T2)^3} e^{T/Tepr} e^{alpha n_s^6 T^2} xi / (C sqrt(2 n V t)),
// in T sqrt(us); the interrogation time t is T - t_sqz (Sequential) or T
// (Concurrent). The bath term drops out at f = 1 and the pulse-sequence
// dephasing term applies only to the multipulse schemes.
double sensitivity_eta(const SensitivityConfig& cfg, double total_time, double t_sqz, double xi);

struct TimeOptimum {
  double t_total = 0.0; // us
  double eta = 0.0;     // T sqrt(us)
};

// Bounded golden-section minimization of eta over the total time; bracket
// [max(pulse floor, t_sqz), 10 T2], relative tolerance 1e-4.
TimeOptimum optimize_time(const SensitivityConfig& cfg, double t_sqz, double xi);

struct SweepPoint {
  Scheme scheme;
  double n_s = 0.0;    // nm^-3
  int n = 0;
  double t_total = 0.0; // us
  double t_sqz = 0.0;   // us
  double xi = 1.0;
  double eta = 0.0;     // T/sqrt(Hz)
  std::string xi_source; // "unity" or "scaling"
};

// The closed-form squeezing model used by the sweep: strength eps*D with
// D = d_per_density * n_s, squeezing time capped at T_epr/2, exponential
// interpolation of xi^2 between 1 and the deep-squeezing floor.
struct SqueezeEstimate {
  double xi = 1.0;
  double t_sqz = 0.0;
};
SqueezeEstimate squeeze_estimate(const SensitivityConfig& cfg, Scheme scheme);

std::vector<SweepPoint> density_sweep(const SensitivityConfig& base,
                                      const std::vector<double>& densities,
                                      const std::vector<Scheme>& schemes,
                                      ExecMode exec = ExecMode::Parallel);

// smallest f at which the two-axis scheme beats EchoOnly anywhere on the
// density grid (bisection over f, used by the crossover analysis)
double squeeze_advantage_threshold(const SensitivityConfig& base,
                                   const std::vector<double>& densities, double f_lo = 0.05,
                                   double f_hi = 0.95, int iters = 30);

struct ConcurrentError {
  // dimensionless small-parameter estimate: |phi| chi* |sin nu| (one-axis,
  // ~ phi/N at large N) or |phi| log(2N/sqrt3)/N (two-axis)
  double estimate = 0.0;
  // trace distance between the sequential product and the combined-generator
  // state; grows like phi sqrt(N) because the anti-squeezed quadrature
  // amplifies the generator mismatch
  double simulated = 0.0;
};

enum class ConcurrentVariant { OneAxis, TwoAxis };

// Error of squeezing while the sensed field is on, per the small-angle
// approximation identity; simulated exactly in the Dicke basis. nu_override
// forces the tilt angle (0 makes the generators commute exactly).
ConcurrentError concurrent_error(int n, double d_mean, double phi, ConcurrentVariant v,
                                 std::optional<double> nu_override = std::nullopt);

} // namespace sqz
