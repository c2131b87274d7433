#pragma once

#include "sqz/types.hpp"

#include <functional>

// Squeezing parameters, the closed-form one-axis-twisting solution, its
// noisy extensions, optimal angles/times/scaling laws, and GHZ fidelity.

namespace sqz {

// Closed-form observables of exp(-i chi J_z^2) |+x>^N, chi = d t.
struct OatObservables {
  int n = 0;
  double chi = 0.0;
  double jx = 0.0;     // <J_x>
  double var_x = 0.0;  // (Delta J_x)^2
  double p = 0.0;      // P = 1 - cos^(N-2)(2 chi)
  double q = 0.0;      // Q = 4 sin(chi) cos^(N-2)(chi)

  // (Delta J_z)^2 of the state rotated by nu about x
  double var_z(double nu) const;
  double var_min() const;
  double var_max() const;
};

OatObservables oat_observables(int n, double chi);

// Optimal (variance-minimizing) rotation angle and the anti-optimal one.
struct NuOptimal {
  double nu_min = 0.0;
  double nu_max = 0.0; // nu_min + pi/2, minimizes the conjugate quadrature
};
NuOptimal nu_optimal(int n, double chi);

// Ideal squeezing parameter squared of the one-axis solution.
double xi2_ideal(int n, double chi);

// xi^2 with per-spin dephasing, strength expressed as the dimensionless
// product gamma_t (decay exponent of <J_x> is N * gamma_t).
double xi2_noisy_unprotected(int n, double chi, double gamma_t);

// Gap-protected version: only the collective noise average survives, decay
// exponent gamma_t. The bracket can cross zero at extreme arguments; the
// value is clamped at zero and flagged.
struct ClampedXi2 {
  double xi2 = 0.0;
  bool clamped = false;
};
ClampedXi2 xi2_noisy_protected_checked(int n, double chi, double gamma_t);
double xi2_noisy_protected(int n, double chi, double gamma_t);

// Metrological (Ramsey) squeezing parameter of an arbitrary state:
// xi^2 = N * min_nu Var(J_perp(nu)) / |<vec J>|^2 with the quadrature plane
// perpendicular to the mean-spin direction; nu located by golden-section
// search over [-pi/2, pi/2].
struct SqueezingReport {
  double xi2 = 0.0;
  double nu_opt = 0.0;
  double mean_spin = 0.0;   // |<vec J>|
  double var_min = 0.0;
  double var_max = 0.0;
  Vec3 mean_dir = Vec3::UnitX();
  bool degenerate = false;  // vanishing polarization; xi2 not meaningful
};

SqueezingReport xi2_metrological(const StateVector& state);

// Same quantity from precomputed first/second moments of J (used by the
// trajectory-averaged analysis). second_moments(a,b) = <(J_a J_b + J_b J_a)>/2.
SqueezingReport xi2_from_moments(const Vec3& mean, const Eigen::Matrix3d& second_moments, int n);

// xi_h = Delta J_i / sqrt(<J_j> / 2)
double xi_heuristic(const StateVector& state, const SpinAxis& i_axis, const SpinAxis& j_axis);

enum class ScalingRegime {
  OatIdeal,        // xi = 3^(1/3)/(sqrt 2 N^(1/3)), t = 3^(1/6)/(d N^(2/3))
  TatIdeal,        // xi = sqrt((1+2 sqrt 3)/(2N)), t = log(2N/sqrt 3)/(d N)
  OatProjected,    // engineered strength eps*D: t = 3^(1/6) N^(1/3) / (eps D)
  TatProjected,    // xi ~ 2/sqrt(N), t = (N-1) log(2N/sqrt 3) / (eps D N)
  GhzProjected,    // t = (pi/2) N / (eps D)
  OatNoisy,        // xi = 3^(1/3)/N^(1/3) sqrt((1+(Gamma/epsD)^2)/2)
  OatNoisyProtected// xi = 3^(1/3)/(sqrt2 N^(1/3)) + sqrt(Gamma/(N d))
};

struct ScalingPrediction {
  double xi = 0.0;
  double t = 0.0; // us (or 1/rate units of the supplied strength)
};

// Pure closed-form evaluation; `strength` is d or eps*D depending on regime,
// `gamma` only matters for the noisy regimes.
ScalingPrediction scaling_prediction(ScalingRegime regime, int n, double strength,
                                     double gamma = 0.0);

// (|+axis>^N + phase |-axis>^N)/sqrt(2)
StateVector ghz_state(int n, const SpinAxis& axis, Complex phase, Basis basis);

// The GHZ state reached by one-axis twisting at chi = pi/2 under e^{-iHt}:
// axis x with phase i^(N+1) for even N, axis y with phase i^N for odd N.
StateVector oat_ghz_target(int n, Basis basis);
SpinAxis oat_ghz_axis(int n);

// |<GHZ_axis|psi>|^2 against the twisting-target phase for that axis/parity.
double ghz_fidelity(const StateVector& state, const SpinAxis& axis);

// max over the branch phase: ( |<+ax|psi>| + |<-ax|psi>| )^2 / 2
double ghz_fidelity_best_phase(const StateVector& state, const SpinAxis& axis);

} // namespace sqz
