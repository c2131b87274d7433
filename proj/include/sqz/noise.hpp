#pragma once

#include "sqz/sequences.hpp"
#include "sqz/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

// Stochastic single-spin dephasing (Ornstein-Uhlenbeck), Monte-Carlo
// trajectory evolution, collective-noise projection, decay-rate extraction.
//
// Determinism: every trajectory draws from its own counter-derived substream
// and writes into its own slot; reduction runs in index order afterwards, so
// averaged results are bit-identical for any thread count.

namespace sqz {

enum class NoiseMode { PerSpin, CollectiveOnly };

struct NoiseModel {
  double gamma = 0.0; // rad^2/us in the product-state convention: <J_x> decays as e^{-N Gamma t}
  double tau_c = 1.0; // us
  NoiseMode mode = NoiseMode::PerSpin;

  // per-spin OU variance Omega^2 = N Gamma / tau_c (long-time limit)
  double ou_variance(int n_spins) const { return n_spins * gamma / tau_c; }
};

struct TrajectoryConfig {
  int n_traj = 1000;
  double dt = 0.1; // us, noise discretization; must satisfy dt <= tau_c / 10
  std::uint64_t seed = 1;
  ExecMode exec = ExecMode::Parallel;
};

// deterministic substream: engine seeded from (seed, index) via splitmix64
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

// Exact-discretization stationary OU path with the given number of steps;
// sample k is the value held on [k dt, (k+1) dt).
std::vector<double> sample_ou(double tau_c, double variance, double dt, int n_steps,
                              std::mt19937_64& rng);

// Variance of the accumulated phase sum_k w_k dt of the piecewise-constant
// stationary OU path (closed form; matches the simulation identically).
double ou_phase_variance(double tau_c, double variance, double dt, int n_steps);

// Gamma(t) = (1/2t) int int of the averaged-noise kernel over [0,t]^2 for the
// OU correlation, n spins averaged: (variance tau_c / n) [1 - tau_c/t (1 - e^{-t/tau_c})]
double gamma_from_kernel(double variance, double tau_c, double t, int n_spins);

// arithmetic mean of per-spin paths (first-order gap protection)
std::vector<double> collective_projection(const std::vector<std::vector<double>>& paths);

// Trajectory-averaged observables on a sample-time grid.
struct MomentSeries {
  std::vector<double> times;
  std::vector<Vec3> mean;                    // <J>
  std::vector<Eigen::Matrix3d> second;       // <{J_a,J_b}>/2
  std::vector<double> sym_weight;            // <P_sym> (1 - leakage); full basis only
  std::vector<double> mean_se;               // scalar standard error estimate on |<J>|
  int n_traj = 0;
  int n_spins = 0;
};

// Free evolution under h plus the stochastic dephasing term, observed at
// sample_times (each must be a multiple of cfg.dt within rounding).
MomentSeries evolve_noisy(const StateVector& state, const OperatorMatrix& h,
                          const NoiseModel& noise, const TrajectoryConfig& cfg,
                          const std::vector<double>& sample_times);

// Sequence-driven trajectories: n_cycles repetitions of the pulse cycle with
// piecewise-constant noise over each delay segment; observables recorded
// stroboscopically after every cycle. Noise uses one OU sample per delay
// segment (delays must be <= tau_c/10 for the quasi-static step model).
MomentSeries evolve_noisy_sequence(const StateVector& state, const OperatorMatrix& h_int,
                                   const PulseSequence& seq, int n_cycles,
                                   const NoiseModel& noise, const TrajectoryConfig& cfg);

// Toggling-frame trajectories for the regime where the internal couplings are
// too strong for pulse-level averaging but the noise is not: the state evolves
// continuously under the engineered average Hamiltonian while the dephasing
// acts through its exact toggled frame axis on every delay segment (so echo
// refocusing of quasi-static noise is retained). Stroboscopic sampling per
// cycle; full basis only.
MomentSeries evolve_noisy_average_frame(const StateVector& state, const OperatorMatrix& h_avg,
                                        const PulseSequence& seq, int n_cycles,
                                        const NoiseModel& noise, const TrajectoryConfig& cfg);

// least-squares slope of -log(|<J_x>|/|<J_x>|_0) over the given window
double fit_decay_rate(const MomentSeries& series, double t_min, double t_max);

} // namespace sqz
