#pragma once

#include "sqz/geometry.hpp"
#include "sqz/types.hpp"

// Interaction Hamiltonians of the dipolar ensemble and the ideal entangling
// generators they project onto in the collective subspace.
//
// Pair convention: a coupling matrix entry d_lj contributes 2 d_lj (S_l S_j)
// per unordered pair, so sums over ordered pairs in the usual double-sum
// notation are reproduced exactly.

namespace sqz {

// sum_{l<j} 2 d_lj S_z^l S_z^j
OperatorMatrix ising_hamiltonian(const Eigen::MatrixXd& couplings);
OperatorMatrix ising_hamiltonian(const SpinEnsemble& e);

// sum_{l<j} 2 d_lj (vec S_l . vec S_j)
OperatorMatrix heisenberg_hamiltonian(const Eigen::MatrixXd& couplings);
OperatorMatrix heisenberg_hamiltonian(const SpinEnsemble& e);

// sum_{l<j} 2 d_lj (S_x S_x - S_y S_y)
OperatorMatrix double_quantum_hamiltonian(const Eigen::MatrixXd& couplings);
OperatorMatrix double_quantum_hamiltonian(const SpinEnsemble& e);

enum class CombinedVariant { OneAxis, TwoAxis };

// OneAxis: eps * H_zz + H_heis ; TwoAxis: (eps * H_dq + H_heis) / 3
OperatorMatrix combined_hamiltonian(const SpinEnsemble& e, double eps, CombinedVariant v);

// d * J_z^2 in the Dicke basis.
OperatorMatrix one_axis_twisting(double d, int n);
// d * (J_x^2 - J_y^2) / 2 and the ladder form i d (J+^2 - J-^2) / 2,
// related by a pi/4 rotation about z.
OperatorMatrix two_axis_twisting_xy(double d, int n);
OperatorMatrix two_axis_twisting_ladder(double d, int n);

struct ProjectionCheck {
  double c_quad = 0.0;    // coefficient of J_z^2 (or J_x^2 - J_y^2)
  double c_id = 0.0;      // coefficient of the identity
  double residual = 0.0;  // Frobenius residual of the two-term fit, relative
  double d_mean = 0.0;    // D of the ensemble, for convenience
};

enum class QuadKind { Zz, DoubleQuantum };

// Least-squares fit of P H P (Dicke basis) to c_quad * Q + c_id * 1.
ProjectionCheck project_check(const SpinEnsemble& e, QuadKind kind = QuadKind::Zz);
ProjectionCheck project_check_matrix(const Eigen::MatrixXd& couplings, QuadKind kind);

struct EngineeredChain {
  OperatorMatrix coupling;   // nearest-neighbor Ising part, couplings 2 d0 sqrt(k(N-k))/N
  OperatorMatrix field_unit; // sum_k sqrt((2k-1)(2N-2k+1)) S_x^k, unit scale
  std::vector<double> nn_couplings; // the d_{k,k+1} profile
};

// Engineered nearest-neighbor chain whose Ising + staggered-field dynamics
// drives the ensemble into a GHZ state at d0 * t = N pi / 8. The field scale
// lambda multiplying field_unit is calibrated numerically (scan_chain_field).
EngineeredChain engineered_chain(int n, double d0);

struct ChainScanPoint {
  double lambda = 0.0;
  double fidelity = 0.0;
};

// Scan the field scale over a log grid, returning the best GHZ fidelity at
// t = N pi / (8 d0) together with the grid trace.
std::pair<ChainScanPoint, std::vector<ChainScanPoint>>
scan_chain_field(int n, double d0, int grid_points = 121, double lambda_min = 0.02,
                 double lambda_max = 20.0);

} // namespace sqz
