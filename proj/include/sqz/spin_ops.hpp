#pragma once

#include "sqz/types.hpp"

// Operator algebra and exact time evolution for N spin-1/2 particles, in the
// full 2^N product basis and in the collective Dicke (J = N/2) basis.

namespace sqz {

Matrix2c pauli_x();
Matrix2c pauli_y();
Matrix2c pauli_z();
Matrix2c pauli_id();
// sigma . axis / 2
Matrix2c spin_half(const SpinAxis& axis);

// 1 x ... x op x ... x 1 with op at `site`; site 0 is the most significant qubit.
OperatorMatrix embed_single(const Matrix2c& op, int site, int n);

// J_axis = sum_k S_axis^k. In the Dicke basis this is the standard
// (N+1)-dim angular momentum matrix for J = N/2, m descending.
OperatorMatrix collective_op(const SpinAxis& axis, int n, Basis basis);

// exp(-i * angle * J_axis)
OperatorMatrix collective_rotation(const SpinAxis& axis, double angle, int n, Basis basis);

// Product state with every spin polarized along +axis.
StateVector polarized_state(const SpinAxis& axis, int n, Basis basis);

// Basis states |N/2, m> of J_z, m = n/2 - k_down.
StateVector dicke_basis_state(int n, int k_down, Basis basis);

// (N+1) orthonormal symmetric basis vectors as columns of a 2^N x (N+1) matrix.
Matrix symmetric_basis_full(int n);

// Orthogonal projector onto the J = N/2 eigenspace of J^2 (full basis).
OperatorMatrix symmetric_projector(int n);

// P H P written in the (N+1)-dim symmetric basis, m descending.
OperatorMatrix dicke_restrict(const OperatorMatrix& full_op);

// Population of the symmetric subspace, <psi|P|psi>.
double symmetric_weight(const StateVector& state);

double expectation(const StateVector& state, const OperatorMatrix& op);
Complex expectation_complex(const StateVector& state, const OperatorMatrix& op);
double variance(const StateVector& state, const OperatorMatrix& op);

// Exact propagation e^{-iHt}|psi> through the cached eigendecomposition.
// Build once per Hamiltonian when evolving many times.
class Propagator {
public:
  explicit Propagator(const OperatorMatrix& h, double hermiticity_tol = 1e-12);

  StateVector apply(const StateVector& state, double t) const;
  OperatorMatrix unitary(double t) const;

  Basis basis() const { return basis_; }
  int n_spins() const { return n_spins_; }

private:
  Eigen::VectorXd evals_;
  Matrix evecs_;
  Basis basis_;
  int n_spins_;
};

// One-shot convenience wrapper around Propagator.
StateVector evolve(const StateVector& state, const OperatorMatrix& h, double t);

// Direct scaling-and-squaring matrix exponential exp(-iHt); fallback path for
// single use, cross-checked against the eigendecomposition route in tests.
OperatorMatrix propagator_direct(const OperatorMatrix& h, double t);

} // namespace sqz
