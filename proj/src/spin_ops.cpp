#include "sqz/spin_ops.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>

namespace sqz {

namespace {

constexpr Complex I{0.0, 1.0};

void check_full_size(int n) {
  if (n < 1) throw std::invalid_argument("spin count must be >= 1");
  if (n > kMaxFullSpins)
    throw std::invalid_argument("full-basis operator for n=" + std::to_string(n) +
                                " exceeds the memory guard (max " +
                                std::to_string(kMaxFullSpins) + ")");
}

void check_dicke_size(int n) {
  if (n < 1) throw std::invalid_argument("spin count must be >= 1");
  if (n > kMaxDickeSpins) throw std::invalid_argument("Dicke basis spin count too large");
}

// log of binomial coefficient, stable for large n
double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace

Matrix2c pauli_x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2c pauli_y() {
  Matrix2c m;
  m << 0, -I, I, 0;
  return m;
}

Matrix2c pauli_z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2c pauli_id() { return Matrix2c::Identity(); }

Matrix2c spin_half(const SpinAxis& axis) {
  return 0.5 * (axis.u.x() * pauli_x() + axis.u.y() * pauli_y() + axis.u.z() * pauli_z());
}

OperatorMatrix embed_single(const Matrix2c& op, int site, int n) {
  check_full_size(n);
  if (site < 0 || site >= n) throw std::invalid_argument("embed_single: site out of range");

  const long dim = 1L << n;
  // site 0 = most significant bit, so the stride of that qubit is 2^(n-1-site)
  const long stride = 1L << (n - 1 - site);
  Matrix out = Matrix::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) {
    const int bi = static_cast<int>((i / stride) & 1);
    for (int bj = 0; bj < 2; ++bj) {
      const Complex v = op(bi, bj);
      if (v == Complex(0.0, 0.0)) continue;
      const long j = bi == bj ? i : (i ^ stride);
      out(i, j) = v;
    }
  }
  return {std::move(out), Basis::Full, n};
}

namespace {

// Collective angular momentum matrices in the J = n/2 Dicke basis,
// rows/cols ordered m = J, J-1, ..., -J.
Matrix dicke_jz(int n) {
  const double J = n / 2.0;
  Matrix m = Matrix::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) m(k, k) = J - k;
  return m;
}

Matrix dicke_jplus(int n) {
  const double J = n / 2.0;
  Matrix m = Matrix::Zero(n + 1, n + 1);
  for (int k = 1; k <= n; ++k) {
    const double mm = J - k; // J+ maps |m> -> |m+1>, i.e. index k -> k-1
    m(k - 1, k) = std::sqrt(J * (J + 1) - mm * (mm + 1));
  }
  return m;
}

} // namespace

OperatorMatrix collective_op(const SpinAxis& axis, int n, Basis basis) {
  if (basis == Basis::Full) {
    check_full_size(n);
    const long dim = 1L << n;
    Matrix out = Matrix::Zero(dim, dim);
    const Matrix2c s = spin_half(axis);
    for (int k = 0; k < n; ++k) out += embed_single(s, k, n).data;
    return {std::move(out), Basis::Full, n};
  }
  check_dicke_size(n);
  const Matrix jp = dicke_jplus(n);
  const Matrix jm = jp.adjoint();
  Matrix out = axis.u.x() * 0.5 * (jp + jm) + axis.u.y() * (-0.5 * I) * (jp - jm) +
               axis.u.z() * dicke_jz(n);
  return {std::move(out), Basis::Dicke, n};
}

OperatorMatrix collective_rotation(const SpinAxis& axis, double angle, int n, Basis basis) {
  Propagator p(collective_op(axis, n, basis));
  return p.unitary(angle);
}

StateVector polarized_state(const SpinAxis& axis, int n, Basis basis) {
  // single-spin state along +axis on the Bloch sphere
  const double theta = std::acos(std::clamp(axis.u.z(), -1.0, 1.0));
  const double phi = std::atan2(axis.u.y(), axis.u.x());
  const Complex a = std::cos(theta / 2.0);
  const Complex b = std::exp(I * phi) * std::sin(theta / 2.0);

  if (basis == Basis::Full) {
    check_full_size(n);
    const long dim = 1L << n;
    Vector v(dim);
    for (long i = 0; i < dim; ++i) {
      Complex amp = 1.0;
      for (int k = 0; k < n; ++k) {
        const bool down = (i >> (n - 1 - k)) & 1;
        amp *= down ? b : a;
      }
      v(i) = amp;
    }
    return {std::move(v), Basis::Full, n};
  }
  check_dicke_size(n);
  // product state is symmetric; amplitude on |m = n/2 - k> is sqrt(C(n,k)) a^(n-k) b^k
  Vector v(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double w = std::exp(0.5 * log_binom(n, k));
    v(k) = w * std::pow(a, n - k) * std::pow(b, k);
  }
  v /= v.norm();
  return {std::move(v), Basis::Dicke, n};
}

StateVector dicke_basis_state(int n, int k_down, Basis basis) {
  if (k_down < 0 || k_down > n) throw std::invalid_argument("dicke_basis_state: bad k");
  if (basis == Basis::Dicke) {
    Vector v = Vector::Zero(n + 1);
    v(k_down) = 1.0;
    return {std::move(v), Basis::Dicke, n};
  }
  check_full_size(n);
  const long dim = 1L << n;
  Vector v = Vector::Zero(dim);
  const double amp = std::exp(-0.5 * log_binom(n, k_down));
  for (long i = 0; i < dim; ++i) {
    if (std::popcount(static_cast<unsigned long>(i)) == k_down) v(i) = amp;
  }
  return {std::move(v), Basis::Full, n};
}

Matrix symmetric_basis_full(int n) {
  check_full_size(n);
  const long dim = 1L << n;
  Matrix b = Matrix::Zero(dim, n + 1);
  for (int k = 0; k <= n; ++k) b.col(k) = dicke_basis_state(n, k, Basis::Full).amps;
  return b;
}

OperatorMatrix symmetric_projector(int n) {
  const Matrix b = symmetric_basis_full(n);
  return {b * b.adjoint(), Basis::Full, n};
}

OperatorMatrix dicke_restrict(const OperatorMatrix& full_op) {
  if (full_op.basis != Basis::Full)
    throw std::invalid_argument("dicke_restrict expects a full-basis operator");
  const Matrix b = symmetric_basis_full(full_op.n_spins);
  return {b.adjoint() * full_op.data * b, Basis::Dicke, full_op.n_spins};
}

double symmetric_weight(const StateVector& state) {
  if (state.basis == Basis::Dicke) return state.amps.squaredNorm();
  const Matrix b = symmetric_basis_full(state.n_spins);
  return (b.adjoint() * state.amps).squaredNorm();
}

Complex expectation_complex(const StateVector& state, const OperatorMatrix& op) {
  require_same_basis(state, op);
  return state.amps.dot(op.data * state.amps);
}

double expectation(const StateVector& state, const OperatorMatrix& op) {
  op.require_hermitian();
  const Complex e = expectation_complex(state, op);
  const double scale = std::max(1.0, op.data.norm());
  if (std::abs(e.imag()) > 1e-10 * scale)
    throw NumericalContractError("expectation of Hermitian operator has imaginary part " +
                                 std::to_string(e.imag()));
  return e.real();
}

double variance(const StateVector& state, const OperatorMatrix& op) {
  op.require_hermitian();
  const Vector av = op.data * state.amps;
  const double second = av.squaredNorm();
  const Complex first = state.amps.dot(av);
  const double var = second - std::norm(first);
  return var < 0.0 ? 0.0 : var; // clamp FP dust
}

Propagator::Propagator(const OperatorMatrix& h, double hermiticity_tol)
    : basis_(h.basis), n_spins_(h.n_spins) {
  h.require_hermitian(hermiticity_tol);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.data + h.data.adjoint()));
  if (es.info() != Eigen::Success)
    throw NumericalContractError("eigendecomposition failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
}

StateVector Propagator::apply(const StateVector& state, double t) const {
  if (state.basis != basis_ || state.n_spins != n_spins_)
    throw std::invalid_argument("Propagator: basis mismatch");
  Vector coeff = evecs_.adjoint() * state.amps;
  for (long k = 0; k < coeff.size(); ++k) coeff(k) *= std::exp(Complex(0.0, -evals_(k) * t));
  StateVector out(evecs_ * coeff, basis_, n_spins_);
  out.require_normalized(1e-10 * std::max(1.0, state.norm()));
  return out;
}

OperatorMatrix Propagator::unitary(double t) const {
  Vector phases(evals_.size());
  for (long k = 0; k < evals_.size(); ++k) phases(k) = std::exp(Complex(0.0, -evals_(k) * t));
  Matrix u = evecs_ * phases.asDiagonal() * evecs_.adjoint();
  OperatorMatrix out(std::move(u), basis_, n_spins_);
  if (out.unitarity_defect() > 1e-10)
    throw NumericalContractError("propagator lost unitarity");
  return out;
}

StateVector evolve(const StateVector& state, const OperatorMatrix& h, double t) {
  return Propagator(h).apply(state, t);
}

OperatorMatrix propagator_direct(const OperatorMatrix& h, double t) {
  h.require_hermitian();
  Matrix a = Complex(0.0, -t) * h.data;

  // scaling and squaring with a Taylor kernel; fine for the sizes we use
  const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  a /= std::pow(2.0, squarings);

  const long dim = a.rows();
  Matrix result = Matrix::Identity(dim, dim);
  Matrix term = Matrix::Identity(dim, dim);
  for (int k = 1; k <= 18; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-16 * result.norm()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;

  OperatorMatrix out(std::move(result), h.basis, h.n_spins);
  if (out.unitarity_defect() > 1e-10)
    throw NumericalContractError("direct matrix exponential lost unitarity");
  return out;
}

} // namespace sqz
