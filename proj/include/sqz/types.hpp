#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace sqz {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

// Largest spin count for which full 2^N dense matrices may be built.
inline constexpr int kMaxFullSpins = 14;
// Dicke-basis (collective) states stay cheap far beyond that.
inline constexpr int kMaxDickeSpins = 4000;

// Thrown when a runtime numerical contract is violated (unitarity loss,
// non-Hermitian Hamiltonian where one is required, norm drift, ...).
// The CLI maps this to exit code 3.
class NumericalContractError : public std::runtime_error {
public:
  explicit NumericalContractError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Basis {
  Full, // computational product basis, dim 2^N, site 0 = most significant bit
  Dicke // symmetric J = N/2 subspace, dim N+1, ordered m = N/2 ... -N/2
};

// Parallel kernels all have a serial reference twin; results are required
// to agree bitwise (fixed reduction order).
enum class ExecMode { Serial, Parallel };

inline long basis_dim(Basis b, int n_spins) {
  return b == Basis::Full ? (1L << n_spins) : (n_spins + 1L);
}

// Unit vector in R^3; the only domain type with its own invariant check.
struct SpinAxis {
  Vec3 u;

  explicit SpinAxis(const Vec3& v) : u(v) {
    const double n = u.norm();
    if (n < 1e-300) throw std::invalid_argument("SpinAxis: zero vector");
    u /= n;
  }
  SpinAxis(double x, double y, double z) : SpinAxis(Vec3(x, y, z)) {}

  static SpinAxis x() { return SpinAxis(1, 0, 0); }
  static SpinAxis y() { return SpinAxis(0, 1, 0); }
  static SpinAxis z() { return SpinAxis(0, 0, 1); }
};

// Dense operator with basis metadata. Construction validates the dimension;
// hermiticity/unitarity are checked where the physics requires them.
struct OperatorMatrix {
  Matrix data;
  Basis basis = Basis::Full;
  int n_spins = 0;

  OperatorMatrix() = default;
  OperatorMatrix(Matrix m, Basis b, int n) : data(std::move(m)), basis(b), n_spins(n) {
    const long d = basis_dim(b, n);
    if (data.rows() != d || data.cols() != d)
      throw std::invalid_argument("OperatorMatrix: dimension does not match basis");
  }

  long dim() const { return data.rows(); }

  double hermiticity_defect() const {
    const double nrm = data.norm();
    if (nrm == 0.0) return 0.0;
    return (data - data.adjoint()).norm() / nrm;
  }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  double unitarity_defect() const {
    Matrix should_be_id = data.adjoint() * data;
    should_be_id.diagonal().array() -= 1.0;
    return should_be_id.norm();
  }

  void require_hermitian(double tol = 1e-12) const {
    if (!is_hermitian(tol))
      throw std::invalid_argument("operator is not Hermitian (defect " +
                                  std::to_string(hermiticity_defect()) + ")");
  }
};

struct StateVector {
  Vector amps;
  Basis basis = Basis::Full;
  int n_spins = 0;

  StateVector() = default;
  StateVector(Vector v, Basis b, int n) : amps(std::move(v)), basis(b), n_spins(n) {
    if (amps.size() != basis_dim(b, n))
      throw std::invalid_argument("StateVector: dimension does not match basis");
  }

  long dim() const { return amps.size(); }
  double norm() const { return amps.norm(); }

  void require_normalized(double tol = 1e-10) const {
    if (std::abs(norm() - 1.0) > tol)
      throw NumericalContractError("state norm drifted: " + std::to_string(norm()));
  }
};

inline void require_same_basis(const StateVector& s, const OperatorMatrix& o) {
  if (s.basis != o.basis || s.n_spins != o.n_spins)
    throw std::invalid_argument("state/operator basis mismatch");
}

inline void require_same_basis(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.basis != b.basis || a.n_spins != b.n_spins)
    throw std::invalid_argument("operator basis mismatch");
}

} // namespace sqz
