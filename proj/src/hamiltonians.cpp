#include "sqz/hamiltonians.hpp"

#include "sqz/constants.hpp"
#include "sqz/spin_ops.hpp"
#include "sqz/squeezing.hpp"

#include <cmath>

namespace sqz {

namespace {

int check_pair_input(const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(d.rows());
  if (d.cols() != n || n < 2) throw std::invalid_argument("coupling matrix must be square, n >= 2");
  if (n > kMaxFullSpins) throw std::invalid_argument("coupling matrix too large for full basis");
  if ((d - d.transpose()).norm() > 1e-12 * (1.0 + d.norm()))
    throw std::invalid_argument("coupling matrix must be symmetric");
  return n;
}

inline int bit_of(long index, int site, int n) { return (index >> (n - 1 - site)) & 1; }
inline double zval(long index, int site, int n) { return bit_of(index, site, n) ? -1.0 : 1.0; }

} // namespace

OperatorMatrix ising_hamiltonian(const Eigen::MatrixXd& d) {
  const int n = check_pair_input(d);
  const long dim = 1L << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) {
    double e = 0.0;
    for (int l = 0; l < n; ++l)
      for (int j = l + 1; j < n; ++j) e += d(l, j) * zval(i, l, n) * zval(i, j, n);
    h(i, i) = 0.5 * e; // 2 d S_z S_z = d sigma_z sigma_z / 2
  }
  return {std::move(h), Basis::Full, n};
}

OperatorMatrix heisenberg_hamiltonian(const Eigen::MatrixXd& d) {
  const int n = check_pair_input(d);
  const long dim = 1L << n;
  Matrix h = ising_hamiltonian(d).data;
  // flip-flop part: 2 d (S_x S_x + S_y S_y) = d (S+S- + S-S+)
  for (long i = 0; i < dim; ++i) {
    for (int l = 0; l < n; ++l) {
      for (int j = l + 1; j < n; ++j) {
        if (bit_of(i, l, n) != bit_of(i, j, n)) {
          const long flipped = i ^ (1L << (n - 1 - l)) ^ (1L << (n - 1 - j));
          h(flipped, i) += d(l, j);
        }
      }
    }
  }
  return {std::move(h), Basis::Full, n};
}

OperatorMatrix double_quantum_hamiltonian(const Eigen::MatrixXd& d) {
  const int n = check_pair_input(d);
  const long dim = 1L << n;
  Matrix h = Matrix::Zero(dim, dim);
  // 2 d (S_x S_x - S_y S_y) = d (S+S+ + S-S-): couples up-up <-> down-down
  for (long i = 0; i < dim; ++i) {
    for (int l = 0; l < n; ++l) {
      for (int j = l + 1; j < n; ++j) {
        if (bit_of(i, l, n) == bit_of(i, j, n)) {
          const long flipped = i ^ (1L << (n - 1 - l)) ^ (1L << (n - 1 - j));
          h(flipped, i) += d(l, j);
        }
      }
    }
  }
  return {std::move(h), Basis::Full, n};
}

OperatorMatrix ising_hamiltonian(const SpinEnsemble& e) { return ising_hamiltonian(e.couplings); }
OperatorMatrix heisenberg_hamiltonian(const SpinEnsemble& e) {
  return heisenberg_hamiltonian(e.couplings);
}
OperatorMatrix double_quantum_hamiltonian(const SpinEnsemble& e) {
  return double_quantum_hamiltonian(e.couplings);
}

OperatorMatrix combined_hamiltonian(const SpinEnsemble& e, double eps, CombinedVariant v) {
  if (eps < 0) throw std::invalid_argument("eps must be >= 0");
  const OperatorMatrix hh = heisenberg_hamiltonian(e);
  if (v == CombinedVariant::OneAxis) {
    return {eps * ising_hamiltonian(e).data + hh.data, Basis::Full, e.n()};
  }
  return {(eps * double_quantum_hamiltonian(e).data + hh.data) / 3.0, Basis::Full, e.n()};
}

OperatorMatrix one_axis_twisting(double d, int n) {
  const OperatorMatrix jz = collective_op(SpinAxis::z(), n, Basis::Dicke);
  return {d * (jz.data * jz.data), Basis::Dicke, n};
}

OperatorMatrix two_axis_twisting_xy(double d, int n) {
  const OperatorMatrix jx = collective_op(SpinAxis::x(), n, Basis::Dicke);
  const OperatorMatrix jy = collective_op(SpinAxis::y(), n, Basis::Dicke);
  return {0.5 * d * (jx.data * jx.data - jy.data * jy.data), Basis::Dicke, n};
}

OperatorMatrix two_axis_twisting_ladder(double d, int n) {
  const OperatorMatrix jx = collective_op(SpinAxis::x(), n, Basis::Dicke);
  const OperatorMatrix jy = collective_op(SpinAxis::y(), n, Basis::Dicke);
  const Matrix jp = jx.data + Complex(0, 1) * jy.data;
  const Matrix jm = jx.data - Complex(0, 1) * jy.data;
  Matrix h = Complex(0, 0.5) * d * (jp * jp - jm * jm);
  return {std::move(h), Basis::Dicke, n};
}

ProjectionCheck project_check_matrix(const Eigen::MatrixXd& couplings, QuadKind kind) {
  const int n = check_pair_input(couplings);
  const OperatorMatrix h =
      kind == QuadKind::Zz ? ising_hamiltonian(couplings) : double_quantum_hamiltonian(couplings);
  const OperatorMatrix php = dicke_restrict(h);

  Matrix q;
  if (kind == QuadKind::Zz) {
    const Matrix jz = collective_op(SpinAxis::z(), n, Basis::Dicke).data;
    q = jz * jz;
  } else {
    const Matrix jx = collective_op(SpinAxis::x(), n, Basis::Dicke).data;
    const Matrix jy = collective_op(SpinAxis::y(), n, Basis::Dicke).data;
    q = jx * jx - jy * jy;
  }
  const Matrix id = Matrix::Identity(n + 1, n + 1);

  // least squares over span{Q, 1} with Frobenius inner products
  auto iprod = [](const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace().real();
  };
  const double qq = iprod(q, q), qi = iprod(q, id), ii = iprod(id, id);
  const double mq = iprod(q, php.data), mi = iprod(id, php.data);
  const double det = qq * ii - qi * qi;
  if (std::abs(det) < 1e-300) throw NumericalContractError("projection fit singular");
  ProjectionCheck r;
  r.c_quad = (mq * ii - mi * qi) / det;
  r.c_id = (mi * qq - mq * qi) / det;
  const Matrix resid = php.data - r.c_quad * q - r.c_id * id;
  const double scale = php.data.norm();
  r.residual = scale > 0 ? resid.norm() / scale : resid.norm();
  r.d_mean = coupling_mean(couplings);
  return r;
}

ProjectionCheck project_check(const SpinEnsemble& e, QuadKind kind) {
  return project_check_matrix(e.couplings, kind);
}

EngineeredChain engineered_chain(int n, double d0) {
  if (n < 2) throw std::invalid_argument("engineered_chain needs n >= 2");
  EngineeredChain out;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  out.nn_couplings.reserve(n - 1);
  for (int k = 1; k < n; ++k) {
    const double v = 2.0 * d0 * std::sqrt(static_cast<double>(k) * (n - k)) / n;
    out.nn_couplings.push_back(v);
    d(k - 1, k) = v;
    d(k, k - 1) = v;
  }
  out.coupling = ising_hamiltonian(d);

  const long dim = 1L << n;
  Matrix f = Matrix::Zero(dim, dim);
  for (int k = 1; k <= n; ++k) {
    const double b = std::sqrt(static_cast<double>(2 * k - 1) * (2 * n - 2 * k + 1));
    f += b * embed_single(spin_half(SpinAxis::x()), k - 1, n).data;
  }
  out.field_unit = {std::move(f), Basis::Full, n};
  return out;
}

std::pair<ChainScanPoint, std::vector<ChainScanPoint>>
scan_chain_field(int n, double d0, int grid_points, double lambda_min, double lambda_max) {
  // The coupling profile enters in the Pauli double-sum normalization
  // (4x the spin-1/2 pair form): that is the convention under which the
  // stated profile mirrors the register exactly at t = N pi / (8 d0).
  const EngineeredChain chain = engineered_chain(n, d0);
  const double t = n * constants::pi / (8.0 * d0);
  const StateVector init = polarized_state(SpinAxis::z(), n, Basis::Full);

  auto fidelity_at = [&](double lam) {
    OperatorMatrix h(4.0 * chain.coupling.data + lam * chain.field_unit.data, Basis::Full, n);
    const StateVector fin = evolve(init, h, t);
    double fid = 0.0;
    for (const SpinAxis& ax : {SpinAxis::x(), SpinAxis::y(), SpinAxis::z()})
      fid = std::max(fid, ghz_fidelity_best_phase(fin, ax));
    return fid;
  };

  std::vector<ChainScanPoint> trace;
  trace.reserve(grid_points);
  ChainScanPoint best;
  for (int g = 0; g < grid_points; ++g) {
    const double frac = grid_points == 1 ? 0.0 : static_cast<double>(g) / (grid_points - 1);
    const double lam = d0 * lambda_min * std::pow(lambda_max / lambda_min, frac);
    trace.push_back({lam, fidelity_at(lam)});
    if (trace.back().fidelity > best.fidelity) best = trace.back();
  }

  // golden-section refinement around the best grid point
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  const double step = std::pow(lambda_max / lambda_min, 1.0 / std::max(1, grid_points - 1));
  double a = best.lambda / step, b = best.lambda * step;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = fidelity_at(c), fd = fidelity_at(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = fidelity_at(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = fidelity_at(d);
    }
  }
  const double lam_ref = fc > fd ? c : d;
  const double f_ref = std::max(fc, fd);
  if (f_ref > best.fidelity) best = {lam_ref, f_ref};
  return {best, trace};
}

} // namespace sqz
