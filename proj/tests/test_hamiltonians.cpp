#include "sqz/hamiltonians.hpp"

#include "sqz/constants.hpp"
#include "sqz/spin_ops.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace sqz;

namespace {

Eigen::MatrixXd pair_coupling(double d) {
  Eigen::MatrixXd m(2, 2);
  m << 0, d, d, 0;
  return m;
}

SpinEnsemble reference_slab(int n, std::uint64_t seed) {
  GeometrySpec spec;
  spec.kind = GeometryKind::RandomSlab3D;
  spec.lx = spec.ly = 30.0;
  spec.lz = 9.0;
  spec.density = 1e-3;
  spec.n = n;
  spec.seed = seed;
  return make_ensemble(spec);
}

} // namespace

TEST_CASE("Ising Hamiltonian") {
  const double d = 0.8;
  const OperatorMatrix h = ising_hamiltonian(pair_coupling(d));
  Matrix expect = Matrix::Zero(4, 4);
  expect.diagonal() << d / 2, -d / 2, -d / 2, d / 2;
  CHECK((h.data - expect).norm() < 1e-14);

  for (int n : {3, 5, 6}) {
    const SpinEnsemble e = reference_slab(n, 11 + n);
    const OperatorMatrix hz = ising_hamiltonian(e);
    const Matrix jz = collective_op(SpinAxis::z(), n, Basis::Full).data;
    CHECK((hz.data * jz - jz * hz.data).norm() < 1e-12);

    // global spin flip X...X leaves the Ising form invariant
    Matrix flip = Matrix::Identity(1 << n, 1 << n);
    for (int k = 0; k < n; ++k) flip = embed_single(pauli_x(), k, n).data * flip;
    CHECK((flip * hz.data * flip - hz.data).norm() < 1e-12 * hz.data.norm());
  }
}

TEST_CASE("Heisenberg Hamiltonian") {
  const double d = 1.3;
  const OperatorMatrix h = heisenberg_hamiltonian(pair_coupling(d));
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.data);
  // pair strength 2d (S.S): triplet at d/2, singlet at -3d/2
  CHECK(es.eigenvalues()(0) == doctest::Approx(-1.5 * d).epsilon(1e-12));
  for (int i = 1; i < 4; ++i)
    CHECK(es.eigenvalues()(i) == doctest::Approx(0.5 * d).epsilon(1e-12));

  const SpinEnsemble e = reference_slab(5, 3);
  const OperatorMatrix hh = heisenberg_hamiltonian(e);
  Matrix j2 = Matrix::Zero(32, 32);
  for (auto ax : {SpinAxis::x(), SpinAxis::y(), SpinAxis::z()}) {
    const Matrix j = collective_op(ax, 5, Basis::Full).data;
    CHECK((hh.data * j - j * hh.data).norm() < 1e-12 * hh.data.norm());
    j2 += j * j;
  }
  CHECK((hh.data * j2 - j2 * hh.data).norm() < 1e-12 * hh.data.norm());

  const Matrix p = symmetric_projector(5).data;
  CHECK((hh.data * p - p * hh.data).norm() < 1e-12 * hh.data.norm());
}

TEST_CASE("double-quantum Hamiltonian") {
  const double d = 0.9;
  const OperatorMatrix h = double_quantum_hamiltonian(pair_coupling(d));
  // couples |up up> with |down down> only
  CHECK(std::abs(h.data(0, 3) - d) < 1e-14);
  CHECK(std::abs(h.data(3, 0) - d) < 1e-14);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!((i == 0 && j == 3) || (i == 3 && j == 0))) CHECK(std::abs(h.data(i, j)) < 1e-14);
  CHECK(std::abs(h.data.trace()) < 1e-14);

  // pi/2 rotation about z maps it to its negative
  const SpinEnsemble e = reference_slab(4, 5);
  const OperatorMatrix hdq = double_quantum_hamiltonian(e);
  const Matrix rz = collective_rotation(SpinAxis::z(), constants::pi / 2, 4, Basis::Full).data;
  CHECK((rz.adjoint() * hdq.data * rz + hdq.data).norm() < 1e-12 * hdq.data.norm());
}

TEST_CASE("combined Hamiltonians") {
  const SpinEnsemble e = reference_slab(4, 9);
  const OperatorMatrix h0 = combined_hamiltonian(e, 0.0, CombinedVariant::OneAxis);
  CHECK((h0.data - heisenberg_hamiltonian(e).data).norm() < 1e-14);

  const OperatorMatrix h1 = combined_hamiltonian(e, 0.17, CombinedVariant::OneAxis);
  CHECK(h1.is_hermitian());
  const Matrix jz = collective_op(SpinAxis::z(), 4, Basis::Full).data;
  CHECK((h1.data * jz - jz * h1.data).norm() < 1e-12 * h1.data.norm());

  const OperatorMatrix h2 = combined_hamiltonian(e, 0.17, CombinedVariant::TwoAxis);
  const Matrix expect =
      (0.17 * double_quantum_hamiltonian(e).data + heisenberg_hamiltonian(e).data) / 3.0;
  CHECK((h2.data - expect).norm() < 1e-14 * expect.norm());
}

TEST_CASE("combined one-axis spectrum splits the protected multiplet") {
  // seed 9 gives a well-protected geometry (gap ~ 0.34 rad/us, |D| ~ 1.5)
  SpinEnsemble e = reference_slab(8, 9);
  if (gap_exact(e).flipped_sign) e.couplings = -e.couplings;
  const double eps = 0.01;
  const OperatorMatrix h = combined_hamiltonian(e, eps, CombinedVariant::OneAxis);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.data);

  const ProjectionCheck pc = project_check(e, QuadKind::Zz);
  const StateVector up = dicke_basis_state(8, 0, Basis::Full);
  const double e_sym = expectation(up, heisenberg_hamiltonian(e));

  // predicted multiplet energies: E_sym + eps (c_quad m^2 + c_id), m = -4..4
  std::vector<double> predicted;
  for (int m = -4; m <= 4; ++m) predicted.push_back(e_sym + eps * (pc.c_quad * m * m + pc.c_id));
  std::sort(predicted.begin(), predicted.end());

  double spread = predicted.back() - predicted.front();
  for (int i = 0; i < 9; ++i)
    CHECK(std::abs(es.eigenvalues()(i) - predicted[i]) < 0.15 * spread);
  // the rest of the spectrum sits clearly above the multiplet
  CHECK(es.eigenvalues()(9) - predicted.back() > spread);
}

TEST_CASE("ideal twisting generators") {
  // n=1: J_z^2 = 1/4, pure global phase
  const OperatorMatrix oat1 = one_axis_twisting(1.0, 1);
  CHECK((oat1.data - 0.25 * Matrix::Identity(2, 2)).norm() < 1e-14);

  // ladder and xy two-axis forms related by a pi/4 z-rotation
  const int n = 6;
  const OperatorMatrix h_xy = two_axis_twisting_xy(1.0, n);
  const OperatorMatrix h_pm = two_axis_twisting_ladder(1.0, n);
  const Matrix rz = collective_rotation(SpinAxis::z(), constants::pi / 4, n, Basis::Dicke).data;
  // e^{i pi/4 Jz} (Jx^2 - Jy^2)/2 e^{-i pi/4 Jz} = i (J+^2 - J-^2)/4 = ladder/2 at d=1
  const Matrix rotated = rz.adjoint() * h_xy.data * rz;
  CHECK((rotated - 0.5 * h_pm.data).norm() < 1e-12 * h_pm.data.norm());
}

TEST_CASE("projection identity") {
  SUBCASE("two-spin hand values") {
    const double d = 0.7;
    const ProjectionCheck pc = project_check_matrix(pair_coupling(d), QuadKind::Zz);
    CHECK(pc.c_quad == doctest::Approx(d).epsilon(1e-12));
    CHECK(pc.c_id == doctest::Approx(-d / 2).epsilon(1e-12));
    CHECK(pc.residual < 1e-12);
    CHECK(pc.d_mean == doctest::Approx(d));
  }
  SUBCASE("uniform couplings are exactly collective") {
    const int n = 5;
    Eigen::MatrixXd uni = Eigen::MatrixXd::Constant(n, n, 0.4);
    uni.diagonal().setZero();
    const ProjectionCheck pc = project_check_matrix(uni, QuadKind::Zz);
    CHECK(pc.residual < 1e-13);
    CHECK(pc.c_quad == doctest::Approx(pc.d_mean / (n - 1)).epsilon(1e-12));
  }
  SUBCASE("random geometries, both quadratic forms") {
    for (int n : {3, 6, 8}) {
      const SpinEnsemble e = reference_slab(n, 100 + n);
      for (auto kind : {QuadKind::Zz, QuadKind::DoubleQuantum}) {
        const ProjectionCheck pc = project_check(e, kind);
        CHECK(pc.residual < 1e-10);
        CHECK(pc.c_quad ==
              doctest::Approx(pc.d_mean / (n - 1)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("engineered chain") {
  const int n = 6;
  const double d0 = 1.0;
  const EngineeredChain chain = engineered_chain(n, d0);
  REQUIRE(static_cast<int>(chain.nn_couplings.size()) == n - 1);
  // symmetric profile with maximum d0 at the center for even N
  for (int k = 1; k < n; ++k)
    CHECK(chain.nn_couplings[k - 1] ==
          doctest::Approx(chain.nn_couplings[n - k - 1]).epsilon(1e-12));
  CHECK(chain.nn_couplings[n / 2 - 1] == doctest::Approx(d0).epsilon(1e-12));

  // field-scale scan reaches the target state at d0 t = N pi / 8
  auto [best, trace] = scan_chain_field(4, d0, 81, 0.05, 10.0);
  CHECK(best.fidelity > 0.99);
  // calibrated scale lands at 4 d0 / N
  CHECK(best.lambda == doctest::Approx(4.0 * d0 / 4.0).epsilon(0.05));
}
