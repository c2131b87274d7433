#include "sqz/geometry.hpp"

#include "sqz/constants.hpp"
#include "sqz/hamiltonians.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace sqz;

TEST_CASE("chain placement and determinism of random slabs") {
  GeometrySpec chain;
  chain.kind = GeometryKind::Chain1D;
  chain.n = 4;
  chain.spacing = 10.0;
  const auto pos = place_spins(chain);
  REQUIRE(pos.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(pos[k].x() == doctest::Approx(10.0 * k));
    CHECK(pos[k].y() == 0.0);
    CHECK(pos[k].z() == 0.0);
  }

  GeometrySpec slab;
  slab.kind = GeometryKind::RandomSlab3D;
  slab.lx = slab.ly = 30.0;
  slab.lz = 9.0;
  slab.density = 1e-3; // nm^-3 = 1e18 cm^-3
  slab.seed = 42;
  const auto a = place_spins(slab);
  const auto b = place_spins(slab);
  CHECK(a.size() == 8); // round(1e-3 * 30*30*9) = round(8.1)
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);

  // r_min is respected
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) CHECK((a[i] - a[j]).norm() >= slab.r_min);

  // unsatisfiable density errors out
  GeometrySpec dense = slab;
  dense.lx = dense.ly = dense.lz = 1.0;
  dense.n = 30;
  dense.r_min = 0.9;
  CHECK_THROWS_AS(place_spins(dense), std::runtime_error);
}

TEST_CASE("dipolar couplings: geometry factors and the prefactor") {
  // the prefactor recomputed from first principles, within 0.1%
  const double mu0_4pi = 1e-7, g = 2.0023, mu_b = 9.2740100783e-24, hbar = 1.054571817e-34;
  const double j0_si = mu0_4pi * g * g * mu_b * mu_b / hbar; // rad/s m^3
  const double j0 = j0_si * 1e21;                            // rad/us nm^3
  CHECK(std::abs(constants::dipolar_prefactor() - j0) / j0 < 1e-3);
  CHECK(constants::dipolar_prefactor() * 1e-21 * 1e27 ==
        doctest::Approx(3.27e8).epsilon(0.002)); // rad/s nm^3

  // two spins along the quantization axis: d = 2 J0 / r^3
  const double r = 7.0;
  std::vector<Vec3> along = {{0, 0, 0}, {0, 0, r}};
  const auto d1 = dipolar_couplings(along, SpinAxis::z());
  CHECK(d1(0, 1) == doctest::Approx(2.0 * j0 / (r * r * r)).epsilon(1e-6));

  // magic angle: 3 cos^2 theta = 1
  const double c = std::sqrt(1.0 / 3.0);
  std::vector<Vec3> magic = {{0, 0, 0}, {r * std::sqrt(1 - c * c), 0, r * c}};
  const auto d2 = dipolar_couplings(magic, SpinAxis::z());
  CHECK(std::abs(d2(0, 1)) < 1e-12 * std::abs(d1(0, 1)));

  CHECK_THROWS_AS(dipolar_couplings({{0, 0, 0}, {0, 0, 0}}, SpinAxis::z()),
                  std::invalid_argument);
}

TEST_CASE("coupling matrix invariances") {
  GeometrySpec slab;
  slab.kind = GeometryKind::RandomSlab3D;
  slab.lx = slab.ly = 20.0;
  slab.lz = 8.0;
  slab.n = 6;
  slab.density = 1e-3;
  slab.seed = 7;
  auto pos = place_spins(slab);
  const auto d0 = dipolar_couplings(pos, SpinAxis::z());

  // global translation
  auto shifted = pos;
  for (auto& p : shifted) p += Vec3(5.0, -3.0, 11.0);
  CHECK((dipolar_couplings(shifted, SpinAxis::z()) - d0).norm() < 1e-12 * d0.norm());

  // rotation about the quantization axis
  auto rotated = pos;
  const double a = 0.7;
  for (auto& p : rotated)
    p = Vec3(std::cos(a) * p.x() - std::sin(a) * p.y(),
             std::sin(a) * p.x() + std::cos(a) * p.y(), p.z());
  CHECK((dipolar_couplings(rotated, SpinAxis::z()) - d0).norm() < 1e-9 * d0.norm());
}

TEST_CASE("coupling mean: pair conventions and dilation") {
  Eigen::MatrixXd two(2, 2);
  two << 0, 3.5, 3.5, 0;
  CHECK(coupling_mean(two) == doctest::Approx(3.5));

  const int n = 6;
  Eigen::MatrixXd uni = Eigen::MatrixXd::Constant(n, n, 2.0);
  uni.diagonal().setZero();
  CHECK(coupling_mean(uni) == doctest::Approx((n - 1) * 2.0));

  // 1/r0^3 scaling under dilation of a chain
  GeometrySpec chain;
  chain.kind = GeometryKind::Chain1D;
  chain.n = 5;
  chain.spacing = 6.0;
  const double d_base = coupling_mean(make_ensemble(chain));
  chain.spacing = 12.0;
  const double d_dilated = coupling_mean(make_ensemble(chain));
  CHECK(d_dilated == doctest::Approx(d_base / 8.0).epsilon(1e-12));
}

TEST_CASE("1D dipolar chain mean approaches 2 zeta(3) d0") {
  // chain along the quantization axis, d0 = nearest-neighbor coupling
  const int n = 200;
  GeometrySpec chain;
  chain.kind = GeometryKind::Chain1D;
  chain.n = n;
  chain.spacing = 5.0;
  auto pos = place_spins(chain);
  const auto d = dipolar_couplings(pos, SpinAxis::x()); // chain runs along x
  const double d0 = d(0, 1);
  const double mean = coupling_mean(d);
  const double zeta3 = 1.2020569031595943;
  CHECK(std::abs(mean / d0 - 2.0 * zeta3) / (2.0 * zeta3) < 0.02);
}

TEST_CASE("median heuristic") {
  const double j0 = constants::dipolar_prefactor();
  const double r0 = 10.0, n_s = 1e-3;
  const double d0 = j0 / (r0 * r0 * r0);
  const double est = coupling_median_heuristic(n_s, r0, d0, 8);
  CHECK(est == doctest::Approx((2.0 * constants::pi / 3.0) * d0 * 1000.0 * 1e-3 / 10.0));

  // n -> infinity limit vanishes
  CHECK(coupling_median_heuristic(n_s, r0, d0, 1000000) < 1e-4 * est);

  // Monte-Carlo median over random ensembles agrees within a factor 3
  double acc = 0.0;
  int count = 0;
  for (int s = 1; s <= 200; ++s) {
    GeometrySpec slab;
    slab.kind = GeometryKind::RandomSlab3D;
    const double side = std::cbrt(8.0 / n_s);
    slab.lx = slab.ly = slab.lz = side;
    slab.n = 8;
    slab.density = n_s;
    slab.seed = s;
    acc += coupling_median_abs(make_ensemble(slab));
    ++count;
  }
  const double mc_median = acc / count;
  const double est8 = coupling_median_heuristic(n_s, std::cbrt(1.0 / n_s), j0 * n_s, 8);
  CHECK(mc_median / est8 < 3.0);
  CHECK(mc_median / est8 > 1.0 / 3.0);
}

TEST_CASE("gap estimates") {
  CHECK(gap_estimate(GapKind::Chain1dNearest, 10, 1.0) == doctest::Approx(0.01));
  CHECK(gap_estimate(GapKind::Lattice2dNearest, 16, 1.0) == doctest::Approx(1.0 / 16.0));
  CHECK(gap_estimate(GapKind::Lattice2dDipolar, 16, 1.0) == doctest::Approx(0.25));
  CHECK(gap_estimate(GapKind::Chain1dDipolar, 10, 1.0) ==
        doctest::Approx(std::log(10.0) / 100.0));
  CHECK_THROWS_AS(gap_estimate(GapKind::Random2d, 10, 1.0), std::invalid_argument);
}

TEST_CASE("exact gap of the exchange Hamiltonian") {
  // uniform couplings: pair strength 2d for matrix entries d; the gap from
  // the symmetric multiplet to J = N/2 - 1 is (2d) N / 2 = d N
  for (int n = 2; n <= 8; ++n) {
    Eigen::MatrixXd uni = Eigen::MatrixXd::Constant(n, n, -1.0); // ferro sign
    uni.diagonal().setZero();
    const GapResult g = gap_exact(uni);
    CHECK_FALSE(g.flipped_sign);
    CHECK(g.gap == doctest::Approx(n).epsilon(1e-9));
  }

  // antiferromagnetic input is flipped automatically
  Eigen::MatrixXd anti = Eigen::MatrixXd::Constant(4, 4, 1.0);
  anti.diagonal().setZero();
  const GapResult g = gap_exact(anti);
  CHECK(g.flipped_sign);
  CHECK(g.gap == doctest::Approx(4.0).epsilon(1e-9));

  // n = 2: triplet-singlet splitting of 2 d (S.S) is 2 d
  Eigen::MatrixXd pair(2, 2);
  pair << 0, -0.6, -0.6, 0;
  CHECK(gap_exact(pair).gap == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("position table round trip") {
  std::vector<Vec3> pos = {{0.5, 1.25, -3.75}, {10, 0, 2.5}, {-1, 7, 9}};
  std::ostringstream os;
  write_positions(os, pos);
  std::istringstream is(os.str());
  const auto back = read_positions(is);
  REQUIRE(back.size() == pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) CHECK((back[i] - pos[i]).norm() == 0.0);

  std::istringstream bad("1.0 2.0\n");
  CHECK_THROWS_AS(read_positions(bad), ConfigError);
}
