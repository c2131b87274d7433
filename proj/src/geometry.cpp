#include "sqz/geometry.hpp"

#include "sqz/constants.hpp"
#include "sqz/hamiltonians.hpp"
#include "sqz/spin_ops.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace sqz {

std::vector<Vec3> place_spins(const GeometrySpec& spec) {
  switch (spec.kind) {
    case GeometryKind::Chain1D: {
      if (spec.n < 1) throw std::invalid_argument("chain needs n >= 1");
      std::vector<Vec3> pos;
      pos.reserve(spec.n);
      for (int k = 0; k < spec.n; ++k) pos.emplace_back(k * spec.spacing, 0.0, 0.0);
      return pos;
    }
    case GeometryKind::Lattice2D: {
      if (spec.n < 1) throw std::invalid_argument("lattice needs n >= 1");
      const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n))));
      std::vector<Vec3> pos;
      pos.reserve(spec.n);
      for (int k = 0; k < spec.n; ++k)
        pos.emplace_back((k % side) * spec.spacing, (k / side) * spec.spacing, 0.0);
      return pos;
    }
    case GeometryKind::RandomSlab3D: {
      if (spec.lx <= 0 || spec.ly <= 0 || spec.lz <= 0)
        throw std::invalid_argument("slab dimensions must be positive");
      int n = spec.n;
      if (n <= 0) {
        if (spec.density <= 0) throw std::invalid_argument("need n or density");
        n = static_cast<int>(std::llround(spec.density * spec.lx * spec.ly * spec.lz));
        if (n < 1) throw std::invalid_argument("density too low for the slab volume");
      }
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> ux(0.0, spec.lx), uy(0.0, spec.ly),
          uz(0.0, spec.lz);
      std::vector<Vec3> pos;
      pos.reserve(n);
      const long max_attempts = 2000L * n;
      long attempts = 0;
      while (static_cast<int>(pos.size()) < n) {
        if (++attempts > max_attempts)
          throw std::runtime_error("place_spins: density too high for r_min exclusion");
        Vec3 p(ux(rng), uy(rng), uz(rng));
        bool ok = true;
        for (const Vec3& q : pos) {
          if ((p - q).norm() < spec.r_min) { ok = false; break; }
        }
        if (ok) pos.push_back(p);
      }
      return pos;
    }
  }
  throw std::invalid_argument("unknown geometry kind");
}

Eigen::MatrixXd dipolar_couplings(const std::vector<Vec3>& positions, const SpinAxis& quant_axis) {
  const int n = static_cast<int>(positions.size());
  if (n < 2) throw std::invalid_argument("dipolar_couplings needs >= 2 spins");
  const double j0 = constants::dipolar_prefactor();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    for (int j = l + 1; j < n; ++j) {
      const Vec3 r = positions[j] - positions[l];
      const double rn = r.norm();
      if (rn < 1e-12) throw std::invalid_argument("coincident spin positions");
      const double c = r.dot(quant_axis.u) / rn;
      const double v = j0 * (3.0 * c * c - 1.0) / (rn * rn * rn);
      d(l, j) = v;
      d(j, l) = v;
    }
  }
  return d;
}

SpinEnsemble make_ensemble(const GeometrySpec& spec, const SpinAxis& quant_axis) {
  SpinEnsemble e;
  e.positions = place_spins(spec);
  e.quant_axis = quant_axis;
  e.couplings = dipolar_couplings(e.positions, quant_axis);
  e.density = spec.density;
  e.kind = spec.kind;
  return e;
}

double coupling_mean(const Eigen::MatrixXd& couplings) {
  const int n = static_cast<int>(couplings.rows());
  if (n < 2) throw std::invalid_argument("coupling_mean needs >= 2 spins");
  double s = 0.0;
  for (int l = 0; l < n; ++l)
    for (int j = l + 1; j < n; ++j) s += couplings(l, j);
  return 2.0 * s / n;
}

double coupling_mean(const SpinEnsemble& e) { return coupling_mean(e.couplings); }

double coupling_median_abs(const SpinEnsemble& e) {
  const int n = e.n();
  std::vector<double> v;
  v.reserve(n * (n - 1) / 2);
  for (int l = 0; l < n; ++l)
    for (int j = l + 1; j < n; ++j) v.push_back(std::abs(e.couplings(l, j)));
  if (v.empty()) throw std::invalid_argument("no pairs");
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double coupling_median_heuristic(double n_s, double r0, double d0, int n) {
  if (n_s <= 0 || r0 <= 0 || d0 <= 0 || n < 1) throw std::invalid_argument("positive inputs required");
  return (2.0 * constants::pi / 3.0) * d0 * r0 * r0 * r0 * n_s / (n + 2.0);
}

double gap_estimate(GapKind kind, int n, double d0, double n_s) {
  if (n < 2) throw std::invalid_argument("gap_estimate needs n >= 2");
  const double N = n;
  switch (kind) {
    case GapKind::Chain1dNearest: return d0 / (N * N);
    case GapKind::Chain1dDipolar: return d0 / (N * N) * std::log(N);
    case GapKind::Lattice2dNearest: return d0 / N;
    case GapKind::Lattice2dDipolar: return d0 / std::sqrt(N);
    case GapKind::Random2d: {
      if (n_s <= 0) throw std::invalid_argument("areal density required");
      const double dmin = d0 * std::pow(n_s / N, 1.5);
      return dmin * N / 2.0;
    }
    case GapKind::Random3d: {
      if (n_s <= 0) throw std::invalid_argument("volume density required");
      const double dmin = d0 * (n_s / N);
      return dmin * N / 2.0;
    }
  }
  throw std::invalid_argument("unknown gap kind");
}

GapResult gap_exact(const Eigen::MatrixXd& couplings) {
  const int n = static_cast<int>(couplings.rows());
  if (n > kMaxFullSpins) throw std::invalid_argument("gap_exact: too many spins for full basis");

  auto gap_for = [&](const Eigen::MatrixXd& m) {
    const OperatorMatrix h = heisenberg_hamiltonian(m);
    // The symmetric multiplet carries a single energy (the J=N/2 irrep occurs
    // once), read off the fully polarized state.
    const StateVector up = dicke_basis_state(n, 0, Basis::Full);
    const double e_sym = expectation(up, h);
    const Matrix b = symmetric_basis_full(n);
    const Matrix q = Matrix::Identity(h.dim(), h.dim()) - b * b.adjoint();
    // push the symmetric multiplet far up, then the minimum of the rest is visible
    const double shift = 10.0 * (h.data.norm() + 1.0);
    Matrix work = q * h.data * q + shift * (b * b.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (work + work.adjoint()));
    const double e_rest = es.eigenvalues().minCoeff();
    return e_rest - e_sym;
  };

  GapResult r;
  double g = gap_for(couplings);
  if (g < 0) {
    r.flipped_sign = true;
    g = gap_for(-couplings);
    if (g < 0) {
      r.not_protected = true; // mixed-sign couplings; no ferromagnetic ordering exists
    }
  }
  r.gap = g;
  return r;
}

GapResult gap_exact(const SpinEnsemble& e) { return gap_exact(e.couplings); }

void write_positions(std::ostream& os, const std::vector<Vec3>& positions) {
  os << "# spin positions, one per row: x y z [nm]\n";
  os.precision(17);
  for (const Vec3& p : positions) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

std::vector<Vec3> read_positions(std::istream& is) {
  std::vector<Vec3> pos;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ss(line);
    double x, y, z;
    if (ss >> x >> y >> z) {
      pos.emplace_back(x, y, z);
      double extra;
      if (ss >> extra)
        throw ConfigError("geometry file line " + std::to_string(lineno) + ": too many columns");
    } else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
      throw ConfigError("geometry file line " + std::to_string(lineno) + ": expected 'x y z'");
    }
  }
  return pos;
}

} // namespace sqz
