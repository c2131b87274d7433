#pragma once

#include "sqz/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

// Spin placement, dipolar coupling matrices, coupling statistics and
// energy-gap estimates for regular and random ensembles.

namespace sqz {

enum class GeometryKind { Chain1D, Lattice2D, RandomSlab3D };

struct GeometrySpec {
  GeometryKind kind = GeometryKind::Chain1D;
  int n = 0;            // spin count; for RandomSlab3D 0 means round(density * volume)
  double spacing = 10.0; // nm, regular kinds
  double lx = 0, ly = 0, lz = 0; // nm, slab dimensions
  double density = 0.0;          // nm^-3, RandomSlab3D
  std::uint64_t seed = 1;
  double r_min = 0.5; // nm, exclusion radius for random placement
};

struct SpinEnsemble {
  std::vector<Vec3> positions;     // nm
  SpinAxis quant_axis = SpinAxis::z();
  Eigen::MatrixXd couplings;       // rad/us, symmetric, zero diagonal
  double density = 0.0;            // nm^-3 (0 when not meaningful)
  GeometryKind kind = GeometryKind::Chain1D;

  int n() const { return static_cast<int>(positions.size()); }
};

// Deterministic placement for a given seed. Random placement is uniform
// i.i.d. in the slab with rejection below r_min.
std::vector<Vec3> place_spins(const GeometrySpec& spec);

// d_lj = J0 (3 cos^2(theta_lj) - 1) / r_lj^3, theta against the quantization axis.
Eigen::MatrixXd dipolar_couplings(const std::vector<Vec3>& positions, const SpinAxis& quant_axis);

// Placement + couplings in one step.
SpinEnsemble make_ensemble(const GeometrySpec& spec, const SpinAxis& quant_axis = SpinAxis::z());

// D = (1/N) sum_{l != j} d_lj = (2/N) sum_{l<j} d_lj
double coupling_mean(const Eigen::MatrixXd& couplings);
double coupling_mean(const SpinEnsemble& e);

// median |d| over the pairs of one ensemble
double coupling_median_abs(const SpinEnsemble& e);

// (2 pi / 3) d0 r0^3 n_s / (n + 2)
double coupling_median_heuristic(double n_s, double r0, double d0, int n);

enum class GapKind {
  Chain1dNearest,
  Chain1dDipolar,
  Lattice2dNearest,
  Lattice2dDipolar,
  Random2d,
  Random3d
};

// Order-of-magnitude gap estimators (coefficient-1 scaling laws).
// d0 is the nearest-neighbor coupling for the regular kinds and the
// dipolar prefactor J0 for the random kinds; n_s is the (areal or volume)
// density matching the dimensionality.
double gap_estimate(GapKind kind, int n, double d0, double n_s = 0.0);

struct GapResult {
  double gap = 0.0;        // energy from the J = N/2 multiplet to the rest, rad/us
  bool flipped_sign = false; // couplings were negated to make the symmetric multiplet lowest
  bool not_protected = false; // symmetric multiplet not lowest under either sign
};

// Exact gap of the isotropic exchange Hamiltonian built from the couplings,
// ferromagnetic sign convention.
GapResult gap_exact(const SpinEnsemble& e);
GapResult gap_exact(const Eigen::MatrixXd& couplings);

// Plain-text table exchange: one spin per row "x y z" in nm, '#' comments.
void write_positions(std::ostream& os, const std::vector<Vec3>& positions);
std::vector<Vec3> read_positions(std::istream& is);

} // namespace sqz
