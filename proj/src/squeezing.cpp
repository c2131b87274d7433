#include "sqz/squeezing.hpp"

#include "sqz/constants.hpp"
#include "sqz/spin_ops.hpp"

#include <cmath>

namespace sqz {

namespace {

constexpr Complex I{0.0, 1.0};
using constants::pi;

// golden-section minimizer, deterministic fixed iteration count
template <typename F>
double golden_min(F&& f, double a, double b, int iters = 90) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

} // namespace

OatObservables oat_observables(int n, double chi) {
  if (n < 1) throw std::invalid_argument("n >= 1 required");
  OatObservables o;
  o.n = n;
  o.chi = chi;
  const double c = std::cos(chi);
  o.jx = 0.5 * n * std::pow(c, n - 1);
  if (n >= 2) {
    o.p = 1.0 - std::pow(std::cos(2.0 * chi), n - 2);
    o.q = 4.0 * std::sin(chi) * std::pow(c, n - 2);
  } // a single spin only acquires a global phase; P = Q = 0
  const double jx2 = 0.25 * n * (n - 0.5 * (n - 1) * o.p);
  o.var_x = jx2 - o.jx * o.jx;
  return o;
}

double OatObservables::var_z(double nu) const {
  const double s = std::sqrt(p * p + q * q);
  const double delta = std::atan2(q, p);
  return 0.25 * n * (1.0 + 0.25 * (n - 1) * (p - s * std::cos(2.0 * nu + delta)));
}

double OatObservables::var_min() const {
  const double s = std::sqrt(p * p + q * q);
  return 0.25 * n * (1.0 + 0.25 * (n - 1) * (p - s));
}

double OatObservables::var_max() const {
  const double s = std::sqrt(p * p + q * q);
  return 0.25 * n * (1.0 + 0.25 * (n - 1) * (p + s));
}

NuOptimal nu_optimal(int n, double chi) {
  const OatObservables o = oat_observables(n, chi);
  NuOptimal r;
  // atan2 handles the P -> 0 limit (nu -> -pi/4 as chi -> 0+); FP dust in Q
  // at the chi = pi/2 revival points is snapped to the exact zero
  double q = o.q, p = o.p;
  if (std::abs(q) < 1e-15 * std::max(1.0, std::abs(p))) q = 0.0;
  r.nu_min = -0.5 * std::atan2(q, p);
  r.nu_max = r.nu_min + 0.5 * pi;
  return r;
}

double xi2_ideal(int n, double chi) {
  const OatObservables o = oat_observables(n, chi);
  const double s = std::sqrt(o.p * o.p + o.q * o.q);
  const double denom = std::pow(std::cos(chi), n - 1);
  return (1.0 + 0.25 * (n - 1) * (o.p - s)) / (denom * denom);
}

double xi2_noisy_unprotected(int n, double chi, double gamma_t) {
  if (gamma_t < 0) throw std::invalid_argument("gamma_t >= 0 required");
  const OatObservables o = oat_observables(n, chi);
  const double s = std::sqrt(o.p * o.p + o.q * o.q);
  if (s == 0.0) return xi2_ideal(n, chi);
  const double r = o.p / s;
  const double e = std::exp(-static_cast<double>(n) * gamma_t);
  const double num = 1.0 + 0.25 * (n - 1) * e * ((1.0 - e) + 1.0 / r) * o.p * (r - 1.0);
  const double denom = std::pow(std::cos(chi), n - 1);
  return num / (denom * denom);
}

ClampedXi2 xi2_noisy_protected_checked(int n, double chi, double gamma_t) {
  if (gamma_t < 0) throw std::invalid_argument("gamma_t >= 0 required");
  const OatObservables o = oat_observables(n, chi);
  const double s = std::sqrt(o.p * o.p + o.q * o.q);
  ClampedXi2 out;
  if (s == 0.0 || o.p == 0.0) {
    out.xi2 = xi2_ideal(n, chi);
    return out;
  }
  const double r = o.p / s;
  const double e = std::exp(-gamma_t);
  const double bracket = (1.0 - e) - 2.0 * std::sinh(gamma_t) / o.p + 1.0 / r;
  double num = 1.0 + 0.25 * (n - 1) * e * bracket * o.p * (r - 1.0);
  const double denom = std::pow(std::cos(chi), n - 1);
  if (num < 0.0) {
    num = 0.0;
    out.clamped = true;
  }
  out.xi2 = num / (denom * denom);
  return out;
}

double xi2_noisy_protected(int n, double chi, double gamma_t) {
  return xi2_noisy_protected_checked(n, chi, gamma_t).xi2;
}

namespace {

// first and symmetrized second moments of the collective spin
void collect_moments(const StateVector& state, Vec3& mean, Eigen::Matrix3d& second) {
  const int n = state.n_spins;
  OperatorMatrix j[3] = {collective_op(SpinAxis::x(), n, state.basis),
                         collective_op(SpinAxis::y(), n, state.basis),
                         collective_op(SpinAxis::z(), n, state.basis)};
  Vector jv[3];
  for (int a = 0; a < 3; ++a) {
    jv[a] = j[a].data * state.amps;
    mean(a) = state.amps.dot(jv[a]).real();
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) {
      second(a, b) = jv[a].dot(jv[b]).real(); // Re<psi|J_a J_b|psi> = <{J_a,J_b}>/2
      second(b, a) = second(a, b);
    }
}

} // namespace

SqueezingReport xi2_from_moments(const Vec3& mean, const Eigen::Matrix3d& second, int n) {
  SqueezingReport rep;
  rep.mean_spin = mean.norm();
  if (rep.mean_spin < 1e-12 * n) {
    rep.degenerate = true;
    return rep;
  }
  rep.mean_dir = mean / rep.mean_spin;

  // orthonormal quadrature frame perpendicular to the mean spin
  Vec3 ref = std::abs(rep.mean_dir.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 e1 = (ref - ref.dot(rep.mean_dir) * rep.mean_dir).normalized();
  const Vec3 e2 = rep.mean_dir.cross(e1);

  const Eigen::Matrix3d cov = second - mean * mean.transpose();
  auto var_at = [&](double nu) {
    const Vec3 u = std::cos(nu) * e1 + std::sin(nu) * e2;
    return u.dot(cov * u);
  };
  const double nu = golden_min(var_at, -0.5 * pi, 0.5 * pi);
  rep.nu_opt = nu;
  rep.var_min = var_at(nu);
  rep.var_max = var_at(nu + 0.5 * pi);
  rep.xi2 = n * rep.var_min / (rep.mean_spin * rep.mean_spin);
  return rep;
}

SqueezingReport xi2_metrological(const StateVector& state) {
  Vec3 mean;
  Eigen::Matrix3d second;
  collect_moments(state, mean, second);
  return xi2_from_moments(mean, second, state.n_spins);
}

double xi_heuristic(const StateVector& state, const SpinAxis& i_axis, const SpinAxis& j_axis) {
  const OperatorMatrix ji = collective_op(i_axis, state.n_spins, state.basis);
  const OperatorMatrix jj = collective_op(j_axis, state.n_spins, state.basis);
  const double mean_j = expectation(state, jj);
  if (mean_j <= 0) throw std::invalid_argument("xi_heuristic: <J_j> must be positive");
  return std::sqrt(variance(state, ji)) / std::sqrt(0.5 * mean_j);
}

ScalingPrediction scaling_prediction(ScalingRegime regime, int n, double strength, double gamma) {
  if (n < 2 || strength <= 0) throw std::invalid_argument("n >= 2 and positive strength required");
  const double N = n;
  ScalingPrediction p;
  const double cbrt3 = std::pow(3.0, 1.0 / 3.0);
  const double sixth3 = std::pow(3.0, 1.0 / 6.0);
  switch (regime) {
    case ScalingRegime::OatIdeal:
      p.xi = cbrt3 / (std::sqrt(2.0) * std::pow(N, 1.0 / 3.0));
      p.t = sixth3 / (strength * std::pow(N, 2.0 / 3.0));
      break;
    case ScalingRegime::TatIdeal:
      p.xi = std::sqrt((1.0 + 2.0 * std::sqrt(3.0)) / (2.0 * N));
      p.t = std::log(2.0 * N / std::sqrt(3.0)) / (strength * N);
      break;
    case ScalingRegime::OatProjected:
      p.xi = cbrt3 / (std::sqrt(2.0) * std::pow(N, 1.0 / 3.0));
      p.t = sixth3 * std::pow(N, 1.0 / 3.0) / strength;
      break;
    case ScalingRegime::TatProjected:
      p.xi = 2.0 / std::sqrt(N);
      p.t = (N - 1.0) * std::log(2.0 * N / std::sqrt(3.0)) / (strength * N);
      break;
    case ScalingRegime::GhzProjected:
      p.xi = 0.0;
      p.t = 0.5 * pi * N / strength;
      break;
    case ScalingRegime::OatNoisy: {
      const double ratio = gamma / strength;
      p.xi = cbrt3 / std::pow(N, 1.0 / 3.0) * std::sqrt(0.5 * (1.0 + ratio * ratio));
      p.t = sixth3 * std::pow(N, 1.0 / 3.0) / strength;
      break;
    }
    case ScalingRegime::OatNoisyProtected:
      p.xi = cbrt3 / (std::sqrt(2.0) * std::pow(N, 1.0 / 3.0)) + std::sqrt(gamma / (N * strength));
      p.t = sixth3 / (strength * std::pow(N, 2.0 / 3.0));
      break;
  }
  return p;
}

StateVector ghz_state(int n, const SpinAxis& axis, Complex phase, Basis basis) {
  const StateVector plus = polarized_state(axis, n, basis);
  const SpinAxis minus_axis(-axis.u);
  const StateVector minus = polarized_state(minus_axis, n, basis);
  Vector v = (plus.amps + phase * minus.amps) / std::sqrt(2.0);
  return {std::move(v), basis, n};
}

SpinAxis oat_ghz_axis(int n) { return n % 2 == 0 ? SpinAxis::x() : SpinAxis::y(); }

StateVector oat_ghz_target(int n, Basis basis) {
  // e^{-i (pi/2) J_z^2} |+x>^N up to global phase
  const Complex phase = n % 2 == 0 ? std::pow(I, n + 1) : std::pow(I, n);
  return ghz_state(n, oat_ghz_axis(n), phase, basis);
}

double ghz_fidelity(const StateVector& state, const SpinAxis& axis) {
  const int n = state.n_spins;
  const Complex phase = n % 2 == 0 ? std::pow(I, n + 1) : std::pow(I, n);
  const StateVector ghz = ghz_state(n, axis, phase, state.basis);
  return std::norm(ghz.amps.dot(state.amps));
}

double ghz_fidelity_best_phase(const StateVector& state, const SpinAxis& axis) {
  const int n = state.n_spins;
  const StateVector plus = polarized_state(axis, n, state.basis);
  const StateVector minus = polarized_state(SpinAxis(-axis.u), n, state.basis);
  const double a = std::abs(plus.amps.dot(state.amps));
  const double b = std::abs(minus.amps.dot(state.amps));
  return 0.5 * (a + b) * (a + b);
}

} // namespace sqz
