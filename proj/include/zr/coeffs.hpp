#pragma once

// Water-wave dispersion relation, the focusing-regime test, and the map from
// physical parameters to the normalized Zakharov-Rubenchik constants
// (sigma1, sigma2, sigma3, delta, W, D, M).
//
// All functions here are pure; the value types are freely copyable between
// threads.

#include <optional>

#include "zr/core.hpp"

namespace zr {

// Raw water-wave inputs feeding the coefficient map.
//   gamma    surface-tension strength in the dispersion relation
//   mu       shallowness parameter (large = deep water)
//   k        carrier wavenumber magnitude r = |k|
//   eps      wave steepness, in (0, 1]
//   sigma_st nondimensional surface-tension parameter sigma in [0, 1)
//   alpha_override  explicit alpha; required when sigma_st = 0, where the
//                   closed-form alpha(sigma) is singular
struct PhysicalParams {
  double gamma = 1.0;
  double mu = 1.0;
  double k = 1.0;
  double eps = 1.0;
  double sigma_st = 0.5;
  std::optional<double> alpha_override;
};

struct OmegaDerivatives {
  double omega;
  double omega_prime;
  double omega_double_prime;
};

// omega(r) = ((1 + gamma r^2) r tanh(mu r))^(1/2) and its first two
// derivatives in closed form. tanh/sech saturate for mu*r > 40; the
// truncation is below double-precision resolution there.
inline OmegaDerivatives omega_derivatives(double r, double gamma, double mu) {
  if (!(r > 0.0) || !(mu > 0.0) || gamma < 0.0)
    throw Error("omega_derivatives: need r > 0, mu > 0, gamma >= 0");
  const double arg = mu * r;
  double t, s2;  // tanh(mu r), sech^2(mu r)
  if (arg > 40.0) {
    t = 1.0;
    s2 = 0.0;
  } else {
    t = std::tanh(arg);
    const double c = std::cosh(arg);
    s2 = 1.0 / (c * c);
  }
  const double p = r + gamma * r * r * r;  // (1 + gamma r^2) r
  const double a = p * t;                  // omega^2
  const double ap = (1.0 + 3.0 * gamma * r * r) * t + mu * p * s2;
  const double app = 6.0 * gamma * r * t +
                     2.0 * mu * (1.0 + 3.0 * gamma * r * r) * s2 -
                     2.0 * mu * mu * p * t * s2;
  const double w = std::sqrt(a);
  const double wp = ap / (2.0 * w);
  const double wpp = app / (2.0 * w) - ap * ap / (4.0 * a * w);
  if (!std::isfinite(w) || !std::isfinite(wp) || !std::isfinite(wpp))
    throw Error("omega_derivatives: non-finite result");
  return {w, wp, wpp};
}

struct FocusingCondition {
  bool exact;       // omega''(r) > 0
  bool asymptotic;  // 3 gamma^2 r^4 + 6 gamma r^2 > 1 (deep-water criterion)
};

inline FocusingCondition focusing_condition(double r, double gamma, double mu) {
  if (!(gamma > 0.0)) throw Error("focusing_condition: need gamma > 0");
  const auto om = omega_derivatives(r, gamma, mu);
  const double q = 3.0 * sq(gamma) * sq(sq(r)) + 6.0 * gamma * sq(r);
  return {om.omega_double_prime > 0.0, q > 1.0};
}

// Normalized system constants. The fields of the evolved triple are the
// rescaled envelope, density and potential variables
// (psi01, zeta10/(k^2 (1-sigma^2) sqrt(mu)), psi00/(k^2 (1-sigma^2))).
struct ZRCoefficients {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double delta = 0.0;
  double W = 0.0;  // coupling strength to the acoustic pair, > 0
  double D = 0.0;  // Doppler coefficient
  double M = 0.0;  // Mach number, > 0
  double eps = 1.0;
  // Derived constants of the first-order reformulation.
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  bool elliptic = false;  // delta*sigma1 > 0

  static ZRCoefficients direct(double sigma1, double sigma2, double sigma3,
                               double delta, double W, double D, double M,
                               double eps = 1.0) {
    if (!(W > 0.0)) throw Error("coefficients: need W > 0");
    if (!(M > 0.0)) throw Error("coefficients: need M > 0");
    if (!(eps > 0.0)) throw Error("coefficients: need eps > 0");
    ZRCoefficients z;
    z.sigma1 = sigma1;
    z.sigma2 = sigma2;
    z.sigma3 = sigma3;
    z.delta = delta;
    z.W = W;
    z.D = D;
    z.M = M;
    z.eps = eps;
    z.c1 = 2.0 * W * D - sigma1 * sigma3 / 2.0;
    z.c2 = (2.0 * W * (D * D + M * M) - sigma1) / (2.0 * M);
    z.c3 = (2.0 * W * M * M - sigma1) / (2.0 * M);
    z.elliptic = delta * sigma1 > 0.0;
    return z;
  }
};

inline ZRCoefficients br_coefficients(const PhysicalParams& p) {
  if (!(p.mu > 0.0) || !(p.k > 0.0) || !(p.eps > 0.0))
    throw Error("br_coefficients: need mu > 0, k > 0, eps > 0");
  if (p.sigma_st < 0.0 || p.sigma_st >= 1.0)
    throw Error("br_coefficients: need sigma_st in [0, 1)");
  double alpha;
  if (p.alpha_override) {
    alpha = *p.alpha_override;
  } else {
    if (!(p.sigma_st > 0.0))
      throw Error(
          "br_coefficients: alpha is singular at sigma_st = 0; "
          "supply alpha_override");
    alpha = -9.0 / (8.0 * sq(p.sigma_st)) * sq(1.0 - sq(p.sigma_st));
  }
  const auto om = omega_derivatives(p.k, p.gamma, p.mu);
  const double k4 = sq(sq(p.k));
  const double one_ms2 = 1.0 - sq(p.sigma_st);
  const double sqmu = std::sqrt(p.mu);
  const double sigma3 = -om.omega_prime;
  const double delta = p.eps * om.omega_double_prime / 2.0;
  const double sigma1 = p.eps * om.omega_prime / (2.0 * p.k);
  const double sigma2 = 2.0 * p.eps * k4 * (1.0 - alpha) / om.omega;
  const double W = p.eps * k4 * sq(one_ms2) * sqmu / (2.0 * om.omega);
  const double D = 2.0 * om.omega / (p.k * one_ms2 * sqmu);
  const double M = std::pow(p.mu, -0.25);
  return ZRCoefficients::direct(sigma1, sigma2, sigma3, delta, W, D, M, p.eps);
}

}  // namespace zr
