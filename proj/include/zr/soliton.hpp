#pragma once

// One-dimensional solitary-wave families of the Zakharov-Rubenchik system:
// construction, admissibility classification, exactness residuals, and the
// sampled backgrounds used by the perturbed scenarios.
//
// A member of the family travels at speed c with frequency lambda:
//   psi = e^{i lambda t} e^{i (c+sigma3) u / (2 delta)} R(u),  u = x - c t,
//   rho = a R^2,  d/dx phi = b R^2,
// (the oscillation rides with the profile; for c != 0 pinning it to the lab
// coordinate would shift the frequency by c(c+sigma3)/(2 delta) and break
// exactness), where R solves  delta R'' + A R = B R^3  with
//   A = (c+sigma3)^2/(4 delta) - lambda,  B = sigma2 + W (a + b D).
// Bright (sech) requires A/delta < 0 and B/delta < 0; dark (tanh) requires
// both positive. The dark width is sqrt(A/(2 delta)): that is the unique
// normalization with vanishing residual (amp^2 = A/B, width^2 = A/(2 delta)).

#include <utility>

#include "zr/coeffs.hpp"
#include "zr/spectral.hpp"

namespace zr {

enum class SolitonFamily { bright, dark };
enum class SolitonClass { bright, dark, none };

// Acoustic amplitudes (a, b) of the traveling ansatz. Singular at the
// acoustic resonance c = 1/M.
inline std::pair<double, double> acoustic_amplitudes(double c,
                                                     const ZRCoefficients& zc) {
  if (c < 0.0) throw Error("acoustic_amplitudes: need c >= 0");
  if (std::abs(c * zc.M - 1.0) < 1e-12)
    throw Error("acoustic_amplitudes: singular speed c = 1/M");
  const double inv = 1.0 / sq(zc.M) - c * c;
  const double a = -(1.0 + c * zc.D) / inv;
  const double b = -(c + zc.D / sq(zc.M)) / inv;
  return {a, b};
}

namespace detail {

struct OdeConstants {
  double a, b;
  double A;  // (c+sigma3)^2/(4 delta) - lambda
  double B;  // sigma2 + W (a + b D)
};

inline OdeConstants ode_constants(double c, double lambda,
                                  const ZRCoefficients& zc) {
  const auto [a, b] = acoustic_amplitudes(c, zc);
  const double A = sq(c + zc.sigma3) / (4.0 * zc.delta) - lambda;
  const double B = zc.sigma2 + zc.W * (a + b * zc.D);
  return {a, b, A, B};
}

}  // namespace detail

// Strict inequalities; boundary cases classify as none.
inline SolitonClass classify(double c, double lambda, const ZRCoefficients& zc) {
  const auto k = detail::ode_constants(c, lambda, zc);
  const double qa = k.A / zc.delta;
  const double qb = k.B / zc.delta;
  if (qa < 0.0 && qb < 0.0) return SolitonClass::bright;
  if (qa > 0.0 && qb > 0.0) return SolitonClass::dark;
  return SolitonClass::none;
}

struct SolitonSpec {
  SolitonFamily family = SolitonFamily::bright;
  double c = 0.0;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  double amp = 0.0;    // profile amplitude
  double width = 0.0;  // profile rate; 0 marks the degenerate zero member
  double phase_rate = 0.0;  // (c + sigma3) / (2 delta)
  ZRCoefficients coeffs;

  static SolitonSpec make(double c, double lambda, const ZRCoefficients& zc) {
    const auto k = detail::ode_constants(c, lambda, zc);
    const SolitonClass cls = classify(c, lambda, zc);
    SolitonSpec s;
    s.c = c;
    s.lambda = lambda;
    s.a = k.a;
    s.b = k.b;
    s.phase_rate = (c + zc.sigma3) / (2.0 * zc.delta);
    s.coeffs = zc;
    if (k.A == 0.0) {
      // Boundary of admissibility: the zero-amplitude member.
      s.amp = s.width = 0.0;
      return s;
    }
    switch (cls) {
      case SolitonClass::bright:
        s.family = SolitonFamily::bright;
        s.amp = std::sqrt(2.0 * k.A / k.B);
        s.width = std::sqrt(-k.A / zc.delta);
        break;
      case SolitonClass::dark:
        s.family = SolitonFamily::dark;
        s.amp = std::sqrt(k.A / k.B);
        s.width = std::sqrt(k.A / (2.0 * zc.delta));
        break;
      case SolitonClass::none:
        throw Error("soliton: (c, lambda) not admissible for either family");
    }
    return s;
  }

  bool degenerate() const { return width == 0.0; }
};

// Profile pair (R, P) about the wave center; P is the antiderivative of R^2,
// so d/dx (b P) recovers the acoustic potential slope b R^2.
struct ProfilePoint {
  double R;
  double P;
};

inline ProfilePoint profile(const SolitonSpec& s, double x) {
  if (s.degenerate()) return {0.0, 0.0};
  const double u = s.width * x;
  if (s.family == SolitonFamily::bright) {
    const double sech = 1.0 / std::cosh(u);
    return {s.amp * sech, sq(s.amp) / s.width * std::tanh(u)};
  }
  const double th = std::tanh(u);
  return {s.amp * th, sq(s.amp) / s.width * (u - th)};
}

struct LineSolitonValue {
  cplx psi;
  double rho;
  double dphi;  // d/dx of the potential component
};

// The traveling solution at (x, t). With gauged = true the oscillatory
// factors are removed, which requires c = 0 (the profile is then real and
// stationary).
inline LineSolitonValue line_soliton(const SolitonSpec& s, double x, double t,
                                     bool gauged) {
  if (gauged && s.c != 0.0)
    throw Error("line_soliton: gauged form requires c = 0");
  const double X = x - s.c * t;
  const double R = profile(s, X).R;
  const double R2 = R * R;
  if (gauged) return {cplx(R, 0.0), s.a * R2, s.b * R2};
  const cplx phase = std::exp(cplx(0.0, s.lambda * t + s.phase_rate * X));
  return {phase * R, s.a * R2, s.b * R2};
}

// Existence predicate for localized 2d solitary waves in the focusing case.
inline bool focusing_case_2d(double c, const ZRCoefficients& zc) {
  return zc.delta * zc.sigma1 > 0.0 && c < 0.0 &&
         c * zc.W * (zc.sigma2 - zc.W * sq(zc.M)) < 0.0;
}

namespace detail {

// Smooth odd periodization of tanh(w u) on [-L/2, L/2): the seam carries a
// mirror front of the same width, which satisfies the same profile equation,
// so the matching only induces exponentially small residual cross terms.
inline double periodized_tanh(double w, double L, double u) {
  return std::tanh(w * u) * std::tanh(w * (L / 2.0 - u)) *
         std::tanh(w * (L / 2.0 + u));
}

inline double periodized_dark_R(const SolitonSpec& s, double L, double x) {
  return s.amp * periodized_tanh(s.width, L, x - L / 2.0);
}

// On-grid profile value at grid coordinate x (front centered at L/2),
// displaced by ct with periodic wrap.
inline double grid_profile_R(const SolitonSpec& s, double L, double x,
                             double ct) {
  if (s.degenerate()) return 0.0;
  double u = x - ct;
  u -= L * std::floor(u / L);  // wrap into [0, L)
  if (s.family == SolitonFamily::dark) return periodized_dark_R(s, L, u);
  return profile(s, u - L / 2.0).R;
}

}  // namespace detail

// Sampled background for perturbed runs, reformulation and diagnostics.
// phi1 is the envelope component; phi2 the density component; dphi3 the
// x-derivative of the potential component (its linear-growth antiderivative
// is never materialized). phi2 and dphi3 are built pointwise from the stored
// phi1, so phi2 + D*dphi3 = -(M^2+D^2) phi1^2 holds exactly at c = 0.
struct SolitonBackground {
  SolitonSpec spec;
  bool gauged = true;
  bool periodized = false;
  Grid grid;
  ComplexField phi1;
  RealField phi2;
  RealField dphi3;
};

// Samples the background at t = 0 on `grid`, front centered at lx/2. The
// envelope is band-limited once (2/3 projection) so that evolution products
// stay representable; the acoustic components follow from it pointwise.
inline SolitonBackground make_background(const SolitonSpec& s, const Grid& grid,
                                         bool gauged, bool project = true) {
  if (gauged && s.c != 0.0)
    throw Error("make_background: gauged background requires c = 0");
  SolitonBackground bg;
  bg.spec = s;
  bg.gauged = gauged;
  bg.periodized = s.family == SolitonFamily::dark;
  bg.grid = grid;
  bg.phi1 = ComplexField(grid);
  bg.phi2 = RealField(grid);
  bg.dphi3 = RealField(grid);
  if (!gauged && s.family == SolitonFamily::dark) {
    // The phase factor must itself be grid-periodic, since the dark profile
    // does not decay.
    const double cycles = s.phase_rate * grid.lx / (2.0 * pi);
    if (std::abs(cycles - std::round(cycles)) > 1e-9)
      throw Error(
          "make_background: dark background needs phase_rate*lx to be a "
          "multiple of 2*pi");
  }
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x(i);
      const double R = detail::grid_profile_R(s, grid.lx, x, 0.0);
      bg.phi1.at(i, j) =
          gauged ? cplx(R, 0.0)
                 : std::exp(cplx(0.0, s.phase_rate * x)) * R;
    }
  }
  if (project) dealias_inplace(bg.phi1);
  for (std::size_t i = 0; i < bg.phi1.size(); ++i) {
    const double r2 = std::norm(bg.phi1.v[i]);
    bg.phi2.v[i] = s.a * r2;
    bg.dphi3.v[i] = s.b * r2;
  }
  return bg;
}

// Max-norm residuals of the three 1d evolution equations on the sampled
// traveling solution, with time derivatives substituted analytically
// (d/dt -> -c d/dx, plus i*lambda on the envelope). Spatial derivatives are
// spectral; for the dark family the profile is the seam-matched periodization
// and the returned residual measures the forcing that periodization induces.
inline std::array<double, 3> soliton_residual(const SolitonSpec& s,
                                              const Grid& grid) {
  if (grid.dim != 1) throw Error("soliton_residual: 1d grids only");
  const ZRCoefficients& zc = s.coeffs;
  if (s.degenerate()) return {0.0, 0.0, 0.0};

  const double L = grid.lx;
  if (s.family == SolitonFamily::bright) {
    const double edge = s.amp / std::cosh(s.width * L / 2.0);
    if (edge > 1e-12 * std::max(1.0, s.amp))
      throw Error("soliton_residual: grid too small (profile at boundary)");
  } else {
    const double dev = 1.0 - std::tanh(s.width * L / 2.0);
    if (dev > 1e-12)
      throw Error(
          "soliton_residual: grid too small (asymptote not reached at "
          "boundary)");
    const double cycles = s.phase_rate * L / (2.0 * pi);
    if (std::abs(cycles - std::round(cycles)) > 1e-9)
      throw Error(
          "soliton_residual: dark profile needs phase_rate*lx to be a "
          "multiple of 2*pi");
  }

  RealField R(grid);
  ComplexField phase(grid);
  for (int i = 0; i < grid.nx; ++i) {
    R.v[i] = detail::grid_profile_R(s, L, grid.x(i), 0.0);
    phase.v[i] = std::exp(cplx(0.0, s.phase_rate * grid.x(i)));
  }
  ComplexField psi(grid);
  RealField nsq(grid), rho(grid), tphi(grid);
  for (int i = 0; i < grid.nx; ++i) {
    psi.v[i] = phase.v[i] * R.v[i];
    nsq.v[i] = sq(R.v[i]);
    rho.v[i] = s.a * nsq.v[i];
    tphi.v[i] = s.b * nsq.v[i];
  }

  const ComplexField psix = dx(psi);
  const ComplexField psixx = deriv(psi, 0, 2);
  const RealField nsqx = dx(nsq);
  const RealField rhox = dx(rho);
  const RealField tphix = dx(tphi);

  ComplexField res1(grid);
  RealField res2(grid), res3(grid);
  const cplx ilam(0.0, s.lambda);
  for (int i = 0; i < grid.nx; ++i) {
    // The whole oscillatory profile travels: d/dt -> i*lambda - c d/dx.
    const cplx psi_t = ilam * psi.v[i] - s.c * psix.v[i];
    const double pot = zc.sigma2 * nsq.v[i] + zc.W * (rho.v[i] + zc.D * tphi.v[i]);
    res1.v[i] = psi_t - zc.sigma3 * psix.v[i] - cplx(0.0, zc.delta) * psixx.v[i] +
                cplx(0.0, pot) * psi.v[i];
    res2.v[i] = -s.c * rhox.v[i] + tphix.v[i] + zc.D * nsqx.v[i];
    res3.v[i] = -s.c * tphix.v[i] + rhox.v[i] / sq(zc.M) + nsqx.v[i];
  }
  return {linf(res1), linf(res2), linf(res3)};
}

}  // namespace zr
