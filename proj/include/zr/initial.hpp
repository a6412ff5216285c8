#pragma once

// Deterministic initial states: smooth trigonometric mixes, localized bumps
// (periodic von Mises windows), band-limited random fields, and the sampled
// line soliton itself.

#include <random>

#include "zr/soliton.hpp"
#include "zr/state.hpp"

namespace zr {

// Small smooth field content on the lowest modes.
inline FieldState make_trig_state(const Grid& g, double amp) {
  FieldState fs(g);
  const double qx = 2.0 * pi / g.lx;
  const double qy = g.dim == 2 ? 2.0 * pi / g.ly : 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      cplx p = std::exp(cplx(0.0, qx * x));
      if (g.dim == 2)
        p += 0.3 * std::exp(cplx(0.0, 2.0 * qx * x + qy * y));
      fs.psi.at(i, j) = amp * p;
      fs.rho.at(i, j) = amp * std::cos(qx * x + 2.0 * qy * y);
      fs.phi.at(i, j) =
          amp * (std::sin(qx * x) + (g.dim == 2 ? 0.5 * std::cos(qy * y) : 0.0));
    }
  }
  return fs;
}

// Localized envelope bump with carrier mode kx0 (integer cycles per box),
// centered in the box; rho and phi start at zero.
inline FieldState make_bump_state(const Grid& g, double amp, double conc = 8.0,
                                  int kx0 = 1) {
  FieldState fs(g);
  const double qx = 2.0 * pi / g.lx;
  const double qy = g.dim == 2 ? 2.0 * pi / g.ly : 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j);
      double w = conc * (std::cos(qx * (x - g.lx / 2.0)) - 1.0);
      if (g.dim == 2) w += conc * (std::cos(qy * (y - g.ly / 2.0)) - 1.0);
      fs.psi.at(i, j) =
          amp * std::exp(w) * std::exp(cplx(0.0, kx0 * qx * x));
    }
  }
  return fs;
}

namespace detail {

inline RealField random_band_real(const Grid& g, double amp,
                                  std::mt19937_64& rng) {
  ComplexField hat(g);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int bx = g.nx / 3, by = g.dim == 2 ? g.ny / 3 : 0;
  for (int j = 0; j < g.ny; ++j) {
    const int mj = g.dim == 2 ? signed_mode(j, g.ny) : 0;
    if (std::abs(mj) > by) continue;
    for (int i = 0; i < g.nx; ++i) {
      const int mi = signed_mode(i, g.nx);
      if (std::abs(mi) > bx) continue;
      const double decay = 1.0 / (1.0 + sq(mi) + sq(mj));
      hat.at(i, j) = cplx(gauss(rng), gauss(rng)) * decay;
    }
  }
  fft_inverse(hat);
  RealField f = real_part(hat);
  const double m = linf(f);
  if (m > 0.0) f *= amp / m;
  return f;
}

}  // namespace detail

// Band-limited random smooth data, normalized to the requested amplitude.
inline FieldState make_random_state(const Grid& g, double amp,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FieldState fs(g);
  const RealField re = detail::random_band_real(g, amp, rng);
  const RealField im = detail::random_band_real(g, amp, rng);
  fs.psi = to_complex(re, im);
  fs.rho = detail::random_band_real(g, amp, rng);
  fs.phi = detail::random_band_real(g, amp, rng);
  return fs;
}

// The line soliton sampled as full initial data (envelope, density and
// potential), front centered at lx/2. Only the bright family carries a
// bounded potential, so dark members are rejected here; dark backgrounds
// enter through the perturbed scenarios instead. The potential's tanh shape
// is not box-periodic; it gets the same odd seam matching as a dark profile,
// which keeps the induced slope defect confined to the seam.
inline FieldState soliton_initial_state(const SolitonSpec& s, const Grid& g,
                                        bool gauged) {
  if (s.family == SolitonFamily::dark && !s.degenerate())
    throw Error(
        "soliton_initial_state: the dark potential grows linearly; use a "
        "perturbed scenario background instead");
  FieldState fs(g);
  const double pamp = s.degenerate() ? 0.0 : sq(s.amp) / s.width;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double u = g.x(i) - g.lx / 2.0;
      const LineSolitonValue v = line_soliton(s, u, 0.0, gauged);
      fs.psi.at(i, j) = v.psi;
      fs.rho.at(i, j) = v.rho;
      fs.phi.at(i, j) =
          s.b * pamp * detail::periodized_tanh(s.width, g.lx, u);
    }
  }
  return fs;
}

}  // namespace zr
