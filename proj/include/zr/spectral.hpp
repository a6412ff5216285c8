#pragma once

// Fourier differentiation, 2/3-rule dealiasing and the divergence-constrained
// gradient solve on periodic grids. Everything here differentiates the
// trigonometric interpolant exactly; order-1 derivatives zero the Nyquist
// mode so that real fields stay real.

#include <array>
#include <functional>

#include "zr/fft.hpp"

namespace zr {

namespace detail {

// Applies a per-mode multiplier m(kx, ky) in spectral space.
inline void apply_symbol(ComplexField& f,
                         const std::function<cplx(double, double)>& symbol) {
  const Grid& g = f.grid;
  fft_forward(f);
  const auto kx = wavenumbers(g.nx, g.lx);
  const auto ky = g.dim == 2 ? wavenumbers(g.ny, g.ly) : std::vector<double>{0.0};
  for (int j = 0; j < g.ny; ++j) {
    const double kyj = ky[j];
    for (int i = 0; i < g.nx; ++i)
      f.at(i, j) *= symbol(kx[i], kyj);
  }
  fft_inverse(f);
}

inline bool is_nyquist(int i, int n) { return i == n / 2; }

}  // namespace detail

// d^order/d axis^order (axis 0 = x, 1 = y), order 1 or 2.
inline ComplexField deriv(const ComplexField& f, int axis, int order) {
  if (order != 1 && order != 2) throw Error("deriv: order must be 1 or 2");
  if (axis < 0 || axis >= f.grid.dim) throw Error("deriv: axis out of range");
  const Grid& g = f.grid;
  ComplexField out = f;
  fft_forward(out);
  const auto kx = wavenumbers(g.nx, g.lx);
  const auto ky = g.dim == 2 ? wavenumbers(g.ny, g.ly) : std::vector<double>{0.0};
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double k = axis == 0 ? kx[i] : ky[j];
      const bool nyq = axis == 0 ? detail::is_nyquist(i, g.nx)
                                 : detail::is_nyquist(j, g.ny);
      if (order == 1) {
        // The odd derivative has no consistent value at the Nyquist mode.
        out.at(i, j) *= nyq ? cplx(0.0) : cplx(0.0, k);
      } else {
        out.at(i, j) *= -k * k;
      }
    }
  }
  fft_inverse(out);
  return out;
}

inline RealField deriv(const RealField& f, int axis, int order) {
  ComplexField c = to_complex(f);
  return real_part(deriv(c, axis, order));
}

inline ComplexField laplacian(const ComplexField& f) {
  ComplexField out = f;
  detail::apply_symbol(out, [&](double kx, double ky) -> cplx {
    return cplx(-(kx * kx + ky * ky));
  });
  return out;
}
inline RealField laplacian(const RealField& f) {
  return real_part(laplacian(to_complex(f)));
}

template <class T>
Field<T> dx(const Field<T>& f) {
  return deriv(f, 0, 1);
}
template <class T>
Field<T> dy(const Field<T>& f) {
  return deriv(f, 1, 1);
}

// 2/3-rule projection: zero all modes with |m| > n/3 on any axis.
inline void dealias_inplace(ComplexField& f) {
  const Grid& g = f.grid;
  fft_forward(f);
  const int cutx = g.nx / 3;
  const int cuty = g.ny / 3;
  for (int j = 0; j < g.ny; ++j) {
    const bool cut_y = g.dim == 2 && std::abs(signed_mode(j, g.ny)) > cuty;
    for (int i = 0; i < g.nx; ++i) {
      if (cut_y || std::abs(signed_mode(i, g.nx)) > cutx) f.at(i, j) = 0.0;
    }
  }
  fft_inverse(f);
}

inline void dealias_inplace(RealField& f) {
  ComplexField c = to_complex(f);
  dealias_inplace(c);
  f = real_part(c);
}

template <class T>
Field<T> dealias(Field<T> f) {
  dealias_inplace(f);
  return f;
}

// Solves div V = rhs on the torus with the gradient ansatz V = grad(inv_lap
// rhs); among all solutions this is the curl-free, minimal-norm one. The zero
// mode of V is set to zero. rhs must have (numerically) zero mean.
inline std::array<RealField, 2> poisson_gradient_solve(const RealField& rhs) {
  const Grid& g = rhs.grid;
  if (g.dim != 2) throw Error("poisson_gradient_solve: 2d grids only");
  ComplexField hat = to_complex(rhs);
  fft_forward(hat);

  const double n = static_cast<double>(g.size());
  const double mean = std::abs(hat.at(0, 0)) / n;
  double rms = 0.0;
  for (const cplx& c : hat.v) rms += std::norm(c);
  rms = std::sqrt(rms / n) / std::sqrt(n);  // rms of the grid values
  if (mean > 1e-10 * std::max(rms, 1e-300))
    throw Error("poisson_gradient_solve: rhs has nonzero mean (incompatible)");

  const auto kx = wavenumbers(g.nx, g.lx);
  const auto ky = wavenumbers(g.ny, g.ly);
  ComplexField v1(g), v2(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double k2 = kx[i] * kx[i] + ky[j] * ky[j];
      if (k2 == 0.0) {
        v1.at(i, j) = v2.at(i, j) = 0.0;
        continue;
      }
      const cplx p = hat.at(i, j) / (-k2);  // inverse Laplacian
      const bool nyq_x = detail::is_nyquist(i, g.nx);
      const bool nyq_y = detail::is_nyquist(j, g.ny);
      v1.at(i, j) = nyq_x ? cplx(0.0) : cplx(0.0, kx[i]) * p;
      v2.at(i, j) = nyq_y ? cplx(0.0) : cplx(0.0, ky[j]) * p;
    }
  }
  fft_inverse(v1);
  fft_inverse(v2);
  return {real_part(v1), real_part(v2)};
}

}  // namespace zr
