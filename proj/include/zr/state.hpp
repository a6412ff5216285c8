#pragma once

// The evolved triple (psi, rho, phi) on a periodic grid. rho and phi are
// real-valued; transforms keep their imaginary residue at roundoff and the
// code stores only the real part.

#include "zr/core.hpp"

namespace zr {

struct FieldState {
  Grid grid;
  ComplexField psi;
  RealField rho;
  RealField phi;
  double time = 0.0;

  FieldState() = default;
  explicit FieldState(const Grid& g) : grid(g), psi(g), rho(g), phi(g) {}
};

inline double max_field_diff(const FieldState& a, const FieldState& b) {
  require_same_grid(a.grid, b.grid, "max_field_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) {
    m = std::max(m, std::abs(a.psi.v[i] - b.psi.v[i]));
    m = std::max(m, std::abs(a.rho.v[i] - b.rho.v[i]));
    m = std::max(m, std::abs(a.phi.v[i] - b.phi.v[i]));
  }
  return m;
}

// Combined (unweighted) l2 distance over the three components.
inline double state_l2_diff(const FieldState& a, const FieldState& b) {
  require_same_grid(a.grid, b.grid, "state_l2_diff");
  double s = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) {
    s += std::norm(a.psi.v[i] - b.psi.v[i]);
    s += sq(a.rho.v[i] - b.rho.v[i]);
    s += sq(a.phi.v[i] - b.phi.v[i]);
  }
  return std::sqrt(s * a.grid.cell());
}

}  // namespace zr
