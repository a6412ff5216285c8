#pragma once

// Core containers for the spectral Zakharov-Rubenchik / Benney-Roskes lab:
// periodic grids, real/complex fields on them, and the error type shared by
// every module.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace zr {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
// Raised by the stepper when a field norm grows by more than 10x in one step.
struct BlowUpError : Error {
  using Error::Error;
};

inline double sq(double x) { return x * x; }

// Uniform periodic grid in one or two dimensions. x is the fastest axis in
// memory: point (i, j) lives at index j*nx + i. Wavenumbers per axis are the
// usual periodic set 2*pi*m/length with m in [-n/2, n/2).
struct Grid {
  int dim = 2;
  int nx = 0;
  int ny = 1;
  double lx = 0.0;
  double ly = 0.0;

  static Grid line(int n, double length) {
    Grid g;
    g.dim = 1;
    g.nx = n;
    g.ny = 1;
    g.lx = length;
    g.ly = 0.0;
    g.check();
    return g;
  }
  static Grid box(int nx, int ny, double lx, double ly) {
    Grid g;
    g.dim = 2;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.check();
    return g;
  }

  void check() const {
    if (dim != 1 && dim != 2) throw Error("grid: dim must be 1 or 2");
    if (nx < 8 || nx % 2 != 0 || !(lx > 0.0))
      throw Error("grid: need even nx >= 8 and lx > 0");
    if (dim == 2 && (ny < 8 || ny % 2 != 0 || !(ly > 0.0)))
      throw Error("grid: need even ny >= 8 and ly > 0");
  }

  int size() const { return nx * ny; }
  double dx() const { return lx / nx; }
  double dy() const { return dim == 2 ? ly / ny : 1.0; }
  // Quadrature weight of one cell; the rectangle rule is spectrally exact on
  // periodic data.
  double cell() const { return dim == 2 ? dx() * dy() : dx(); }
  double x(int i) const { return i * dx(); }
  double y(int j) const { return dim == 2 ? j * dy() : 0.0; }

  bool operator==(const Grid& o) const {
    return dim == o.dim && nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw Error(std::string(where) + ": grid mismatch");
}

template <class T>
struct Field {
  Grid grid;
  std::vector<T> v;

  Field() = default;
  explicit Field(const Grid& g, T fill = T{})
      : grid(g), v(static_cast<std::size_t>(g.size()), fill) {}

  T& operator[](std::size_t i) { return v[i]; }
  const T& operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
  T& at(int i, int j) { return v[static_cast<std::size_t>(j) * grid.nx + i]; }
  const T& at(int i, int j) const {
    return v[static_cast<std::size_t>(j) * grid.nx + i];
  }

  Field& operator+=(const Field& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
    return *this;
  }
  Field& operator*=(double a) {
    for (auto& x : v) x *= a;
    return *this;
  }
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

template <class T>
Field<T> operator+(Field<T> a, const Field<T>& b) {
  a += b;
  return a;
}
template <class T>
Field<T> operator-(Field<T> a, const Field<T>& b) {
  a -= b;
  return a;
}
template <class T>
Field<T> operator*(double s, Field<T> a) {
  a *= s;
  return a;
}

// y += a*x
template <class T>
void add_scaled(Field<T>& y, double a, const Field<T>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += a * x.v[i];
}

inline double linf(const RealField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}
inline double linf(const ComplexField& f) {
  double m = 0.0;
  for (const cplx& x : f.v) m = std::max(m, std::abs(x));
  return m;
}

// Unweighted sum of squared moduli.
inline double sum_sq(const RealField& f) {
  double s = 0.0;
  for (double x : f.v) s += x * x;
  return s;
}
inline double sum_sq(const ComplexField& f) {
  double s = 0.0;
  for (const cplx& x : f.v) s += std::norm(x);
  return s;
}

// L2 norm with the grid quadrature weight.
template <class T>
double norm_l2(const Field<T>& f) {
  return std::sqrt(sum_sq(f) * f.grid.cell());
}

inline double integral(const RealField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s * f.grid.cell();
}

inline RealField real_part(const ComplexField& f) {
  RealField r(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) r.v[i] = f.v[i].real();
  return r;
}
inline RealField imag_part(const ComplexField& f) {
  RealField r(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) r.v[i] = f.v[i].imag();
  return r;
}
inline ComplexField to_complex(const RealField& re) {
  ComplexField c(re.grid);
  for (std::size_t i = 0; i < re.size(); ++i) c.v[i] = re.v[i];
  return c;
}
inline ComplexField to_complex(const RealField& re, const RealField& im) {
  ComplexField c(re.grid);
  for (std::size_t i = 0; i < re.size(); ++i) c.v[i] = cplx(re.v[i], im.v[i]);
  return c;
}

inline RealField abs2(const ComplexField& f) {
  RealField r(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) r.v[i] = std::norm(f.v[i]);
  return r;
}

}  // namespace zr
