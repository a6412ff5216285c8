#pragma once

// Binary field snapshots. Layout (all little-endian):
//   magic  "ZRSNAP01"                      8 bytes
//   dim    u32
//   n      u32 per axis (dim of them)
//   length f64 per axis (dim of them)
//   time   f64
//   fields Re psi, Im psi, rho, phi        each n doubles, row-major,
//                                          x fastest
// write/read round-trip bit-exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zr/state.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

namespace zr {

inline constexpr char kSnapshotMagic[8] = {'Z', 'R', 'S', 'N',
                                           'A', 'P', '0', '1'};

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("snapshot: truncated payload");
  return v;
}

inline void put_plane(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> get_plane(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw IoError("snapshot: truncated payload");
  return v;
}

}  // namespace detail

inline void write_snapshot(const FieldState& fs, std::ostream& os) {
  os.write(kSnapshotMagic, 8);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(fs.grid.dim));
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(fs.grid.nx));
  if (fs.grid.dim == 2)
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(fs.grid.ny));
  detail::put<double>(os, fs.grid.lx);
  if (fs.grid.dim == 2) detail::put<double>(os, fs.grid.ly);
  detail::put<double>(os, fs.time);
  const std::size_t n = fs.psi.size();
  std::vector<double> plane(n);
  for (std::size_t i = 0; i < n; ++i) plane[i] = fs.psi.v[i].real();
  detail::put_plane(os, plane);
  for (std::size_t i = 0; i < n; ++i) plane[i] = fs.psi.v[i].imag();
  detail::put_plane(os, plane);
  detail::put_plane(os, fs.rho.v);
  detail::put_plane(os, fs.phi.v);
  if (!os) throw IoError("snapshot: write failed");
}

inline FieldState read_snapshot(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw IoError("snapshot: bad magic");
  const auto dim = detail::get<std::uint32_t>(is);
  if (dim != 1 && dim != 2) throw IoError("snapshot: dimension mismatch");
  const auto nx = detail::get<std::uint32_t>(is);
  const auto ny = dim == 2 ? detail::get<std::uint32_t>(is) : 1u;
  if (nx == 0 || ny == 0 || static_cast<std::uint64_t>(nx) * ny > (1u << 28))
    throw IoError("snapshot: dimension mismatch");
  const double lx = detail::get<double>(is);
  const double ly = dim == 2 ? detail::get<double>(is) : 0.0;
  const double time = detail::get<double>(is);
  Grid g = dim == 2 ? Grid::box(static_cast<int>(nx), static_cast<int>(ny), lx, ly)
                    : Grid::line(static_cast<int>(nx), lx);
  FieldState fs(g);
  fs.time = time;
  const std::size_t n = fs.psi.size();
  const std::vector<double> re = detail::get_plane(is, n);
  const std::vector<double> im = detail::get_plane(is, n);
  for (std::size_t i = 0; i < n; ++i) fs.psi.v[i] = cplx(re[i], im[i]);
  fs.rho.v = detail::get_plane(is, n);
  fs.phi.v = detail::get_plane(is, n);
  return fs;
}

inline void write_snapshot_file(const FieldState& fs, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("snapshot: cannot open " + path + " for writing");
  write_snapshot(fs, os);
}

inline FieldState read_snapshot_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("snapshot: cannot open " + path);
  FieldState fs = read_snapshot(is);
  // Reject trailing garbage so truncation errors cannot hide.
  is.peek();
  if (!is.eof()) throw IoError("snapshot: trailing bytes after payload");
  return fs;
}

}  // namespace zr
