#pragma once

// Thin FFTW wrapper. Plans are cached per grid shape and executed on an
// internal aligned buffer, so callers can pass plain std::vector storage.
// Forward transforms are unnormalized; inverse transforms carry the 1/N
// factor, so inverse(forward(f)) == f.

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

#include "zr/core.hpp"

namespace zr {
namespace detail {

class FftCache {
 public:
  static FftCache& instance() {
    static FftCache cache;
    return cache;
  }

  FftCache(const FftCache&) = delete;
  FftCache& operator=(const FftCache&) = delete;

  void execute(cplx* data, int nx, int ny, bool forward) {
    std::lock_guard<std::mutex> lock(mu_);
    Entry& e = entry(nx, ny);
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    auto* buf = reinterpret_cast<cplx*>(e.buf);
    std::copy(data, data + n, buf);
    fftw_execute(forward ? e.fwd : e.bwd);
    if (forward) {
      std::copy(buf, buf + n, data);
    } else {
      const double scale = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) data[i] = buf[i] * scale;
    }
  }

 private:
  struct Entry {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  FftCache() = default;
  ~FftCache() {
    for (auto& [key, e] : entries_) {
      fftw_destroy_plan(e.fwd);
      fftw_destroy_plan(e.bwd);
      fftw_free(e.buf);
    }
  }

  Entry& entry(int nx, int ny) {
    auto key = std::make_pair(nx, ny);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
    Entry e;
    const std::size_t n = static_cast<std::size_t>(nx) * ny;
    e.buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!e.buf) throw Error("fft: allocation failed");
    if (ny == 1) {
      e.fwd = fftw_plan_dft_1d(nx, e.buf, e.buf, FFTW_FORWARD, FFTW_ESTIMATE);
      e.bwd = fftw_plan_dft_1d(nx, e.buf, e.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      // Row-major with x fastest: x is the last FFTW dimension.
      e.fwd = fftw_plan_dft_2d(ny, nx, e.buf, e.buf, FFTW_FORWARD, FFTW_ESTIMATE);
      e.bwd = fftw_plan_dft_2d(ny, nx, e.buf, e.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!e.fwd || !e.bwd) throw Error("fft: planning failed");
    return entries_.emplace(key, e).first->second;
  }

  std::map<std::pair<int, int>, Entry> entries_;
  std::mutex mu_;
};

}  // namespace detail

inline void fft_forward(ComplexField& f) {
  detail::FftCache::instance().execute(f.v.data(), f.grid.nx, f.grid.ny, true);
}
inline void fft_inverse(ComplexField& f) {
  detail::FftCache::instance().execute(f.v.data(), f.grid.nx, f.grid.ny, false);
}

// Signed mode index for FFT storage order: 0..n/2-1, then -n/2..-1.
inline int signed_mode(int i, int n) { return i < n / 2 ? i : i - n; }

// FFT-ordered wavenumbers 2*pi*m/length.
inline std::vector<double> wavenumbers(int n, double length) {
  std::vector<double> k(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) k[i] = 2.0 * pi * signed_mode(i, n) / length;
  return k;
}

}  // namespace zr
