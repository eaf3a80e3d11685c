#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mbo/grid.hpp"

namespace mbo::spectral {

// Fourier coefficients of a real field in FFTW r2c layout
// (last axis truncated to n/2+1), scaled so that inverse() needs no
// further normalization.
struct Spectrum {
  TorusGrid grid;
  std::vector<std::complex<double>> coef;
};

inline std::size_t complex_count(const TorusGrid& g) {
  std::size_t c = static_cast<std::size_t>(g.n) / 2 + 1;
  for (int k = 0; k < g.dim - 1; ++k) c *= static_cast<std::size_t>(g.n);
  return c;
}

namespace detail {

// FFTW planning is not thread-safe; plan execution on private buffers is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanEntry {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  std::size_t nreal = 0, ncplx = 0;

  PlanEntry(int dim, int n) {
    std::vector<int> dims(dim, n);
    nreal = 1;
    for (int k = 0; k < dim; ++k) nreal *= static_cast<std::size_t>(n);
    ncplx = nreal / n * (n / 2 + 1);
    rbuf = fftw_alloc_real(nreal);
    cbuf = fftw_alloc_complex(ncplx);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    fwd = fftw_plan_dft_r2c(dim, dims.data(), rbuf, cbuf, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r(dim, dims.data(), cbuf, rbuf, FFTW_ESTIMATE);
  }
  ~PlanEntry() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
  PlanEntry(const PlanEntry&) = delete;
  PlanEntry& operator=(const PlanEntry&) = delete;
};

inline PlanEntry& plans_for(const TorusGrid& g) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<PlanEntry>> cache;
  auto key = std::make_pair(g.dim, g.n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<PlanEntry>(g.dim, g.n)).first;
  return *it->second;
}

}  // namespace detail

inline Spectrum forward(const ScalarField& f) {
  auto& pl = detail::plans_for(f.grid);
  std::memcpy(pl.rbuf, f.values.data(), pl.nreal * sizeof(double));
  fftw_execute(pl.fwd);
  Spectrum s;
  s.grid = f.grid;
  s.coef.resize(pl.ncplx);
  const double scale = 1.0 / static_cast<double>(pl.nreal);
  const auto* c = reinterpret_cast<const std::complex<double>*>(pl.cbuf);
  for (std::size_t i = 0; i < pl.ncplx; ++i) s.coef[i] = c[i] * scale;
  return s;
}

inline ScalarField inverse(const Spectrum& s) {
  auto& pl = detail::plans_for(s.grid);
  std::memcpy(pl.cbuf, s.coef.data(), pl.ncplx * sizeof(fftw_complex));
  fftw_execute(pl.inv);
  ScalarField f(s.grid);
  std::memcpy(f.values.data(), pl.rbuf, pl.nreal * sizeof(double));
  return f;
}

// Angular wavenumber of mode index m on an axis: 2*pi*m_signed / Lambda.
inline double wavenumber(const TorusGrid& g, int m) {
  int ms = (m <= g.n / 2) ? m : m - g.n;
  return 2.0 * M_PI * ms / g.length;
}

// Derivative multiplier; the Nyquist mode is zeroed (odd symmetry).
inline double deriv_wavenumber(const TorusGrid& g, int m) {
  if (g.n % 2 == 0 && m == g.n / 2) return 0.0;
  return wavenumber(g, m);
}

// Visit every coefficient with its per-axis mode indices (d <= 3).
template <typename F>
inline void for_each_mode(const TorusGrid& g, F&& f) {
  const int n = g.n;
  const int nc = n / 2 + 1;
  std::size_t idx = 0;
  if (g.dim == 1) {
    for (int m0 = 0; m0 < nc; ++m0) f(idx++, m0, 0, 0);
  } else if (g.dim == 2) {
    for (int m0 = 0; m0 < n; ++m0)
      for (int m1 = 0; m1 < nc; ++m1) f(idx++, m0, m1, 0);
  } else {
    for (int m0 = 0; m0 < n; ++m0)
      for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = 0; m2 < nc; ++m2) f(idx++, m0, m1, m2);
  }
}

// Multiply by the Gaussian factor exp(-h |k|^2 / 2).
inline void apply_gaussian(Spectrum& s, double h) {
  const TorusGrid& g = s.grid;
  std::vector<double> fac(g.n);
  for (int m = 0; m < g.n; ++m) {
    double k = wavenumber(g, m);
    fac[m] = std::exp(-0.5 * h * k * k);
  }
  for_each_mode(g, [&](std::size_t idx, int m0, int m1, int m2) {
    double w = fac[m0];
    if (g.dim > 1) w *= fac[m1];
    if (g.dim > 2) w *= fac[m2];
    s.coef[idx] *= w;
  });
}

// Multiply by i * k_axis (spectral derivative along one axis).
inline void apply_derivative(Spectrum& s, int axis) {
  const TorusGrid& g = s.grid;
  std::vector<double> kk(g.n);
  for (int m = 0; m < g.n; ++m) kk[m] = deriv_wavenumber(g, m);
  for_each_mode(g, [&](std::size_t idx, int m0, int m1, int m2) {
    int m = axis == 0 ? m0 : (axis == 1 ? m1 : m2);
    s.coef[idx] *= std::complex<double>(0.0, kk[m]);
  });
}

inline void axpy(Spectrum& y, double a, const Spectrum& x) {
  for (std::size_t i = 0; i < y.coef.size(); ++i) y.coef[i] += a * x.coef[i];
}

}  // namespace mbo::spectral
