#pragma once

#include <vector>

#include "mbo/grid.hpp"
#include "mbo/spectral.hpp"

namespace mbo {

// Exact periodic convolution with the Gaussian kernel of variance h,
// computed as a Fourier multiplier. Conserves the mean exactly (the
// zero mode has unit weight) and, since the wrapped discrete kernel is
// positive, maps [0,1] fields into [0,1] up to roundoff.
inline ScalarField gaussian_convolve(const ScalarField& f, double h) {
  if (!(h > 0.0)) throw NonpositiveVariance();
  spectral::Spectrum s = spectral::forward(f);
  spectral::apply_gaussian(s, h);
  return spectral::inverse(s);
}

// Components of grad(G_h * f).
inline VectorField gradient_convolve(const ScalarField& f, double h) {
  if (!(h > 0.0)) throw NonpositiveVariance();
  spectral::Spectrum s = spectral::forward(f);
  spectral::apply_gaussian(s, h);
  VectorField out(f.grid);
  for (int k = 0; k < f.grid.dim; ++k) {
    spectral::Spectrum sk = s;
    spectral::apply_derivative(sk, k);
    out.comp[k] = spectral::inverse(sk);
  }
  return out;
}

// Spectral divergence of a vector field (no smoothing).
inline ScalarField divergence(const VectorField& xi) {
  spectral::Spectrum acc;
  for (int k = 0; k < xi.grid.dim; ++k) {
    spectral::Spectrum s = spectral::forward(xi.comp[k]);
    spectral::apply_derivative(s, k);
    if (k == 0)
      acc = std::move(s);
    else
      spectral::axpy(acc, 1.0, s);
  }
  return spectral::inverse(acc);
}

// G_h * chi_i for every phase i. One transform per indicator.
inline std::vector<ScalarField> convolve_indicators(const Partition& p, double h) {
  if (!(h > 0.0)) throw NonpositiveVariance();
  std::vector<ScalarField> out;
  out.reserve(p.num_phases);
  for (int i = 0; i < p.num_phases; ++i) out.push_back(gaussian_convolve(indicator(p, i), h));
  return out;
}

}  // namespace mbo
