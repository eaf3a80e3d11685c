#pragma once

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "mbo/convolve.hpp"
#include "mbo/grid.hpp"
#include "mbo/rng.hpp"

namespace mbo {

// Cell-center rasterization of analytic shapes. Phase 0 is the "figure"
// phase, phase 1 the background.

inline Partition disk_partition(const TorusGrid& g, double radius,
                                std::array<double, 3> center = {0.5, 0.5, 0.5}) {
  for (int k = 0; k < g.dim; ++k) center[k] *= g.length;
  Partition p(g, 2);
  const double r2 = radius * radius;
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    auto x = g.cell_center(idx);
    p.labels[idx] = (g.periodic_distance2(x, center) < r2) ? 0 : 1;
  }
  return p;
}

// Axis-aligned stripe of the given width, centered in the torus; the two
// interfaces fall on cell boundaries whenever width/dx is an integer of the
// same parity as n.
inline Partition stripe_partition(const TorusGrid& g, double width, int axis = 0) {
  Partition p(g, 2);
  const double lo = 0.5 * (g.length - width);
  const double hi = 0.5 * (g.length + width);
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    auto x = g.cell_center(idx);
    p.labels[idx] = (x[axis] >= lo && x[axis] < hi) ? 0 : 1;
  }
  return p;
}

// Angular sectors around a center point (2-D). angles[k] is the opening of
// phase k in radians; they must sum to 2*pi.
inline Partition sector_partition(const TorusGrid& g, const std::vector<double>& angles,
                                  std::array<double, 3> center = {0.5, 0.5, 0.0},
                                  double angle_offset = 0.0) {
  if (g.dim != 2) throw Error("sector initial data is 2-D only");
  double sum = 0.0;
  for (double a : angles) sum += a;
  if (std::abs(sum - 2.0 * M_PI) > 1e-9) throw Error("sector angles must sum to 2*pi");
  for (int k = 0; k < g.dim; ++k) center[k] *= g.length;
  Partition p(g, static_cast<int>(angles.size()));
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    auto x = g.cell_center(idx);
    double a = std::atan2(g.wrap_delta(x[1] - center[1]), g.wrap_delta(x[0] - center[0]));
    a -= angle_offset;
    a = std::fmod(a, 2.0 * M_PI);
    if (a < 0.0) a += 2.0 * M_PI;
    double acc = 0.0;
    std::uint8_t label = static_cast<std::uint8_t>(angles.size() - 1);
    for (std::size_t k = 0; k < angles.size(); ++k) {
      acc += angles[k];
      if (a < acc) {
        label = static_cast<std::uint8_t>(k);
        break;
      }
    }
    p.labels[idx] = label;
  }
  return p;
}

// Periodic Voronoi tessellation from uniformly random seeds; seed k carries
// phase k mod P.
inline Partition voronoi_partition(const TorusGrid& g, int num_phases, int num_seeds,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, g.length);
  std::vector<std::array<double, 3>> seeds(num_seeds, {0.0, 0.0, 0.0});
  for (auto& s : seeds)
    for (int k = 0; k < g.dim; ++k) s[k] = uni(rng);
  Partition p(g, num_phases);
  for (std::size_t idx = 0; idx < p.size(); ++idx) {
    auto x = g.cell_center(idx);
    int best = 0;
    double bd = g.periodic_distance2(x, seeds[0]);
    for (int s = 1; s < num_seeds; ++s) {
      double d = g.periodic_distance2(x, seeds[s]);
      if (d < bd) {
        bd = d;
        best = s;
      }
    }
    p.labels[idx] = static_cast<std::uint8_t>(best % num_phases);
  }
  return p;
}

// Random two-phase blobs: white noise smoothed at scale sqrt(h_smooth),
// thresholded at zero.
inline Partition blob_partition(const TorusGrid& g, double h_smooth, std::mt19937_64& rng) {
  ScalarField noise(g);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& v : noise.values) v = gauss(rng);
  double mean = 0.0;
  for (double v : noise.values) mean += v;
  mean /= noise.values.size();
  for (auto& v : noise.values) v -= mean;
  ScalarField u = gaussian_convolve(noise, h_smooth);
  Partition p(g, 2);
  for (std::size_t i = 0; i < p.size(); ++i) p.labels[i] = u.values[i] > 0.0 ? 0 : 1;
  return p;
}

}  // namespace mbo
