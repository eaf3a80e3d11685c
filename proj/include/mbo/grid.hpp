#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

#include "mbo/errors.hpp"

namespace mbo {

// 1/sqrt(2*pi): relates the nonlocal interfacial energy to sharp perimeter.
inline constexpr double kC0 = 0.39894228040143267794;

// Volume of the unit ball in dimension d (d = 0 gives 1).
inline double unit_ball_volume(int d) {
  switch (d) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return M_PI;
    case 3: return 4.0 * M_PI / 3.0;
    default: {
      // Gamma recursion; only d <= 3 is used in practice.
      return unit_ball_volume(d - 2) * 2.0 * M_PI / d;
    }
  }
}

// Uniform periodic grid on the torus [0, Lambda)^d with n cells per axis.
// Cell centers sit at (i + 1/2) * dx.
struct TorusGrid {
  int dim = 2;
  int n = 0;
  double length = 1.0;

  double dx() const { return length / n; }

  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int k = 0; k < dim; ++k) c *= static_cast<std::size_t>(n);
    return c;
  }

  double cell_volume() const { return std::pow(dx(), dim); }

  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }

  // Nearest periodic image of a coordinate difference.
  double wrap_delta(double d) const {
    d = std::fmod(d, length);
    if (d > 0.5 * length) d -= length;
    if (d < -0.5 * length) d += length;
    return d;
  }

  double periodic_distance2(const std::array<double, 3>& a, const std::array<double, 3>& b) const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = wrap_delta(a[k] - b[k]);
      s += d * d;
    }
    return s;
  }

  std::size_t index(const std::array<int, 3>& i) const {
    std::size_t idx = 0;
    for (int k = 0; k < dim; ++k) idx = idx * n + static_cast<std::size_t>(wrap(i[k]));
    return idx;
  }

  std::array<int, 3> multi_index(std::size_t idx) const {
    std::array<int, 3> i{0, 0, 0};
    for (int k = dim - 1; k >= 0; --k) {
      i[k] = static_cast<int>(idx % n);
      idx /= n;
    }
    return i;
  }

  std::array<double, 3> cell_center(std::size_t idx) const {
    auto mi = multi_index(idx);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) x[k] = (mi[k] + 0.5) * dx();
    return x;
  }

  bool operator==(const TorusGrid& o) const {
    return dim == o.dim && n == o.n && length == o.length;
  }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

// Real-valued field sampled at cell centers.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g, double fill = 0.0)
      : grid(g), values(g.cell_count(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

// d scalar components over a common grid.
struct VectorField {
  TorusGrid grid;
  std::vector<ScalarField> comp;

  VectorField() = default;
  explicit VectorField(const TorusGrid& g) : grid(g) {
    comp.assign(g.dim, ScalarField(g));
  }
};

// Label field: one phase in {0, ..., P-1} per cell.
struct Partition {
  TorusGrid grid;
  int num_phases = 0;
  std::vector<std::uint8_t> labels;

  Partition() = default;
  Partition(const TorusGrid& g, int phases, std::uint8_t fill = 0)
      : grid(g), num_phases(phases), labels(g.cell_count(), fill) {}

  std::uint8_t operator[](std::size_t i) const { return labels[i]; }
  std::uint8_t& operator[](std::size_t i) { return labels[i]; }
  std::size_t size() const { return labels.size(); }

  bool same_layout(const Partition& o) const {
    return grid == o.grid && num_phases == o.num_phases;
  }
};

// Multilinear interpolation of a cell-centered field at an arbitrary point.
inline double sample_multilinear(const ScalarField& f, const std::array<double, 3>& x) {
  const TorusGrid& g = f.grid;
  const double dx = g.dx();
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int k = 0; k < g.dim; ++k) {
    double u = x[k] / dx - 0.5;  // cell-center coordinates
    double fl = std::floor(u);
    base[k] = static_cast<int>(fl);
    frac[k] = u - fl;
  }
  double acc = 0.0;
  const int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    std::array<int, 3> idx{0, 0, 0};
    double w = 1.0;
    for (int k = 0; k < g.dim; ++k) {
      int bit = (c >> k) & 1;
      idx[k] = base[k] + bit;
      w *= bit ? frac[k] : 1.0 - frac[k];
    }
    acc += w * f.values[g.index(idx)];
  }
  return acc;
}

inline double integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

// dx^d-weighted dot product <f, g>.
inline double inner(const ScalarField& f, const ScalarField& g) {
  if (f.grid != g.grid) throw GridMismatch();
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.grid.cell_volume();
}

inline ScalarField indicator(const Partition& p, int phase) {
  if (phase < 0 || phase >= p.num_phases) throw PhaseOutOfRange(phase);
  ScalarField f(p.grid);
  for (std::size_t i = 0; i < p.labels.size(); ++i)
    f.values[i] = (p.labels[i] == phase) ? 1.0 : 0.0;
  return f;
}

// Sum over phases of \int |chi_i(p) - chi_i(q)| dx; each differing cell
// contributes twice its volume.
inline double symmetric_difference_volume(const Partition& p, const Partition& q) {
  if (!p.same_layout(q)) throw GridMismatch();
  std::size_t diff = 0;
  for (std::size_t i = 0; i < p.labels.size(); ++i) diff += (p.labels[i] != q.labels[i]);
  return 2.0 * static_cast<double>(diff) * p.grid.cell_volume();
}

inline std::vector<double> phase_volumes(const Partition& p) {
  std::vector<double> v(p.num_phases, 0.0);
  for (std::uint8_t l : p.labels) v[l] += 1.0;
  const double cv = p.grid.cell_volume();
  for (double& x : v) x *= cv;
  return v;
}

}  // namespace mbo
