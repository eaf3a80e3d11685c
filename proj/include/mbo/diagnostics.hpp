#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "mbo/convolve.hpp"
#include "mbo/energetics.hpp"
#include "mbo/grid.hpp"
#include "mbo/trajectory.hpp"

namespace mbo {

// ---------------------------------------------------------------------------
// Ball covering on the torus: centers on the lattice (r/sqrt(d)) Z^d, so that
// every point lies within r of some center and n*r-dilations have bounded
// overlap independent of r.
// ---------------------------------------------------------------------------

struct BallCovering {
  int dim = 2;
  double torus_length = 1.0;
  double r = 0.0;
  double spacing = 0.0;
  std::vector<std::array<double, 3>> centers;
};

inline BallCovering make_ball_covering(const TorusGrid& g, double r) {
  BallCovering cov;
  cov.dim = g.dim;
  cov.torus_length = g.length;
  cov.r = r;
  cov.spacing = r / std::sqrt(static_cast<double>(g.dim));
  int m = static_cast<int>(std::ceil(g.length / cov.spacing - 1e-12));
  std::array<int, 3> mi{0, 0, 0};
  std::array<int, 3> dims{1, 1, 1};
  for (int k = 0; k < g.dim; ++k) dims[k] = m;
  for (mi[0] = 0; mi[0] < dims[0]; ++mi[0])
    for (mi[1] = 0; mi[1] < dims[1]; ++mi[1])
      for (mi[2] = 0; mi[2] < dims[2]; ++mi[2]) {
        std::array<double, 3> c{0.0, 0.0, 0.0};
        for (int k = 0; k < g.dim; ++k) c[k] = mi[k] * cov.spacing;
        cov.centers.push_back(c);
      }
  return cov;
}

inline int overlap_count(const BallCovering& cov, const TorusGrid& g,
                         const std::array<double, 3>& x, double dilation) {
  const double rad2 = (dilation * cov.r) * (dilation * cov.r);
  int cnt = 0;
  for (const auto& c : cov.centers)
    if (g.periodic_distance2(x, c) <= rad2) ++cnt;
  return cnt;
}

// Radial quintic cutoff: identically 1 on B_r, 0 outside B_2r, with
// |grad| <= 3/r and |grad^2| <= 12/r^2.
inline double radial_cutoff(double dist, double r) {
  if (dist <= r) return 1.0;
  if (dist >= 2.0 * r) return 0.0;
  double u = (dist - r) / r;
  return 1.0 + u * u * u * (-10.0 + u * (15.0 - 6.0 * u));
}

inline double radial_cutoff_slope(double dist, double r) {
  if (dist <= r || dist >= 2.0 * r) return 0.0;
  double u = (dist - r) / r;
  return (u * u * (-30.0 + u * (60.0 - 30.0 * u))) / r;
}

// ---------------------------------------------------------------------------
// Half-space excess on balls.
// ---------------------------------------------------------------------------

struct ExcessContext {
  const Partition* chi = nullptr;
  double h = 0.0;
  std::vector<ScalarField> conv;   // u_k = G_h * chi_k per phase
  std::vector<VectorField> grad;   // grad u_k per phase
};

inline ExcessContext build_excess_context(const Partition& chi, double h) {
  ExcessContext ctx;
  ctx.chi = &chi;
  ctx.h = h;
  for (int k = 0; k < chi.num_phases; ++k) {
    spectral::Spectrum s = spectral::forward(indicator(chi, k));
    spectral::apply_gaussian(s, h);
    ctx.conv.push_back(spectral::inverse(s));
    VectorField gk(chi.grid);
    for (int a = 0; a < chi.grid.dim; ++a) {
      spectral::Spectrum sa = s;
      spectral::apply_derivative(sa, a);
      gk.comp[a] = spectral::inverse(sa);
    }
    ctx.grad.push_back(std::move(gk));
  }
  return ctx;
}

struct BallExcess {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double r = 0.0;
  int phase_i = 0, phase_j = 1;
  std::array<double, 3> normal{1.0, 0.0, 0.0};  // best half-space normal
  double offset = 0.0;                          // signed distance of the cut from the center
  double tilt_excess = 0.0;                     // pair tilt against the best net normal
  double energy_excess = 0.0;                   // |S_i - S*| + |S_j - S*| at the best candidate
  double bulk_l1 = 0.0;                         // (1/r)(L1_i + L1_j) at the best candidate
  double minority_area = 0.0;                   // sum over k not in {i,j} of int eta |grad chi_k|
  double interface_mass = 0.0;                  // int_{2B} |grad chi_i| proxy
  bool mass_ok = false;                         // >= (1/2) omega_{d-1} (2r)^{d-1}
  int cells = 0;
};

inline std::vector<std::array<double, 3>> normal_net(int dim, int M) {
  std::vector<std::array<double, 3>> net;
  net.reserve(M);
  if (dim == 1) {
    net.push_back({1.0, 0.0, 0.0});
    net.push_back({-1.0, 0.0, 0.0});
  } else if (dim == 2) {
    for (int m = 0; m < M; ++m) {
      double a = 2.0 * M_PI * m / M;
      net.push_back({std::cos(a), std::sin(a), 0.0});
    }
  } else {
    // the six axis directions, then a Fibonacci sphere for the rest
    for (int a = 0; a < 3 && static_cast<int>(net.size()) < M; ++a)
      for (int s = -1; s <= 1; s += 2) {
        std::array<double, 3> e{0.0, 0.0, 0.0};
        e[a] = s;
        net.push_back(e);
      }
    const int F = M - static_cast<int>(net.size());
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int m = 0; m < F; ++m) {
      double z = 1.0 - 2.0 * (m + 0.5) / F;
      double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      net.push_back({rho * std::cos(ga * m), rho * std::sin(ga * m), z});
    }
  }
  return net;
}

namespace detail {

struct BallCells {
  std::vector<std::size_t> idx;
  std::vector<std::array<double, 3>> delta;  // periodic displacement from center
  std::vector<double> dist;
  std::vector<double> eta;
};

inline BallCells collect_ball_cells(const TorusGrid& g, const std::array<double, 3>& center,
                                    double r) {
  BallCells out;
  const double dx = g.dx();
  const double w = 2.0 * r;
  std::array<int, 3> lo{0, 0, 0}, len{1, 1, 1};
  for (int k = 0; k < g.dim; ++k) {
    int l = static_cast<int>(std::floor((center[k] - w) / dx - 0.5));
    int hi = static_cast<int>(std::ceil((center[k] + w) / dx - 0.5));
    lo[k] = l;
    len[k] = std::min(g.n, hi - l + 1);
  }
  std::array<int, 3> it{0, 0, 0};
  for (it[0] = 0; it[0] < len[0]; ++it[0])
    for (it[1] = 0; it[1] < len[1]; ++it[1])
      for (it[2] = 0; it[2] < len[2]; ++it[2]) {
        std::array<int, 3> ci{0, 0, 0};
        std::array<double, 3> delta{0.0, 0.0, 0.0};
        double d2 = 0.0;
        for (int k = 0; k < g.dim; ++k) {
          ci[k] = lo[k] + it[k];
          double xk = (ci[k] + 0.5) * dx;
          delta[k] = g.wrap_delta(xk - center[k]);
          d2 += delta[k] * delta[k];
        }
        if (d2 > w * w) continue;
        out.idx.push_back(g.index(ci));
        out.delta.push_back(delta);
        double dist = std::sqrt(d2);
        out.dist.push_back(dist);
        out.eta.push_back(radial_cutoff(dist, r));
      }
  return out;
}

}  // namespace detail

// Tilt and half-space excess of the pair (i, j) on the ball B_r(center),
// minimized over a net of M candidate normals with volume-matched offsets.
// Interfacial measures are read off the smoothed fields: |grad G_h*chi_k| is
// a unit-mass surface density, so the tilt integrand eta (|grad u| -+ nu.grad u)
// is pointwise nonnegative and the half-space reference has the closed form
// G((s - lambda)/sqrt(h))/sqrt(h). Raster staircase noise enters both sides
// of each comparison identically and cancels.
inline BallExcess excess_on_ball(const ExcessContext& ctx, const std::array<double, 3>& center,
                                 double r, int phase_i, int phase_j, int M = 0) {
  const Partition& chi = *ctx.chi;
  const TorusGrid& g = chi.grid;
  const double h = ctx.h;
  if (r < 6.0 * std::sqrt(h)) throw UnresolvedScale("ball radius below 6*sqrt(h)");
  if (phase_i == phase_j || phase_i < 0 || phase_j < 0 || phase_i >= chi.num_phases ||
      phase_j >= chi.num_phases)
    throw PhaseOutOfRange(phase_i == phase_j ? phase_i : std::max(phase_i, phase_j));
  if (M <= 0) M = g.dim == 3 ? 128 : 64;

  BallExcess out;
  out.center = center;
  out.r = r;
  out.phase_i = phase_i;
  out.phase_j = phase_j;

  detail::BallCells cells = detail::collect_ball_cells(g, center, r);
  out.cells = static_cast<int>(cells.idx.size());
  const double cell_vol = g.cell_volume();
  const double sqrt_h = std::sqrt(h);
  const int P = chi.num_phases;
  const int d = g.dim;

  // S_k = int eta |grad u_k|, V_k = int eta grad u_k, plus the sharp-cutoff
  // interfacial mass of phase i over B_2r.
  std::vector<double> S_phase(P, 0.0);
  std::array<double, 3> V_i{0.0, 0.0, 0.0}, V_j{0.0, 0.0, 0.0};
  double mass_sharp = 0.0;
  for (std::size_t c = 0; c < cells.idx.size(); ++c) {
    const std::size_t x = cells.idx[c];
    const double eta = cells.eta[c];
    for (int k = 0; k < P; ++k) {
      double g2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double gv = ctx.grad[k].comp[a].values[x];
        g2 += gv * gv;
      }
      double gn = std::sqrt(g2);
      S_phase[k] += eta * gn;
      if (k == phase_i) {
        mass_sharp += gn;
        for (int a = 0; a < d; ++a) V_i[a] += eta * ctx.grad[k].comp[a].values[x];
      } else if (k == phase_j) {
        for (int a = 0; a < d; ++a) V_j[a] += eta * ctx.grad[k].comp[a].values[x];
      }
    }
  }
  double minority = 0.0;
  for (int k = 0; k < P; ++k) {
    S_phase[k] *= cell_vol;
    if (k != phase_i && k != phase_j) minority += S_phase[k];
  }
  const double S_i = S_phase[phase_i];
  const double S_j = S_phase[phase_j];
  for (int a = 0; a < d; ++a) {
    V_i[a] *= cell_vol;
    V_j[a] *= cell_vol;
  }
  out.minority_area = minority;
  out.interface_mass = mass_sharp * cell_vol;
  out.mass_ok =
      out.interface_mass >= 0.5 * unit_ball_volume(d - 1) * std::pow(2.0 * r, d - 1);

  auto net = normal_net(d, M);

  // Pair tilt (inner normal of phase i is +grad u_i):
  // (S_i - nu.V_i) + (S_j + nu.V_j), nonnegative for every normal.
  double best_tilt = std::numeric_limits<double>::infinity();
  for (const auto& nu : net) {
    double dot_i = 0.0, dot_j = 0.0;
    for (int a = 0; a < d; ++a) {
      dot_i += nu[a] * V_i[a];
      dot_j += nu[a] * V_j[a];
    }
    best_tilt = std::min(best_tilt, (S_i - dot_i) + (S_j + dot_j));
  }
  out.tilt_excess = std::max(0.0, best_tilt);

  // Half-space comparison, volume matched per candidate normal.
  std::size_t count_i = 0;
  for (std::size_t c = 0; c < cells.idx.size(); ++c)
    if (chi.labels[cells.idx[c]] == phase_i) ++count_i;

  std::vector<double> svals(cells.idx.size());
  std::vector<double> sorted;
  double best_total = std::numeric_limits<double>::infinity();
  const double prof_norm = 1.0 / std::sqrt(2.0 * M_PI * h);
  for (const auto& nu : net) {
    for (std::size_t c = 0; c < cells.idx.size(); ++c) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += nu[a] * cells.delta[c][a];
      svals[c] = s;
    }
    double lambda;
    if (count_i == 0) {
      lambda = 2.0 * r;  // empty half-space
    } else if (count_i >= cells.idx.size()) {
      lambda = -2.0 * r;
    } else {
      sorted = svals;
      auto nth = sorted.begin() + (count_i - 1);
      std::nth_element(sorted.begin(), nth, sorted.end(), std::greater<double>());
      double s_in = *nth;
      double s_out = *std::max_element(nth + 1, sorted.end());
      lambda = 0.5 * (s_in + s_out);
    }
    double S_star = 0.0;
    double l1_i = 0.0, l1_j = 0.0;
    for (std::size_t c = 0; c < cells.idx.size(); ++c) {
      double arg = (svals[c] - lambda) / sqrt_h;
      S_star += cells.eta[c] * prof_norm * std::exp(-0.5 * arg * arg);
      bool star = svals[c] > lambda;
      const int lab = chi.labels[cells.idx[c]];
      l1_i += (lab == phase_i) != star;
      l1_j += (lab == phase_j) != !star;
    }
    S_star *= cell_vol;
    double bulk = (l1_i + l1_j) * cell_vol / r;
    double energy = std::abs(S_i - S_star) + std::abs(S_j - S_star);
    double total = energy + bulk;
    if (total < best_total) {
      best_total = total;
      out.normal = nu;
      out.offset = lambda;
      out.energy_excess = energy;
      out.bulk_l1 = bulk;
    }
  }
  return out;
}

inline BallExcess excess_on_ball(const Partition& chi, double h,
                                 const std::array<double, 3>& center, double r, int phase_i,
                                 int phase_j, int M = 0) {
  ExcessContext ctx = build_excess_context(chi, h);
  return excess_on_ball(ctx, center, r, phase_i, phase_j, M);
}

struct ExcessReport {
  double r = 0.0;
  double delta = 0.05;
  std::vector<BallExcess> balls;       // interface balls only
  int total_balls = 0;
  int empty_balls = 0;
  int good_balls = 0;
  int bad_balls = 0;
  double bad_mass = 0.0;               // sum over bad balls of int_{2B}|grad chi|
  std::vector<bool> is_good;           // parallel to `balls`
};

// Applies the excess measurement on every covering ball; a ball is good when
// its tilt excess is at most delta*r^(d-1) and its 2B interfacial mass clears
// the half-ball lower bound. Balls whose 2B neighborhood contains no
// interface cells fail the mass bound trivially and are tallied as empty.
inline ExcessReport classify_covering(const Partition& chi, double h, double r, double delta,
                                      int M = 0) {
  const TorusGrid& g = chi.grid;
  ExcessReport rep;
  rep.r = r;
  rep.delta = delta;
  BallCovering cov = make_ball_covering(g, r);
  rep.total_balls = static_cast<int>(cov.centers.size());
  ExcessContext ctx = build_excess_context(chi, h);

  // interface mask: cell with any differing axis neighbor
  std::vector<std::uint8_t> iface(chi.size(), 0);
  for (std::size_t x = 0; x < chi.size(); ++x) {
    auto mi = g.multi_index(x);
    for (int k = 0; k < g.dim && !iface[x]; ++k) {
      for (int s = -1; s <= 1; s += 2) {
        auto nb = mi;
        nb[k] = g.wrap(nb[k] + s);
        if (chi.labels[g.index(nb)] != chi.labels[x]) {
          iface[x] = 1;
          break;
        }
      }
    }
  }

  const double threshold = delta * std::pow(r, g.dim - 1);
  for (const auto& c : cov.centers) {
    detail::BallCells cells = detail::collect_ball_cells(g, c, r);
    bool any_iface = false;
    std::vector<std::size_t> vol_count(chi.num_phases, 0);
    for (std::size_t k = 0; k < cells.idx.size(); ++k) {
      if (iface[cells.idx[k]]) any_iface = true;
      ++vol_count[chi.labels[cells.idx[k]]];
    }
    if (!any_iface) {
      ++rep.empty_balls;
      ++rep.bad_balls;
      continue;
    }
    int pi = -1, pj = -1;
    std::size_t best1 = 0, best2 = 0;
    for (int p = 0; p < chi.num_phases; ++p)
      if (vol_count[p] > best1) {
        best2 = best1;
        pj = pi;
        best1 = vol_count[p];
        pi = p;
      } else if (vol_count[p] > best2) {
        best2 = vol_count[p];
        pj = p;
      }
    if (pj < 0) {
      // interface grazes the box but only one phase is visible inside
      ++rep.empty_balls;
      ++rep.bad_balls;
      continue;
    }
    BallExcess ex = excess_on_ball(ctx, c, r, pi, pj, M);
    bool good = ex.mass_ok && ex.tilt_excess <= threshold;
    if (good)
      ++rep.good_balls;
    else {
      ++rep.bad_balls;
      rep.bad_mass += ex.interface_mass;
    }
    rep.is_good.push_back(good);
    rep.balls.push_back(std::move(ex));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Junctions.
// ---------------------------------------------------------------------------

// Corners of 2x2 plaquettes where at least three phases meet, clustered to
// one representative per junction.
inline std::vector<std::array<double, 3>> find_triple_junctions(const Partition& chi) {
  if (chi.grid.dim != 2) throw Error("junction search is 2-D only");
  const TorusGrid& g = chi.grid;
  std::vector<std::array<double, 3>> raw;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      std::array<std::uint8_t, 4> l{
          chi.labels[g.index({i, j, 0})], chi.labels[g.index({i + 1, j, 0})],
          chi.labels[g.index({i, j + 1, 0})], chi.labels[g.index({i + 1, j + 1, 0})]};
      int distinct = 1;
      for (int a = 1; a < 4; ++a) {
        bool seen = false;
        for (int b = 0; b < a; ++b) seen |= (l[a] == l[b]);
        distinct += !seen;
      }
      if (distinct >= 3)
        raw.push_back({(i + 1.0) * g.dx(), (j + 1.0) * g.dx(), 0.0});
    }
  // greedy clustering within 6*dx
  std::vector<std::array<double, 3>> out;
  std::vector<int> weight;
  const double merge2 = 36.0 * g.dx() * g.dx();
  for (const auto& p : raw) {
    bool merged = false;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (g.periodic_distance2(p, out[k]) <= merge2) {
        for (int a = 0; a < 2; ++a)
          out[k][a] += g.wrap_delta(p[a] - out[k][a]) / (weight[k] + 1);
        ++weight[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.push_back(p);
      weight.push_back(1);
    }
  }
  return out;
}

struct JunctionAngles {
  std::array<int, 3> phases{0, 1, 2};
  std::array<double, 3> angles{0.0, 0.0, 0.0};  // radians, sum 2*pi
  int cells = 0;
};

// Opening angles at a triple junction from phase cell fractions in the
// annulus rho_min <= |x - center| <= rho_max.
inline JunctionAngles junction_angles_measured(const Partition& chi,
                                               const std::array<double, 3>& center,
                                               double rho_min = 0.0, double rho_max = 0.0) {
  if (chi.grid.dim != 2) throw Error("junction measurement is 2-D only");
  const TorusGrid& g = chi.grid;
  if (rho_min <= 0.0) rho_min = 5.0 * g.dx();
  if (rho_max <= 0.0) rho_max = 10.0 * g.dx();
  std::vector<std::size_t> count(chi.num_phases, 0);
  std::size_t total = 0;
  const double dx = g.dx();
  int w = static_cast<int>(std::ceil(rho_max / dx)) + 1;
  std::array<int, 3> c0{0, 0, 0};
  for (int k = 0; k < 2; ++k) c0[k] = static_cast<int>(std::floor(center[k] / dx));
  for (int di = -w; di <= w; ++di)
    for (int dj = -w; dj <= w; ++dj) {
      std::array<int, 3> ci{c0[0] + di, c0[1] + dj, 0};
      std::size_t idx = g.index(ci);
      auto x = g.cell_center(idx);
      double d2 = g.periodic_distance2(x, center);
      if (d2 < rho_min * rho_min || d2 > rho_max * rho_max) continue;
      ++count[chi.labels[idx]];
      ++total;
    }
  JunctionAngles out;
  int seen = 0;
  for (int p = 0; p < chi.num_phases; ++p)
    if (count[p] > 0) {
      if (seen < 3) out.phases[seen] = p;
      ++seen;
    }
  if (seen != 3) throw NotATripleJunction(seen);
  out.cells = static_cast<int>(total);
  for (int k = 0; k < 3; ++k)
    out.angles[k] = 2.0 * M_PI * count[out.phases[k]] / static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Smooth-solution diagnostics.
// ---------------------------------------------------------------------------

struct RadiusSample {
  double t = 0.0;
  double radius = 0.0;
};

// Effective radius of the given phase from its volume, (V / omega_d)^(1/d).
inline std::vector<RadiusSample> disk_radius_series(const Trajectory& traj, int phase = 0) {
  const int d = traj.initial.grid.dim;
  const double wd = unit_ball_volume(d);
  std::vector<RadiusSample> out;
  auto radius = [&](double vol) { return std::pow(vol / wd, 1.0 / d); };
  out.push_back({0.0, radius(traj.initial_volumes[phase])});
  for (const auto& r : traj.records) out.push_back({r.t, radius(r.volumes[phase])});
  return out;
}

struct VelocitySample {
  double t_mid = 0.0;
  double median_speed = 0.0;  // inward normal speed of the phase-0 interface
  int cells = 0;
};

namespace detail {

// Nearest root of (interpolated field) - 1/2 along the ray x + s*dir,
// bracketed by sampling at half-cell steps around s_hint; NaN if none.
inline double level_root_along_ray(const ScalarField& u, const std::array<double, 3>& x,
                                   const std::array<double, 3>& dir, double s_hint,
                                   double s_max) {
  const double step = 0.5 * u.grid.dx();
  auto value = [&](double s) {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int k = 0; k < u.grid.dim; ++k) p[k] = x[k] + s * dir[k];
    return sample_multilinear(u, p) - 0.5;
  };
  double best_a = std::numeric_limits<double>::quiet_NaN();
  double best_b = 0.0, best_dist = std::numeric_limits<double>::infinity();
  int steps = static_cast<int>(std::ceil(2.0 * s_max / step));
  double prev_s = -s_max, prev_v = value(prev_s);
  for (int i = 1; i <= steps; ++i) {
    double s = -s_max + 2.0 * s_max * i / steps;
    double v = value(s);
    if (prev_v == 0.0 || prev_v * v < 0.0) {
      double mid = 0.5 * (prev_s + s);
      double dist = std::abs(mid - s_hint);
      if (dist < best_dist) {
        best_dist = dist;
        best_a = prev_s;
        best_b = s;
      }
    }
    prev_s = s;
    prev_v = v;
  }
  if (std::isnan(best_a)) return best_a;
  double a = best_a, b = best_b;
  double fa = value(a);
  for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
    double mid = 0.5 * (a + b);
    double fm = value(mid);
    if (fa * fm <= 0.0)
      b = mid;
    else {
      a = mid;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Signed displacement of the 1/2-level of G_h*chi_phase across one mesoscopic
// interval, located along the interface normal by bisection, divided by tau.
// Positive speeds point inward (a shrinking phase has positive speed).
inline std::vector<VelocitySample> velocity_estimate(const Trajectory& traj, int phase = 0) {
  const double h = traj.cfg.h;
  const int stride = traj.cfg.stride();
  const double tau = stride * h;
  const TorusGrid& g = traj.initial.grid;
  const double s_max = std::max(6.0 * std::sqrt(h), 3.0 * g.dx());
  std::vector<VelocitySample> out;
  for (std::size_t k = 0; k + 1 < traj.snapshot_steps.size(); ++k) {
    int n0 = traj.snapshot_steps[k];
    int n1 = traj.snapshot_steps[k + 1];
    if (n1 - n0 != stride) continue;
    ScalarField ind0 = indicator(traj.snapshots[k], phase);
    ScalarField u0 = gaussian_convolve(ind0, h);
    ScalarField u1 = gaussian_convolve(indicator(traj.snapshots[k + 1], phase), h);
    VectorField grad = gradient_convolve(ind0, h);
    std::vector<double> speeds;
    const double gmin = 0.1 / std::sqrt(h);
    for (std::size_t x = 0; x < u0.values.size(); ++x) {
      if (std::abs(u0.values[x] - 0.5) > 0.2) continue;
      double g2 = 0.0;
      for (int a = 0; a < g.dim; ++a)
        g2 += grad.comp[a].values[x] * grad.comp[a].values[x];
      double gn = std::sqrt(g2);
      if (gn < gmin) continue;
      // outward normal of the phase
      std::array<double, 3> nrm{0.0, 0.0, 0.0};
      for (int a = 0; a < g.dim; ++a) nrm[a] = -grad.comp[a].values[x] / gn;
      auto xc = g.cell_center(x);
      double s0 = detail::level_root_along_ray(u0, xc, nrm, 0.0, s_max);
      if (std::isnan(s0)) continue;
      double s1 = detail::level_root_along_ray(u1, xc, nrm, s0, s_max);
      if (std::isnan(s1)) continue;
      speeds.push_back(-(s1 - s0) / tau);
    }
    VelocitySample vs;
    vs.t_mid = (n0 + 0.5 * stride) * h;
    vs.cells = static_cast<int>(speeds.size());
    if (!speeds.empty()) {
      auto mid = speeds.begin() + speeds.size() / 2;
      std::nth_element(speeds.begin(), mid, speeds.end());
      vs.median_speed = *mid;
    }
    out.push_back(vs);
  }
  return out;
}

struct DissipationLocalization {
  double total = 0.0;
  double in_band = 0.0;
  double fraction = 1.0;  // share of mass within the band
};

// Share of the dissipation-measure mass within `band` of the moving
// interface; the band is measured per step around cells whose label differs
// from an axis neighbor in either the old or the new partition.
inline DissipationLocalization dissipation_localization(const Trajectory& traj, double band) {
  const TorusGrid& g = traj.initial.grid;
  const double h = traj.cfg.h;
  const int P = traj.initial.num_phases;
  const double dx = g.dx();
  const int w = static_cast<int>(std::ceil(band / dx));

  // displacement stencil within the band radius
  std::vector<std::array<int, 3>> offsets;
  std::array<int, 3> off{0, 0, 0};
  auto push_if_inside = [&](const std::array<int, 3>& o) {
    double d2 = 0.0;
    for (int k = 0; k < g.dim; ++k) d2 += (o[k] * dx) * (o[k] * dx);
    if (d2 <= band * band) offsets.push_back(o);
  };
  if (g.dim == 1) {
    for (off[0] = -w; off[0] <= w; ++off[0]) push_if_inside(off);
  } else if (g.dim == 2) {
    for (off[0] = -w; off[0] <= w; ++off[0])
      for (off[1] = -w; off[1] <= w; ++off[1]) push_if_inside(off);
  } else {
    for (off[0] = -w; off[0] <= w; ++off[0])
      for (off[1] = -w; off[1] <= w; ++off[1])
        for (off[2] = -w; off[2] <= w; ++off[2]) push_if_inside(off);
  }

  DissipationLocalization out;
  const int N = static_cast<int>(traj.records.size());
  std::vector<std::uint8_t> mask(g.cell_count());
  for (int n = 1; n <= N; ++n) {
    const Partition& prev = traj.snapshot_at_step(n - 1);
    const Partition& next = traj.snapshot_at_step(n);
    std::fill(mask.begin(), mask.end(), 0);
    for (std::size_t x = 0; x < prev.size(); ++x) {
      auto mi = g.multi_index(x);
      bool iface = false;
      for (int k = 0; k < g.dim && !iface; ++k)
        for (int s = -1; s <= 1 && !iface; s += 2) {
          auto nb = mi;
          nb[k] = g.wrap(nb[k] + s);
          std::size_t y = g.index(nb);
          iface = prev.labels[y] != prev.labels[x] || next.labels[y] != next.labels[x];
        }
      if (!iface) continue;
      for (const auto& o : offsets) {
        std::array<int, 3> nb{mi[0] + o[0], mi[1] + o[1], mi[2] + o[2]};
        mask[g.index(nb)] = 1;
      }
    }
    for (int i = 0; i < P; ++i) {
      ScalarField wfield(g);
      for (std::size_t x = 0; x < wfield.values.size(); ++x)
        wfield.values[x] =
            (next.labels[x] == i ? 1.0 : 0.0) - (prev.labels[x] == i ? 1.0 : 0.0);
      spectral::Spectrum s = spectral::forward(wfield);
      spectral::Spectrum s_half = s;
      spectral::apply_gaussian(s_half, 0.5 * h);
      spectral::apply_gaussian(s, h);
      ScalarField a = spectral::inverse(s_half);
      ScalarField b = spectral::inverse(s);
      for (std::size_t x = 0; x < a.values.size(); ++x) {
        double dens = (a.values[x] * a.values[x] + b.values[x] * b.values[x]) / std::sqrt(h);
        out.total += dens;
        if (mask[x]) out.in_band += dens;
      }
    }
  }
  const double cv = g.cell_volume();
  out.total *= cv;
  out.in_band *= cv;
  out.fraction = out.total > 0.0 ? out.in_band / out.total : 1.0;
  return out;
}

struct TimeModulus {
  double tau = 0.0;
  double modulus = 0.0;  // int_tau^T int |chi(t) - chi(t-tau)| dx dt
  double ratio = 0.0;    // modulus / ((1+T) E0 (tau + sqrt(h)))
};

inline TimeModulus bv_time_modulus(const Trajectory& traj, double tau) {
  const double h = traj.cfg.h;
  const int stride = traj.cfg.stride();
  const double dt = stride * h;
  long long m = std::llround(tau / dt);
  if (m < 0 || std::abs(m * dt - tau) > 1e-9 * std::max(tau, dt))
    throw Error("tau must be a nonnegative multiple of the snapshot cadence");
  // uniform snapshot prefix (final snapshot may be off-stride)
  std::vector<std::size_t> uni;
  for (std::size_t k = 0; k < traj.snapshot_steps.size(); ++k)
    if (traj.snapshot_steps[k] == static_cast<int>(k) * stride) uni.push_back(k);
  TimeModulus out;
  out.tau = tau;
  if (m == 0) {
    out.ratio = 0.0;
    return out;
  }
  for (std::size_t k = m; k < uni.size(); ++k)
    out.modulus +=
        dt * symmetric_difference_volume(traj.snapshots[uni[k]], traj.snapshots[uni[k - m]]);
  const double T = traj.cfg.T;
  double denom = (1.0 + T) * traj.initial_energy * (tau + std::sqrt(h));
  out.ratio = denom > 0.0 ? out.modulus / denom : 0.0;
  return out;
}

struct HoelderReport {
  double max_ratio = 0.0;  // max over pairs of symdiff / (E0 sqrt(|s-t|))
  int pairs = 0;
};

inline HoelderReport hoelder_volume_check(const Trajectory& traj) {
  HoelderReport rep;
  const double h = traj.cfg.h;
  const double E0 = traj.initial_energy;
  for (std::size_t a = 0; a < traj.snapshots.size(); ++a)
    for (std::size_t b = a + 1; b < traj.snapshots.size(); ++b) {
      double dt = (traj.snapshot_steps[b] - traj.snapshot_steps[a]) * h;
      if (dt < h) continue;
      double sd = symmetric_difference_volume(traj.snapshots[a], traj.snapshots[b]);
      if (E0 > 0.0) rep.max_ratio = std::max(rep.max_ratio, sd / (E0 * std::sqrt(dt)));
      ++rep.pairs;
    }
  return rep;
}

}  // namespace mbo
