#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mbo/convolve.hpp"
#include "mbo/grid.hpp"
#include "mbo/tensions.hpp"
#include "mbo/trajectory.hpp"

namespace mbo {

namespace detail {

// sum_x zeta(x) * sigma(label(x), j) * conv_j(x) over all phases j,
// i.e. the quadrature core of (1/sqrt(h)) * sum_ij sigma_ij int zeta chi_i G*chi_j.
inline double tension_weighted_sum(const Partition& chi,
                                   const std::vector<ScalarField>& conv,
                                   const SurfaceTensionMatrix& sigma,
                                   const ScalarField* zeta) {
  const int P = chi.num_phases;
  double total = 0.0;
  for (int j = 0; j < P; ++j) {
    const auto& u = conv[j].values;
    double s = 0.0;
    if (zeta) {
      const auto& z = zeta->values;
      for (std::size_t x = 0; x < chi.labels.size(); ++x)
        s += z[x] * sigma(chi.labels[x], j) * u[x];
    } else {
      // accumulate per label to keep the inner loop branch-free
      for (std::size_t x = 0; x < chi.labels.size(); ++x)
        s += sigma(chi.labels[x], j) * u[x];
    }
    total += s;
  }
  return total;
}

}  // namespace detail

// E_h(chi) = (1/sqrt(h)) sum_ij sigma_ij int chi_i G_h*chi_j dx,
// both ordered pairs counted; midpoint quadrature.
inline double approximate_energy_from_conv(const Partition& chi,
                                           const std::vector<ScalarField>& conv,
                                           double h, const SurfaceTensionMatrix& sigma) {
  if (chi.num_phases != sigma.phases() || static_cast<int>(conv.size()) != chi.num_phases)
    throw GridMismatch();
  return detail::tension_weighted_sum(chi, conv, sigma, nullptr) * chi.grid.cell_volume() /
         std::sqrt(h);
}

inline double approximate_energy(const Partition& chi, double h,
                                 const SurfaceTensionMatrix& sigma) {
  if (chi.num_phases != sigma.phases()) throw GridMismatch();
  return approximate_energy_from_conv(chi, convolve_indicators(chi, h), h, sigma);
}

// -E_h(chi - chi_prev) >= 0; the squared distance of the implicit scheme.
inline double metric_term(const Partition& chi, const Partition& chi_prev, double h,
                          const SurfaceTensionMatrix& sigma) {
  if (!chi.same_layout(chi_prev)) throw GridMismatch();
  if (chi.num_phases != sigma.phases()) throw GridMismatch();
  const int P = chi.num_phases;
  std::vector<ScalarField> omega;
  omega.reserve(P);
  for (int i = 0; i < P; ++i) {
    ScalarField w(chi.grid);
    for (std::size_t x = 0; x < chi.labels.size(); ++x)
      w.values[x] = (chi.labels[x] == i ? 1.0 : 0.0) - (chi_prev.labels[x] == i ? 1.0 : 0.0);
    omega.push_back(std::move(w));
  }
  std::vector<ScalarField> conv;
  conv.reserve(P);
  for (int j = 0; j < P; ++j) conv.push_back(gaussian_convolve(omega[j], h));
  double s = 0.0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (std::size_t x = 0; x < omega[i].values.size(); ++x)
        dot += omega[i].values[x] * conv[j].values[x];
      s += sigma(i, j) * dot;
    }
  return -s * chi.grid.cell_volume() / std::sqrt(h);
}

// (1/sqrt(h)) sum_ij sigma_ij int zeta chi_i G_h*chi_j dx.
inline double localized_energy(const Partition& chi, const ScalarField& zeta, double h,
                               const SurfaceTensionMatrix& sigma) {
  if (chi.grid != zeta.grid || chi.num_phases != sigma.phases()) throw GridMismatch();
  auto conv = convolve_indicators(chi, h);
  return detail::tension_weighted_sum(chi, conv, sigma, &zeta) * chi.grid.cell_volume() /
         std::sqrt(h);
}

// Two-phase localized form for a single indicator u (tension 1):
// (1/sqrt(h)) int zeta [ (1-u) G_h*u + u G_h*(1-u) ] dx.
// G_h * 1 = 1 exactly, so the bracket is G_h*u + u (1 - 2 G_h*u).
inline double two_phase_localized_energy(const ScalarField& u, const ScalarField& conv_u,
                                         const ScalarField& zeta, double h) {
  if (u.grid != zeta.grid || u.grid != conv_u.grid) throw GridMismatch();
  double s = 0.0;
  for (std::size_t x = 0; x < u.values.size(); ++x)
    s += zeta.values[x] * (conv_u.values[x] + u.values[x] * (1.0 - 2.0 * conv_u.values[x]));
  return s * u.grid.cell_volume() / std::sqrt(h);
}

inline double two_phase_localized_energy(const ScalarField& u, const ScalarField& zeta,
                                         double h) {
  return two_phase_localized_energy(u, gaussian_convolve(u, h), zeta, h);
}

struct DissipationCheckReport {
  bool pass = true;
  double tol = 0.0;
  double max_step_violation = 0.0;   // max over n of Eh(n) + diss(n) - Eh(n-1)
  double cumulative_violation = 0.0; // Eh(N) + sum diss - Eh(0)
  double min_dissipation = 0.0;
  int violations = 0;
};

// Per-step and cumulative energy-dissipation inequality of the scheme.
inline DissipationCheckReport energy_dissipation_check(const Trajectory& traj) {
  DissipationCheckReport rep;
  rep.tol = 1e-8 * traj.initial_energy;
  double prev = traj.initial_energy;
  double diss_sum = 0.0;
  rep.min_dissipation = std::numeric_limits<double>::infinity();
  for (const auto& r : traj.records) {
    double viol = r.Eh + r.dissipation - prev;
    rep.max_step_violation = std::max(rep.max_step_violation, viol);
    if (viol > rep.tol) ++rep.violations;
    rep.min_dissipation = std::min(rep.min_dissipation, r.dissipation);
    diss_sum += r.dissipation;
    prev = r.Eh;
  }
  if (traj.records.empty()) rep.min_dissipation = 0.0;
  double final_E = traj.records.empty() ? traj.initial_energy : traj.records.back().Eh;
  rep.cumulative_violation = final_E + diss_sum - traj.initial_energy;
  if (rep.cumulative_violation > rep.tol) ++rep.violations;
  if (rep.min_dissipation < -1e-10) ++rep.violations;
  rep.pass = rep.violations == 0;
  return rep;
}

struct MonotonicityPair {
  double h = 0.0, h0 = 0.0;
  double lhs = 0.0, rhs = 0.0;  // E_h and scaled E_{h0}
  double margin = 0.0;          // lhs - rhs
};

struct MonotonicityReport {
  bool pass = true;
  double worst_relative_margin = 0.0;
  std::vector<MonotonicityPair> pairs;
};

// E_h(chi) >= (sqrt(h0)/(sqrt(h)+sqrt(h0)))^(d+1) E_{h0}(chi) for h <= h0.
inline MonotonicityReport approximate_monotonicity_check(const Partition& chi,
                                                         const std::vector<double>& h_list,
                                                         const SurfaceTensionMatrix& sigma,
                                                         double rel_tol = 1e-6) {
  MonotonicityReport rep;
  std::vector<double> E(h_list.size());
  for (std::size_t i = 0; i < h_list.size(); ++i)
    E[i] = approximate_energy(chi, h_list[i], sigma);
  const int d = chi.grid.dim;
  for (std::size_t a = 0; a < h_list.size(); ++a)
    for (std::size_t b = 0; b < h_list.size(); ++b) {
      if (!(h_list[a] < h_list[b])) continue;
      double factor = std::pow(std::sqrt(h_list[b]) / (std::sqrt(h_list[a]) + std::sqrt(h_list[b])),
                               d + 1);
      MonotonicityPair pr;
      pr.h = h_list[a];
      pr.h0 = h_list[b];
      pr.lhs = E[a];
      pr.rhs = factor * E[b];
      pr.margin = pr.lhs - pr.rhs;
      double rel = pr.rhs != 0.0 ? pr.margin / std::abs(pr.rhs) : pr.margin;
      rep.worst_relative_margin = std::min(rep.worst_relative_margin, rel);
      if (rel < -rel_tol) rep.pass = false;
      rep.pairs.push_back(pr);
    }
  return rep;
}

namespace detail {

// Common core of both inner variations:
// W_j = G_h * (-grad(chi_j) . xi) = -sum_k d_k(G_h*(xi_k chi_j)) + G_h*((div xi) chi_j).
inline std::vector<ScalarField> variation_kernels(const Partition& chi, const VectorField& xi,
                                                  double h) {
  const TorusGrid& g = chi.grid;
  ScalarField div_xi = divergence(xi);
  std::vector<ScalarField> W;
  W.reserve(chi.num_phases);
  for (int j = 0; j < chi.num_phases; ++j) {
    ScalarField chij = indicator(chi, j);
    spectral::Spectrum acc;
    for (int k = 0; k < g.dim; ++k) {
      ScalarField prod(g);
      for (std::size_t x = 0; x < prod.values.size(); ++x)
        prod.values[x] = xi.comp[k].values[x] * chij.values[x];
      spectral::Spectrum s = spectral::forward(prod);
      spectral::apply_gaussian(s, h);
      spectral::apply_derivative(s, k);
      for (auto& c : s.coef) c = -c;
      if (k == 0)
        acc = std::move(s);
      else
        spectral::axpy(acc, 1.0, s);
    }
    ScalarField prod(g);
    for (std::size_t x = 0; x < prod.values.size(); ++x)
      prod.values[x] = div_xi.values[x] * chij.values[x];
    spectral::Spectrum s = spectral::forward(prod);
    spectral::apply_gaussian(s, h);
    spectral::axpy(acc, 1.0, s);
    W.push_back(spectral::inverse(acc));
  }
  return W;
}

}  // namespace detail

// Inner variation of E_h along xi:
// (2/sqrt(h)) sum_ij sigma_ij int chi_i G_h*(-grad(chi_j).xi) dx.
inline double first_variation_energy(const Partition& chi, const VectorField& xi, double h,
                                     const SurfaceTensionMatrix& sigma) {
  if (chi.grid != xi.grid || chi.num_phases != sigma.phases()) throw GridMismatch();
  auto W = detail::variation_kernels(chi, xi, h);
  double s = detail::tension_weighted_sum(chi, W, sigma, nullptr);
  return 2.0 * s * chi.grid.cell_volume() / std::sqrt(h);
}

// Inner variation of the metric term -E_h(. - chi_prev) at chi along xi:
// (2/sqrt(h)) sum_ij sigma_ij int (chi_i - chi_prev_i) G_h*(grad(chi_j).xi) dx.
inline double first_variation_metric(const Partition& chi, const Partition& chi_prev,
                                     const VectorField& xi, double h,
                                     const SurfaceTensionMatrix& sigma) {
  if (!chi.same_layout(chi_prev)) throw GridMismatch();
  if (chi.grid != xi.grid || chi.num_phases != sigma.phases()) throw GridMismatch();
  auto W = detail::variation_kernels(chi, xi, h);
  // G_h*(grad(chi_j).xi) = -W_j
  double s = detail::tension_weighted_sum(chi, W, sigma, nullptr) -
             detail::tension_weighted_sum(chi_prev, W, sigma, nullptr);
  return -2.0 * s * chi.grid.cell_volume() / std::sqrt(h);
}

// Fills the optional per-step Euler-Lagrange residuals |dE_h + d(metric)|
// along a fixed test field, for steps whose flanking snapshots are stored.
inline void fill_elg_residuals(Trajectory& traj, const VectorField& xi) {
  for (auto& rec : traj.records) {
    if (!traj.has_snapshot(rec.n - 1) || !traj.has_snapshot(rec.n)) continue;
    const Partition& prev = traj.snapshot_at_step(rec.n - 1);
    const Partition& next = traj.snapshot_at_step(rec.n);
    double dE = first_variation_energy(next, xi, traj.cfg.h, traj.cfg.sigma);
    double dM = first_variation_metric(next, prev, xi, traj.cfg.h, traj.cfg.sigma);
    rec.elg_residual = std::abs(dE + dM);
  }
}

struct DissipationDensity {
  TorusGrid grid;
  ScalarField density;  // accumulated over the window
  double total = 0.0;
};

// Accumulates (1/sqrt(h)) (|G_{h/2}*(chi^n-chi^{n-1})|^2 + |G_h*(chi^n-chi^{n-1})|^2)
// over steps n in (n_begin, n_end]; needs stride-1 snapshots over the window.
inline DissipationDensity dissipation_measure(const Trajectory& traj, int n_begin, int n_end) {
  const double h = traj.cfg.h;
  const int P = traj.initial.num_phases;
  DissipationDensity out;
  out.grid = traj.initial.grid;
  out.density = ScalarField(out.grid);
  for (int n = n_begin + 1; n <= n_end; ++n) {
    const Partition& prev = traj.snapshot_at_step(n - 1);
    const Partition& next = traj.snapshot_at_step(n);
    for (int i = 0; i < P; ++i) {
      ScalarField w(out.grid);
      for (std::size_t x = 0; x < w.values.size(); ++x)
        w.values[x] = (next.labels[x] == i ? 1.0 : 0.0) - (prev.labels[x] == i ? 1.0 : 0.0);
      spectral::Spectrum s = spectral::forward(w);
      spectral::Spectrum s_half = s;
      spectral::apply_gaussian(s_half, 0.5 * h);
      spectral::Spectrum s_full = std::move(s);
      spectral::apply_gaussian(s_full, h);
      ScalarField a = spectral::inverse(s_half);
      ScalarField b = spectral::inverse(s_full);
      for (std::size_t x = 0; x < out.density.values.size(); ++x)
        out.density.values[x] +=
            (a.values[x] * a.values[x] + b.values[x] * b.values[x]) / std::sqrt(h);
    }
  }
  out.total = integral(out.density);
  return out;
}

inline DissipationDensity dissipation_measure(const Trajectory& traj) {
  return dissipation_measure(traj, 0, static_cast<int>(traj.records.size()));
}

}  // namespace mbo
