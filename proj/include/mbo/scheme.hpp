#pragma once

#include <functional>
#include <vector>

#include "mbo/convolve.hpp"
#include "mbo/energetics.hpp"
#include "mbo/grid.hpp"
#include "mbo/trajectory.hpp"

namespace mbo {

struct StepStats {
  int tie_cells = 0;        // cells whose two best phases are within the tie margin
  double min_margin = 0.0;  // smallest runner-up gap over all cells
};

// Margin below which a thresholding decision counts as a tie.
inline double tie_margin(const SurfaceTensionMatrix& sigma) {
  return 1e-12 * std::max(1.0, sigma.sigma_max());
}

namespace detail {

// Thresholding given conv_j = G_h * chi_j^{n-1}: the new label at x minimizes
// phi_i(x) = sum_j sigma_ij conv_j(x).
inline Partition threshold_from_conv(const Partition& chi_prev,
                                     const std::vector<ScalarField>& conv,
                                     const SurfaceTensionMatrix& sigma, TieRule tie_rule,
                                     StepStats* stats) {
  const int P = chi_prev.num_phases;
  Partition next(chi_prev.grid, P);
  const double margin_tol = tie_margin(sigma);
  int ties = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::vector<const double*> u(P);
  for (int j = 0; j < P; ++j) u[j] = conv[j].values.data();
  std::vector<double> phi(P);
  for (std::size_t x = 0; x < next.labels.size(); ++x) {
    for (int i = 0; i < P; ++i) {
      double s = 0.0;
      for (int j = 0; j < P; ++j) s += sigma(i, j) * u[j][x];
      phi[i] = s;
    }
    int best = 0;
    if (tie_rule == TieRule::SmallestIndex) {
      for (int i = 1; i < P; ++i)
        if (phi[i] < phi[best]) best = i;
    } else {
      for (int i = 1; i < P; ++i)
        if (phi[i] <= phi[best]) best = i;
    }
    next.labels[x] = static_cast<std::uint8_t>(best);
    if (stats) {
      double runner = std::numeric_limits<double>::infinity();
      for (int i = 0; i < P; ++i)
        if (i != best) runner = std::min(runner, phi[i]);
      double m = runner - phi[best];
      min_margin = std::min(min_margin, m);
      if (m <= margin_tol) ++ties;
    }
  }
  if (stats) {
    stats->tie_cells = ties;
    stats->min_margin = min_margin;
  }
  return next;
}

}  // namespace detail

// One convolution/thresholding step.
inline Partition threshold_step(const Partition& chi_prev, const SchemeConfig& cfg,
                                StepStats* stats = nullptr) {
  if (chi_prev.grid != cfg.grid || chi_prev.num_phases != cfg.sigma.phases())
    throw GridMismatch();
  auto conv = convolve_indicators(chi_prev, cfg.h);
  return detail::threshold_from_conv(chi_prev, conv, cfg.sigma, cfg.tie_rule, stats);
}

struct StepContext {
  int n = 0;
  const Partition& prev;
  const Partition& next;
  const SchemeConfig& cfg;
};

using StepObserver = std::function<void(const StepContext&)>;

// N = T/h threshold steps from chi0. Per-step records carry the energy after
// the step, the dissipated metric term, and phase volumes; label snapshots are
// stored every `stride` steps (default: the mesoscopic cadence) plus the
// final state. Deterministic given (chi0, cfg).
inline Trajectory run(const Partition& chi0, const SchemeConfig& cfg,
                      const StepObserver& observer = {}) {
  cfg.check();
  if (chi0.grid != cfg.grid || chi0.num_phases != cfg.sigma.phases()) throw GridMismatch();
  const int N = cfg.num_steps();
  const int stride = cfg.stride();
  const int P = chi0.num_phases;
  const double sqrt_h = std::sqrt(cfg.h);
  const double cell_vol = chi0.grid.cell_volume();

  Trajectory traj;
  traj.cfg = cfg;
  traj.initial = chi0;
  traj.initial_volumes = phase_volumes(chi0);
  traj.snapshot_steps.push_back(0);
  traj.snapshots.push_back(chi0);
  traj.records.reserve(N);

  Partition cur = chi0;
  std::vector<ScalarField> conv = convolve_indicators(cur, cfg.h);
  traj.initial_energy = approximate_energy_from_conv(cur, conv, cfg.h, cfg.sigma);

  for (int n = 1; n <= N; ++n) {
    StepStats stats;
    Partition next = detail::threshold_from_conv(cur, conv, cfg.sigma, cfg.tie_rule, &stats);
    std::vector<ScalarField> conv_next = convolve_indicators(next, cfg.h);

    StepRecord rec;
    rec.n = n;
    rec.t = n * cfg.h;
    rec.Eh = approximate_energy_from_conv(next, conv_next, cfg.h, cfg.sigma);
    rec.volumes = phase_volumes(next);
    rec.tie_cells = stats.tie_cells;

    // -E_h(omega) with omega = chi^n - chi^{n-1}; G_h*omega_j is the
    // difference of the cached convolutions.
    double s = 0.0;
    for (int i = 0; i < P; ++i) {
      double dot = 0.0;
      for (std::size_t x = 0; x < cur.labels.size(); ++x) {
        double wi = (next.labels[x] == i ? 1.0 : 0.0) - (cur.labels[x] == i ? 1.0 : 0.0);
        if (wi == 0.0) continue;
        double gw = 0.0;
        for (int j = 0; j < P; ++j)
          gw += cfg.sigma(i, j) * (conv_next[j].values[x] - conv[j].values[x]);
        dot += wi * gw;
      }
      s += dot;
    }
    rec.dissipation = -s * cell_vol / sqrt_h;
    traj.records.push_back(std::move(rec));

    if (observer) observer(StepContext{n, cur, next, cfg});

    cur = std::move(next);
    conv = std::move(conv_next);
    if (n % stride == 0 || n == N) {
      traj.snapshot_steps.push_back(n);
      traj.snapshots.push_back(cur);
    }
  }
  return traj;
}

// Exhaustive minimizer of E_h(chi) + metric_term(chi, chi_prev) over all
// admissible labelings of a tiny 1-D grid; verifies that the thresholding
// step attains the same objective value.
inline Partition minimizing_movement_oracle(const Partition& chi_prev, const SchemeConfig& cfg) {
  if (chi_prev.grid != cfg.grid || chi_prev.num_phases != cfg.sigma.phases())
    throw GridMismatch();
  const int P = chi_prev.num_phases;
  const std::size_t cells = chi_prev.size();
  if (cfg.grid.dim != 1 || cells > 12 || P > 3) throw TooLargeForBruteForce();

  auto objective = [&](const Partition& chi) {
    return approximate_energy(chi, cfg.h, cfg.sigma) +
           metric_term(chi, chi_prev, cfg.h, cfg.sigma);
  };

  Partition cand(chi_prev.grid, P);
  Partition best = cand;
  double best_val = std::numeric_limits<double>::infinity();
  std::uint64_t total = 1;
  for (std::size_t c = 0; c < cells; ++c) total *= P;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t v = code;
    for (std::size_t c = 0; c < cells; ++c) {
      cand.labels[c] = static_cast<std::uint8_t>(v % P);
      v /= P;
    }
    double val = objective(cand);
    if (val < best_val) {
      best_val = val;
      best = cand;
    }
  }

  Partition stepped = threshold_step(chi_prev, cfg);
  double step_val = objective(stepped);
  if (std::abs(step_val - best_val) > 1e-10)
    throw Error("thresholding step misses the exhaustive optimum by " +
                std::to_string(step_val - best_val));
  return best;
}

}  // namespace mbo
