#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mbo/grid.hpp"
#include "mbo/tensions.hpp"

namespace mbo {

enum class TieRule : std::uint8_t { SmallestIndex, LargestIndex };

struct SchemeConfig {
  SurfaceTensionMatrix sigma = SurfaceTensionMatrix::uniform(2);
  TorusGrid grid;
  double h = 1e-4;        // microscopic time step
  double T = 0.0;         // horizon, T = N*h
  double alpha = 1.0;     // mesoscopic fudge factor, tau = alpha*sqrt(h)
  TieRule tie_rule = TieRule::SmallestIndex;
  int snapshot_stride = 0;  // 0 -> mesoscopic cadence

  int num_steps() const {
    if (!(h > 0.0)) throw Error("time step must be positive");
    long long N = std::llround(T / h);
    if (N < 0 || std::abs(N * h - T) > 1e-9 * std::max(T, h))
      throw Error("horizon is not an integer multiple of the time step");
    return static_cast<int>(N);
  }

  // Microscopic steps per mesoscopic interval tau = alpha*sqrt(h).
  int meso_steps() const {
    long long K = std::llround(alpha / std::sqrt(h));
    return static_cast<int>(std::max(1ll, K));
  }

  int stride() const { return snapshot_stride > 0 ? snapshot_stride : meso_steps(); }

  void check() const {
    if (!(h > 0.0)) throw Error("time step must be positive");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw Error("alpha must lie in (0, 2]");
    (void)num_steps();
  }
};

struct StepRecord {
  int n = 0;                     // step index, 1-based
  double t = 0.0;                // n*h
  double Eh = 0.0;               // approximate energy after the step
  double dissipation = 0.0;      // -E_h(chi^n - chi^{n-1}) >= 0
  std::vector<double> volumes;   // per-phase volumes after the step
  double elg_residual = std::numeric_limits<double>::quiet_NaN();
  int tie_cells = 0;             // cells decided within the tie margin
};

struct Trajectory {
  SchemeConfig cfg;
  Partition initial;
  double initial_energy = 0.0;
  std::vector<double> initial_volumes;
  std::vector<int> snapshot_steps;    // includes 0 and N
  std::vector<Partition> snapshots;
  std::vector<StepRecord> records;    // one per step, n = 1..N

  const Partition& final_partition() const { return snapshots.back(); }

  const Partition& snapshot_at_step(int n) const {
    for (std::size_t i = 0; i < snapshot_steps.size(); ++i)
      if (snapshot_steps[i] == n) return snapshots[i];
    throw Error("no snapshot stored at step " + std::to_string(n));
  }

  bool has_snapshot(int n) const {
    for (int s : snapshot_steps)
      if (s == n) return true;
    return false;
  }
};

}  // namespace mbo
