#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mbo/config.hpp"
#include "mbo/diagnostics.hpp"
#include "mbo/energetics.hpp"
#include "mbo/initial.hpp"
#include "mbo/io.hpp"
#include "mbo/rng.hpp"
#include "mbo/scheme.hpp"

namespace mbo {

struct CheckLine {
  std::string name;
  bool pass = true;
  bool informational = false;
  std::string value;
};

struct ExperimentResult {
  bool pass = true;
  std::vector<CheckLine> checks;
  std::string summary_path;

  void add(const std::string& name, bool ok, const std::string& value) {
    checks.push_back({name, ok, false, value});
    pass = pass && ok;
  }
  void info(const std::string& name, const std::string& value) {
    checks.push_back({name, true, true, value});
  }
};

// Left-endpoint quadrature of t -> E_h(chi^h(t)) over [0, T].
inline double time_integrated_energy(const Trajectory& traj) {
  double sum = traj.initial_energy;
  for (std::size_t n = 0; n + 1 < traj.records.size(); ++n) sum += traj.records[n].Eh;
  return sum * traj.cfg.h;
}

namespace detail {

inline Partition build_initial(const ExperimentConfig& cfg) {
  TorusGrid g = cfg.grid();
  switch (cfg.init.kind) {
    case InitialData::Kind::Disk:
      return disk_partition(g, cfg.init.radius, cfg.init.center);
    case InitialData::Kind::Stripe:
      return stripe_partition(g, cfg.init.width);
    case InitialData::Kind::Sectors:
      return sector_partition(g, cfg.init.angles, cfg.init.center);
    case InitialData::Kind::Voronoi: {
      auto rng = make_stream(cfg.seed, streams::kVoronoi);
      return voronoi_partition(g, cfg.phases, cfg.init.seeds, rng);
    }
    case InitialData::Kind::File: {
      Partition p = read_mbolbl1(cfg.init.path);
      if (p.grid != g || p.num_phases != cfg.phases)
        throw ValidationError("init", "file grid does not match the config");
      return p;
    }
  }
  throw Error("unreachable");
}

inline void write_summary(const std::filesystem::path& dir, ExperimentResult& res) {
  std::filesystem::path p = dir / "summary.txt";
  std::ofstream out(p);
  if (!out) throw IoError("cannot open " + p.string() + " for writing");
  for (const auto& c : res.checks)
    out << c.name << " = " << (c.informational ? "info" : (c.pass ? "pass" : "fail")) << " : "
        << c.value << "\n";
  res.summary_path = p.string();
}

inline void write_snapshots(const std::filesystem::path& dir, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "labels_%06d.mbolbl", traj.snapshot_steps[k]);
    write_mbolbl1((dir / name).string(), traj.snapshots[k]);
  }
  if (traj.initial.grid.dim == 2)
    write_pgm((dir / "final.pgm").string(), traj.final_partition());
}

inline void standard_run_checks(const Trajectory& traj, ExperimentResult& res) {
  auto rep = energy_dissipation_check(traj);
  res.add("energy_dissipation", rep.pass,
          "max_step_violation=" + format_double(rep.max_step_violation) +
              " min_dissipation=" + format_double(rep.min_dissipation));
  res.info("time_integrated_energy", format_double(time_integrated_energy(traj)));
}

// Fixed smooth field used for the optional per-step residual column.
inline VectorField default_variation_field(const TorusGrid& g) {
  VectorField xi(g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    auto x = g.cell_center(i);
    for (int k = 0; k < g.dim; ++k) {
      double t = x[(k + 1) % g.dim] / g.length;
      xi.comp[k].values[i] = std::sin(2.0 * M_PI * t + 0.4 * (k + 1));
    }
  }
  return xi;
}

inline double evolve_single(const ExperimentConfig& cfg, double h,
                            const std::filesystem::path& dir, ExperimentResult& res,
                            const std::string& suffix) {
  Partition chi0 = build_initial(cfg);
  Trajectory traj = run(chi0, cfg.scheme(h));
  if (cfg.stride == 1) fill_elg_residuals(traj, default_variation_field(cfg.grid()));
  write_records_csv((dir / "records.csv").string(), traj);
  write_snapshots(dir, traj);
  auto rep = energy_dissipation_check(traj);
  res.add("energy_dissipation" + suffix, rep.pass,
          "max_step_violation=" + format_double(rep.max_step_violation) +
              " min_dissipation=" + format_double(rep.min_dissipation));
  double tie = time_integrated_energy(traj);
  res.info("time_integrated_energy" + suffix, format_double(tie));
  if (cfg.stride == 1) {
    DissipationDensity mu = dissipation_measure(traj);
    double ratio = traj.initial_energy > 0.0 ? mu.total / traj.initial_energy : 0.0;
    res.info("dissipation_measure_total" + suffix, format_double(mu.total));
    res.add("dissipation_measure_bound" + suffix, ratio <= 10.0,
            "mu_total/E0=" + format_double(ratio));
  }
  res.info("final_energy" + suffix,
           format_double(traj.records.empty() ? traj.initial_energy : traj.records.back().Eh));
  return tie;
}

inline ExperimentResult do_evolve(const ExperimentConfig& cfg,
                                  const std::filesystem::path& dir) {
  ExperimentResult res;
  if (cfg.h_list.size() == 1) {
    evolve_single(cfg, cfg.h(), dir, res, "");
    return res;
  }
  // step sweep: one run per member in its own directory, with the
  // time-integrated energy trend across members reported for inspection
  std::vector<double> ties;
  for (std::size_t k = 0; k < cfg.h_list.size(); ++k) {
    std::filesystem::path sub = dir / ("h" + std::to_string(k));
    std::filesystem::create_directories(sub);
    ties.push_back(
        evolve_single(cfg, cfg.h_list[k], sub, res, "_h" + std::to_string(k)));
  }
  std::size_t last = ties.size() - 1;
  double rel = std::abs(ties[last] - ties[last - 1]) / std::max(1e-300, std::abs(ties[last]));
  res.info("time_integrated_energy_trend",
           "finest pair rel gap " + format_double(rel));
  return res;
}

inline ExperimentResult do_circle_test(const ExperimentConfig& cfg,
                                       const std::filesystem::path& dir) {
  ExperimentResult res;
  if (cfg.init.kind != InitialData::Kind::Disk)
    throw ValidationError("init", "circle-test needs disk initial data");
  Partition chi0 = build_initial(cfg);
  Trajectory traj = run(chi0, cfg.scheme(cfg.h()));
  auto series = disk_radius_series(traj, 0);
  write_radius_csv((dir / "radius.csv").string(), series);
  write_records_csv((dir / "records.csv").string(), traj);
  standard_run_checks(traj, res);

  // One step displaces the interface by h*H/2 (variance-h kernel), so
  // R^2(t) = R0^2 - (d-1) t for a shrinking sphere.
  const double R0 = series.front().radius;
  const int d = cfg.dim;
  if (d == 2) {
    double worst = 0.0;
    for (const auto& s : series) {
      if (s.radius < 0.5 * R0) break;
      double predicted = R0 * R0 - s.t;
      worst = std::max(worst, std::abs(s.radius * s.radius - predicted) / (R0 * R0));
    }
    res.add("circle_radius_law", worst <= 0.03, "max_rel_dev=" + format_double(worst));
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : series) {
      double y = s.radius * s.radius;
      sx += s.t;
      sy += y;
      sxx += s.t * s.t;
      sxy += s.t * y;
    }
    double n = static_cast<double>(series.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double target = -(d - 1.0);
    bool ok = std::abs(slope - target) <= 0.1 * std::abs(target);
    res.add("sphere_radius_law", ok, "slope=" + format_double(slope));
  }
  auto vel = velocity_estimate(traj, 0);
  if (!vel.empty()) {
    // median interface speed against (d-1)/(2R) at mid-run
    std::size_t mid = vel.size() / 2;
    double t = vel[mid].t_mid;
    double R2 = R0 * R0 - (d - 1.0) * t;
    if (R2 > 0.0) {
      double expect = 0.5 * (d - 1) / std::sqrt(R2);
      res.info("velocity_median_vs_curvature", format_double(vel[mid].median_speed) + " vs " +
                                                   format_double(expect));
    }
  }
  return res;
}

inline ExperimentResult do_junction_test(const ExperimentConfig& cfg,
                                         const std::filesystem::path& dir) {
  ExperimentResult res;
  if (cfg.init.kind != InitialData::Kind::Sectors)
    throw ValidationError("init", "junction-test needs sectors initial data");
  Partition chi0 = build_initial(cfg);
  Trajectory traj = run(chi0, cfg.scheme(cfg.h()));
  write_records_csv((dir / "records.csv").string(), traj);
  write_snapshots(dir, traj);
  standard_run_checks(traj, res);

  // average the annulus measurement over the stored late snapshots; the
  // drifting junction turns single-snapshot raster noise into jitter that
  // averages out
  std::array<double, 3> seed_center{cfg.init.center[0] * cfg.lambda,
                                    cfg.init.center[1] * cfg.lambda, 0.0};
  const TorusGrid g = cfg.grid();
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  std::array<int, 3> phases{0, 1, 2};
  int samples = 0;
  int first = std::max<int>(0, static_cast<int>(traj.snapshots.size()) - 10);
  std::ofstream series((dir / "junction.csv").string());
  series << "t,cx,cy,theta_deg_1,theta_deg_2,theta_deg_3\n";
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const Partition& snap = traj.snapshots[k];
    auto junctions = find_triple_junctions(snap);
    if (junctions.empty()) continue;
    std::array<double, 3> best = junctions.front();
    for (const auto& j : junctions)
      if (g.periodic_distance2(j, seed_center) < g.periodic_distance2(best, seed_center))
        best = j;
    JunctionAngles m;
    try {
      m = junction_angles_measured(snap, best, 10.0 * g.dx(), 22.0 * g.dx());
    } catch (const NotATripleJunction&) {
      continue;
    }
    series << format_double(traj.snapshot_steps[k] * cfg.h()) << ',' << format_double(best[0])
           << ',' << format_double(best[1]);
    for (int a = 0; a < 3; ++a) series << ',' << format_double(m.angles[a] * 180.0 / M_PI);
    series << '\n';
    if (static_cast<int>(k) >= first) {
      for (int a = 0; a < 3; ++a) acc[a] += m.angles[a];
      phases = m.phases;
      ++samples;
    }
  }
  if (samples == 0) throw NotATripleJunction(0);

  SurfaceTensionMatrix sig = cfg.sigma();
  auto expect = herring_angles(sig(phases[0], phases[1]), sig(phases[0], phases[2]),
                               sig(phases[1], phases[2]));
  std::ostringstream val;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    double deg = acc[k] / samples * 180.0 / M_PI;
    double exp_deg = expect[k] * 180.0 / M_PI;
    worst = std::max(worst, std::abs(deg - exp_deg));
    val << "phase" << phases[k] << "=" << format_double(deg) << "(exp "
        << format_double(exp_deg) << ") ";
  }
  res.add("herring_angles", worst <= cfg.junction_tol_deg,
          val.str() + "worst_dev_deg=" + format_double(worst));
  return res;
}

inline ExperimentResult do_consistency(const ExperimentConfig& cfg,
                                       const std::filesystem::path& dir) {
  ExperimentResult res;
  Partition chi0 = build_initial(cfg);
  SurfaceTensionMatrix sig = cfg.sigma();

  double reference = 0.0;
  double tol = 0.02;
  if (cfg.init.kind == InitialData::Kind::Disk) {
    double R = cfg.init.radius;
    double perim = cfg.dim == 2 ? 2.0 * M_PI * R : 4.0 * M_PI * R * R;
    reference = 2.0 * kC0 * sig(0, 1) * perim;
  } else if (cfg.init.kind == InitialData::Kind::Stripe) {
    reference = 2.0 * kC0 * sig(0, 1) * 2.0 * std::pow(cfg.lambda, cfg.dim - 1);
    tol = 0.01;
  }

  std::ofstream table((dir / "consistency.csv").string());
  table << "h,Eh,reference,rel_error\n";
  std::vector<double> errors;
  double final_E = 0.0;
  for (double h : cfg.h_list) {
    double E = approximate_energy(chi0, h, sig);
    final_E = E;
    double err = reference > 0.0 ? std::abs(E - reference) / reference : 0.0;
    errors.push_back(err);
    table << format_double(h) << ',' << format_double(E) << ',' << format_double(reference)
          << ',' << format_double(err) << '\n';
  }
  if (reference > 0.0) {
    res.add("consistency_error", errors.back() <= tol,
            "rel_error=" + format_double(errors.back()) + " at h=" +
                format_double(cfg.h_list.back()) + " Eh=" + format_double(final_E));
    if (cfg.init.kind == InitialData::Kind::Disk) {
      bool decreasing = true;
      for (std::size_t k = 1; k < errors.size(); ++k)
        decreasing = decreasing && errors[k] <= errors[k - 1] + 1e-12;
      res.add("consistency_trend", decreasing, "errors decreasing along the sweep");
    } else {
      // flat interfaces: the continuum value is h-independent
      double spread = *std::max_element(errors.begin(), errors.end());
      res.add("consistency_trend", spread <= tol,
              "h-independence, max rel deviation " + format_double(spread));
    }
  } else {
    // no analytic reference; report the Richardson-extrapolated limit
    res.info("Eh_finest", format_double(final_E));
    if (cfg.h_list.size() >= 3) {
      double e0 = approximate_energy(chi0, cfg.h_list[cfg.h_list.size() - 3], sig);
      double e1 = approximate_energy(chi0, cfg.h_list[cfg.h_list.size() - 2], sig);
      double e2 = final_E;
      double denom = e0 - 2.0 * e1 + e2;
      if (std::abs(denom) > 1e-14) {
        double extrap = e2 - (e1 - e2) * (e1 - e2) / denom;
        res.info("Eh_extrapolated", format_double(extrap));
      }
    }
  }
  // monotonicity in h (list is decreasing; the check wants ascending)
  std::vector<double> ascending(cfg.h_list.rbegin(), cfg.h_list.rend());
  auto mono = approximate_monotonicity_check(chi0, ascending, sig);
  res.add("approximate_monotonicity", mono.pass,
          "worst_rel_margin=" + format_double(mono.worst_relative_margin));
  return res;
}

}  // namespace detail

// Admissible random tension matrix: symmetric positive off-diagonals, strict
// triangle inequality and conditional negative-definiteness by rejection.
inline SurfaceTensionMatrix random_admissible_sigma(int P, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.6, 1.8);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::vector<double>> raw(P, std::vector<double>(P, 0.0));
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j) raw[i][j] = raw[j][i] = uni(rng);
    try {
      return SurfaceTensionMatrix::validate(raw);
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("failed to sample an admissible tension matrix");
}

namespace detail {

inline ExperimentResult do_oracle_check(const ExperimentConfig& cfg,
                                        const std::filesystem::path& dir) {
  ExperimentResult res;
  auto rng = make_stream(cfg.seed, streams::kOracle);
  std::uniform_int_distribution<int> phase_dist(2, 3);
  int matched = 0;
  const int total = cfg.oracle_instances;
  for (int inst = 0; inst < total; ++inst) {
    int P = phase_dist(rng);
    std::uniform_int_distribution<int> cell_dist(4, P == 3 ? 9 : 10);
    int n = cell_dist(rng);
    TorusGrid g{1, n, 1.0};
    SchemeConfig sc;
    sc.sigma = random_admissible_sigma(P, rng);
    sc.grid = g;
    std::uniform_real_distribution<double> h_dist(1.0 / 400.0, 1.0 / 16.0);
    sc.h = h_dist(rng);
    sc.T = sc.h;
    Partition prev(g, P);
    std::uniform_int_distribution<int> lab(0, P - 1);
    for (auto& l : prev.labels) l = static_cast<std::uint8_t>(lab(rng));
    minimizing_movement_oracle(prev, sc);  // throws on objective mismatch
    ++matched;
  }
  std::ofstream note((dir / "oracle.txt").string());
  note << "instances = " << total << "\nmatched = " << matched << "\n";
  res.add("minimizing_movements_equivalence", matched == total,
          std::to_string(matched) + "/" + std::to_string(total) + " instances matched");
  return res;
}

inline ExperimentResult do_excess_scan(const ExperimentConfig& cfg,
                                       const std::filesystem::path& dir) {
  ExperimentResult res;
  Partition chi0 = build_initial(cfg);
  const double h = cfg.h();
  std::vector<double> bad_mass;
  for (double r : cfg.r_list) {
    ExcessReport rep = classify_covering(chi0, h, r, cfg.delta, cfg.normal_net);
    char name[64];
    std::snprintf(name, sizeof(name), "excess_r%.6f.csv", r);
    write_excess_csv((dir / name).string(), rep, cfg.dim);
    bad_mass.push_back(rep.bad_mass);
    res.info("balls_r" + format_double(r),
             "good=" + std::to_string(rep.good_balls) + " bad=" + std::to_string(rep.bad_balls) +
                 " empty=" + std::to_string(rep.empty_balls) +
                 " bad_mass=" + format_double(rep.bad_mass));
  }
  if (bad_mass.size() >= 2) {
    bool dec = true;
    for (std::size_t k = 1; k < bad_mass.size(); ++k)
      dec = dec && bad_mass[k] <= bad_mass[k - 1] + 1e-12;
    res.add("bad_ball_mass_trend", dec, "non-increasing along r_list");
  }
  return res;
}

}  // namespace detail

// Runs one experiment, writing CSVs, snapshots and a machine-parseable
// summary.txt (`check = pass|fail : value`) into the output directory.
inline ExperimentResult run_experiment(ExperimentConfig cfg) {
  validate_config(cfg);
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());

  ExperimentResult res;
  switch (cfg.kind) {
    case ExperimentKind::Evolve: res = detail::do_evolve(cfg, dir); break;
    case ExperimentKind::CircleTest: res = detail::do_circle_test(cfg, dir); break;
    case ExperimentKind::JunctionTest: res = detail::do_junction_test(cfg, dir); break;
    case ExperimentKind::Consistency: res = detail::do_consistency(cfg, dir); break;
    case ExperimentKind::OracleCheck: res = detail::do_oracle_check(cfg, dir); break;
    case ExperimentKind::ExcessScan: res = detail::do_excess_scan(cfg, dir); break;
  }
  detail::write_summary(dir, res);
  return res;
}

}  // namespace mbo
