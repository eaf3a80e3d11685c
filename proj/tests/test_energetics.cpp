#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mbo/diagnostics.hpp"
#include "mbo/energetics.hpp"
#include "mbo/initial.hpp"
#include "mbo/rng.hpp"
#include "mbo/scheme.hpp"

using namespace mbo;

namespace {

SchemeConfig make_cfg(const TorusGrid& g, const SurfaceTensionMatrix& sigma, double h,
                      double T = 0.0) {
  SchemeConfig cfg;
  cfg.sigma = sigma;
  cfg.grid = g;
  cfg.h = h;
  cfg.T = T;
  return cfg;
}

Partition random_partition(const TorusGrid& g, int P, std::mt19937_64& rng) {
  Partition p(g, P);
  for (auto& l : p.labels) l = static_cast<std::uint8_t>(rng() % P);
  return p;
}

// Wrapped discrete kernel value at lag zero by explicit mode summation;
// independent of the FFT path.
double kernel_at_zero(const TorusGrid& g, double h) {
  double sum = 0.0;
  if (g.dim == 1) {
    for (int m = 0; m < g.n; ++m) {
      double k = spectral::wavenumber(g, m);
      sum += std::exp(-0.5 * h * k * k);
    }
    return sum / g.n;
  }
  // 2-D
  double s1 = 0.0;
  for (int m = 0; m < g.n; ++m) {
    double k = spectral::wavenumber(g, m);
    s1 += std::exp(-0.5 * h * k * k);
  }
  return (s1 / g.n) * (s1 / g.n);
}

// quintic bump profile used to build compactly supported test fields
double bump(double dist, double inner, double outer) {
  if (dist <= inner) return 1.0;
  if (dist >= outer) return 0.0;
  double u = (dist - inner) / (outer - inner);
  return 1.0 + u * u * u * (-10.0 + u * (15.0 - 6.0 * u));
}

}  // namespace

TEST_CASE("single-phase configurations carry no energy") {
  TorusGrid g{2, 64, 1.0};
  Partition p(g, 3, 2);
  CHECK(approximate_energy(p, 1e-3, SurfaceTensionMatrix::uniform(3)) == 0.0);
}

TEST_CASE("stripe energy matches the flat-interface closed form") {
  // two interfaces of unit area: E = 2*c0*sigma*2
  TorusGrid g{2, 256, 1.0};
  Partition p = stripe_partition(g, 0.5);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  const double expect = 4.0 * kC0;
  for (double h : {2.5e-4, 1e-3}) {
    double E = approximate_energy(p, h, sigma);
    CHECK(E == Catch::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("disk energy approaches 2*c0*perimeter") {
  TorusGrid g{2, 256, 1.0};
  Partition p = disk_partition(g, 0.25);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  double E = approximate_energy(p, 2.5e-4, sigma);
  CHECK(E == Catch::Approx(2.0 * kC0 * 2.0 * M_PI * 0.25).epsilon(0.02));
}

TEST_CASE("two-phase energy equals the scalar form") {
  TorusGrid g{2, 96, 1.0};
  auto rng = make_stream(71, streams::kBlobs);
  Partition p = blob_partition(g, 2e-3, rng);
  double h = 5e-4, s12 = 1.37;
  auto sigma = SurfaceTensionMatrix::uniform(2, s12);
  double E = approximate_energy(p, h, sigma);
  ScalarField chi = indicator(p, 0);
  ScalarField u = gaussian_convolve(chi, h);
  double direct = 0.0;
  for (std::size_t x = 0; x < chi.values.size(); ++x)
    direct += (1.0 - chi.values[x]) * u.values[x];
  direct *= 2.0 * s12 * g.cell_volume() / std::sqrt(h);
  CHECK(E == Catch::Approx(direct).epsilon(1e-12));
}

TEST_CASE("energy is invariant under shifts, axis swaps and relabeling") {
  TorusGrid g{2, 64, 1.0};
  auto rng = make_stream(73, streams::kVoronoi);
  Partition p = voronoi_partition(g, 3, 5, rng);
  auto sigma = SurfaceTensionMatrix::validate(
      {{0.0, 1.0, 1.2}, {1.0, 0.0, 0.9}, {1.2, 0.9, 0.0}});
  double h = 1e-3;
  double E = approximate_energy(p, h, sigma);

  Partition shifted(g, 3);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      shifted.labels[g.index({i, j, 0})] = p.labels[g.index({i - 13, j - 7, 0})];
  CHECK(approximate_energy(shifted, h, sigma) == Catch::Approx(E).epsilon(1e-11));

  Partition swapped(g, 3);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      swapped.labels[g.index({i, j, 0})] = p.labels[g.index({j, i, 0})];
  CHECK(approximate_energy(swapped, h, sigma) == Catch::Approx(E).epsilon(1e-11));

  const std::array<int, 3> perm{1, 2, 0};
  std::vector<std::vector<double>> praw(3, std::vector<double>(3, 0.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) praw[perm[i]][perm[j]] = sigma(i, j);
  Partition relabeled(g, 3);
  for (std::size_t x = 0; x < p.size(); ++x)
    relabeled.labels[x] = static_cast<std::uint8_t>(perm[p.labels[x]]);
  CHECK(approximate_energy(relabeled, h, SurfaceTensionMatrix::validate(praw)) ==
        Catch::Approx(E).epsilon(1e-11));
}

TEST_CASE("metric term vanishes exactly on equal arguments") {
  TorusGrid g{2, 64, 1.0};
  auto rng = make_stream(79, streams::kVoronoi);
  Partition p = voronoi_partition(g, 3, 5, rng);
  double m = metric_term(p, p, 1e-3, SurfaceTensionMatrix::uniform(3));
  CHECK(std::abs(m) < 1e-14);
}

TEST_CASE("single flipped cell matches the mode-sum oracle") {
  TorusGrid g{2, 16, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(2);
  double h = 4e-3;
  Partition p(g, 2, 0), q(g, 2, 0);
  q.labels[37] = 1;
  double m = metric_term(q, p, h, sigma);
  double expect = (2.0 / std::sqrt(h)) * g.cell_volume() * kernel_at_zero(g, h);
  CHECK(m > 0.0);
  CHECK(m == Catch::Approx(expect).epsilon(1e-10));
}

TEST_CASE("metric term dominates the smoothed L2 distance") {
  TorusGrid g{1, 16, 1.0};
  auto sigma = SurfaceTensionMatrix::validate(
      {{0.0, 1.0, 1.2}, {1.0, 0.0, 0.9}, {1.2, 0.9, 0.0}});
  auto rng = make_stream(83, streams::kProperty);
  double h = 1e-2;
  for (int rep = 0; rep < 25; ++rep) {
    Partition a = random_partition(g, 3, rng);
    Partition b = random_partition(g, 3, rng);
    double m = metric_term(a, b, h, sigma);
    double rhs = 0.0;
    for (int i = 0; i < 3; ++i) {
      ScalarField w(g);
      for (std::size_t x = 0; x < w.values.size(); ++x)
        w.values[x] = (a.labels[x] == i ? 1.0 : 0.0) - (b.labels[x] == i ? 1.0 : 0.0);
      ScalarField v = gaussian_convolve(w, 0.5 * h);
      rhs += inner(v, v);
    }
    rhs *= sigma.sigma_lower() / std::sqrt(h);
    CHECK(m >= rhs - 1e-10);
  }
}

TEST_CASE("square root of the metric term obeys the triangle inequality") {
  TorusGrid g{1, 12, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(3);
  auto rng = make_stream(89, streams::kProperty);
  double h = 2e-2;
  for (int rep = 0; rep < 25; ++rep) {
    Partition a = random_partition(g, 3, rng);
    Partition b = random_partition(g, 3, rng);
    Partition c = random_partition(g, 3, rng);
    double dab = std::sqrt(std::max(0.0, metric_term(a, b, h, sigma)));
    double dbc = std::sqrt(std::max(0.0, metric_term(b, c, h, sigma)));
    double dac = std::sqrt(std::max(0.0, metric_term(a, c, h, sigma)));
    CHECK(dac <= dab + dbc + 1e-8);
  }
}

TEST_CASE("approximate monotonicity holds on disk and stripe") {
  TorusGrid g{2, 128, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(2);
  std::vector<double> h_list{4e-4, 1.6e-3, 6.4e-3};
  for (const Partition& p : {disk_partition(g, 0.25), stripe_partition(g, 0.5)}) {
    auto rep = approximate_monotonicity_check(p, h_list, sigma);
    CHECK(rep.pass);
  }
  Partition single(g, 2, 0);
  auto rep = approximate_monotonicity_check(single, h_list, sigma);
  CHECK(rep.pass);
}

TEST_CASE("localized energy with unit weight is the energy") {
  TorusGrid g{2, 96, 1.0};
  auto rng = make_stream(97, streams::kBlobs);
  Partition p = blob_partition(g, 2e-3, rng);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  ScalarField one(g, 1.0);
  double h = 5e-4;
  CHECK(localized_energy(p, one, h, sigma) ==
        Catch::Approx(approximate_energy(p, h, sigma)).epsilon(1e-12));
}

TEST_CASE("localized energy reduces to the scalar two-phase form") {
  TorusGrid g{2, 96, 1.0};
  auto rng = make_stream(103, streams::kBlobs);
  Partition p = blob_partition(g, 2e-3, rng);
  double h = 5e-4, s12 = 1.4;
  ScalarField zeta(g);
  for (std::size_t i = 0; i < zeta.values.size(); ++i) {
    auto x = g.cell_center(i);
    zeta.values[i] = 1.0 + 0.5 * std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[1]);
  }
  double full = localized_energy(p, zeta, h, SurfaceTensionMatrix::uniform(2, s12));
  double scalar = s12 * two_phase_localized_energy(indicator(p, 0), zeta, h);
  CHECK(full == Catch::Approx(scalar).epsilon(1e-12));
}

TEST_CASE("localized energy ignores regions far from interfaces") {
  TorusGrid g{2, 256, 1.0};
  Partition p = stripe_partition(g, 0.5);  // interfaces at x = 0.25, 0.75
  auto sigma = SurfaceTensionMatrix::uniform(2);
  double h = 2.5e-4;  // sqrt(h) ~ 0.0158
  // support at distance >= 0.14 > 8*sqrt(h) from both interfaces
  ScalarField zeta(g);
  for (std::size_t i = 0; i < zeta.values.size(); ++i) {
    auto x = g.cell_center(i);
    double dist = std::min(std::abs(g.wrap_delta(x[0] - 0.25)),
                           std::abs(g.wrap_delta(x[0] - 0.75)));
    zeta.values[i] = 1.0 - bump(dist, 0.14, 0.2);
  }
  CHECK(localized_energy(p, zeta, h, sigma) <= 1e-8);
}

TEST_CASE("localized energy of a flat patch matches the weighted length") {
  TorusGrid g{2, 256, 1.0};
  Partition p = stripe_partition(g, 0.5);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  double h = 2.5e-4;
  double r = 0.1;
  std::array<double, 3> c{0.25, 0.5, 0.0};  // on the interface
  ScalarField zeta(g);
  for (std::size_t i = 0; i < zeta.values.size(); ++i) {
    auto x = g.cell_center(i);
    zeta.values[i] = radial_cutoff(std::sqrt(g.periodic_distance2(x, c)), r);
  }
  // weighted interface length: integral of the quintic along the line = 3r
  double expect = 2.0 * kC0 * 3.0 * r;
  CHECK(localized_energy(p, zeta, h, sigma) == Catch::Approx(expect).epsilon(0.02));
}

TEST_CASE("energy dissipates along a shrinking disk run") {
  TorusGrid g{2, 128, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 6e-4, 1.2e-2);
  Trajectory traj = run(disk_partition(g, 0.3), cfg);
  auto rep = energy_dissipation_check(traj);
  CHECK(rep.pass);
  CHECK(rep.max_step_violation <= rep.tol);
  CHECK(rep.min_dissipation >= -1e-10);
  CHECK(traj.records.back().Eh < traj.initial_energy);
}

TEST_CASE("single-phase runs have exactly zero margins") {
  TorusGrid g{2, 64, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 2.5e-3, 1.25e-2);
  Trajectory traj = run(Partition(g, 2, 1), cfg);
  auto rep = energy_dissipation_check(traj);
  CHECK(rep.pass);
  CHECK(rep.max_step_violation == 0.0);
  CHECK(rep.cumulative_violation == 0.0);
  CHECK(rep.min_dissipation == 0.0);
}

TEST_CASE("stationary stripes neither dissipate nor drift") {
  TorusGrid g{2, 128, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 9e-4, 9e-3);
  Trajectory traj = run(stripe_partition(g, 0.5), cfg);
  auto rep = energy_dissipation_check(traj);
  CHECK(rep.pass);
  for (const auto& r : traj.records) {
    CHECK(r.Eh == Catch::Approx(traj.initial_energy).epsilon(1e-8));
    CHECK(std::abs(r.dissipation) < 1e-10);
  }
}

TEST_CASE("first variation vanishes for constant fields") {
  TorusGrid g{2, 128, 1.0};
  Partition p = disk_partition(g, 0.25);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  VectorField xi(g);
  for (std::size_t i = 0; i < xi.comp[0].values.size(); ++i) {
    xi.comp[0].values[i] = 0.8;
    xi.comp[1].values[i] = -0.4;
  }
  double dv = first_variation_energy(p, xi, 4e-4, sigma);
  CHECK(std::abs(dv) < 1e-8);
}

TEST_CASE("first variation is linear in the field") {
  TorusGrid g{2, 64, 1.0};
  auto rng = make_stream(101, streams::kBlobs);
  Partition p = blob_partition(g, 2e-3, rng);
  auto sigma = SurfaceTensionMatrix::uniform(2);
  double h = 1e-3;
  VectorField a(g), b(g);
  for (std::size_t i = 0; i < a.comp[0].values.size(); ++i) {
    auto x = g.cell_center(i);
    a.comp[0].values[i] = std::sin(2 * M_PI * x[1]);
    a.comp[1].values[i] = std::cos(2 * M_PI * x[0]);
    b.comp[0].values[i] = std::cos(4 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
    b.comp[1].values[i] = std::sin(4 * M_PI * x[1]);
  }
  VectorField comb(g);
  const double ca = 1.7, cb = -0.6;
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < comb.comp[k].values.size(); ++i)
      comb.comp[k].values[i] = ca * a.comp[k].values[i] + cb * b.comp[k].values[i];
  double da = first_variation_energy(p, a, h, sigma);
  double db = first_variation_energy(p, b, h, sigma);
  double dc = first_variation_energy(p, comb, h, sigma);
  CHECK(dc == Catch::Approx(ca * da + cb * db).margin(1e-10 * (1 + std::abs(dc))));
}

TEST_CASE("radial contraction matches a dilation finite difference") {
  TorusGrid g{2, 256, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(2);
  const double h = 4e-4, R = 0.25;
  Partition p = disk_partition(g, R);
  VectorField xi(g);
  std::array<double, 3> c{0.5, 0.5, 0.0};
  for (std::size_t i = 0; i < xi.comp[0].values.size(); ++i) {
    auto x = g.cell_center(i);
    double d = std::sqrt(g.periodic_distance2(x, c));
    double b = bump(d, 0.40, 0.49);
    xi.comp[0].values[i] = -g.wrap_delta(x[0] - c[0]) * b;
    xi.comp[1].values[i] = -g.wrap_delta(x[1] - c[1]) * b;
  }
  double dv = first_variation_energy(p, xi, h, sigma);
  // flow of xi contracts radially: d/ds E(disk(R e^{-s}))
  const double eps = 0.04;
  double Ep = approximate_energy(disk_partition(g, R * std::exp(eps)), h, sigma);
  double Em = approximate_energy(disk_partition(g, R * std::exp(-eps)), h, sigma);
  double fd = -(Ep - Em) / (2.0 * eps);
  CHECK(dv < 0.0);
  CHECK(dv == Catch::Approx(fd).epsilon(0.05));
}

TEST_CASE("flat interfaces are critical points of the energy") {
  TorusGrid g{2, 256, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(2);
  const double h = 4e-4;
  Partition p = stripe_partition(g, 0.5);
  VectorField xi(g);
  for (std::size_t i = 0; i < xi.comp[0].values.size(); ++i) {
    auto x = g.cell_center(i);
    xi.comp[0].values[i] = std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[1]);
    xi.comp[1].values[i] = std::cos(2 * M_PI * x[0]);
  }
  double dv = first_variation_energy(p, xi, h, sigma);
  double scale = approximate_energy(p, h, sigma);
  CHECK(std::abs(dv) <= 0.05 * scale);
}

TEST_CASE("metric variation vanishes at coincidence and matches a shift difference") {
  TorusGrid g{2, 256, 1.0};
  auto sigma = SurfaceTensionMatrix::uniform(2);
  const double h = 4e-4;
  Partition p = stripe_partition(g, 0.5);
  VectorField xi(g);
  for (std::size_t i = 0; i < xi.comp[0].values.size(); ++i) xi.comp[0].values[i] = 1.0;

  CHECK(std::abs(first_variation_metric(p, p, xi, h, sigma)) < 1e-10);

  // one-cell offset pair; oracle: cyclic-shift finite difference of the
  // metric term, exact on the lattice
  Partition prev(g, 2);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      prev.labels[g.index({i, j, 0})] = p.labels[g.index({i - 1, j, 0})];
  double dv = first_variation_metric(p, prev, xi, h, sigma);
  Partition plus(g, 2), minus(g, 2);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      plus.labels[g.index({i, j, 0})] = p.labels[g.index({i - 1, j, 0})];
      minus.labels[g.index({i, j, 0})] = p.labels[g.index({i + 1, j, 0})];
    }
  double fd = (metric_term(plus, prev, h, sigma) - metric_term(minus, prev, h, sigma)) /
              (2.0 * g.dx());
  CHECK(dv == Catch::Approx(fd).epsilon(0.1));
}

TEST_CASE("euler-lagrange residual is small at a scheme output") {
  TorusGrid g{2, 256, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 4e-4);
  Partition prev = disk_partition(g, 0.25);
  Partition next = threshold_step(prev, cfg);
  VectorField xi(g);
  for (std::size_t i = 0; i < xi.comp[0].values.size(); ++i) {
    auto x = g.cell_center(i);
    xi.comp[0].values[i] = std::sin(2 * M_PI * x[1]);
    xi.comp[1].values[i] = std::cos(2 * M_PI * x[0]);
  }
  double dE = first_variation_energy(next, xi, cfg.h, cfg.sigma);
  double dM = first_variation_metric(next, prev, xi, cfg.h, cfg.sigma);
  double scale = approximate_energy(next, cfg.h, cfg.sigma);
  CHECK(std::abs(dE + dM) <= 0.05 * scale);
}

TEST_CASE("dissipation measure of a stationary run vanishes") {
  TorusGrid g{2, 64, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 2.5e-3, 1e-2);
  cfg.snapshot_stride = 1;
  Trajectory traj = run(stripe_partition(g, 0.5), cfg);
  DissipationDensity mu = dissipation_measure(traj);
  CHECK(mu.total < 1e-12);
  for (double v : mu.density.values) CHECK(v >= -1e-15);
}

TEST_CASE("dissipation measure is controlled by the dissipated energy") {
  TorusGrid g{2, 128, 1.0};
  auto cfg = make_cfg(g, SurfaceTensionMatrix::uniform(2), 6e-4, 6e-3);
  cfg.snapshot_stride = 1;
  Trajectory traj = run(disk_partition(g, 0.3), cfg);
  DissipationDensity mu = dissipation_measure(traj);
  double diss_sum = 0.0;
  for (const auto& r : traj.records) diss_sum += r.dissipation;
  double bound = (2.0 / cfg.sigma.sigma_lower()) * diss_sum;
  CHECK(mu.total <= bound * (1.0 + 1e-6) + 1e-12);
  CHECK(mu.total <= 10.0 * traj.initial_energy);
}
