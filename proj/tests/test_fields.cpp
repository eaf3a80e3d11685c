#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "mbo/convolve.hpp"
#include "mbo/grid.hpp"
#include "mbo/initial.hpp"
#include "mbo/io.hpp"
#include "mbo/rng.hpp"

using namespace mbo;

namespace {

ScalarField random_field(const TorusGrid& g, std::uint64_t seed, double lo = -1.0,
                         double hi = 1.0) {
  auto rng = make_stream(seed, streams::kProperty);
  std::uniform_real_distribution<double> uni(lo, hi);
  ScalarField f(g);
  for (auto& v : f.values) v = uni(rng);
  return f;
}

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("convolution fixes constants") {
  TorusGrid g{2, 64, 1.0};
  ScalarField f(g, 0.7);
  ScalarField u = gaussian_convolve(f, 1e-3);
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v - 0.7));
  CHECK(m < 1e-13);
}

TEST_CASE("nonpositive variance is rejected") {
  TorusGrid g{2, 16, 1.0};
  ScalarField f(g, 0.0);
  CHECK_THROWS_AS(gaussian_convolve(f, 0.0), NonpositiveVariance);
  CHECK_THROWS_AS(gaussian_convolve(f, -1e-4), NonpositiveVariance);
}

TEST_CASE("stripe values mirror around an edge-aligned interface") {
  // width 0.5 on n=128 puts both interfaces on cell edges; reflection
  // symmetry forces u(left) + u(right) = 1 across each interface.
  TorusGrid g{2, 128, 1.0};
  Partition p = stripe_partition(g, 0.5);
  ScalarField u = gaussian_convolve(indicator(p, 0), 4e-4);
  int row = 64;
  // interface at x0 = 0.25 sits between cells 31 and 32 along axis 0
  double left = u.values[g.index({31, row, 0})];
  double right = u.values[g.index({32, row, 0})];
  CHECK(left + right == Catch::Approx(1.0).margin(1e-10));
  CHECK(std::abs(left - 0.5) == Catch::Approx(std::abs(right - 0.5)).margin(1e-10));
}

TEST_CASE("semigroup property of the kernel") {
  TorusGrid g{2, 128, 1.0};
  auto rng = make_stream(3, streams::kBlobs);
  Partition p = blob_partition(g, 2e-3, rng);
  ScalarField f = indicator(p, 0);
  double h = 6e-4;
  ScalarField twice = gaussian_convolve(gaussian_convolve(f, h / 2), h / 2);
  ScalarField once = gaussian_convolve(f, h);
  CHECK(max_abs_diff(twice, once) < 1e-12);
}

TEST_CASE("convolution conserves the integral") {
  TorusGrid g{2, 96, 2.0};
  ScalarField f = random_field(g, 5);
  double before = integral(f);
  double after = integral(gaussian_convolve(f, 3e-3));
  CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, std::abs(before)));
}

TEST_CASE("discrete maximum principle on indicator input") {
  // a resolved variance: sqrt(h) >= 3 dx keeps the wrapped kernel positive
  // to far below the 1e-12 tolerance
  TorusGrid g{2, 128, 1.0};
  auto rng = make_stream(9, streams::kBlobs);
  Partition p = blob_partition(g, 1e-3, rng);
  ScalarField u = gaussian_convolve(indicator(p, 0), 6e-4);
  double lo = 1e300, hi = -1e300;
  for (double v : u.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -1e-12);
  CHECK(hi <= 1.0 + 1e-12);
}

TEST_CASE("interface sharpness decays with the variance") {
  TorusGrid g{2, 128, 1.0};
  Partition p = disk_partition(g, 0.25);
  ScalarField u1 = gaussian_convolve(indicator(p, 0), 2e-4);
  ScalarField u2 = gaussian_convolve(indicator(p, 0), 8e-4);
  // statistic over interface cells: max |u - 1/2| should not increase in h
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < u1.values.size(); ++i) {
    if (std::abs(u1.values[i] - 0.5) > 0.45) continue;  // off-interface
    m1 = std::max(m1, std::abs(u1.values[i] - 0.5));
    m2 = std::max(m2, std::abs(u2.values[i] - 0.5));
  }
  CHECK(m2 <= m1 + 1e-9);
}

TEST_CASE("gradient of a constant vanishes") {
  TorusGrid g{2, 64, 1.0};
  ScalarField f(g, 2.5);
  VectorField grad = gradient_convolve(f, 1e-3);
  for (int k = 0; k < 2; ++k) {
    double m = 0.0;
    for (double v : grad.comp[k].values) m = std::max(m, std::abs(v));
    CHECK(m < 1e-12);
  }
}

TEST_CASE("gradient acts exactly on a Fourier mode") {
  TorusGrid g{2, 128, 2.0};
  const double L = g.length;
  ScalarField f(g);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = std::sin(2.0 * M_PI * g.cell_center(i)[0] / L);
  double h = 1e-3;
  VectorField grad = gradient_convolve(f, h);
  double k1 = 2.0 * M_PI / L;
  double damp = std::exp(-0.5 * h * k1 * k1);
  double worst0 = 0.0, worst1 = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double expect = k1 * std::cos(2.0 * M_PI * g.cell_center(i)[0] / L) * damp;
    worst0 = std::max(worst0, std::abs(grad.comp[0].values[i] - expect));
    worst1 = std::max(worst1, std::abs(grad.comp[1].values[i]));
  }
  CHECK(worst0 < 1e-10);
  CHECK(worst1 < 1e-12);
}

TEST_CASE("gradient components integrate to zero") {
  TorusGrid g{2, 96, 1.0};
  ScalarField f = random_field(g, 21);
  VectorField grad = gradient_convolve(f, 5e-4);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(integral(grad.comp[k])) < 1e-12);
  VectorField xi(g);
  xi.comp[0] = random_field(g, 22);
  xi.comp[1] = random_field(g, 23);
  CHECK(std::abs(integral(divergence(xi))) < 1e-11);
}

TEST_CASE("indicators are exact and sum to one") {
  TorusGrid g{2, 32, 1.0};
  Partition p(g, 3, 1);  // single phase 1
  ScalarField one = indicator(p, 1);
  ScalarField zero = indicator(p, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(one.values[i] == 1.0);
    CHECK(zero.values[i] == 0.0);
  }
  CHECK_THROWS_AS(indicator(p, 3), PhaseOutOfRange);
  CHECK_THROWS_AS(indicator(p, -1), PhaseOutOfRange);

  auto rng = make_stream(1, streams::kProperty);
  for (auto& l : p.labels) l = static_cast<std::uint8_t>(rng() % 3);
  ScalarField sum(g);
  for (int i = 0; i < 3; ++i) {
    ScalarField chi = indicator(p, i);
    for (std::size_t x = 0; x < sum.values.size(); ++x) {
      CHECK((chi.values[x] == 0.0 || chi.values[x] == 1.0));
      sum.values[x] += chi.values[x];
    }
  }
  for (double v : sum.values) CHECK(v == 1.0);
}

TEST_CASE("symmetric difference volume counts flipped cells twice") {
  TorusGrid g{2, 32, 1.0};
  Partition p(g, 2, 0), q(g, 2, 0);
  CHECK(symmetric_difference_volume(p, q) == 0.0);

  Partition comp(g, 2, 1);
  CHECK(symmetric_difference_volume(p, comp) == Catch::Approx(2.0 * 1.0));

  Partition flip = p;
  flip.labels[5] = 1;
  CHECK(symmetric_difference_volume(p, flip) ==
        Catch::Approx(2.0 * g.cell_volume()).epsilon(1e-14));

  TorusGrid g2{2, 64, 1.0};
  Partition other(g2, 2, 0);
  CHECK_THROWS_AS(symmetric_difference_volume(p, other), GridMismatch);
}

TEST_CASE("label snapshot format round-trips") {
  TorusGrid g{2, 32, 1.5};
  auto rng = make_stream(2, streams::kProperty);
  Partition p(g, 5);
  for (auto& l : p.labels) l = static_cast<std::uint8_t>(rng() % 5);
  auto dir = std::filesystem::temp_directory_path() / "mbo_fields_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "p.mbolbl").string();
  write_mbolbl1(path, p);
  Partition q = read_mbolbl1(path);
  CHECK(q.grid == p.grid);
  CHECK(q.num_phases == p.num_phases);
  CHECK(q.labels == p.labels);
}

TEST_CASE("pgm header carries the phase count as maxval") {
  TorusGrid g{2, 16, 1.0};
  Partition p(g, 3, 2);
  auto dir = std::filesystem::temp_directory_path() / "mbo_fields_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "p.pgm").string();
  write_pgm(path, p);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w, hgt, maxval;
  in >> magic >> w >> hgt >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 16);
  CHECK(hgt == 16);
  CHECK(maxval == 3);
}

TEST_CASE("1-D and 3-D convolutions conserve mass too") {
  TorusGrid g1{1, 64, 1.0};
  ScalarField f1 = random_field(g1, 31);
  CHECK(std::abs(integral(gaussian_convolve(f1, 1e-3)) - integral(f1)) < 1e-12);

  TorusGrid g3{3, 16, 1.0};
  ScalarField f3 = random_field(g3, 32);
  CHECK(std::abs(integral(gaussian_convolve(f3, 1e-3)) - integral(f3)) < 1e-12);
}
