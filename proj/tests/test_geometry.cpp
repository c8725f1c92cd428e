#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rbeam/geometry.hpp"

using namespace rbeam;

TEST_CASE("planar array 40x40 at half the smallest wavelength") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {40, 40}, 0.0375);
  CHECK(g.element_count() == 1600);
  CHECK(g.aperture(0) == doctest::Approx(1.4625));
  CHECK(g.aperture(1) == doctest::Approx(1.4625));
  // centered: positions span [-D/2, D/2]
  CHECK(g.positions.col(0).minCoeff() == doctest::Approx(-1.4625 / 2));
  CHECK(g.positions.col(0).maxCoeff() == doctest::Approx(1.4625 / 2));
}

TEST_CASE("single element array is degenerate") {
  const ArrayGeometry g = make_array(1, 0.01);
  CHECK(g.element_count() == 1);
  CHECK(g.aperture(0) == 0.0);
  CHECK(g.positions(0, 0) == 0.0);
}

TEST_CASE("213-element linear array") {
  const ArrayGeometry g = make_array(213, 0.0375);
  CHECK(g.element_count() == 213);
  CHECK(g.aperture(0) == doctest::Approx(7.95));
}

TEST_CASE("array spacing is uniform") {
  const ArrayGeometry g = make_array(17, 0.021);
  for (int i = 1; i < 17; ++i)
    CHECK(g.positions(i, 0) - g.positions(i - 1, 0) == doctest::Approx(0.021));
}

TEST_CASE("make_array rejects bad input") {
  CHECK_THROWS_AS(make_array(0, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(make_array(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_array(4, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_array(ArrayKind::planar, {4, 0}, 0.01), std::invalid_argument);
}

TEST_CASE("excitation band 7.5cm..15cm with 15 wavelengths") {
  const ExcitationSpec e = make_excitation(0.075, 0.15, 15);
  CHECK(e.count() == 15);
  CHECK(e.lambda_max() == 0.15);
  CHECK(e.lambda_min() == 0.075);
  // stored strictly descending
  for (int i = 1; i < e.count(); ++i) CHECK(e.wavelengths[i] < e.wavelengths[i - 1]);
  // frequency-uniform: 1/lambda spaced evenly
  const double df = 1.0 / e.wavelengths[1] - 1.0 / e.wavelengths[0];
  for (int i = 1; i < e.count(); ++i)
    CHECK(1.0 / e.wavelengths[i] - 1.0 / e.wavelengths[i - 1] == doctest::Approx(df));
}

TEST_CASE("single-wavelength band") {
  const ExcitationSpec e = make_excitation(0.075, 0.075, 1);
  CHECK(e.count() == 1);
  CHECK(e.wavelengths[0] == 0.075);
}

TEST_CASE("25 wavelengths for 2-4 GHz") {
  const double lmin = kSpeedOfLight / 4e9, lmax = kSpeedOfLight / 2e9;
  const ExcitationSpec e = make_excitation(lmin, lmax, 25);
  CHECK(e.count() == 25);
  CHECK(e.lambda_min() == doctest::Approx(lmin));
  CHECK(e.lambda_max() == doctest::Approx(lmax));
}

TEST_CASE("wavelength-uniform rule spaces lambda evenly") {
  const ExcitationSpec e =
      make_excitation(0.075, 0.15, 6, SpacingRule::uniform_in_wavelength);
  for (int i = 1; i < 6; ++i)
    CHECK(e.wavelengths[i - 1] - e.wavelengths[i] == doctest::Approx(0.015));
}

TEST_CASE("make_excitation rejects inconsistent bounds") {
  CHECK_THROWS_AS(make_excitation(0.2, 0.1, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_excitation(-0.1, 0.1, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_excitation(0.1, 0.2, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_excitation(0.1, 0.2, 1), std::invalid_argument);
}

TEST_CASE("constant-range scene echoes its inputs") {
  const RVector img = synthetic_pattern("disc", {32, 32});
  const Scene s = make_scene_constant_range({32, 32}, 20.0, img);
  CHECK(s.pixel_count() == 1024);
  CHECK(s.column_count() == 1024);
  CHECK(s.depths.size() == 1024);
  CHECK(s.depths[0] == 20.0);
  CHECK(s.tau(0, 0) == -0.5);
  CHECK(s.tau(0, 16) == 0.0);
  // tau grid stays inside [-0.5, 0.5)
  CHECK(s.tau(0, 31) < 0.5);
}

TEST_CASE("multi-depth scene keeps its per-pixel profile") {
  RVector depths(16);
  for (int i = 0; i < 16; ++i) depths[i] = 20.0 + 0.1 * i;
  const Scene s = make_scene_multi_depth({4, 4}, depths, RVector::Ones(16));
  CHECK(s.kind == SceneKind::delta_multi_depth);
  CHECK(s.depths[5] == doctest::Approx(20.5));
}

TEST_CASE("slab scene with five layers over 15cm") {
  const RVector img = RVector::Ones(256 * 5);
  const Scene s = make_scene_slab({16, 16}, 5, 20.0, 20.15, img);
  CHECK(s.range_count == 5);
  CHECK(s.column_count() == 256 * 5);
  CHECK(s.range_max - s.range_min == doctest::Approx(0.15));
}

TEST_CASE("scene validation rejects inconsistent dimensions") {
  CHECK_THROWS_AS(make_scene_constant_range({4, 4}, 20.0, RVector::Ones(15)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_scene_slab({4, 4}, 2, 21.0, 20.0, RVector::Ones(32)),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      make_scene_multi_depth({2, 2}, -RVector::Ones(4), RVector::Ones(4)),
      std::invalid_argument);
}

TEST_CASE("synthetic patterns") {
  const RVector point = synthetic_pattern("point", {8, 8});
  CHECK(point.sum() == 1.0);
  const RVector disc = synthetic_pattern("disc", {16, 16});
  CHECK(disc.maxCoeff() == 1.0);
  CHECK(disc.minCoeff() == 0.0);
  CHECK_THROWS_AS(synthetic_pattern("nope", {8, 8}), std::invalid_argument);
}

TEST_CASE("fourier grid of a single element at the origin") {
  const ArrayGeometry g = make_array(1, 0.01);
  const ExcitationSpec e = make_excitation(0.05, 0.1, 3);
  const FourierSampleGrid grid = fourier_grid(g, e);
  CHECK(grid.samples.rows() == 3);
  for (int r = 0; r < 3; ++r) CHECK(grid.samples(r, 1) == 0.0);  // omega_tau = 0
}

TEST_CASE("fourier grid matches direct evaluation") {
  // three elements at -0.05, 0, 0.05 m and lambda = 0.1 m
  const ArrayGeometry g = make_array(3, 0.05);
  const ExcitationSpec e = make_excitation(0.1, 0.1, 1);
  const FourierSampleGrid grid = fourier_grid(g, e);
  REQUIRE(grid.samples.rows() == 3);
  CHECK(grid.samples(0, 0) == doctest::Approx(10.0));  // omega_r = 1/lambda
  CHECK(grid.samples(0, 1) == doctest::Approx(-1.0));
  CHECK(grid.samples(1, 1) == doctest::Approx(0.0));
  CHECK(grid.samples(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("halving the wavelength doubles lateral frequencies") {
  const ArrayGeometry g = make_array(5, 0.02);
  const ExcitationSpec e1 = make_excitation(0.1, 0.1, 1);
  const ExcitationSpec e2 = make_excitation(0.05, 0.05, 1);
  const FourierSampleGrid g1 = fourier_grid(g, e1);
  const FourierSampleGrid g2 = fourier_grid(g, e2);
  for (int r = 0; r < 5; ++r)
    CHECK(g2.samples(r, 1) == doctest::Approx(2.0 * g1.samples(r, 1)));
}

TEST_CASE("grid size and aperture bound invariants") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {6, 4}, 0.03);
  const ExcitationSpec e = make_excitation(0.06, 0.12, 5);
  const FourierSampleGrid grid = fourier_grid(g, e);
  CHECK(grid.samples.rows() == g.element_count() * e.count());
  for (int r = 0; r < grid.samples.rows(); ++r) {
    // |omega_tau| <= D/lambda per axis, exactly
    CHECK(std::abs(grid.samples(r, 1)) <= grid.lateral_bound(r, 0) + 1e-15);
    CHECK(std::abs(grid.samples(r, 2)) <= grid.lateral_bound(r, 1) + 1e-15);
  }
}
