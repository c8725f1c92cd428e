#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "rbeam/analysis.hpp"
#include "rbeam/forward.hpp"
#include "rbeam/rng.hpp"

using namespace rbeam;

namespace {

Scene tiny_scene(int n, double r0) {
  return make_scene_constant_range({n, 1}, r0, RVector::Ones(n));
}

}  // namespace

TEST_CASE("single element at the origin, full-period range: all-ones row") {
  // d = 0 kills the lateral term; r0 = lambda wraps the range phase to -2*pi
  const ArrayGeometry g = make_array(1, 0.01);
  const ForwardOperator op =
      build_operator(g, make_excitation(0.1, 0.1, 1), tiny_scene(4, 0.1));
  for (int c = 0; c < 4; ++c) {
    CHECK(op.blocks[0](0, c).real() == doctest::Approx(1.0));
    CHECK(op.blocks[0](0, c).imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
  const ForwardOperator op2 =
      build_operator(g, make_excitation(0.05, 0.05, 1), tiny_scene(8, 0.05));
  for (int c = 0; c < 8; ++c)
    CHECK(op2.blocks[0](0, c).real() == doctest::Approx(1.0));
}

TEST_CASE("entries match a scalar per-entry oracle") {
  // M=2 elements at +-lambda/8, N=4, constant range r0
  const double lambda = 0.08;
  const double r0 = 20.0;
  const ArrayGeometry g = make_array(2, lambda / 4.0);  // positions -+ lambda/8
  const ExcitationSpec e = make_excitation(lambda, lambda, 1);
  const ForwardOperator op = build_operator(g, e, tiny_scene(4, r0));
  REQUIRE(op.rows() == 2);
  REQUIRE(op.cols() == 4);
  for (int m = 0; m < 2; ++m) {
    const double d = g.positions(m, 0);
    for (int n = 0; n < 4; ++n) {
      const double tau = -0.5 + n / 4.0;
      const Complex expected =
          std::exp(Complex(0, -kTwoPi * r0 / lambda)) *
          std::exp(Complex(0, -kTwoPi * 2.0 * d * tau / lambda));
      CHECK(std::abs(op.blocks[0](m, n) - expected) < 1e-12);
    }
  }
}

TEST_CASE("slab columns decode as pixel-major, range index slowest") {
  const ArrayGeometry g = make_array(3, 0.05);
  const ExcitationSpec e = make_excitation(0.1, 0.1, 1);
  const int n_pix = 4, n_r = 3;
  const double rmin = 10.0, rmax = 10.3;
  const Scene s = make_scene_slab({n_pix, 1}, n_r, rmin, rmax,
                                  RVector::Ones(n_pix * n_r));
  const ForwardOperator op = build_operator(g, e, s);
  REQUIRE(op.cols() == n_pix * n_r);
  for (int n = 0; n < op.cols(); ++n) {
    const int d_r = n / n_pix;
    const int pix = n % n_pix;
    const double tau = -0.5 + static_cast<double>(pix) / n_pix;
    const double range = rmin + d_r * (rmax - rmin) / n_r;
    for (int m = 0; m < 3; ++m) {
      const double d = g.positions(m, 0);
      const Complex expected =
          std::exp(Complex(0, -kTwoPi * (2.0 * d * tau + range) / 0.1));
      CHECK(std::abs(op.blocks[0](m, n) - expected) < 1e-12);
    }
  }
}

TEST_CASE("planar lateral phase uses both axes") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {2, 2}, 0.03);
  const ExcitationSpec e = make_excitation(0.06, 0.06, 1);
  const Scene s = make_scene_constant_range({4, 4}, 15.0,
                                            synthetic_pattern("disc", {4, 4}));
  const ForwardOperator op = build_operator(g, e, s);
  for (int m = 0; m < 4; ++m) {
    const double d1 = g.positions(m, 0), d2 = g.positions(m, 1);
    for (int p = 0; p < 16; ++p) {
      const double t1 = -0.5 + (p / 4) / 4.0;
      const double t2 = -0.5 + (p % 4) / 4.0;
      const Complex expected = std::exp(
          Complex(0, -kTwoPi * (15.0 + 2.0 * (d1 * t1 + d2 * t2)) / 0.06));
      CHECK(std::abs(op.blocks[0](m, p) - expected) < 1e-12);
    }
  }
}

TEST_CASE("unit modulus invariant") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {4, 4}, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 4);
  const Scene s = make_scene_constant_range({8, 8}, 20.0,
                                            synthetic_pattern("gauss", {8, 8}));
  const ForwardOperator op = build_operator(g, e, s);
  for (const CMatrix& b : op.blocks)
    CHECK((b.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("constant-range stacked rank equals the lambda_min block rank") {
  // nested row spaces: the broadband stack adds no effective dimensions
  const ArrayGeometry g = make_array(32, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 6);
  const Scene s = make_scene_constant_range({64, 1}, 20.0,
                                            synthetic_pattern("gauss", {64, 1}));
  const ForwardOperator op = build_operator(g, e, s);
  // 0.1 sits above the discretization-leakage plunge of unit-modulus blocks
  const double eps = 0.1;
  const int stacked = numerical_rank(singular_spectrum(op.stacked()), eps);
  const int at_min = numerical_rank(singular_spectrum(op.blocks.back()), eps);
  CHECK(std::abs(stacked - at_min) <= 2);
}

TEST_CASE("operator memory cap raises a typed error with the estimate") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {16, 16}, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 8);
  const Scene s = make_scene_constant_range({32, 32}, 20.0,
                                            synthetic_pattern("disc", {32, 32}));
  BuildOptions opts;
  opts.max_bytes = 1024;
  CHECK_THROWS_AS(build_operator(g, e, s, opts), OperatorTooLarge);
  try {
    build_operator(g, e, s, opts);
  } catch (const OperatorTooLarge& err) {
    CHECK(err.estimated_bytes ==
          std::size_t{256} * 8 * 1024 * sizeof(Complex));
    CHECK(err.cap_bytes == 1024);
  }
}

TEST_CASE("simulate: zero scene, noiseless equality, point reflector") {
  const ArrayGeometry g = make_array(8, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 3);
  Scene s = make_scene_constant_range({16, 1}, 20.0, RVector::Zero(16));
  const ForwardOperator op = build_operator(g, e, s);

  const MeasurementSet zero = simulate(op, s, NoiseSpec::none(), 1);
  CHECK(zero.y.norm() == 0.0);

  s.reflectivity = synthetic_pattern("gauss", {16, 1});
  const MeasurementSet clean = simulate(op, s, NoiseSpec::none(), 1);
  CHECK((clean.y - op.stacked() * s.reflectivity.cast<Complex>()).norm() == 0.0);
  CHECK(clean.noise.size() == 0);

  s.reflectivity = RVector::Zero(16);
  s.reflectivity[5] = 1.0;
  const MeasurementSet point = simulate(op, s, NoiseSpec::none(), 1);
  CHECK((point.y - op.stacked().col(5)).norm() == 0.0);
}

TEST_CASE("simulate rejects mismatched scenes") {
  const ArrayGeometry g = make_array(8, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 3);
  const Scene s = make_scene_constant_range({16, 1}, 20.0, RVector::Ones(16));
  const ForwardOperator op = build_operator(g, e, s);
  const Scene other = make_scene_constant_range({8, 1}, 20.0, RVector::Ones(8));
  CHECK_THROWS_AS(simulate(op, other, NoiseSpec::none(), 1), std::invalid_argument);
}

TEST_CASE("realized input SNR averages to the request over 10 seeds") {
  const ArrayGeometry g = make_array(16, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 5);
  const Scene s = make_scene_constant_range({32, 1}, 20.0,
                                            synthetic_pattern("gauss", {32, 1}));
  const ForwardOperator op = build_operator(g, e, s);
  const CVector signal = op.apply(s.reflectivity);
  double total_db = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MeasurementSet ms = simulate(op, s, NoiseSpec::gaussian(20.0), seed);
    REQUIRE(ms.noise.size() == op.rows());
    total_db += 20.0 * std::log10(signal.norm() / ms.noise.norm());
    CHECK((ms.y - signal - ms.noise).norm() < 1e-12 * signal.norm());
  }
  CHECK(std::abs(total_db / 10.0 - 20.0) < 0.1);
}

TEST_CASE("adjoint consistency <Ax,y> = <x,A^H y>") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {3, 3}, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 4);
  const Scene s = make_scene_constant_range({6, 6}, 20.0,
                                            synthetic_pattern("disc", {6, 6}));
  const ForwardOperator op = build_operator(g, e, s);
  const CMatrix a = op.stacked();
  rng::Generator gen(3);
  const CVector x = gen.complex_gaussian_vector(op.cols());
  const CVector y = gen.complex_gaussian_vector(op.rows());
  const Complex lhs = (a * x).dot(y);
  const Complex rhs = x.dot(a.adjoint() * y);
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("operator container round-trips exactly") {
  const ArrayGeometry g = make_array(ArrayKind::planar, {3, 2}, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 3);
  RVector depths(12);
  for (int i = 0; i < 12; ++i) depths[i] = 20.0 + 0.05 * i;
  const Scene s = make_scene_multi_depth({4, 3}, depths, RVector::Ones(12));
  const ForwardOperator op = build_operator(g, e, s);

  const std::string path = "roundtrip_test.rbop";
  save_operator(op, path);
  const ForwardOperator loaded = load_operator(path);
  std::remove(path.c_str());

  REQUIRE(loaded.block_count() == op.block_count());
  CHECK(loaded.scene_kind == op.scene_kind);
  CHECK(loaded.geometry.counts == op.geometry.counts);
  CHECK(loaded.excitation.wavelengths == op.excitation.wavelengths);
  CHECK((loaded.depths - op.depths).norm() == 0.0);
  for (int i = 0; i < op.block_count(); ++i)
    CHECK((loaded.blocks[i] - op.blocks[i]).norm() == 0.0);  // bit-exact

  // single-precision payloads round within float accuracy
  save_operator(op, path, Precision::complex64);
  const ForwardOperator narrow = load_operator(path);
  std::remove(path.c_str());
  CHECK((narrow.blocks[0] - op.blocks[0]).cwiseAbs().maxCoeff() < 1e-6);
}
