#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <vector>

#include "rbeam/analysis.hpp"
#include "rbeam/forward.hpp"
#include "rbeam/rng.hpp"
#include "rbeam/sketch.hpp"
#include "rbeam/solve.hpp"

using namespace rbeam;

namespace {

CMatrix random_complex(int rows, int cols, std::uint64_t seed) {
  rng::Generator gen(seed);
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = gen.complex_normal();
  return m;
}

CMatrix orthonormal_columns(int rows, int cols, std::uint64_t seed) {
  const CMatrix g = random_complex(rows, cols, seed);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(rows, cols);
}

}  // namespace

TEST_CASE("identity system returns the data") {
  const CMatrix a = CMatrix::Identity(5, 5);
  const CVector y = random_complex(5, 1, 1).col(0);
  const ReconResult r = least_squares(a, y);
  CHECK((r.x - y).norm() < 1e-12 * y.norm());
  CHECK(r.rank_used == 5);
}

TEST_CASE("consistent full-column-rank system recovers x0") {
  const CMatrix a = random_complex(12, 6, 2);
  const CVector x0 = random_complex(6, 1, 3).col(0);
  const ReconResult r = least_squares(a, a * x0);
  CHECK((r.x - x0).norm() < 1e-10 * x0.norm());
}

TEST_CASE("rank-1 system gives the minimum-norm solution") {
  // A = u v^T, y = u  ->  x = conj(v)/||v||^2
  rng::Generator gen(4);
  const CVector u = gen.complex_gaussian_vector(7).normalized();
  const CVector v = gen.complex_gaussian_vector(5);
  const CMatrix a = u * v.transpose();
  const ReconResult r = least_squares(a, u);
  const CVector expected = v.conjugate() / v.squaredNorm();
  CHECK((r.x - expected).norm() < 1e-10 * expected.norm());
}

TEST_CASE("least_squares rejects empty and mismatched input") {
  CHECK_THROWS_AS(least_squares(CMatrix(), CVector()), std::invalid_argument);
  CHECK_THROWS_AS(least_squares(CMatrix::Identity(3, 3), CVector::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("residual norm is recomputable") {
  const CMatrix a = random_complex(10, 4, 5);
  const CVector y = random_complex(10, 1, 6).col(0);
  const ReconResult r = least_squares(a, y);
  const double recomputed = (y - a * r.x).norm();
  CHECK(std::abs(recomputed - r.residual_norm) <= 1e-10 * std::max(1.0, recomputed));
}

TEST_CASE("tikhonov shrinks monotonically with delta") {
  const CMatrix a = random_complex(10, 6, 7);
  const CVector y = random_complex(10, 1, 8).col(0);
  double prev = tikhonov(a, y, 0.0).x.norm();
  for (double delta : {1e-3, 1e-1, 1e1, 1e3}) {
    const double cur = tikhonov(a, y, delta).x.norm();
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("tikhonov with delta = 0 degrades to least squares") {
  const CMatrix a = random_complex(9, 5, 9);
  const CVector y = random_complex(9, 1, 10).col(0);
  const ReconResult ls = least_squares(a, y);
  const ReconResult tik = tikhonov(a, y, 0.0);
  CHECK((ls.x - tik.x).norm() < 1e-10 * ls.x.norm());
}

TEST_CASE("scalar closed form: a=2, y=4, delta=1 -> 1.6") {
  CMatrix a(1, 1);
  a(0, 0) = 2.0;
  CVector y(1);
  y(0) = 4.0;
  const ReconResult r = tikhonov(a, y, 1.0);
  CHECK(r.x(0).real() == doctest::Approx(1.6));
  CHECK_THROWS_AS(tikhonov(a, y, -0.5), std::invalid_argument);
}

TEST_CASE("filter factors match the normal equations on a small system") {
  const CMatrix a = random_complex(8, 6, 11);
  const CVector y = random_complex(8, 1, 12).col(0);
  const double delta = 0.37;
  const ReconResult r = tikhonov(a, y, delta);
  const CMatrix lhs = a.adjoint() * a + delta * CMatrix::Identity(6, 6);
  const CVector direct = lhs.ldlt().solve(a.adjoint() * y);
  CHECK((r.x - direct).norm() < 1e-8 * direct.norm());
}

TEST_CASE("identity sketch reproduces the unsketched solves") {
  const ArrayGeometry g = make_array(8, 0.0375);
  const ExcitationSpec e = make_excitation(0.075, 0.15, 3);
  const Scene s = make_scene_constant_range({16, 1}, 20.0,
                                            synthetic_pattern("gauss", {16, 1}));
  const ForwardOperator op = build_operator(g, e, s);
  const MeasurementSet ms = simulate(op, s, NoiseSpec::gaussian(25.0), 3);
  const SketchOperator id = identity_sketch(8, 3);

  const ReconResult ls = least_squares(op.stacked(), ms.y);
  const ReconResult sls = sketched_least_squares(id, op, ms.y);
  CHECK((ls.x - sls.x).norm() < 1e-12 * ls.x.norm());

  const ReconResult tik = tikhonov(op.stacked(), ms.y, 0.25);
  const ReconResult stik = sketched_least_squares(id, op, ms.y, 0.25);
  CHECK((tik.x - stik.x).norm() < 1e-12 * tik.x.norm());
}

TEST_CASE("synthetic nested blocks: sketched LS matches full LS") {
  // A_i = C_i V^T with prescribed innovations d = (6, 3, 2, 1)
  const int n = 40, m = 12, k = 4;
  const std::vector<int> d{6, 3, 2, 1};
  const CMatrix v = orthonormal_columns(n, 12, 21);
  std::vector<CMatrix> blocks;
  int filled = 0;
  for (int i = 0; i < k; ++i) {
    filled += d[i];
    CMatrix ci = CMatrix::Zero(m, 12);
    ci.leftCols(filled) = random_complex(m, filled, 100 + i);
    blocks.push_back(ci * v.transpose());
  }
  CMatrix stacked(m * k, n);
  for (int i = 0; i < k; ++i) stacked.middleRows(i * m, m) = blocks[i];
  REQUIRE(numerical_rank(singular_spectrum(stacked)) == 12);

  rng::Generator gen(31);
  const CVector x0 = gen.complex_gaussian_vector(n);
  const CVector y = stacked * x0;
  const ReconResult full = least_squares(stacked, y);

  // l = d0 = 6 -> K*l = 24 >= rank
  const SketchOperator sk = gaussian_code(6, m, k, 17);
  const ReconResult sls = sketched_least_squares(sk, blocks, y);
  CHECK((sls.x - full.x).norm() < 1e-8 * full.x.norm());
}

TEST_CASE("solvers are deterministic") {
  const CMatrix a = random_complex(10, 7, 14);
  const CVector y = random_complex(10, 1, 15).col(0);
  const ReconResult r1 = least_squares(a, y);
  const ReconResult r2 = least_squares(a, y);
  CHECK((r1.x - r2.x).norm() == 0.0);
}

namespace {

struct TinyDepthProblem {
  std::vector<CMatrix> ops;  // per depth, rows x pixels
  std::vector<int> truth;
  CVector refl;
  CVector y;
};

TinyDepthProblem make_tiny(int pixels, int depths, int rows, std::uint64_t seed) {
  TinyDepthProblem p;
  rng::Generator gen(seed);
  for (int d = 0; d < depths; ++d) p.ops.push_back(random_complex(rows, pixels, seed + d));
  p.truth.resize(pixels);
  p.refl.resize(pixels);
  for (int i = 0; i < pixels; ++i) {
    p.truth[i] = static_cast<int>(gen.uniform_int(depths));
    p.refl[i] = Complex(0.4 + 0.6 * gen.uniform01(), 0.0);
  }
  p.y = CVector::Zero(rows);
  for (int i = 0; i < pixels; ++i) p.y += p.ops[p.truth[i]].col(i) * p.refl[i];
  return p;
}

}  // namespace

TEST_CASE("cosamp: single pixel with two candidate depths") {
  const TinyDepthProblem p = make_tiny(1, 2, 6, 41);
  const SketchOperator id = identity_sketch(3, 2);  // rows = 6 = K*M with K=2,M=3
  const ReconResult r = cosamp_depth(p.ops, id, p.y);
  CHECK(r.depth_labels == p.truth);
  CHECK(r.iterations <= 2);
  CHECK(std::abs(r.x(0) - p.refl(0)) < 1e-10);
  CHECK(r.converged);
}

TEST_CASE("cosamp matches exhaustive search on an 8-pixel 4-depth instance") {
  const int pixels = 8, depths = 4, m = 16, k = 2;
  const TinyDepthProblem p = make_tiny(pixels, depths, m * k, 43);
  const SketchOperator sk = gaussian_code(14, m, k, 97);
  const CVector z = apply_sketch(sk, p.y);
  const ReconResult r = cosamp_depth(p.ops, sk, z);

  // brute-force oracle over all 4^8 assignments, scored by sketched residual
  std::vector<CMatrix> sketched(depths);
  for (int d = 0; d < depths; ++d) {
    std::vector<CMatrix> rows_blocks;
    for (int i = 0; i < k; ++i) rows_blocks.push_back(p.ops[d].middleRows(i * m, m));
    sketched[d] = apply_sketch_blocks(sk, rows_blocks);
  }
  double best_res = 1e300;
  std::vector<int> best(pixels, -1);
  std::vector<int> assign(pixels, 0);
  const int total = 1 << (2 * pixels);  // 4^8
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int i = 0; i < pixels; ++i) {
      assign[i] = c & 3;
      c >>= 2;
    }
    CMatrix cols(z.size(), pixels);
    for (int i = 0; i < pixels; ++i) cols.col(i) = sketched[assign[i]].col(i);
    const double res = (z - cols * cols.colPivHouseholderQr().solve(z)).norm();
    if (res < best_res) {
      best_res = res;
      best = assign;
    }
  }
  CHECK(r.depth_labels == best);
  CHECK(best == p.truth);
  for (int i = 0; i < pixels; ++i) CHECK(std::abs(r.x(i) - p.refl(i)) < 1e-8);
}

TEST_CASE("cosamp with identity sketch equals the full-data run") {
  const TinyDepthProblem p = make_tiny(6, 3, 24, 47);
  const SketchOperator id = identity_sketch(12, 2);
  const ReconResult a = cosamp_depth(p.ops, id, p.y);
  const ReconResult b = cosamp_depth(p.ops, id, p.y);
  CHECK(a.depth_labels == b.depth_labels);
  CHECK((a.x - b.x).norm() == 0.0);  // deterministic, bit-exact
  CHECK(a.depth_labels == p.truth);
}

TEST_CASE("cosamp flags non-convergence instead of failing") {
  const TinyDepthProblem p = make_tiny(6, 3, 24, 53);
  // heavy noise and a single iteration: must return the best iterate
  rng::Generator gen(5);
  CVector y = p.y + 0.8 * gen.complex_gaussian_vector(24);
  const SketchOperator id = identity_sketch(12, 2);
  CosampOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  const ReconResult r = cosamp_depth(p.ops, id, y, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(static_cast<int>(r.depth_labels.size()) == 6);
}
