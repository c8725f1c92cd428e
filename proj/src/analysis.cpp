#include "rbeam/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rbeam/rng.hpp"
#include "rbeam/sketch.hpp"

namespace rbeam {

RVector singular_spectrum(const CMatrix& a) {
  if (a.size() == 0) throw std::invalid_argument("singular_spectrum: empty matrix");
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues();
}

RVector singular_spectrum(const RMatrix& a) {
  if (a.size() == 0) throw std::invalid_argument("singular_spectrum: empty matrix");
  Eigen::BDCSVD<RMatrix> svd(a);
  return svd.singularValues();
}

int numerical_rank(const RVector& spectrum, double eps_rel) {
  if (spectrum.size() == 0) return 0;
  const double cutoff = eps_rel * spectrum[0];
  if (spectrum[0] == 0.0) return 0;
  int rank = 0;
  while (rank < spectrum.size() && spectrum[rank] > cutoff) ++rank;
  return rank;
}

int effective_dimension(const RVector& spectrum) {
  if (spectrum.size() == 0 || spectrum[0] == 0.0) return 0;
  const double cutoff = spectrum[0] * 0.70710678118654752440;
  int count = 0;
  while (count < spectrum.size() && spectrum[count] >= cutoff) ++count;
  return count;
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::BDCSVD<CMatrix>(a).singularValues()(0);
}

int BlockQRFactorization::rank() const {
  return std::accumulate(d.begin(), d.end(), 0);
}

std::pair<int, int> BlockQRFactorization::basis_span(int j) const {
  int start = 0;
  for (int i = 0; i < j; ++i) start += d[i];
  return {start, d[j]};
}

BlockQRFactorization block_qr(const std::vector<CMatrix>& blocks, double eps_rel) {
  if (blocks.empty()) throw std::invalid_argument("block_qr: no blocks");
  const auto n = blocks.front().cols();
  for (const auto& b : blocks)
    if (b.cols() != n) throw std::invalid_argument("block_qr: unequal column counts");

  // one global scale so that fully-contained blocks report d_i = 0
  double scale = 0.0;
  for (const auto& b : blocks) scale = std::max(scale, spectral_norm(b));

  BlockQRFactorization f;
  f.d.reserve(blocks.size());
  CMatrix v(n, 0);
  for (const auto& b : blocks) {
    CMatrix residual = b;
    if (v.cols() > 0) residual -= (b * v) * v.adjoint();
    Eigen::BDCSVD<CMatrix> svd(residual, Eigen::ComputeThinV);
    const RVector& sv = svd.singularValues();
    int di = 0;
    while (di < sv.size() && sv[di] > eps_rel * scale) ++di;
    if (di > 0) {
      CMatrix fresh = svd.matrixV().leftCols(di);
      if (v.cols() > 0) {
        // one re-orthogonalization pass against the accumulated basis
        fresh -= v * (v.adjoint() * fresh);
        Eigen::HouseholderQR<CMatrix> qr(fresh);
        fresh = qr.householderQ() * CMatrix::Identity(n, di);
      }
      CMatrix grown(n, v.cols() + di);
      grown << v, fresh;
      v = std::move(grown);
    }
    f.d.push_back(di);
  }

  f.basis = std::move(v);
  const int r = f.rank();
  int total_rows = 0;
  for (const auto& b : blocks) total_rows += static_cast<int>(b.rows());
  f.coefficients = CMatrix::Zero(total_rows, r);
  f.row_offsets.resize(blocks.size());
  int row = 0, filled = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    f.row_offsets[i] = row;
    filled += f.d[i];
    if (filled > 0)
      f.coefficients.block(row, 0, blocks[i].rows(), filled) =
          blocks[i] * f.basis.leftCols(filled);
    row += static_cast<int>(blocks[i].rows());
  }
  return f;
}

namespace {

/// Orthonormal basis of row(y): right singular vectors above the cutoff.
CMatrix row_space_basis(const CMatrix& y, double eps_rel) {
  Eigen::BDCSVD<CMatrix> svd(y, Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv[rank] > eps_rel * sv[0]) ++rank;
  return svd.matrixV().leftCols(rank);
}

}  // namespace

double capture_error(const CMatrix& a, const CMatrix& y, double eps_rel) {
  if (a.cols() != y.cols())
    throw std::invalid_argument("capture_error: column count mismatch");
  const CMatrix basis = row_space_basis(y, eps_rel);
  CMatrix residual = a.adjoint();
  if (basis.cols() > 0) residual -= basis * (basis.adjoint() * residual);
  return spectral_norm(residual);
}

ConditionReport check_theorem1(const std::vector<CMatrix>& blocks, int l,
                               std::uint64_t seed, double eps_rel) {
  BlockQRFactorization f = block_qr(blocks, eps_rel);
  ConditionReport r;
  r.theorem = Theorem::innovation_bound;
  r.d = f.d;
  r.d0 = *std::max_element(f.d.begin(), f.d.end());
  r.sketch_l = l;
  r.tolerance = eps_rel;
  r.pass = l >= r.d0;

  const int m = static_cast<int>(blocks.front().rows());
  const int k = static_cast<int>(blocks.size());
  if (l >= 1 && l <= m) {
    SketchOperator phi = gaussian_code(l, m, k, seed);
    CMatrix stacked(static_cast<Eigen::Index>(m) * k, blocks.front().cols());
    for (int i = 0; i < k; ++i) stacked.middleRows(i * m, m) = blocks[i];
    r.empirical_capture_error =
        capture_error(stacked, apply_sketch_blocks(phi, blocks), eps_rel);
  }

  std::ostringstream msg;
  msg << "d0 = " << r.d0 << ", l = " << l << (r.pass ? " >= d0: sufficient" : " < d0")
      << " (condition is sufficient, not necessary)";
  if (r.empirical_capture_error >= 0.0)
    msg << "; sampled capture error " << r.empirical_capture_error;
  r.summary = msg.str();
  return r;
}

ConditionReport check_theorem2(const CMatrix& a1, const CMatrix& a2,
                               double cluster_tol, double containment_tol) {
  if (a1.cols() != a2.cols())
    throw std::invalid_argument("check_theorem2: column count mismatch");
  if (a1.rows() != a2.rows())
    throw std::invalid_argument("check_theorem2: row count mismatch");

  const double containment =
      capture_error(a1, a2) / std::max(spectral_norm(a1), 1e-300);
  if (containment > containment_tol)
    throw PreconditionFailed("check_theorem2: row(A1) not contained in row(A2), "
                             "relative containment error " +
                                 std::to_string(containment),
                             containment);
  const RVector sv2 = singular_spectrum(a2);
  if (numerical_rank(sv2) < a2.rows())
    throw PreconditionFailed("check_theorem2: A2 is not full row rank",
                             sv2[sv2.size() - 1] / sv2[0]);

  ConditionReport r;
  r.theorem = Theorem::two_block;
  r.containment_error = containment;
  r.tolerance = cluster_tol;

  const CMatrix u = a1 * a2.transpose();  // transposed convention, not adjoint
  Eigen::ComplexEigenSolver<CMatrix> eig(u);
  r.eigenvalues = eig.eigenvalues();
  const int n = static_cast<int>(u.rows());
  const double radius = r.eigenvalues.cwiseAbs().maxCoeff();

  if (radius == 0.0) {
    r.real_clusters = {{0.0, n}};
  } else {
    std::vector<double> reals;
    for (int i = 0; i < n; ++i)
      if (std::abs(r.eigenvalues[i].imag()) <= cluster_tol * radius)
        reals.push_back(r.eigenvalues[i].real());
    std::sort(reals.begin(), reals.end());
    for (double v : reals) {
      if (!r.real_clusters.empty() &&
          v - r.real_clusters.back().first <= cluster_tol * radius) {
        ++r.real_clusters.back().second;
      } else {
        r.real_clusters.emplace_back(v, 1);
      }
    }
  }
  for (const auto& [value, mult] : r.real_clusters)
    r.max_real_multiplicity = std::max(r.max_real_multiplicity, mult);
  r.pass = 2 * r.max_real_multiplicity <= n;

  std::ostringstream msg;
  msg << "max real-eigenvalue cluster multiplicity " << r.max_real_multiplicity
      << " vs n/2 = " << 0.5 * n << (r.pass ? ": pass" : ": fail")
      << " (containment error " << containment << ")";
  r.summary = msg.str();
  return r;
}

ConditionReport check_theorem3(const std::vector<CMatrix>& blocks, int l, int trials,
                               std::uint64_t seed, double eps_rel) {
  if (blocks.empty()) throw std::invalid_argument("check_theorem3: no blocks");
  if (trials < 1) throw std::invalid_argument("check_theorem3: trials >= 1");
  const int k = static_cast<int>(blocks.size());
  const int m = static_cast<int>(blocks.front().rows());
  const auto n = blocks.front().cols();
  for (const auto& b : blocks)
    if (b.rows() != m || b.cols() != n)
      throw std::invalid_argument("check_theorem3: ragged blocks");

  ConditionReport r;
  r.theorem = Theorem::many_block;
  r.tolerance = eps_rel;

  if (l == 0) {
    // widths from the stacked rank: r mod K blocks get floor(r/K)+1 rows
    CMatrix stacked(static_cast<Eigen::Index>(m) * k, n);
    for (int i = 0; i < k; ++i) stacked.middleRows(i * m, m) = blocks[i];
    const int rank = numerical_rank(singular_spectrum(stacked), eps_rel);
    const int base = rank / k, extra = rank % k;
    for (int i = 0; i < k; ++i) r.trial_widths.push_back(i < extra ? base + 1 : base);
  } else {
    if (l > m) throw std::invalid_argument("check_theorem3: l > block rows");
    r.trial_widths.assign(k, l);
  }
  const int lmax = *std::max_element(r.trial_widths.begin(), r.trial_widths.end());
  const int stacked_rows =
      std::accumulate(r.trial_widths.begin(), r.trial_widths.end(), 0);

  r.sigma_min_samples.resize(trials);
  for (int t = 0; t < trials; ++t) {
    rng::Generator gen(rng::derive_seed(seed, t));
    RMatrix g = gen.gaussian_matrix(m, lmax);
    Eigen::HouseholderQR<RMatrix> qr(g);
    RMatrix q = qr.householderQ() * RMatrix::Identity(m, lmax);  // orthonormal columns
    CMatrix mhat(stacked_rows, n);
    int row = 0;
    for (int i = 0; i < k; ++i) {
      const int w = r.trial_widths[i];
      if (w == 0) continue;
      // nested V_S: narrower blocks reuse the leading rows of the widest
      mhat.middleRows(row, w).noalias() =
          q.leftCols(w).transpose().cast<Complex>() * blocks[i];
      row += w;
    }
    const RVector sv = singular_spectrum(mhat);
    const double ratio = sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
    const bool full_row_rank = stacked_rows <= n && ratio > eps_rel;
    r.sigma_min_samples[t] = ratio;
    if (full_row_rank) ++r.passing_trials;
  }
  r.pass = r.passing_trials > 0;

  std::ostringstream msg;
  msg << r.passing_trials << "/" << trials << " trials produced a full-row-rank "
      << "stacked test matrix"
      << (r.pass ? "; condition certified by witness"
                 : "; no witness found (evidence, not proof, of failure)");
  r.summary = msg.str();
  return r;
}

std::vector<int> nestedness_profile(const ForwardOperator& op, double eps_rel) {
  const int k = op.block_count();
  if (k < 1) throw std::invalid_argument("nestedness_profile: empty operator");
  std::vector<int> increments;
  increments.reserve(k);
  int previous = 0;
  CMatrix stack;
  for (int i = 0; i < k; ++i) {  // storage order is longest wavelength first
    CMatrix grown(stack.rows() + op.blocks[i].rows(), op.cols());
    if (stack.rows() > 0) grown.topRows(stack.rows()) = stack;
    grown.bottomRows(op.blocks[i].rows()) = op.blocks[i];
    stack = std::move(grown);
    const int rank = numerical_rank(singular_spectrum(stack), eps_rel);
    increments.push_back(rank - previous);
    previous = rank;
  }
  return increments;
}

RVector randomized_spectrum(const std::vector<CMatrix>& blocks, int sketch_size,
                            int power_iters, std::uint64_t seed) {
  if (blocks.empty()) throw std::invalid_argument("randomized_spectrum: no blocks");
  const auto n = blocks.front().cols();
  int total_rows = 0;
  for (const auto& b : blocks) total_rows += static_cast<int>(b.rows());
  sketch_size = std::min<int>(sketch_size, std::min<Eigen::Index>(total_rows, n));

  rng::Generator gen(seed);
  CMatrix omega(n, sketch_size);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < sketch_size; ++j) omega(i, j) = gen.complex_normal();

  auto apply_stacked = [&](const CMatrix& x) {
    CMatrix y(total_rows, x.cols());
    int row = 0;
    for (const auto& b : blocks) {
      y.middleRows(row, b.rows()).noalias() = b * x;
      row += static_cast<int>(b.rows());
    }
    return y;
  };
  auto apply_adjoint = [&](const CMatrix& y) {
    CMatrix x = CMatrix::Zero(n, y.cols());
    int row = 0;
    for (const auto& b : blocks) {
      x.noalias() += b.adjoint() * y.middleRows(row, b.rows());
      row += static_cast<int>(b.rows());
    }
    return x;
  };

  CMatrix y = apply_stacked(omega);
  for (int q = 0; q < power_iters; ++q) y = apply_stacked(apply_adjoint(y));
  Eigen::HouseholderQR<CMatrix> qr(y);
  CMatrix qbasis = qr.householderQ() * CMatrix::Identity(total_rows, sketch_size);
  const CMatrix projected = apply_adjoint(qbasis).adjoint();  // Q^H A
  return Eigen::BDCSVD<CMatrix>(projected).singularValues();
}

}  // namespace rbeam
