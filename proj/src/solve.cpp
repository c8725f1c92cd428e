#include "rbeam/solve.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbeam {

namespace {

struct SvdSolve {
  CVector x;
  int rank = 0;
};

/// Core SVD solve with filter factors. delta = 0 uses 1/sigma on the kept
/// spectrum; delta > 0 uses sigma/(sigma^2 + delta).
SvdSolve svd_solve(const CMatrix& a, const CVector& y, double delta, double eps_rel) {
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv[rank] > eps_rel * sv[0]) ++rank;
  CVector coeffs = svd.matrixU().leftCols(rank).adjoint() * y;
  for (int i = 0; i < rank; ++i) {
    const double s = sv[i];
    coeffs[i] *= delta > 0.0 ? s / (s * s + delta) : 1.0 / s;
  }
  return {svd.matrixV().leftCols(rank) * coeffs, rank};
}

ReconResult finish(SvdSolve&& solve, const CMatrix& a, const CVector& y,
                   SolverKind kind, double delta, double eps_rel) {
  ReconResult r;
  r.x = std::move(solve.x);
  r.rank_used = solve.rank;
  r.solver = kind;
  r.delta = delta;
  r.rank_eps = eps_rel;
  r.residual_norm = (y - a * r.x).norm();
  r.imag_norm = r.x.imag().norm();
  return r;
}

}  // namespace

ReconResult least_squares(const CMatrix& a, const CVector& y, double eps_rel) {
  if (a.size() == 0) throw std::invalid_argument("least_squares: empty matrix");
  if (y.size() != a.rows())
    throw std::invalid_argument("least_squares: measurement length mismatch");
  return finish(svd_solve(a, y, 0.0, eps_rel), a, y, SolverKind::least_squares, 0.0,
                eps_rel);
}

ReconResult tikhonov(const CMatrix& a, const CVector& y, double delta, double eps_rel) {
  if (a.size() == 0) throw std::invalid_argument("tikhonov: empty matrix");
  if (delta < 0.0) throw std::invalid_argument("tikhonov: delta must be >= 0");
  if (y.size() != a.rows())
    throw std::invalid_argument("tikhonov: measurement length mismatch");
  return finish(svd_solve(a, y, delta, eps_rel), a, y, SolverKind::tikhonov, delta,
                eps_rel);
}

ReconResult sketched_least_squares(const SketchOperator& sketch,
                                   const std::vector<CMatrix>& blocks,
                                   const CVector& y, double delta, double eps_rel) {
  if (delta < 0.0)
    throw std::invalid_argument("sketched_least_squares: delta must be >= 0");
  const CMatrix sketched = apply_sketch_blocks(sketch, blocks);
  const CVector z = apply_sketch(sketch, y);
  ReconResult r = finish(svd_solve(sketched, z, delta, eps_rel), sketched, z,
                         SolverKind::sketched_least_squares, delta, eps_rel);
  return r;
}

ReconResult sketched_least_squares(const SketchOperator& sketch,
                                   const ForwardOperator& op, const CVector& y,
                                   double delta, double eps_rel) {
  return sketched_least_squares(sketch, op.blocks, y, delta, eps_rel);
}

ReconResult cosamp_depth(const std::vector<CMatrix>& per_depth_operators,
                         const SketchOperator& sketch, const CVector& z,
                         const CosampOptions& options) {
  if (per_depth_operators.empty())
    throw std::invalid_argument("cosamp_depth: empty dictionary");
  const int n_depths = static_cast<int>(per_depth_operators.size());
  const int pixels = static_cast<int>(per_depth_operators.front().cols());
  for (const auto& d : per_depth_operators)
    if (d.cols() != pixels || d.rows() != per_depth_operators.front().rows())
      throw std::invalid_argument("cosamp_depth: ragged dictionary");
  if (z.size() != sketch.output_size())
    throw std::invalid_argument("cosamp_depth: sketched measurement length mismatch");
  if (per_depth_operators.front().rows() != sketch.input_size())
    throw std::invalid_argument("cosamp_depth: dictionary rows != sketch input size");
  if (options.max_iter < 1)
    throw std::invalid_argument("cosamp_depth: max_iter must be >= 1");

  // sketch the dictionary once
  std::vector<CMatrix> sk_ops(n_depths);
  for (int d = 0; d < n_depths; ++d) {
    std::vector<CMatrix> blocks(sketch.repeat_count);
    const int m = sketch.cols_per_block;
    for (int i = 0; i < sketch.repeat_count; ++i)
      blocks[i] = per_depth_operators[d].middleRows(static_cast<Eigen::Index>(i) * m, m);
    sk_ops[d] = apply_sketch_blocks(sketch, blocks);
  }

  const int shortlist = std::min(std::max(options.shortlist, 1), n_depths);
  std::vector<int> labels(pixels, -1);
  CVector coeffs;                     // aligned with `labels`
  CVector residual = z;
  double prev_residual_norm = residual.norm();
  const double z_norm = std::max(z.norm(), 1e-300);

  auto solve_support = [&](const std::vector<std::pair<int, int>>& atoms) {
    CMatrix cols(z.size(), atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j)
      cols.col(j) = sk_ops[atoms[j].second].col(atoms[j].first);
    return std::make_pair(svd_solve(cols, z, 0.0, options.rank_eps), std::move(cols));
  };

  ReconResult result;
  result.solver = SolverKind::cosamp_depth;
  result.rank_eps = options.rank_eps;
  result.converged = false;

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    // proxy energies per (pixel, depth) atom
    RMatrix scores(n_depths, pixels);
    for (int d = 0; d < n_depths; ++d)
      scores.row(d) = (sk_ops[d].adjoint() * residual).cwiseAbs().transpose();

    // per pixel: top `shortlist` depths, merged with the current support
    std::vector<std::pair<int, int>> atoms;  // (pixel, depth)
    atoms.reserve(pixels * (shortlist + 1));
    std::vector<int> order(n_depths);
    for (int p = 0; p < pixels; ++p) {
      for (int d = 0; d < n_depths; ++d) order[d] = d;
      std::partial_sort(order.begin(), order.begin() + shortlist, order.end(),
                        [&](int a, int b) { return scores(a, p) > scores(b, p); });
      for (int s = 0; s < shortlist; ++s) atoms.emplace_back(p, order[s]);
      if (labels[p] >= 0 &&
          std::none_of(order.begin(), order.begin() + shortlist,
                       [&](int d) { return d == labels[p]; }))
        atoms.emplace_back(p, labels[p]);
    }

    // least squares on the merged support, then prune to one depth per pixel
    auto [merged_solve, merged_cols] = solve_support(atoms);
    std::vector<double> best_mag(pixels, -1.0);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const auto [p, d] = atoms[j];
      const double mag = std::abs(merged_solve.x[j]);
      if (mag > best_mag[p]) {
        best_mag[p] = mag;
        labels[p] = d;
      }
    }

    // re-solve on the pruned support for the residual update
    std::vector<std::pair<int, int>> pruned(pixels);
    for (int p = 0; p < pixels; ++p) pruned[p] = {p, labels[p]};
    auto [pruned_solve, pruned_cols] = solve_support(pruned);
    coeffs = pruned_solve.x;
    residual = z - pruned_cols * coeffs;
    result.rank_used = pruned_solve.rank;

    const double res_norm = residual.norm();
    if (std::abs(prev_residual_norm - res_norm) < options.tol * z_norm ||
        res_norm < options.tol * z_norm) {
      prev_residual_norm = res_norm;
      result.converged = true;
      ++iter;
      break;
    }
    prev_residual_norm = res_norm;
  }

  result.iterations = iter;
  result.x = coeffs;
  result.depth_labels = labels;
  result.residual_norm = prev_residual_norm;
  result.imag_norm = coeffs.imag().norm();
  return result;
}

}  // namespace rbeam
